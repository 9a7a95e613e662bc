/*
 Copyright 2026 The sqrtcs Authors

 Licensed under the Apache License, Version 2.0 (the "License");
 you may not use this file except in compliance with the License.
 You may obtain a copy of the License at

      https://www.apache.org/licenses/LICENSE-2.0

 Unless required by applicable law or agreed to in writing, software
 distributed under the License is distributed on an "AS IS" BASIS,
 WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 See the License for the specific language governing permissions and
 limitations under the License.
*/

#include "sqrtcs/conic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <istream>
#include <ostream>
#include <string>

namespace sqrtcs
{
    AffineExpr &AffineExpr::operator+=(const AffineExpr &o)
    {
        terms.insert(terms.end(), o.terms.begin(), o.terms.end());
        constant += o.constant;
        return *this;
    }

    AffineExpr &AffineExpr::operator*=(double s)
    {
        for (auto &t : terms)
            t.coef *= s;
        constant *= s;
        return *this;
    }

    double AffineExpr::eval(const Vec &x) const
    {
        double v = constant;
        for (const auto &t : terms)
            v += t.coef * x(t.var);
        return v;
    }

    int ConicProgram::add_variables(int count)
    {
        if (count < 0)
            throw InvalidParameter("add_variables: negative count");
        const int first = num_vars_;
        num_vars_ += count;
        objective_.conservativeResize(num_vars_);
        objective_.tail(count).setZero();
        return first;
    }

    void ConicProgram::check_expr(const AffineExpr &e) const
    {
        for (const auto &t : e.terms)
            if (t.var < 0 || t.var >= num_vars_)
                throw LayoutMismatch("affine row references variable " + std::to_string(t.var) + " of " +
                                     std::to_string(num_vars_));
        if (!std::isfinite(e.constant))
            throw InvalidParameter("affine row has a non-finite constant");
    }

    void ConicProgram::add_objective(int var, double coef)
    {
        if (var < 0 || var >= num_vars_)
            throw LayoutMismatch("objective references an unknown variable");
        objective_(var) += coef;
    }

    void ConicProgram::add_equality(AffineExpr e)
    {
        check_expr(e);
        equalities_.push_back(std::move(e));
    }

    void ConicProgram::add_nonneg(AffineExpr e)
    {
        check_expr(e);
        nonneg_.push_back(std::move(e));
    }

    void ConicProgram::rescale_variables(const Vec &scale)
    {
        if (scale.size() != num_vars_)
            throw LayoutMismatch("rescale_variables: one factor per variable expected");
        if (!(scale.array() > 0.0).all() || !scale.allFinite())
            throw InvalidParameter("rescale_variables: factors must be positive and finite");
        auto apply = [&](AffineExpr &e) {
            for (auto &t : e.terms)
                t.coef *= scale(t.var);
        };
        for (auto &e : equalities_)
            apply(e);
        for (auto &e : nonneg_)
            apply(e);
        for (auto *blocks : {&socs_, &psds_})
            for (auto &b : *blocks)
                for (auto &e : b.rows)
                    apply(e);
        for (auto &b : bounds_)
        {
            b.lo /= scale(b.var);
            b.hi /= scale(b.var);
        }
        objective_ = objective_.cwiseProduct(scale);
    }

    void ConicProgram::scale_objective(double c)
    {
        if (!(c > 0.0) || !std::isfinite(c))
            throw InvalidParameter("scale_objective: factor must be positive and finite");
        objective_ *= c;
        objective_constant_ *= c;
    }

    void ConicProgram::add_bound(int var, double lo, double hi)
    {
        if (var < 0 || var >= num_vars_)
            throw LayoutMismatch("bound references an unknown variable");
        if (!(lo <= hi))
            throw InvalidParameter("bound with lo > hi");
        bounds_.push_back({var, lo, hi});
    }

    void ConicProgram::add_soc(std::vector<AffineExpr> rows)
    {
        if (rows.empty())
            throw InvalidParameter("second-order cone needs at least one row");
        for (const auto &r : rows)
            check_expr(r);
        socs_.push_back({ConeKind::Soc, 0, std::move(rows)});
    }

    void ConicProgram::add_psd(int order, std::vector<AffineExpr> lower)
    {
        if (order < 1 || static_cast<int>(lower.size()) != tril_size(order))
            throw InvalidParameter("PSD block needs order*(order+1)/2 lower-triangle rows");
        for (const auto &r : lower)
            check_expr(r);
        psds_.push_back({ConeKind::Psd, order, std::move(lower)});
    }

    double ConicProgram::objective_value(const Vec &x) const
    {
        return objective_.dot(x) + objective_constant_;
    }

    double ConicProgram::max_violation(const Vec &x) const
    {
        if (x.size() != num_vars_)
            throw LayoutMismatch("max_violation: wrong point length");
        double worst = 0.0;
        for (const auto &e : equalities_)
            worst = std::max(worst, std::abs(e.eval(x)));
        for (const auto &e : nonneg_)
            worst = std::max(worst, -e.eval(x));
        for (const auto &b : bounds_)
            worst = std::max({worst, b.lo - x(b.var), x(b.var) - b.hi});
        for (const auto &c : socs_)
        {
            double tail = 0.0;
            for (std::size_t i = 1; i < c.rows.size(); ++i)
                tail += std::pow(c.rows[i].eval(x), 2);
            worst = std::max(worst, std::sqrt(tail) - c.rows[0].eval(x));
        }
        for (const auto &c : psds_)
        {
            Mat m(c.order, c.order);
            for (int j = 0; j < c.order; ++j)
                for (int i = j; i < c.order; ++i)
                    m(i, j) = m(j, i) = c.rows[tril_index(c.order, i, j)].eval(x);
            Eigen::SelfAdjointEigenSolver<Mat> es(m, Eigen::EigenvaluesOnly);
            worst = std::max(worst, -es.eigenvalues()(0));
        }
        return worst;
    }

    namespace
    {
        std::string fmt(double v)
        {
            char buf[40];
            std::snprintf(buf, sizeof buf, "%.17g", v);
            return buf;
        }

        double parse_double(std::istream &is)
        {
            std::string tok;
            if (!(is >> tok))
                throw InvalidSpec("conic text: unexpected end of input");
            char *end = nullptr;
            const double v = std::strtod(tok.c_str(), &end);
            if (end == tok.c_str() || *end != '\0')
                throw InvalidSpec("conic text: bad number '" + tok + "'");
            return v;
        }

        long parse_int(std::istream &is)
        {
            long v;
            if (!(is >> v))
                throw InvalidSpec("conic text: expected an integer");
            return v;
        }

        void expect(std::istream &is, const std::string &word)
        {
            std::string tok;
            if (!(is >> tok) || tok != word)
                throw InvalidSpec("conic text: expected '" + word + "', got '" + tok + "'");
        }

        void write_block(std::ostream &os, const char *kind, int order, const std::vector<AffineExpr> &rows)
        {
            std::size_t nnz = 0;
            for (const auto &r : rows)
                nnz += r.terms.size();
            os << "block " << kind << ' ' << order << ' ' << rows.size() << ' ' << nnz << '\n';
            os << "constants";
            for (const auto &r : rows)
                os << ' ' << fmt(r.constant);
            os << '\n';
            for (std::size_t i = 0; i < rows.size(); ++i)
                for (const auto &t : rows[i].terms)
                    os << i << ' ' << t.var << ' ' << fmt(t.coef) << '\n';
        }

        std::vector<AffineExpr> read_rows(std::istream &is, long rows, long nnz)
        {
            std::vector<AffineExpr> out(rows);
            expect(is, "constants");
            for (auto &r : out)
                r.constant = parse_double(is);
            for (long i = 0; i < nnz; ++i)
            {
                const long row = parse_int(is);
                const long var = parse_int(is);
                const double coef = parse_double(is);
                if (row < 0 || row >= rows)
                    throw InvalidSpec("conic text: row index out of range");
                out[row].terms.push_back({static_cast<int>(var), coef});
            }
            return out;
        }
    } // namespace

    void ConicProgram::write(std::ostream &os) const
    {
        os << "sqrtcs-conic 1\n";
        os << "variables " << num_vars_ << '\n';
        std::size_t nnz = 0;
        for (int j = 0; j < num_vars_; ++j)
            nnz += objective_(j) != 0.0;
        os << "objective " << nnz << ' ' << fmt(objective_constant_) << '\n';
        for (int j = 0; j < num_vars_; ++j)
            if (objective_(j) != 0.0)
                os << j << ' ' << fmt(objective_(j)) << '\n';
        write_block(os, "zero", 0, equalities_);
        write_block(os, "nonneg", 0, nonneg_);
        for (const auto &c : socs_)
            write_block(os, "soc", 0, c.rows);
        for (const auto &c : psds_)
            write_block(os, "psd", c.order, c.rows);
        os << "bounds " << bounds_.size() << '\n';
        for (const auto &b : bounds_)
            os << b.var << ' ' << fmt(b.lo) << ' ' << fmt(b.hi) << '\n';
        os << "end\n";
    }

    ConicProgram ConicProgram::read(std::istream &is)
    {
        expect(is, "sqrtcs-conic");
        if (parse_int(is) != 1)
            throw InvalidSpec("conic text: unsupported version");
        ConicProgram prog;
        expect(is, "variables");
        prog.add_variables(static_cast<int>(parse_int(is)));
        expect(is, "objective");
        const long obj_nnz = parse_int(is);
        prog.objective_constant_ = parse_double(is);
        for (long i = 0; i < obj_nnz; ++i)
        {
            const long var = parse_int(is);
            prog.add_objective(static_cast<int>(var), parse_double(is));
        }
        std::string tok;
        while (is >> tok)
        {
            if (tok == "end")
                return prog;
            if (tok == "bounds")
            {
                const long count = parse_int(is);
                for (long i = 0; i < count; ++i)
                {
                    const long var = parse_int(is);
                    const double lo = parse_double(is);
                    const double hi = parse_double(is);
                    prog.add_bound(static_cast<int>(var), lo, hi);
                }
                continue;
            }
            if (tok != "block")
                throw InvalidSpec("conic text: unexpected token '" + tok + "'");
            std::string kind;
            is >> kind;
            const long order = parse_int(is);
            const long rows = parse_int(is);
            const long nnz = parse_int(is);
            auto block = read_rows(is, rows, nnz);
            if (kind == "zero")
                for (auto &r : block)
                    prog.add_equality(std::move(r));
            else if (kind == "nonneg")
                for (auto &r : block)
                    prog.add_nonneg(std::move(r));
            else if (kind == "soc")
                prog.add_soc(std::move(block));
            else if (kind == "psd")
                prog.add_psd(static_cast<int>(order), std::move(block));
            else
                throw InvalidSpec("conic text: unknown block kind '" + kind + "'");
        }
        throw InvalidSpec("conic text: missing 'end'");
    }

    const char *to_string(SolveStatus s)
    {
        switch (s)
        {
        case SolveStatus::Optimal:
            return "optimal";
        case SolveStatus::AlmostOptimal:
            return "almost_optimal";
        case SolveStatus::PrimalInfeasible:
            return "primal_infeasible";
        case SolveStatus::DualInfeasible:
            return "dual_infeasible";
        case SolveStatus::MaxIterations:
            return "max_iterations";
        case SolveStatus::NumericalError:
            return "numerical_error";
        default:
            return "other";
        }
    }

    BackendSettings BackendSettings::from_env()
    {
        BackendSettings s;
        if (const char *env = std::getenv("SQRTCS_BACKEND_TOL"))
        {
            char *end = nullptr;
            const double tol = std::strtod(env, &end);
            if (end == env || *end != '\0' || !(tol > 0.0) || !std::isfinite(tol))
                throw ConfigError(std::string("SQRTCS_BACKEND_TOL must be a positive number, got '") + env + "'");
            s.tol_feas = s.tol_gap_abs = s.tol_gap_rel = tol;
            s.tol_reduced = std::max(s.tol_reduced, tol);
        }
        return s;
    }

    std::unique_ptr<ConicBackend> make_default_backend()
    {
        return make_clarabel_backend(BackendSettings::from_env());
    }

} // namespace sqrtcs
