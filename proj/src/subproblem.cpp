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

#include "sqrtcs/subproblem.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "sqrtcs/error.hpp"

namespace sqrtcs
{
    namespace
    {
        constexpr double kDiagClip = 1e-9;

        std::vector<AffineExpr> atom_rows(const DecisionLayout &layout, const Atom &atom)
        {
            const int off = layout.offset(atom.block);
            std::vector<AffineExpr> rows(atom.map.rows());
            for (Eigen::Index r = 0; r < atom.map.rows(); ++r)
            {
                rows[r].constant = atom.offset.size() > 0 ? atom.offset(r) : 0.0;
                for (Eigen::Index c = 0; c < atom.map.cols(); ++c)
                    rows[r].add(off + static_cast<int>(c), atom.map(r, c));
            }
            return rows;
        }

        // a ||y||^2 <= u as ||(u - h, y)|| <= u + h with h = 1 / (4a).
        void add_square_epigraph(ConicProgram &prog, const AffineExpr &u, double a, const std::vector<AffineExpr> &y)
        {
            const double h = 0.25 / a;
            std::vector<AffineExpr> rows;
            rows.reserve(y.size() + 2);
            AffineExpr head = u;
            head.constant += h;
            AffineExpr second = u;
            second.constant -= h;
            rows.push_back(std::move(head));
            rows.push_back(std::move(second));
            rows.insert(rows.end(), y.begin(), y.end());
            prog.add_soc(std::move(rows));
        }

        // sigma_max(M) <= t with M = reshape(y, p, q) as [[t I, M], [M^T, t I]] >= 0.
        void add_spectral_epigraph(ConicProgram &prog, const AffineExpr &t, const std::vector<AffineExpr> &y, int p,
                                   int q)
        {
            const int order = p + q;
            std::vector<AffineExpr> lower(tril_size(order));
            for (int i = 0; i < order; ++i)
                lower[tril_index(order, i, i)] = t;
            for (int j = 0; j < p; ++j)
                for (int i = p; i < order; ++i)
                    lower[tril_index(order, i, j)] = y[j + (i - p) * p];
            prog.add_psd(order, std::move(lower));
        }

        void add_norm_epigraph(ConicProgram &prog, const AffineExpr &t, const std::vector<AffineExpr> &y)
        {
            std::vector<AffineExpr> rows;
            rows.reserve(y.size() + 1);
            rows.push_back(t);
            rows.insert(rows.end(), y.begin(), y.end());
            prog.add_soc(std::move(rows));
        }

        AffineExpr linear_atom_expr(const DecisionLayout &layout, const Atom &atom)
        {
            if (atom.map.rows() != 1)
                throw LayoutMismatch("linear atom must have a single output row");
            AffineExpr e = atom_rows(layout, atom).front();
            e *= atom.coef;
            return e;
        }

        // Lowers descriptors into `prog` and records a magnitude for every auxiliary it creates.
        class Lowering
        {
        public:
            Lowering(ConicProgram &prog, const DecisionLayout &layout, std::vector<double> &scale)
                : prog_(prog), layout_(layout), scale_(scale)
            {
            }

            int aux(double magnitude)
            {
                const int t = prog_.add_variables(1);
                scale_.push_back(magnitude > 0.0 && std::isfinite(magnitude) ? magnitude : 1.0);
                return t;
            }

            // Typical size of an affine row when every variable sits at its scale.
            double magnitude(const std::vector<AffineExpr> &rows) const
            {
                double big = 0.0;
                for (const auto &r : rows)
                {
                    double v = std::abs(r.constant);
                    for (const auto &t : r.terms)
                        v += std::abs(t.coef) * scale_[t.var];
                    big = std::max(big, v);
                }
                return big;
            }

            // atom <= t, for a nonlinear atom with unit coefficient.
            void atom_epigraph(const Atom &atom, const AffineExpr &t)
            {
                const auto y = atom_rows(layout_, atom);
                switch (atom.kind)
                {
                case AtomKind::Norm2:
                    add_norm_epigraph(prog_, t, y);
                    break;
                case AtomKind::SquaredNorm:
                    add_square_epigraph(prog_, t, 1.0, y);
                    break;
                case AtomKind::Spectral:
                    add_spectral_epigraph(prog_, t, y, atom.out_rows, atom.out_cols);
                    break;
                case AtomKind::Linear:
                    throw LayoutMismatch("linear atom has no epigraph");
                }
            }

            double atom_magnitude(const Atom &atom) const
            {
                const double m = magnitude(atom_rows(layout_, atom));
                return atom.kind == AtomKind::SquaredNorm ? m * m : m;
            }

            void objective(const ConvexTermDescriptor &d)
            {
                prog_.add_objective_constant(d.constant);
                for (const auto &atom : d.atoms)
                {
                    if (atom.coef == 0.0)
                        continue;
                    if (atom.kind == AtomKind::Linear)
                    {
                        const AffineExpr e = linear_atom_expr(layout_, atom);
                        for (const auto &t : e.terms)
                            prog_.add_objective(t.var, t.coef);
                        prog_.add_objective_constant(e.constant);
                        continue;
                    }
                    if (atom.coef < 0.0)
                        throw LayoutMismatch("objective term '" + d.label + "' has a concave atom");
                    const bool squared = atom.kind == AtomKind::SquaredNorm;
                    const int t = aux(atom_magnitude(atom) * (squared ? atom.coef : 1.0));
                    AffineExpr te;
                    te.add(t, 1.0);
                    if (squared)
                        add_square_epigraph(prog_, te, atom.coef, atom_rows(layout_, atom));
                    else
                        atom_epigraph(atom, te);
                    prog_.add_objective(t, squared ? 1.0 : atom.coef);
                }
            }

            void constraint(const ConvexTermDescriptor &d)
            {
                AffineExpr lin(d.constant);
                std::vector<const Atom *> nonlinear;
                for (const auto &atom : d.atoms)
                {
                    if (atom.coef == 0.0)
                        continue;
                    if (atom.kind == AtomKind::Linear)
                        lin += linear_atom_expr(layout_, atom);
                    else if (atom.coef < 0.0)
                        throw LayoutMismatch("constraint '" + d.label + "' has a concave atom");
                    else
                        nonlinear.push_back(&atom);
                }
                AffineExpr slack = lin;
                slack *= -1.0; // -(linear part) >= sum of atoms
                if (nonlinear.empty())
                {
                    prog_.add_nonneg(std::move(slack));
                    return;
                }
                if (nonlinear.size() == 1)
                {
                    slack *= 1.0 / nonlinear.front()->coef;
                    atom_epigraph(*nonlinear.front(), slack);
                    return;
                }
                for (const Atom *atom : nonlinear)
                {
                    const int t = aux(atom_magnitude(*atom));
                    AffineExpr te;
                    te.add(t, 1.0);
                    atom_epigraph(*atom, te);
                    slack.add(t, -atom->coef);
                }
                prog_.add_nonneg(std::move(slack));
            }

        private:
            ConicProgram &prog_;
            const DecisionLayout &layout_;
            std::vector<double> &scale_;
        };
    } // namespace

    DecisionLayout::DecisionLayout(int n_, int m_, int horizon_) : n(n_), m(m_), horizon(horizon_)
    {
        if (n < 1 || m < 1 || horizon < 1)
            throw InvalidDimension("DecisionLayout: n, m and N must be positive");
    }

    int DecisionLayout::offset(const BlockRef &ref) const
    {
        const int k = ref.node;
        const bool control = ref.kind == BlockKind::Feedforward || ref.kind == BlockKind::Gain;
        if (k < 0 || k > horizon || (control && k == horizon))
            throw LayoutMismatch("block node " + std::to_string(k) + " outside the horizon");
        switch (ref.kind)
        {
        case BlockKind::Mean:
            return mu(k);
        case BlockKind::SqrtCov:
            return s(k);
        case BlockKind::Feedforward:
            return v(k);
        case BlockKind::Gain:
            return l(k);
        }
        return -1;
    }

    Subproblem assemble(const CsProblem &problem, const Iterate &ref, const std::vector<SqrtStepLinearization> &linz,
                        const std::vector<Vec> &lambda, double w, double r, const Mat &d_x, Exec exec)
    {
        const int n = problem.n();
        const int m = problem.m();
        const int nh = problem.horizon();
        const int nt = tril_size(n);
        if (static_cast<int>(ref.mu.size()) != nh + 1 || static_cast<int>(ref.s.size()) != nh + 1 ||
            static_cast<int>(ref.v.size()) != nh || static_cast<int>(ref.l.size()) != nh)
            throw LayoutMismatch("assemble: reference iterate does not match the horizon");
        if (static_cast<int>(linz.size()) != nh)
            throw LayoutMismatch("assemble: expected one linearization per step");
        if (static_cast<int>(lambda.size()) != nh)
            throw LayoutMismatch("assemble: expected one multiplier block per step");
        for (const auto &lk : lambda)
            if (lk.size() != nt)
                throw LayoutMismatch("assemble: multiplier block has the wrong length");
        if (d_x.rows() != n || d_x.cols() != n)
            throw LayoutMismatch("assemble: D_X must be n x n");
        if (!(w > 0.0) || !(r > 0.0))
            throw InvalidParameter("assemble: penalty weight and trust radius must be positive");

        Subproblem sub;
        sub.layout = DecisionLayout(n, m, nh);
        const DecisionLayout &lay = sub.layout;
        ConicProgram &prog = sub.program;
        prog.add_variables(lay.base_count());

        // Boundary conditions.
        const Vec s0 = vectril(cholesky(problem.p_init));
        for (int i = 0; i < n; ++i)
        {
            AffineExpr e(-problem.mu_init(i));
            e.add(lay.mu(0) + i, 1.0);
            prog.add_equality(std::move(e));
            AffineExpr f(-problem.mu_fin(i));
            f.add(lay.mu(nh) + i, 1.0);
            prog.add_equality(std::move(f));
        }
        for (int t = 0; t < nt; ++t)
        {
            AffineExpr e(-s0(t));
            e.add(lay.s(0) + t, 1.0);
            prog.add_equality(std::move(e));
        }
        for (int k = 1; k <= nh; ++k)
            for (int i = 0; i < n; ++i)
                prog.add_bound(lay.s(k) + tril_index(n, i, i), 0.0, std::numeric_limits<double>::infinity());

        // Mean dynamics.
        for (int k = 0; k < nh; ++k)
        {
            const Mat &a = problem.sys.a[k];
            const Mat &b = problem.sys.b[k];
            for (int i = 0; i < n; ++i)
            {
                AffineExpr e;
                e.add(lay.mu(k + 1) + i, 1.0);
                for (int j = 0; j < n; ++j)
                    e.add(lay.mu(k) + j, -a(i, j));
                for (int j = 0; j < m; ++j)
                    e.add(lay.v(k) + j, -b(i, j));
                prog.add_equality(std::move(e));
            }
        }

        // Linearized square-root dynamics with slack.
        const auto jac = jacobians_all(problem.sys, linz, exec);
        for (int k = 0; k < nh; ++k)
        {
            const Vec sk = vectril(ref.s[k]);
            const Vec lk = ref.l[k].reshaped();
            const Vec c = -vectril(linz[k].s_next_ref) + jac[k].js * sk + jac[k].jl * lk;
            for (int t = 0; t < nt; ++t)
            {
                AffineExpr e(c(t));
                e.add(lay.s(k + 1) + t, 1.0);
                for (int e2 = 0; e2 < nt; ++e2)
                    e.add(lay.s(k) + e2, -jac[k].js(t, e2));
                for (int f = 0; f < m * n; ++f)
                    e.add(lay.l(k) + f, -jac[k].jl(t, f));
                e.add(lay.xi(k) + t, -1.0);
                prog.add_equality(std::move(e));
            }
        }

        // Trust region on the varying n x n block of X_{k+1}.
        for (int k = 0; k < nh; ++k)
        {
            const Mat da = d_x * problem.sys.a[k];
            const Mat db = d_x * problem.sys.b[k];
            const Mat x_ref = da * ref.s[k] + db * ref.l[k];
            for (int j = 0; j < n; ++j)
            {
                for (int i = 0; i < n; ++i)
                {
                    AffineExpr e(-x_ref(i, j));
                    for (int p = j; p < n; ++p)
                        e.add(lay.s(k) + tril_index(n, p, j), da(i, p));
                    for (int q = 0; q < m; ++q)
                        e.add(lay.l(k) + q + j * m, db(i, q));
                    AffineExpr upper = e;
                    upper *= -1.0;
                    upper.constant += r;
                    e.constant += r;
                    prog.add_nonneg(std::move(upper));
                    prog.add_nonneg(std::move(e));
                }
            }
        }

        // Variable magnitudes: state rows by diag(D_X), control rows by the columns of D_X B_k.
        std::vector<double> scale(lay.base_count(), 1.0);
        for (int k = 0; k <= nh; ++k)
        {
            for (int i = 0; i < n; ++i)
            {
                const double d = d_x(i, i) > 0.0 ? 1.0 / d_x(i, i) : 1.0;
                scale[lay.mu(k) + i] = d;
                for (int j = 0; j <= i; ++j)
                {
                    scale[lay.s(k) + tril_index(n, i, j)] = d;
                    if (k < nh)
                        scale[lay.xi(k) + tril_index(n, i, j)] = d;
                }
            }
            if (k == nh)
                break;
            const Mat db = d_x * problem.sys.b[k];
            for (int q = 0; q < m; ++q)
            {
                const double big = db.col(q).cwiseAbs().maxCoeff();
                const double d = big > 0.0 ? 1.0 / big : 1.0;
                scale[lay.v(k) + q] = d;
                for (int j = 0; j < n; ++j)
                    scale[lay.l(k) + q + j * m] = d;
            }
        }

        // Cost, chance constraints, terminal covariance.
        Lowering lower(prog, lay, scale);
        for (const auto &d : objective_terms(problem))
            lower.objective(d);
        for (const auto &d : cc_descriptors(problem))
            lower.constraint(d);
        lower.constraint(terminal_constraint_descriptor(problem));

        // Penalty lambda^T xi + (w/2)||xi||^2, written as (w/2)||xi + lambda/w||^2 - ||lambda||^2/(2w)
        // so that large multipliers do not enter the objective as a linear term.
        sub.penalty_epigraph.resize(nh);
        const double root_w = std::sqrt(0.5 * w);
        for (int k = 0; k < nh; ++k)
        {
            const int u = lower.aux(1.0);
            sub.penalty_epigraph[k] = u;
            prog.add_objective(u, 1.0);
            prog.add_objective_constant(-0.5 * lambda[k].squaredNorm() / w);
            AffineExpr ue;
            ue.add(u, 1.0);
            std::vector<AffineExpr> y(nt);
            for (int t = 0; t < nt; ++t)
            {
                y[t].add(lay.xi(k) + t, root_w);
                y[t].constant = root_w * lambda[k](t) / w;
            }
            add_square_epigraph(prog, ue, 1.0, y);
        }

        sub.var_scale = Eigen::Map<const Vec>(scale.data(), static_cast<Eigen::Index>(scale.size()));
        prog.rescale_variables(sub.var_scale);
        return sub;
    }

    ConicSolution solve_subproblem(const ConicBackend &backend, const Subproblem &sub)
    {
        const auto caps = backend.capabilities();
        if (sub.program.uses_psd() && !caps.psd)
            throw UnsupportedCone("backend '" + backend.name() + "' has no semidefinite cone support");
        if (!sub.program.socs().empty() && !caps.soc)
            throw UnsupportedCone("backend '" + backend.name() + "' has no second-order cone support");
        ConicSolution sol = backend.solve(sub.program);
        if (!is_success(sol.status))
            throw BackendFailure(sol.status, "convex subproblem solve failed");
        return sol;
    }

    SubproblemPoint extract(const DecisionLayout &layout, const Vec &x)
    {
        if (x.size() < layout.base_count())
            throw LayoutMismatch("extract: primal vector shorter than the layout");
        const int n = layout.n, m = layout.m, nh = layout.horizon, nt = layout.tril();
        SubproblemPoint out;
        out.z.mu.resize(nh + 1);
        out.z.s.resize(nh + 1);
        out.z.v.resize(nh);
        out.z.l.resize(nh);
        out.xi.resize(nh);
        for (int k = 0; k <= nh; ++k)
        {
            out.z.mu[k] = x.segment(layout.mu(k), n);
            Mat s = unvectril(x.segment(layout.s(k), nt));
            for (int i = 0; i < n; ++i)
                if (s(i, i) < 0.0 && s(i, i) >= -kDiagClip)
                    s(i, i) = 0.0;
            out.z.s[k] = std::move(s);
            if (k == nh)
                break;
            out.z.v[k] = x.segment(layout.v(k), m);
            out.z.l[k] = x.segment(layout.l(k), m * n).reshaped(m, n);
            out.xi[k] = x.segment(layout.xi(k), nt);
        }
        return out;
    }

    SubproblemPoint extract(const Subproblem &sub, const ConicSolution &sol)
    {
        if (!is_success(sol.status))
            throw BackendFailure(sol.status, "no usable subproblem solution");
        if (sol.x.size() != sub.program.num_variables() || sub.var_scale.size() != sol.x.size())
            throw LayoutMismatch("extract: solution length does not match the program");
        return extract(sub.layout, sol.x.cwiseProduct(sub.var_scale));
    }

    Vec pack(const DecisionLayout &layout, const Iterate &z, const std::vector<Vec> &xi, int num_variables)
    {
        if (num_variables < layout.base_count())
            throw LayoutMismatch("pack: fewer variables than the layout");
        const int n = layout.n, m = layout.m, nh = layout.horizon, nt = layout.tril();
        if (static_cast<int>(z.mu.size()) != nh + 1 || static_cast<int>(z.s.size()) != nh + 1 ||
            static_cast<int>(z.v.size()) != nh || static_cast<int>(z.l.size()) != nh ||
            static_cast<int>(xi.size()) != nh)
            throw LayoutMismatch("pack: iterate does not match the layout");
        Vec x = Vec::Zero(num_variables);
        for (int k = 0; k <= nh; ++k)
        {
            x.segment(layout.mu(k), n) = z.mu[k];
            x.segment(layout.s(k), nt) = vectril(z.s[k]);
            if (k == nh)
                break;
            x.segment(layout.v(k), m) = z.v[k];
            x.segment(layout.l(k), m * n) = z.l[k].reshaped();
            x.segment(layout.xi(k), nt) = xi[k];
        }
        return x;
    }

    double penalty_value(const std::vector<Vec> &xi, double w, const std::vector<Vec> &lambda)
    {
        if (xi.size() != lambda.size())
            throw ShapeMismatch("penalty_value: slack and multiplier counts differ");
        double p = 0.0;
        for (std::size_t k = 0; k < xi.size(); ++k)
            p += lambda[k].dot(xi[k]) + 0.5 * w * xi[k].squaredNorm();
        return p;
    }

    double trust_region_step(const CsProblem &problem, const Iterate &ref, const Iterate &z, const Mat &d_x)
    {
        double step = 0.0;
        for (int k = 0; k < problem.horizon(); ++k)
        {
            const Mat dx = d_x * (problem.sys.a[k] * (z.s[k] - ref.s[k]) + problem.sys.b[k] * (z.l[k] - ref.l[k]));
            step = std::max(step, dx.cwiseAbs().maxCoeff());
        }
        return step;
    }

} // namespace sqrtcs
