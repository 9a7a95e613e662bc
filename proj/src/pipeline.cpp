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

#include "sqrtcs/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <variant>

#include <Eigen/Eigenvalues>

#include "sqrtcs/error.hpp"
#include "sqrtcs/reformulate.hpp"

namespace sqrtcs
{
    namespace
    {
        Mat psd_factor(const Mat &q)
        {
            Eigen::SelfAdjointEigenSolver<Mat> eig(0.5 * (q + q.transpose()));
            const Vec d = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
            return d.asDiagonal() * eig.eigenvectors().transpose();
        }

        std::vector<AffineExpr> mapped(const Mat &f, int x0)
        {
            std::vector<AffineExpr> rows(f.rows());
            for (Eigen::Index r = 0; r < f.rows(); ++r)
                for (Eigen::Index c = 0; c < f.cols(); ++c)
                    rows[r].add(x0 + static_cast<int>(c), f(r, c));
            return rows;
        }

        void add_cost(ConicProgram &prog, const Mat &f, int x0, bool squared)
        {
            if (f.rows() == 0 || f.cwiseAbs().maxCoeff() == 0.0)
                return;
            const int t = prog.add_variables(1);
            std::vector<AffineExpr> rows;
            if (squared)
            {
                rows.resize(2);
                rows[0].add(t, 1.0).constant = 0.25;
                rows[1].add(t, 1.0).constant = -0.25;
            }
            else
            {
                rows.resize(1);
                rows[0].add(t, 1.0);
            }
            auto y = mapped(f, x0);
            rows.insert(rows.end(), y.begin(), y.end());
            prog.add_soc(std::move(rows));
            prog.add_objective(t, 1.0);
        }

        std::vector<Vec> lifted_line(const CsProblem &problem, double lift_factor)
        {
            const int nh = problem.horizon();
            std::vector<Vec> mu(nh + 1);
            for (int k = 0; k <= nh; ++k)
            {
                const double t = static_cast<double>(k) / nh;
                mu[k] = (1.0 - t) * problem.mu_init + t * problem.mu_fin;
            }
            for (const auto &cc : problem.ccs)
            {
                const auto *ko = std::get_if<KeepOutCc>(&cc.form);
                if (!ko)
                    continue;
                const int ix = ko->position_index[0], iy = ko->position_index[1];
                const double rho = lift_factor * ko->radius;
                for (auto &m : mu)
                {
                    const double dx = m(ix) - ko->center(0);
                    const double dy = m(iy) - ko->center(1);
                    if (std::hypot(dx, dy) >= rho)
                        continue;
                    const double cx = std::clamp(dx, -rho, rho);
                    m(ix) = ko->center(0) + cx;
                    m(iy) = ko->center(1) + std::sqrt(std::max(rho * rho - cx * cx, 0.0));
                }
            }
            return mu;
        }
    } // namespace

    DeterministicReference deterministic_reference(const CsProblem &problem, const ConicBackend &backend,
                                                   const ReferenceOptions &options)
    {
        problem.validate();
        if (!(options.lift_factor >= 1.0) || options.max_iter < 1 || !(options.tol > 0.0))
            throw InvalidParameter("deterministic_reference: invalid options");
        const int n = problem.n(), m = problem.m(), nh = problem.horizon();
        auto mu_var = [&](int k) { return k * n; };
        auto v_var = [&](int k) { return (nh + 1) * n + k * m; };

        DeterministicReference out;
        out.mu = lifted_line(problem, options.lift_factor);
        out.v.assign(nh, Vec::Zero(m));
        for (int it = 1; it <= options.max_iter; ++it)
        {
            ConicProgram prog;
            prog.add_variables((nh + 1) * n + nh * m);
            for (int i = 0; i < n; ++i)
            {
                AffineExpr a(-problem.mu_init(i));
                a.add(mu_var(0) + i, 1.0);
                prog.add_equality(std::move(a));
                AffineExpr b(-problem.mu_fin(i));
                b.add(mu_var(nh) + i, 1.0);
                prog.add_equality(std::move(b));
            }
            for (int k = 0; k < nh; ++k)
            {
                for (int i = 0; i < n; ++i)
                {
                    AffineExpr e;
                    e.add(mu_var(k + 1) + i, 1.0);
                    for (int j = 0; j < n; ++j)
                        e.add(mu_var(k) + j, -problem.sys.a[k](i, j));
                    for (int j = 0; j < m; ++j)
                        e.add(v_var(k) + j, -problem.sys.b[k](i, j));
                    prog.add_equality(std::move(e));
                }
                if (const auto *eoq = std::get_if<EoqCost>(&problem.cost))
                {
                    add_cost(prog, psd_factor(eoq->q[k]), mu_var(k), true);
                    add_cost(prog, psd_factor(eoq->r[k]), v_var(k), true);
                }
                else
                {
                    const auto &qon = std::get<QonCost>(problem.cost);
                    add_cost(prog, qon.wx[k], mu_var(k), false);
                    add_cost(prog, qon.wu[k], v_var(k), false);
                }
            }
            for (const auto &cc : problem.ccs)
            {
                for (int k : problem.nodes_of(cc))
                {
                    const int base = cc.target == CcTarget::State ? mu_var(k) : v_var(k);
                    const int dim = cc.target == CcTarget::State ? n : m;
                    if (const auto *a = std::get_if<AffineCc>(&cc.form))
                    {
                        AffineExpr e(a->beta);
                        for (int i = 0; i < dim; ++i)
                            e.add(base + i, -a->alpha(i));
                        prog.add_nonneg(std::move(e));
                    }
                    else if (const auto *nrm = std::get_if<NormCc>(&cc.form))
                    {
                        std::vector<AffineExpr> rows(1 + dim);
                        rows[0].constant = nrm->gamma;
                        for (int i = 0; i < dim; ++i)
                            rows[1 + i].add(base + i, 1.0);
                        prog.add_soc(std::move(rows));
                    }
                    else
                    {
                        const auto &ko = std::get<KeepOutCc>(cc.form);
                        const int ix = ko.position_index[0], iy = ko.position_index[1];
                        Eigen::Vector2d d(out.mu[k](ix) - ko.center(0), out.mu[k](iy) - ko.center(1));
                        if (d.norm() < 1e-9)
                            throw DegenerateReference("deterministic_reference: position at a keep-out center");
                        d.normalize();
                        // d^T (p - c) >= r
                        AffineExpr e(-d.dot(ko.center.head<2>()) - ko.radius);
                        e.add(base + ix, d(0));
                        e.add(base + iy, d(1));
                        prog.add_nonneg(std::move(e));
                    }
                }
            }
            const ConicSolution sol = backend.solve(prog);
            if (!is_success(sol.status))
                throw BackendFailure(sol.status, "deterministic reference solve failed");
            double change = 0.0;
            for (int k = 0; k <= nh; ++k)
            {
                const Vec next = sol.x.segment(mu_var(k), n);
                change = std::max(change, (next - out.mu[k]).cwiseAbs().maxCoeff());
                out.mu[k] = next;
                if (k < nh)
                    out.v[k] = sol.x.segment(v_var(k), m);
            }
            out.iterations = it;
            if (!has_keepouts(problem) || change <= options.tol * (1.0 + problem.mu_fin.cwiseAbs().maxCoeff()))
            {
                out.converged = true;
                break;
            }
        }
        return out;
    }

    PlanResult plan(const CsProblem &problem, const ScpParams &params, const ConicBackend &backend,
                    const ReferenceOptions &ref_options)
    {
        problem.validate();
        PlanResult out;
        if (has_keepouts(problem))
        {
            const DeterministicReference ref = deterministic_reference(problem, backend, ref_options);
            out.reference_mu = ref.mu;
            out.convex_problem = expand_keepouts(problem, ref.mu);
            Iterate init = initial_iterate(out.convex_problem);
            init.mu = ref.mu;
            init.v = ref.v;
            out.scp = solve(out.convex_problem, params, init, backend);
        }
        else
        {
            out.convex_problem = problem;
            out.scp = solve(problem, params, initial_iterate(problem), backend);
        }
        return out;
    }

} // namespace sqrtcs
