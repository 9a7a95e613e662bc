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

#include "sqrtcs/fullcov.hpp"

#include <variant>

#include <Eigen/Eigenvalues>

#include "sqrtcs/error.hpp"

namespace sqrtcs
{
    namespace
    {
        // Variable offsets, per node: P_k (tril n), mu_k (n); for k < N also U_k (m n), Y_k (tril m), v_k (m).
        struct Layout
        {
            int n, m, nh;
            int stride() const { return tril_size(n) + n + m * n + tril_size(m) + m; }
            int p(int k) const { return k * stride(); }
            int mu(int k) const { return p(k) + tril_size(n); }
            int u(int k) const { return mu(k) + n; }
            int y(int k) const { return u(k) + m * n; }
            int v(int k) const { return y(k) + tril_size(m); }
            int count() const { return nh * stride() + tril_size(n) + n; }

            int p_at(int k, int i, int j) const { return p(k) + (i >= j ? tril_index(n, i, j) : tril_index(n, j, i)); }
            int y_at(int k, int i, int j) const { return y(k) + (i >= j ? tril_index(m, i, j) : tril_index(m, j, i)); }
            int u_at(int k, int i, int j) const { return u(k) + i + j * m; }
        };

        Mat psd_factor(const Mat &q)
        {
            Eigen::SelfAdjointEigenSolver<Mat> eig(0.5 * (q + q.transpose()));
            const Vec d = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
            return d.asDiagonal() * eig.eigenvectors().transpose();
        }

        // ||F x||^2 <= t as ||(t - 1/4, F x)|| <= t + 1/4.
        void add_quadratic(ConicProgram &prog, const Mat &f, int x0, int t)
        {
            std::vector<AffineExpr> rows(2 + f.rows());
            rows[0].add(t, 1.0).constant = 0.25;
            rows[1].add(t, 1.0).constant = -0.25;
            for (Eigen::Index r = 0; r < f.rows(); ++r)
                for (Eigen::Index c = 0; c < f.cols(); ++c)
                    rows[2 + r].add(x0 + static_cast<int>(c), f(r, c));
            prog.add_soc(std::move(rows));
        }

        Mat unpack_sym(const Vec &x, int off, int n)
        {
            Mat s = unvectril(x.segment(off, tril_size(n)));
            return s + s.transpose() - Mat(s.diagonal().asDiagonal());
        }
    } // namespace

    std::vector<Mat> FullCovSolution::gains() const
    {
        std::vector<Mat> k(u.size());
        for (std::size_t i = 0; i < u.size(); ++i)
            k[i] = p[i].ldlt().solve(u[i].transpose()).transpose();
        return k;
    }

    ConicProgram fullcov_program(const CsProblem &problem, const FullCovOptions &options)
    {
        problem.validate();
        const auto *eoq = std::get_if<EoqCost>(&problem.cost);
        if (!eoq)
            throw InvalidSpec("full-covariance baseline requires an EoQ cost");
        if (!problem.ccs.empty())
            throw InvalidSpec("full-covariance baseline does not handle chance constraints");
        if (options.eta < 0.0)
            throw InvalidParameter("eta must be non-negative");

        const int n = problem.n(), m = problem.m(), nh = problem.horizon();
        const Layout lay{n, m, nh};
        ConicProgram prog;
        prog.add_variables(lay.count());

        for (int i = 0; i < n; ++i)
        {
            AffineExpr a(-problem.mu_init(i));
            a.add(lay.mu(0) + i, 1.0);
            prog.add_equality(std::move(a));
            AffineExpr b(-problem.mu_fin(i));
            b.add(lay.mu(nh) + i, 1.0);
            prog.add_equality(std::move(b));
        }
        for (int j = 0; j < n; ++j)
            for (int i = j; i < n; ++i)
            {
                AffineExpr e(-problem.p_init(i, j));
                e.add(lay.p_at(0, i, j), 1.0);
                prog.add_equality(std::move(e));
            }

        for (int k = 0; k < nh; ++k)
        {
            const Mat &a = problem.sys.a[k];
            const Mat &b = problem.sys.b[k];
            const Mat ggt = problem.sys.g[k] * problem.sys.g[k].transpose();
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
            // P_{k+1} = A P A^T + B U A^T + A U^T B^T + B Y B^T + G G^T, lower triangle.
            for (int j = 0; j < n; ++j)
            {
                for (int i = j; i < n; ++i)
                {
                    Vec coef_p = Vec::Zero(tril_size(n));
                    Vec coef_u = Vec::Zero(m * n);
                    Vec coef_y = Vec::Zero(tril_size(m));
                    for (int p = 0; p < n; ++p)
                        for (int q = 0; q < n; ++q)
                            coef_p(lay.p_at(k, p, q) - lay.p(k)) += a(i, p) * a(j, q);
                    for (int p = 0; p < m; ++p)
                        for (int q = 0; q < n; ++q)
                            coef_u(p + q * m) += b(i, p) * a(j, q) + a(i, q) * b(j, p);
                    for (int p = 0; p < m; ++p)
                        for (int q = 0; q < m; ++q)
                            coef_y(lay.y_at(k, p, q) - lay.y(k)) += b(i, p) * b(j, q);
                    AffineExpr e(-ggt(i, j));
                    e.add(lay.p_at(k + 1, i, j), 1.0);
                    for (int t = 0; t < coef_p.size(); ++t)
                        e.add(lay.p(k) + t, -coef_p(t));
                    for (int t = 0; t < coef_u.size(); ++t)
                        e.add(lay.u(k) + t, -coef_u(t));
                    for (int t = 0; t < coef_y.size(); ++t)
                        e.add(lay.y(k) + t, -coef_y(t));
                    prog.add_equality(std::move(e));
                }
            }
            // [[Y, U], [U^T, P]] >= 0.
            const int order = m + n;
            std::vector<AffineExpr> lower(tril_size(order));
            for (int j = 0; j < order; ++j)
            {
                for (int i = j; i < order; ++i)
                {
                    AffineExpr e;
                    if (i < m)
                        e.add(lay.y_at(k, i, j), 1.0);
                    else if (j < m)
                        e.add(lay.u_at(k, j, i - m), 1.0);
                    else
                        e.add(lay.p_at(k, i - m, j - m), 1.0);
                    lower[tril_index(order, i, j)] = std::move(e);
                }
            }
            prog.add_psd(order, std::move(lower));

            // Cost: mu^T Q mu + v^T R v + tr(Q P) + tr(R Y) (+ eta tr(Y)).
            const Mat &q = eoq->q[k];
            const Mat &r = eoq->r[k];
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j)
                    prog.add_objective(lay.p_at(k, i, j), q(j, i));
            for (int i = 0; i < m; ++i)
                for (int j = 0; j < m; ++j)
                    prog.add_objective(lay.y_at(k, i, j), r(j, i) + (i == j ? options.eta : 0.0));
            if (q.cwiseAbs().maxCoeff() > 0.0)
            {
                const int t = prog.add_variables(1);
                add_quadratic(prog, psd_factor(q), lay.mu(k), t);
                prog.add_objective(t, 1.0);
            }
            const int t = prog.add_variables(1);
            add_quadratic(prog, psd_factor(r), lay.v(k), t);
            prog.add_objective(t, 1.0);
        }

        // P_fin - P_N >= 0.
        std::vector<AffineExpr> terminal(tril_size(n));
        for (int j = 0; j < n; ++j)
            for (int i = j; i < n; ++i)
            {
                AffineExpr e(problem.p_fin(i, j));
                e.add(lay.p_at(nh, i, j), -1.0);
                terminal[tril_index(n, i, j)] = std::move(e);
            }
        prog.add_psd(n, std::move(terminal));
        return prog;
    }

    FullCovSolution solve_fullcov_unconstrained(const CsProblem &problem, const ConicBackend &backend,
                                                const FullCovOptions &options)
    {
        const ConicProgram prog = fullcov_program(problem, options);
        if (!backend.capabilities().psd)
            throw UnsupportedCone("full-covariance baseline needs a semidefinite cone");
        const ConicSolution sol = backend.solve(prog);
        if (!is_success(sol.status))
            throw BackendFailure(sol.status, "full-covariance baseline solve failed");

        const int n = problem.n(), m = problem.m(), nh = problem.horizon();
        const Layout lay{n, m, nh};
        const auto &eoq = std::get<EoqCost>(problem.cost);
        FullCovSolution out;
        out.status = sol.status;
        out.solve_time = sol.solve_time;
        for (int k = 0; k <= nh; ++k)
        {
            out.mu.push_back(sol.x.segment(lay.mu(k), n));
            out.p.push_back(unpack_sym(sol.x, lay.p(k), n));
            if (k == nh)
                break;
            out.v.push_back(sol.x.segment(lay.v(k), m));
            out.u.push_back(sol.x.segment(lay.u(k), m * n).reshaped(m, n));
            out.y.push_back(unpack_sym(sol.x, lay.y(k), m));
            out.cost += out.mu[k].dot(eoq.q[k] * out.mu[k]) + out.v[k].dot(eoq.r[k] * out.v[k]) +
                        (eoq.q[k] * out.p[k]).trace() + (eoq.r[k] * out.y[k]).trace();
        }
        return out;
    }

    double covariance_propagation_loss(const LtvSystem &sys, int k, const Mat &gain, const Mat &p,
                                       const Mat &p_next)
    {
        if (k < 0 || k >= sys.horizon)
            throw ShapeMismatch("covariance_propagation_loss: node outside the horizon");
        if (p.rows() != sys.n || p.cols() != sys.n || p_next.rows() != sys.n || p_next.cols() != sys.n ||
            gain.rows() != sys.m || gain.cols() != sys.n)
            throw ShapeMismatch("covariance_propagation_loss: dimension mismatch");
        return (propagate_cov_full(sys, k, p, gain) - p_next).norm() / p_next.norm();
    }

} // namespace sqrtcs
