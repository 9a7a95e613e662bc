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

#include "sqrtcs/scp.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <optional>

#include "sqrtcs/error.hpp"
#include "sqrtcs/reformulate.hpp"
#include "sqrtcs/subproblem.hpp"

namespace sqrtcs
{
    namespace
    {
        double seconds_since(std::chrono::steady_clock::time_point t0)
        {
            return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        }
    } // namespace

    void ScpParams::validate() const
    {
        auto fail = [](const std::string &what) { throw InvalidParameter("ScpParams: " + what); };
        if (!(eps_feas > 0.0) || !(eps_opt > 0.0))
            fail("tolerances must be positive");
        if (!(rho0 >= 0.0 && rho0 < rho1 && rho1 < rho2 && rho2 < 1.0))
            fail("need 0 <= rho0 < rho1 < rho2 < 1");
        if (!(alpha1 > 1.0) || !(alpha2 > 1.0))
            fail("alpha1 and alpha2 must exceed 1");
        if (!(beta > 1.0))
            fail("beta must exceed 1");
        if (!(gamma > 0.0 && gamma < 1.0))
            fail("gamma must lie in (0, 1)");
        if (!(r_min > 0.0 && r_min <= r_init && r_init <= r_max))
            fail("need 0 < r_min <= r_init <= r_max");
        if (!(w_init > 0.0) || !(w_max >= w_init))
            fail("need 0 < w_init <= w_max");
        if (max_iter < 1)
            fail("max_iter must be positive");
        if (d_x.size() > 0 && d_x.rows() != d_x.cols())
            fail("D_X must be square");
    }

    const char *to_string(ScpStatus s)
    {
        switch (s)
        {
        case ScpStatus::Converged:
            return "converged";
        case ScpStatus::MaxIterations:
            return "max_iter";
        case ScpStatus::BackendFailure:
            return "backend_failure";
        }
        return "unknown";
    }

    Defect nonlinear_defect(const CsProblem &problem, const Iterate &z, Exec exec)
    {
        Defect d;
        d.per_node = defect_all(problem, z, exec);
        const int nt = tril_size(problem.n());
        d.stacked.resize(static_cast<Eigen::Index>(d.per_node.size()) * nt);
        for (std::size_t k = 0; k < d.per_node.size(); ++k)
            d.stacked.segment(static_cast<Eigen::Index>(k) * nt, nt) = d.per_node[k];
        d.chi = d.stacked.norm();
        return d;
    }

    double penalized_cost(const CsProblem &problem, const Iterate &z, double w, const std::vector<Vec> &lambda,
                          Exec exec)
    {
        return objective_value(problem, z) + penalty_value(nonlinear_defect(problem, z, exec).per_node, w, lambda);
    }

    std::vector<Mat> initial_guess(const Mat &p_init, const Mat &p_fin, int horizon)
    {
        if (horizon < 1)
            throw InvalidDimension("initial_guess: horizon must be positive");
        if (p_init.rows() != p_fin.rows() || p_init.cols() != p_fin.cols())
            throw ShapeMismatch("initial_guess: boundary covariances differ in size");
        const Mat s0 = cholesky(p_init);
        const Mat s1 = cholesky(p_fin);
        const Mat low0 = s0.triangularView<Eigen::StrictlyLower>();
        const Mat low1 = s1.triangularView<Eigen::StrictlyLower>();
        const Vec log0 = s0.diagonal().array().log();
        const Vec log1 = s1.diagonal().array().log();
        std::vector<Mat> out(horizon + 1);
        out.front() = s0;
        out.back() = s1;
        for (int k = 1; k < horizon; ++k)
        {
            const double t = static_cast<double>(k) / horizon;
            Mat s = (1.0 - t) * low0 + t * low1;
            s.diagonal() = ((1.0 - t) * log0 + t * log1).array().exp();
            out[k] = std::move(s);
        }
        return out;
    }

    Iterate initial_iterate(const CsProblem &problem)
    {
        problem.validate();
        const int nh = problem.horizon();
        Iterate z;
        z.s = initial_guess(problem.p_init, problem.p_fin, nh);
        z.mu.resize(nh + 1);
        for (int k = 0; k <= nh; ++k)
        {
            const double t = static_cast<double>(k) / nh;
            z.mu[k] = (1.0 - t) * problem.mu_init + t * problem.mu_fin;
        }
        z.v.assign(nh, Vec::Zero(problem.m()));
        z.l.assign(nh, Mat::Zero(problem.m(), problem.n()));
        return z;
    }

    Policy make_policy(const Iterate &z)
    {
        Policy p;
        p.v = z.v;
        p.mu = z.mu;
        p.s = z.s;
        p.k.reserve(z.l.size());
        for (std::size_t k = 0; k < z.l.size(); ++k)
            p.k.push_back(gain_from_sqrt(z.l[k], z.s[k]));
        return p;
    }

    ScpResult solve(const CsProblem &problem, const ScpParams &params, const Iterate &initial,
                    const ConicBackend &backend)
    {
        problem.validate();
        params.validate();
        const auto t_start = std::chrono::steady_clock::now();
        const int nh = problem.horizon();
        const int nt = tril_size(problem.n());
        const Mat d_x = params.d_x.size() > 0 ? params.d_x : Mat::Identity(problem.n(), problem.n());
        if (d_x.rows() != problem.n())
            throw InvalidParameter("ScpParams: D_X must be n x n");

        ScpResult result;
        ScpReport &report = result.report;
        Iterate ref = initial;
        std::vector<Vec> lambda(nh, Vec::Zero(nt));
        double w = params.w_init;
        double r = params.r_init;
        double delta = std::numeric_limits<double>::infinity();
        Iterate last = ref;
        std::optional<SubproblemPoint> rejected;

        // Iteration 0 bootstraps the reference; 1..max_iter follow the acceptance logic.
        for (int it = 0; it <= params.max_iter; ++it)
        {
            ScpIteration rec;
            rec.index = it;
            rec.r = r;
            rec.w = w;

            // After a rejection only r has changed. A previous optimum that already lies inside
            // the smaller trust region is still optimal there.
            SubproblemPoint pt;
            if (rejected && trust_region_step(problem, ref, rejected->z, d_x) <= r)
            {
                pt = *rejected;
                rec.reused = true;
            }
            else
            {
                try
                {
                    const auto linz = linearize_all(problem, ref, params.exec);
                    const Subproblem sub = assemble(problem, ref, linz, lambda, w, r, d_x, params.exec);
                    const ConicSolution sol = solve_subproblem(backend, sub);
                    rec.solve_time = sol.solve_time;
                    rec.solver_iterations = sol.iterations;
                    pt = extract(sub, sol);
                }
                catch (const BackendFailure &e)
                {
                    report.status = ScpStatus::BackendFailure;
                    report.message = e.what();
                    break;
                }
            }

            const double j_ref = penalized_cost(problem, ref, w, lambda, params.exec);
            const Defect defect = nonlinear_defect(problem, pt.z, params.exec);
            const double j_star = objective_value(problem, pt.z);
            const double aug_star = j_star + penalty_value(defect.per_node, w, lambda);
            const double lin_star = j_star + penalty_value(pt.xi, w, lambda);
            rec.delta_j = j_ref - aug_star;
            rec.delta_l = j_ref - lin_star;
            rec.rho = rec.delta_l == 0.0 ? 1.0 : rec.delta_j / rec.delta_l;
            rec.chi = defect.chi;
            rec.cost = j_star;
            rec.accepted = it == 0 || rec.rho >= params.rho0;
            last = pt.z;

            if (rec.accepted)
            {
                rejected.reset();
                ref = pt.z;
                if (it > 0 && std::abs(rec.delta_j) < delta)
                {
                    for (int k = 0; k < nh; ++k)
                        lambda[k] += w * defect.per_node[k];
                    w = std::min(params.beta * w, params.w_max);
                    delta = params.gamma * std::abs(rec.delta_j);
                }
                if (it > 0)
                {
                    if (rec.rho < params.rho1)
                        r = std::max(r / params.alpha1, params.r_min);
                    else if (rec.rho >= params.rho2)
                        r = std::min(params.alpha2 * r, params.r_max);
                }
            }
            else
            {
                rejected = pt;
                r = std::max(r / params.alpha1, params.r_min);
            }
            report.iterations.push_back(rec);

            if (it > 0 && std::abs(rec.delta_j) <= params.eps_opt && rec.chi <= params.eps_feas)
            {
                report.status = ScpStatus::Converged;
                break;
            }
        }

        result.z = report.status == ScpStatus::Converged ? last : ref;
        result.policy = make_policy(result.z);
        report.final_cost = objective_value(problem, result.z);
        report.final_chi = nonlinear_defect(problem, result.z, params.exec).chi;
        report.wall_time = seconds_since(t_start);
        if (report.status == ScpStatus::MaxIterations)
            report.message = "iteration limit reached";
        return result;
    }

} // namespace sqrtcs
