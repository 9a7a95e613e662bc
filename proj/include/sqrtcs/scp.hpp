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

#pragma once

#include <limits>
#include <string>
#include <vector>

#include "sqrtcs/conic.hpp"
#include "sqrtcs/kernels.hpp"
#include "sqrtcs/problem.hpp"

namespace sqrtcs
{
    struct ScpParams
    {
        double eps_feas = 1e-4;
        double eps_opt = 1e-4;
        double rho0 = 0.0;
        double rho1 = 0.25;
        double rho2 = 0.7;
        double alpha1 = 2.0;
        double alpha2 = 3.0;
        double beta = 2.0;
        double gamma = 0.9;
        double r_min = 1e-8;
        double r_max = 10.0;
        double r_init = 1.0;
        double w_init = 100.0;
        /// Cap on the penalty weight.
        double w_max = 1e8;
        int max_iter = 200;
        /// Trust-region scaling; empty means identity.
        Mat d_x;
        Exec exec = Exec::kParallel;

        /// Throws InvalidParameter.
        void validate() const;
    };

    struct ScpIteration
    {
        int index = 0;
        double delta_j = 0.0;
        double delta_l = 0.0;
        double rho = 0.0;
        double chi = 0.0;
        double r = 0.0; // radius used by this iteration's subproblem
        double w = 0.0;
        double cost = 0.0; // J at the subproblem solution
        bool accepted = false;
        double solve_time = 0.0;
        int solver_iterations = 0;
        /// The previous rejected solution still fit the smaller radius, so no solve ran.
        bool reused = false;
    };

    enum class ScpStatus
    {
        Converged,
        MaxIterations,
        BackendFailure
    };

    const char *to_string(ScpStatus s);

    struct ScpReport
    {
        ScpStatus status = ScpStatus::MaxIterations;
        std::vector<ScpIteration> iterations;
        double final_cost = std::numeric_limits<double>::quiet_NaN();
        double final_chi = std::numeric_limits<double>::quiet_NaN();
        double wall_time = 0.0;
        std::string message;
    };

    /// Feedback policy u_k = v_k + K_k (x_k - mu_k) with the planned moments.
    struct Policy
    {
        std::vector<Vec> v;
        std::vector<Mat> k;
        std::vector<Vec> mu;
        std::vector<Mat> s;
    };

    struct ScpResult
    {
        Iterate z;
        Policy policy;
        ScpReport report;
    };

    struct Defect
    {
        std::vector<Vec> per_node;
        Vec stacked;
        double chi = 0.0;
    };

    /// Per-node vectril(S_{k+1} - qr(X_{k+1}^T)^T) and their joint 2-norm.
    Defect nonlinear_defect(const CsProblem &problem, const Iterate &z, Exec exec = Exec::kParallel);

    /// J(z) + P(defect(z); w, lambda).
    double penalized_cost(const CsProblem &problem, const Iterate &z, double w, const std::vector<Vec> &lambda,
                          Exec exec = Exec::kParallel);

    /// Cholesky-geodesic interpolation between chol(P_init) and chol(P_fin): strictly lower
    /// entries linear in k/N, diagonals geometric.
    std::vector<Mat> initial_guess(const Mat &p_init, const Mat &p_fin, int horizon);

    /// Straight-line mean, zero feedforward and L, geodesic S.
    Iterate initial_iterate(const CsProblem &problem);

    Policy make_policy(const Iterate &z);

    /// Successive convexification. The first subproblem is solved around `initial` and
    /// accepted unconditionally so that later references satisfy the convex constraints.
    ScpResult solve(const CsProblem &problem, const ScpParams &params, const Iterate &initial,
                    const ConicBackend &backend);

} // namespace sqrtcs
