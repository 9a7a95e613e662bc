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

#include <cstdint>
#include <vector>

#include "sqrtcs/ltv.hpp"
#include "sqrtcs/problem.hpp"

namespace sqrtcs
{
    /// Execution policy for the per-node and per-sample kernels. Both produce
    /// bitwise-identical results; kSerial is the reference.
    enum class Exec
    {
        kSerial,
        kParallel
    };

    /// Linearization of every square-root step around `ref`.
    std::vector<SqrtStepLinearization> linearize_all(const CsProblem &problem, const Iterate &ref, Exec exec);

    struct StepJacobians
    {
        Mat js;
        Mat jl;
    };

    std::vector<StepJacobians> jacobians_all(const LtvSystem &sys, const std::vector<SqrtStepLinearization> &lin,
                                             Exec exec);

    /// vectril(S_{k+1} - qr(X_{k+1}^T)^T) for k = 0..N-1.
    std::vector<Vec> defect_all(const CsProblem &problem, const Iterate &z, Exec exec);

    struct Ensemble
    {
        int samples = 0;
        std::uint64_t seed = 0;
        int n = 0;
        int m = 0;
        int horizon = 0;
        /// Row-major blocks: state(i, k) at x[(i * (N + 1) + k) * n], control(i, k) at u[(i * N + k) * m].
        std::vector<double> x;
        std::vector<double> u;

        Eigen::Map<const Vec> state(int i, int k) const
        {
            return Eigen::Map<const Vec>(x.data() + (static_cast<std::size_t>(i) * (horizon + 1) + k) * n, n);
        }
        Eigen::Map<const Vec> control(int i, int k) const
        {
            return Eigen::Map<const Vec>(u.data() + (static_cast<std::size_t>(i) * horizon + k) * m, m);
        }
    };

    /// Closed-loop rollouts of u_k = v_k + K_k (x_k - mu_k) with x_0 ~ N(mu_init, P_init).
    /// Sample i draws from its own xoshiro256** stream seeded with (splitmix64(seed) ^ i),
    /// so results do not depend on the thread count.
    Ensemble simulate_ensemble(const LtvSystem &sys, const std::vector<Vec> &v, const std::vector<Mat> &gains,
                               const std::vector<Vec> &mu_ref, const Vec &mu_init, const Mat &p_init, int samples,
                               std::uint64_t seed, Exec exec);

    /// Threads used by kParallel.
    int parallel_threads();

} // namespace sqrtcs
