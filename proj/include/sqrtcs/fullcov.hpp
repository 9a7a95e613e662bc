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

#include <vector>

#include "sqrtcs/conic.hpp"
#include "sqrtcs/problem.hpp"

namespace sqrtcs
{
    /// Full-covariance solution with P_k, U_k = K_k P_k and Y_k >= U_k P_k^{-1} U_k^T.
    struct FullCovSolution
    {
        SolveStatus status = SolveStatus::Other;
        std::vector<Vec> mu; // N + 1
        std::vector<Vec> v;  // N
        std::vector<Mat> p;  // N + 1
        std::vector<Mat> u;  // N
        std::vector<Mat> y;  // N
        double cost = 0.0;   // sum of E[x^T Q x + u^T R u]; excludes the eta term
        double solve_time = 0.0;

        /// K_k = U_k P_k^{-1}.
        std::vector<Mat> gains() const;
    };

    struct FullCovOptions
    {
        /// Weight of the convexifying term eta * sum tr(Y_k).
        double eta = 0.0;
    };

    /// Convex program with explicit covariance variables for the unconstrained EoQ problem.
    /// Throws InvalidSpec for other costs or when chance constraints are present, and
    /// BackendFailure when the backend does not return a usable point.
    FullCovSolution solve_fullcov_unconstrained(const CsProblem &problem, const ConicBackend &backend,
                                                const FullCovOptions &options = {});

    /// The conic program behind solve_fullcov_unconstrained.
    ConicProgram fullcov_program(const CsProblem &problem, const FullCovOptions &options = {});

    /// ||phi(K_k, P_k) - P_next||_F / ||P_next||_F with phi the closed-loop covariance recursion.
    double covariance_propagation_loss(const LtvSystem &sys, int k, const Mat &gain, const Mat &p,
                                       const Mat &p_next);

} // namespace sqrtcs
