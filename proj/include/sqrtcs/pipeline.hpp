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
#include "sqrtcs/scp.hpp"

namespace sqrtcs
{
    struct ReferenceOptions
    {
        /// Straight-line points closer than lift_factor * radius to a keep-out center are
        /// moved onto that circle on the +y side before the first pass.
        double lift_factor = 1.2;
        int max_iter = 50;
        double tol = 1e-8;
    };

    struct DeterministicReference
    {
        std::vector<Vec> mu;
        std::vector<Vec> v;
        int iterations = 0;
        bool converged = false;
    };

    /// Mean-only plan with all covariances set to zero. Keep-out regions are handled by
    /// convex-concave passes: each pass replaces every disk by the tangent halfspace at the
    /// previous position and re-solves.
    DeterministicReference deterministic_reference(const CsProblem &problem, const ConicBackend &backend,
                                                   const ReferenceOptions &options = {});

    struct PlanResult
    {
        /// Problem actually handed to the SCP loop (keep-outs replaced by halfspaces).
        CsProblem convex_problem;
        std::vector<Vec> reference_mu; // empty when no keep-out was present
        ScpResult scp;
    };

    /// Full pipeline: keep-out expansion when needed, initial guess, SCP.
    PlanResult plan(const CsProblem &problem, const ScpParams &params, const ConicBackend &backend,
                    const ReferenceOptions &ref_options = {});

} // namespace sqrtcs
