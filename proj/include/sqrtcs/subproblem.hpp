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
#include "sqrtcs/kernels.hpp"
#include "sqrtcs/problem.hpp"
#include "sqrtcs/reformulate.hpp"

namespace sqrtcs
{
    /// Variable offsets of the decision blocks. Node k < N holds
    /// [v_k (m), vec L_k (m n), mu_k (n), vectril S_k, xi_k (n(n+1)/2)];
    /// node N holds [mu_N, vectril S_N]. Epigraph auxiliaries follow.
    struct DecisionLayout
    {
        int n = 0;
        int m = 0;
        int horizon = 0;

        DecisionLayout() = default;
        DecisionLayout(int n_, int m_, int horizon_);

        int tril() const { return tril_size(n); }
        int node_stride() const { return m + m * n + n + 2 * tril(); }
        int v(int k) const { return k * node_stride(); }
        int l(int k) const { return v(k) + m; }
        int mu(int k) const { return k < horizon ? l(k) + m * n : horizon * node_stride(); }
        int s(int k) const { return mu(k) + n; }
        int xi(int k) const { return s(k) + tril(); }
        /// Variables before any epigraph auxiliary.
        int base_count() const { return horizon * node_stride() + n + tril(); }

        int offset(const BlockRef &ref) const;
    };

    struct Subproblem
    {
        DecisionLayout layout;
        ConicProgram program;
        /// Epigraph variable of (w/2)||xi_k||^2, per node.
        std::vector<int> penalty_epigraph;
        /// Program variables are x ./ var_scale; extract maps them back.
        Vec var_scale;
    };

    /// Convex subproblem around `ref`: cost and constraint descriptors, mean dynamics,
    /// linearized square-root dynamics with slack xi, trust region
    /// |D_X (A dS + B dL)|_ij <= r, and penalty lambda^T xi + (w/2)||xi||^2.
    ///
    /// Variables are scaled for the backend: state rows (mu, S, xi) by diag(D_X), control
    /// rows (v, L) by the largest entry of the matching column of D_X B_k, and epigraph
    /// auxiliaries by the size of their arguments.
    Subproblem assemble(const CsProblem &problem, const Iterate &ref, const std::vector<SqrtStepLinearization> &linz,
                        const std::vector<Vec> &lambda, double w, double r, const Mat &d_x,
                        Exec exec = Exec::kParallel);

    /// Checks capabilities, solves, and throws BackendFailure unless the status is usable.
    ConicSolution solve_subproblem(const ConicBackend &backend, const Subproblem &sub);

    struct SubproblemPoint
    {
        Iterate z;
        std::vector<Vec> xi;
    };

    /// Iterate and slacks from a primal vector. Diagonals of S_k in [-1e-9, 0) are clipped to 0.
    SubproblemPoint extract(const DecisionLayout &layout, const Vec &x);

    /// Throws BackendFailure when the solution status is not usable.
    SubproblemPoint extract(const Subproblem &sub, const ConicSolution &sol);

    /// Inverse of extract on the base variables in unscaled units; auxiliaries are left at zero.
    Vec pack(const DecisionLayout &layout, const Iterate &z, const std::vector<Vec> &xi, int num_variables);

    /// max_k max_ij |D_X (A_k (S_k - S_k^ref) + B_k (L_k - L_k^ref))|_ij, the quantity the
    /// trust region bounds by r.
    double trust_region_step(const CsProblem &problem, const Iterate &ref, const Iterate &z, const Mat &d_x);

    /// sum_k lambda_k^T xi_k + (w/2)||xi_k||^2.
    double penalty_value(const std::vector<Vec> &xi, double w, const std::vector<Vec> &lambda);

} // namespace sqrtcs
