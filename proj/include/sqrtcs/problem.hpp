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

#include <string>
#include <variant>
#include <vector>

#include "sqrtcs/ltv.hpp"

namespace sqrtcs
{
    /// E[x^T Q x + u^T R u] summed over k = 0..N-1.
    struct EoqCost
    {
        std::vector<Mat> q; // N entries, PSD n x n
        std::vector<Mat> r; // N entries, PD m x m
    };

    /// p_J-quantiles of ||W^x x_k|| and ||W^u u_k||, bounded through the triangle inequality.
    struct QonCost
    {
        std::vector<Mat> wx; // N entries, w_x x n
        std::vector<Mat> wu; // N entries, w_u x m
        double p_j = 0.9;
    };

    using CostSpec = std::variant<EoqCost, QonCost>;

    enum class CcTarget
    {
        State,
        Control
    };

    /// P(alpha^T y <= beta) >= 1 - p
    struct AffineCc
    {
        Vec alpha;
        double beta = 0.0;
        double p = 0.05;
    };

    /// P(||y|| <= gamma) >= 1 - p
    struct NormCc
    {
        double gamma = 1.0;
        double p = 0.05;
    };

    /// P(||E y - center|| >= radius) >= 1 - p, where E selects two position components.
    /// Not convex; replaced by per-node halfspaces before a solve.
    struct KeepOutCc
    {
        Vec center;
        double radius = 1.0;
        double p = 0.05;
        std::vector<int> position_index{0, 1};
    };

    struct CcSpec
    {
        std::string label;
        CcTarget target = CcTarget::State;
        std::variant<AffineCc, NormCc, KeepOutCc> form;
        /// Nodes the constraint applies to; empty means the default set
        /// (0..N for states, 0..N-1 for controls).
        std::vector<int> nodes;
    };

    /// How ||M||_2 of a matrix argument is realized.
    enum class MatrixNorm
    {
        Spectral,
        Frobenius
    };

    struct CsProblem
    {
        LtvSystem sys;
        Vec mu_init;
        Vec mu_fin;
        Mat p_init;
        Mat p_fin;
        CostSpec cost;
        std::vector<CcSpec> ccs;
        MatrixNorm matrix_norm = MatrixNorm::Spectral;

        int n() const { return sys.n; }
        int m() const { return sys.m; }
        int horizon() const { return sys.horizon; }

        /// Throws ShapeMismatch, InvalidSpec or NotPositiveDefinite.
        void validate() const;

        /// Node list of a constraint after applying the default.
        std::vector<int> nodes_of(const CcSpec &cc) const;
    };

    /// Decision variables of one SCP reference or solution.
    struct Iterate
    {
        std::vector<Vec> mu; // N + 1
        std::vector<Mat> s;  // N + 1, lower triangular
        std::vector<Vec> v;  // N
        std::vector<Mat> l;  // N, m x n

        int horizon() const { return static_cast<int>(v.size()); }
    };

    /// Rolls the mean and square-root covariance forward from the boundary data.
    Iterate rollout(const CsProblem &problem, const std::vector<Vec> &v, const std::vector<Mat> &l);

} // namespace sqrtcs
