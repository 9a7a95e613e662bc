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
#include <vector>

#include "sqrtcs/problem.hpp"

namespace sqrtcs
{
    /// Decision block an atom acts on, in vector form:
    /// Mean mu_k, SqrtCov vectril(S_k), Feedforward v_k, Gain vec(L_k) (column-major).
    enum class BlockKind
    {
        Mean,
        SqrtCov,
        Feedforward,
        Gain
    };

    struct BlockRef
    {
        BlockKind kind;
        int node;
    };

    enum class AtomKind
    {
        Linear,      ///< coef * (map x + offset), map has one row
        Norm2,       ///< coef * ||map x + offset||_2
        SquaredNorm, ///< coef * ||map x + offset||_2^2
        Spectral     ///< coef * sigma_max(reshape(map x + offset, out_rows, out_cols))
    };

    struct Atom
    {
        AtomKind kind;
        BlockRef block;
        Mat map;
        Vec offset;
        int out_rows = 0;
        int out_cols = 1;
        double coef = 1.0;
    };

    /// sum(atoms) + constant. As a constraint it reads "value <= 0".
    struct ConvexTermDescriptor
    {
        std::string label;
        int node = 0;
        std::vector<Atom> atoms;
        double constant = 0.0;
    };

    int block_size(const CsProblem &problem, BlockKind kind);

    /// Vector form of a block at an iterate.
    Vec block_vector(const Iterate &z, const BlockRef &ref);

    double atom_value(const Atom &atom, const Iterate &z);
    double descriptor_value(const ConvexTermDescriptor &d, const Iterate &z);

    /// Linear map vectril(S) -> vec(W S) (column-major) for a fixed W with n columns.
    Mat left_mult_tril_map(const Mat &w);

    /// Linear map vectril(S) -> S^T a.
    Mat transpose_times_tril_map(const Vec &a);

    /// Per-node objective terms for k = 0..N-1.
    std::vector<ConvexTermDescriptor> objective_terms(const CsProblem &problem);

    double objective_value(const CsProblem &problem, const Iterate &z);

    /// Deterministic equivalent alpha^T y + z_{1-p} ||Sy^T alpha|| - beta <= 0.
    ConvexTermDescriptor affine_cc_descriptor(const CsProblem &problem, const CcSpec &spec, int node);

    /// Conservative surrogate ||y|| + sqrt(chi2_{d}(1-p)) ||Sy||_2 - gamma <= 0, d = dim(y).
    ConvexTermDescriptor norm_cc_descriptor(const CsProblem &problem, const CcSpec &spec, int node);

    /// All chance-constraint descriptors; throws InvalidSpec if a keep-out constraint remains.
    std::vector<ConvexTermDescriptor> cc_descriptors(const CsProblem &problem);

    /// ||chol(P_fin)^{-1} S_N||_2 - 1 <= 0. The terminal mean equality is handled by the assembler.
    ConvexTermDescriptor terminal_constraint_descriptor(const CsProblem &problem);

    /// Per-node halfspaces tangent to the disk at the projection of each reference position,
    /// oriented away from the disk. `alpha` acts on the two position components only.
    std::vector<CcSpec> obstacle_to_halfspaces(const std::vector<Eigen::Vector2d> &ref_positions,
                                               const Eigen::Vector2d &center, double radius, double p, int state_dim,
                                               const std::vector<int> &position_index = {0, 1});

    /// Copy of `problem` with every keep-out constraint replaced by halfspaces built
    /// from the reference mean trajectory `ref_mu` (N + 1 entries).
    CsProblem expand_keepouts(const CsProblem &problem, const std::vector<Vec> &ref_mu);

    bool has_keepouts(const CsProblem &problem);

} // namespace sqrtcs
