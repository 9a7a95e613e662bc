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

#include "sqrtcs/reformulate.hpp"

#include <cmath>
#include <string>

#include "sqrtcs/error.hpp"

namespace sqrtcs
{
    namespace
    {
        /// F with F^T F = Q for PSD Q; rows for negligible eigenvalues are dropped.
        Mat psd_root(const Mat &q)
        {
            Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (q + q.transpose()));
            const double top = std::max(es.eigenvalues().maxCoeff(), 0.0);
            std::vector<int> keep;
            for (int i = 0; i < es.eigenvalues().size(); ++i)
                if (es.eigenvalues()(i) > 1e-14 * top && es.eigenvalues()(i) > 0.0)
                    keep.push_back(i);
            Mat f(keep.size(), q.cols());
            for (std::size_t r = 0; r < keep.size(); ++r)
                f.row(r) = std::sqrt(es.eigenvalues()(keep[r])) * es.eigenvectors().col(keep[r]).transpose();
            return f;
        }

        /// vec(L) -> vec(W L) for L with `cols` columns.
        Mat left_mult_vec_map(const Mat &w, int rows_l, int cols)
        {
            if (w.cols() != rows_l)
                throw ShapeMismatch("left multiplication map: width mismatch");
            const int wr = static_cast<int>(w.rows());
            Mat map = Mat::Zero(wr * cols, rows_l * cols);
            for (int j = 0; j < cols; ++j)
                map.block(j * wr, j * rows_l, wr, rows_l) = w;
            return map;
        }

        /// vec(L) -> L^T a.
        Mat transpose_times_vec_map(const Vec &a, int cols)
        {
            const int rows_l = static_cast<int>(a.size());
            Mat map = Mat::Zero(cols, rows_l * cols);
            for (int j = 0; j < cols; ++j)
                map.block(j, j * rows_l, 1, rows_l) = a.transpose();
            return map;
        }

        Atom linear_atom(BlockRef ref, const Vec &a, double coef = 1.0)
        {
            return {AtomKind::Linear, ref, a.transpose(), Vec::Zero(1), 1, 1, coef};
        }

        Atom vector_atom(AtomKind kind, BlockRef ref, const Mat &map, double coef)
        {
            return {kind, ref, map, Vec::Zero(map.rows()), static_cast<int>(map.rows()), 1, coef};
        }

        /// Atom acting on a matrix block (S_k or L_k) through W * block.
        Atom matrix_atom(const CsProblem &problem, AtomKind kind, BlockRef ref, const Mat &w, double coef)
        {
            const int n = problem.n();
            Mat map = ref.kind == BlockKind::SqrtCov ? left_mult_tril_map(w) : left_mult_vec_map(w, problem.m(), n);
            Atom atom{kind, ref, map, Vec::Zero(map.rows()), static_cast<int>(w.rows()), n, coef};
            if (kind == AtomKind::Spectral && problem.matrix_norm == MatrixNorm::Frobenius)
            {
                atom.kind = AtomKind::Norm2;
                atom.out_cols = 1;
                atom.out_rows = static_cast<int>(map.rows());
            }
            if (kind != AtomKind::Spectral)
            {
                atom.out_rows = static_cast<int>(map.rows());
                atom.out_cols = 1;
            }
            return atom;
        }

        /// (mean-like block, matrix-like block) for a target.
        std::pair<BlockKind, BlockKind> blocks_for(CcTarget target)
        {
            return target == CcTarget::State ? std::make_pair(BlockKind::Mean, BlockKind::SqrtCov)
                                             : std::make_pair(BlockKind::Feedforward, BlockKind::Gain);
        }

        std::string node_label(const std::string &base, int k) { return base + "[" + std::to_string(k) + "]"; }
    } // namespace

    int block_size(const CsProblem &problem, BlockKind kind)
    {
        switch (kind)
        {
        case BlockKind::Mean:
            return problem.n();
        case BlockKind::SqrtCov:
            return tril_size(problem.n());
        case BlockKind::Feedforward:
            return problem.m();
        case BlockKind::Gain:
            return problem.m() * problem.n();
        }
        return 0;
    }

    Vec block_vector(const Iterate &z, const BlockRef &ref)
    {
        switch (ref.kind)
        {
        case BlockKind::Mean:
            return z.mu.at(ref.node);
        case BlockKind::SqrtCov:
            return vectril(z.s.at(ref.node));
        case BlockKind::Feedforward:
            return z.v.at(ref.node);
        case BlockKind::Gain:
            return Eigen::Map<const Vec>(z.l.at(ref.node).data(), z.l.at(ref.node).size());
        }
        return {};
    }

    double atom_value(const Atom &atom, const Iterate &z)
    {
        const Vec y = atom.map * block_vector(z, atom.block) + atom.offset;
        switch (atom.kind)
        {
        case AtomKind::Linear:
            return atom.coef * y(0);
        case AtomKind::Norm2:
            return atom.coef * y.norm();
        case AtomKind::SquaredNorm:
            return atom.coef * y.squaredNorm();
        case AtomKind::Spectral:
            return atom.coef * spectral_norm(Eigen::Map<const Mat>(y.data(), atom.out_rows, atom.out_cols));
        }
        return 0.0;
    }

    double descriptor_value(const ConvexTermDescriptor &d, const Iterate &z)
    {
        double v = d.constant;
        for (const auto &a : d.atoms)
            v += atom_value(a, z);
        return v;
    }

    Mat left_mult_tril_map(const Mat &w)
    {
        const int wr = static_cast<int>(w.rows());
        const int n = static_cast<int>(w.cols());
        Mat map = Mat::Zero(wr * n, tril_size(n));
        for (int j = 0; j < n; ++j)
            for (int i = j; i < n; ++i)
                for (int r = 0; r < wr; ++r)
                    map(r + j * wr, tril_index(n, i, j)) = w(r, i);
        return map;
    }

    Mat transpose_times_tril_map(const Vec &a)
    {
        const int n = static_cast<int>(a.size());
        Mat map = Mat::Zero(n, tril_size(n));
        for (int j = 0; j < n; ++j)
            for (int i = j; i < n; ++i)
                map(j, tril_index(n, i, j)) = a(i);
        return map;
    }

    std::vector<ConvexTermDescriptor> objective_terms(const CsProblem &problem)
    {
        const int nh = problem.horizon();
        std::vector<ConvexTermDescriptor> out;
        out.reserve(nh);
        for (int k = 0; k < nh; ++k)
        {
            ConvexTermDescriptor d;
            d.label = node_label("cost", k);
            d.node = k;
            if (const auto *eoq = std::get_if<EoqCost>(&problem.cost))
            {
                const Mat fq = psd_root(eoq->q[k]);
                const Mat fr = psd_root(eoq->r[k]);
                if (fq.rows() > 0)
                {
                    d.atoms.push_back(vector_atom(AtomKind::SquaredNorm, {BlockKind::Mean, k}, fq, 1.0));
                    d.atoms.push_back(matrix_atom(problem, AtomKind::SquaredNorm, {BlockKind::SqrtCov, k}, fq, 1.0));
                }
                d.atoms.push_back(vector_atom(AtomKind::SquaredNorm, {BlockKind::Feedforward, k}, fr, 1.0));
                d.atoms.push_back(matrix_atom(problem, AtomKind::SquaredNorm, {BlockKind::Gain, k}, fr, 1.0));
            }
            else
            {
                const auto &qon = std::get<QonCost>(problem.cost);
                const Mat &wx = qon.wx[k];
                const Mat &wu = qon.wu[k];
                if (wx.norm() > 0.0)
                {
                    const double cx = std::sqrt(chi2_quantile(qon.p_j, static_cast<double>(wx.rows())));
                    d.atoms.push_back(vector_atom(AtomKind::Norm2, {BlockKind::Mean, k}, wx, 1.0));
                    d.atoms.push_back(matrix_atom(problem, AtomKind::Spectral, {BlockKind::SqrtCov, k}, wx, cx));
                }
                if (wu.norm() > 0.0)
                {
                    const double cu = std::sqrt(chi2_quantile(qon.p_j, static_cast<double>(wu.rows())));
                    d.atoms.push_back(vector_atom(AtomKind::Norm2, {BlockKind::Feedforward, k}, wu, 1.0));
                    d.atoms.push_back(matrix_atom(problem, AtomKind::Spectral, {BlockKind::Gain, k}, wu, cu));
                }
            }
            out.push_back(std::move(d));
        }
        return out;
    }

    double objective_value(const CsProblem &problem, const Iterate &z)
    {
        double total = 0.0;
        for (const auto &d : objective_terms(problem))
            total += descriptor_value(d, z);
        return total;
    }

    ConvexTermDescriptor affine_cc_descriptor(const CsProblem &problem, const CcSpec &spec, int node)
    {
        const auto *a = std::get_if<AffineCc>(&spec.form);
        if (!a)
            throw InvalidSpec(spec.label + ": not an affine chance constraint");
        const int dim = spec.target == CcTarget::State ? problem.n() : problem.m();
        if (a->alpha.size() != dim || !(a->p > 0.0 && a->p < 0.5))
            throw InvalidSpec(spec.label + ": invalid affine chance constraint");
        const auto [mean_kind, sqrt_kind] = blocks_for(spec.target);
        const double z = normal_quantile(1.0 - a->p);

        ConvexTermDescriptor d;
        d.label = node_label(spec.label, node);
        d.node = node;
        d.atoms.push_back(linear_atom({mean_kind, node}, a->alpha));
        const Mat map = sqrt_kind == BlockKind::SqrtCov ? transpose_times_tril_map(a->alpha)
                                                        : transpose_times_vec_map(a->alpha, problem.n());
        d.atoms.push_back(vector_atom(AtomKind::Norm2, {sqrt_kind, node}, map, z));
        d.constant = -a->beta;
        return d;
    }

    ConvexTermDescriptor norm_cc_descriptor(const CsProblem &problem, const CcSpec &spec, int node)
    {
        const auto *nc = std::get_if<NormCc>(&spec.form);
        if (!nc)
            throw InvalidSpec(spec.label + ": not a norm chance constraint");
        if (!(nc->gamma > 0.0) || !(nc->p > 0.0 && nc->p < 0.5))
            throw InvalidSpec(spec.label + ": invalid norm chance constraint");
        const int dim = spec.target == CcTarget::State ? problem.n() : problem.m();
        const auto [mean_kind, sqrt_kind] = blocks_for(spec.target);
        const double c = std::sqrt(chi2_quantile(1.0 - nc->p, static_cast<double>(dim)));

        ConvexTermDescriptor d;
        d.label = node_label(spec.label, node);
        d.node = node;
        d.atoms.push_back(vector_atom(AtomKind::Norm2, {mean_kind, node}, Mat::Identity(dim, dim), 1.0));
        d.atoms.push_back(matrix_atom(problem, AtomKind::Spectral, {sqrt_kind, node}, Mat::Identity(dim, dim), c));
        d.constant = -nc->gamma;
        return d;
    }

    std::vector<ConvexTermDescriptor> cc_descriptors(const CsProblem &problem)
    {
        std::vector<ConvexTermDescriptor> out;
        for (const auto &cc : problem.ccs)
        {
            for (int k : problem.nodes_of(cc))
            {
                if (std::holds_alternative<AffineCc>(cc.form))
                    out.push_back(affine_cc_descriptor(problem, cc, k));
                else if (std::holds_alternative<NormCc>(cc.form))
                    out.push_back(norm_cc_descriptor(problem, cc, k));
                else
                    throw InvalidSpec(cc.label + ": keep-out constraints must be expanded into halfspaces first");
            }
        }
        return out;
    }

    ConvexTermDescriptor terminal_constraint_descriptor(const CsProblem &problem)
    {
        const Mat f = cholesky(problem.p_fin);
        const int n = problem.n();
        const Mat f_inv = f.triangularView<Eigen::Lower>().solve(Mat::Identity(n, n));
        ConvexTermDescriptor d;
        d.label = "terminal_cov";
        d.node = problem.horizon();
        d.atoms.push_back(matrix_atom(problem, AtomKind::Spectral, {BlockKind::SqrtCov, problem.horizon()}, f_inv, 1.0));
        d.constant = -1.0;
        return d;
    }

    std::vector<CcSpec> obstacle_to_halfspaces(const std::vector<Eigen::Vector2d> &ref_positions,
                                               const Eigen::Vector2d &center, double radius, double p, int state_dim,
                                               const std::vector<int> &position_index)
    {
        if (position_index.size() != 2 || !(radius > 0.0))
            throw InvalidSpec("obstacle_to_halfspaces: need two position indices and a positive radius");
        std::vector<CcSpec> out;
        out.reserve(ref_positions.size());
        for (std::size_t k = 0; k < ref_positions.size(); ++k)
        {
            const Eigen::Vector2d d = ref_positions[k] - center;
            const double dist = d.norm();
            if (dist < 1e-9)
                throw DegenerateReference("reference position " + std::to_string(k) + " coincides with the obstacle center");
            const Eigen::Vector2d nhat = d / dist;
            AffineCc a;
            a.alpha = Vec::Zero(state_dim);
            a.alpha(position_index[0]) = -nhat(0);
            a.alpha(position_index[1]) = -nhat(1);
            a.beta = -(nhat.dot(center) + radius);
            a.p = p;
            CcSpec cc;
            cc.label = "halfspace";
            cc.target = CcTarget::State;
            cc.form = a;
            cc.nodes = {static_cast<int>(k)};
            out.push_back(std::move(cc));
        }
        return out;
    }

    bool has_keepouts(const CsProblem &problem)
    {
        for (const auto &cc : problem.ccs)
            if (std::holds_alternative<KeepOutCc>(cc.form))
                return true;
        return false;
    }

    CsProblem expand_keepouts(const CsProblem &problem, const std::vector<Vec> &ref_mu)
    {
        if (static_cast<int>(ref_mu.size()) != problem.horizon() + 1)
            throw ShapeMismatch("expand_keepouts: reference must have N + 1 means");
        CsProblem out = problem;
        out.ccs.clear();
        for (const auto &cc : problem.ccs)
        {
            const auto *ko = std::get_if<KeepOutCc>(&cc.form);
            if (!ko)
            {
                out.ccs.push_back(cc);
                continue;
            }
            const auto nodes = problem.nodes_of(cc);
            std::vector<Eigen::Vector2d> refs;
            for (int k : nodes)
                refs.emplace_back(ref_mu[k](ko->position_index[0]), ref_mu[k](ko->position_index[1]));
            auto halfspaces = obstacle_to_halfspaces(refs, Eigen::Vector2d(ko->center(0), ko->center(1)), ko->radius,
                                                     ko->p, problem.n(), ko->position_index);
            for (std::size_t i = 0; i < halfspaces.size(); ++i)
            {
                halfspaces[i].label = cc.label;
                halfspaces[i].nodes = {nodes[i]};
                out.ccs.push_back(std::move(halfspaces[i]));
            }
        }
        return out;
    }

} // namespace sqrtcs
