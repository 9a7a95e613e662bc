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

#include "sqrtcs/problem.hpp"

#include <cmath>
#include <string>

#include "sqrtcs/error.hpp"

namespace sqrtcs
{
    namespace
    {
        void check_probability(double p, const std::string &what, double hi)
        {
            if (!(p > 0.0 && p < hi))
                throw InvalidSpec(what + ": probability " + std::to_string(p) + " out of range");
        }
    } // namespace

    void CsProblem::validate() const
    {
        sys.validate();
        const int nn = n(), mm = m(), nh = horizon();
        if (mu_init.size() != nn || mu_fin.size() != nn)
            throw ShapeMismatch("boundary means must have the state dimension");
        if (p_init.rows() != nn || p_init.cols() != nn || p_fin.rows() != nn || p_fin.cols() != nn)
            throw ShapeMismatch("boundary covariances must be n x n");
        cholesky(p_init);
        cholesky(p_fin);

        if (const auto *eoq = std::get_if<EoqCost>(&cost))
        {
            if (static_cast<int>(eoq->q.size()) != nh || static_cast<int>(eoq->r.size()) != nh)
                throw InvalidSpec("EoQ cost needs one Q and one R per node");
            for (int k = 0; k < nh; ++k)
            {
                const Mat &q = eoq->q[k], &r = eoq->r[k];
                if (q.rows() != nn || q.cols() != nn || r.rows() != mm || r.cols() != mm)
                    throw InvalidSpec("EoQ weight has the wrong shape at node " + std::to_string(k));
                if ((q - q.transpose()).norm() > 1e-12 * (1.0 + q.norm()) ||
                    (r - r.transpose()).norm() > 1e-12 * (1.0 + r.norm()))
                    throw InvalidSpec("EoQ weights must be symmetric");
                Eigen::SelfAdjointEigenSolver<Mat> eq(q, Eigen::EigenvaluesOnly);
                if (eq.eigenvalues()(0) < -1e-12 * (1.0 + q.norm()))
                    throw InvalidSpec("EoQ state weight must be PSD");
                Eigen::SelfAdjointEigenSolver<Mat> er(r, Eigen::EigenvaluesOnly);
                if (!(er.eigenvalues()(0) > 0.0))
                    throw InvalidSpec("EoQ control weight must be PD");
            }
        }
        else
        {
            const auto &qon = std::get<QonCost>(cost);
            if (static_cast<int>(qon.wx.size()) != nh || static_cast<int>(qon.wu.size()) != nh)
                throw InvalidSpec("QoN cost needs one W^x and one W^u per node");
            for (int k = 0; k < nh; ++k)
                if (qon.wx[k].cols() != nn || qon.wu[k].cols() != mm || qon.wx[k].rows() < 1 || qon.wu[k].rows() < 1)
                    throw InvalidSpec("QoN weight has the wrong shape at node " + std::to_string(k));
            check_probability(qon.p_j, "QoN p_J", 1.0);
        }

        for (const auto &cc : ccs)
        {
            const int dim = cc.target == CcTarget::State ? nn : mm;
            const int last = cc.target == CcTarget::State ? nh : nh - 1;
            for (int k : cc.nodes)
                if (k < 0 || k > last)
                    throw InvalidSpec(cc.label + ": node " + std::to_string(k) + " out of range");
            if (const auto *a = std::get_if<AffineCc>(&cc.form))
            {
                if (a->alpha.size() != dim)
                    throw InvalidSpec(cc.label + ": alpha has the wrong length");
                if (!std::isfinite(a->beta) || a->alpha.norm() == 0.0)
                    throw InvalidSpec(cc.label + ": degenerate halfspace");
                check_probability(a->p, cc.label, 0.5);
            }
            else if (const auto *nc = std::get_if<NormCc>(&cc.form))
            {
                if (!(nc->gamma > 0.0))
                    throw InvalidSpec(cc.label + ": gamma must be positive");
                check_probability(nc->p, cc.label, 0.5);
            }
            else
            {
                const auto &ko = std::get<KeepOutCc>(cc.form);
                if (cc.target != CcTarget::State)
                    throw InvalidSpec(cc.label + ": keep-out constraints apply to the state");
                if (ko.center.size() != 2 || ko.position_index.size() != 2 || !(ko.radius > 0.0))
                    throw InvalidSpec(cc.label + ": keep-out needs a 2D center, two indices and a positive radius");
                for (int idx : ko.position_index)
                    if (idx < 0 || idx >= nn)
                        throw InvalidSpec(cc.label + ": position index out of range");
                check_probability(ko.p, cc.label, 0.5);
            }
        }
    }

    std::vector<int> CsProblem::nodes_of(const CcSpec &cc) const
    {
        if (!cc.nodes.empty())
            return cc.nodes;
        const int last = cc.target == CcTarget::State ? horizon() : horizon() - 1;
        std::vector<int> out;
        for (int k = 0; k <= last; ++k)
            out.push_back(k);
        return out;
    }

    Iterate rollout(const CsProblem &problem, const std::vector<Vec> &v, const std::vector<Mat> &l)
    {
        const int nh = problem.horizon();
        if (static_cast<int>(v.size()) != nh || static_cast<int>(l.size()) != nh)
            throw ShapeMismatch("rollout: control sequences must have N entries");
        Iterate z;
        z.v = v;
        z.l = l;
        z.mu.resize(nh + 1);
        z.s.resize(nh + 1);
        z.mu[0] = problem.mu_init;
        z.s[0] = cholesky(problem.p_init);
        for (int k = 0; k < nh; ++k)
        {
            z.mu[k + 1] = propagate_mean(problem.sys, k, z.mu[k], v[k]);
            z.s[k + 1] = propagate_cov_sqrt(problem.sys, k, z.s[k], l[k]);
        }
        return z;
    }

} // namespace sqrtcs
