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

#include "sqrtcs/validate.hpp"

#include <algorithm>
#include <cmath>
#include <variant>

#include <Eigen/Eigenvalues>

#include "sqrtcs/error.hpp"
#include "sqrtcs/fullcov.hpp"

namespace sqrtcs
{
    namespace
    {
        bool violates(const CcSpec &cc, const Eigen::Ref<const Vec> &y)
        {
            if (const auto *a = std::get_if<AffineCc>(&cc.form))
                return a->alpha.dot(y) > a->beta;
            if (const auto *nrm = std::get_if<NormCc>(&cc.form))
                return y.norm() > nrm->gamma;
            const auto &ko = std::get<KeepOutCc>(cc.form);
            const Eigen::Vector2d pos(y(ko.position_index[0]), y(ko.position_index[1]));
            return (pos - ko.center.head<2>()).norm() < ko.radius;
        }

        double cc_probability(const CcSpec &cc)
        {
            return std::visit([](const auto &f) { return f.p; }, cc.form);
        }
    } // namespace

    McEnsemble simulate(const LtvSystem &sys, const Policy &policy, const Vec &mu_init, const Mat &p_init,
                        int samples, std::uint64_t seed, Exec exec)
    {
        if (static_cast<int>(policy.v.size()) != sys.horizon || static_cast<int>(policy.k.size()) != sys.horizon ||
            static_cast<int>(policy.mu.size()) != sys.horizon + 1)
            throw ShapeMismatch("simulate: policy length does not match the horizon");
        for (int k = 0; k < sys.horizon; ++k)
            if (policy.v[k].size() != sys.m || policy.k[k].rows() != sys.m || policy.k[k].cols() != sys.n ||
                policy.mu[k].size() != sys.n)
                throw ShapeMismatch("simulate: policy dimensions do not match the system");
        if (mu_init.size() != sys.n || p_init.rows() != sys.n || p_init.cols() != sys.n)
            throw ShapeMismatch("simulate: initial distribution does not match the system");
        return simulate_ensemble(sys, policy.v, policy.k, policy.mu, mu_init, p_init, samples, seed, exec);
    }

    std::vector<CcRate> cc_violation_rates(const McEnsemble &ens, const CsProblem &problem)
    {
        if (ens.n != problem.n() || ens.m != problem.m() || ens.horizon != problem.horizon())
            throw ShapeMismatch("cc_violation_rates: ensemble does not match the problem");
        std::vector<CcRate> out;
        for (const auto &cc : problem.ccs)
        {
            CcRate rate;
            rate.label = cc.label;
            rate.p = cc_probability(cc);
            rate.nodes = problem.nodes_of(cc);
            for (int k : rate.nodes)
            {
                long count = 0;
                for (int i = 0; i < ens.samples; ++i)
                {
                    const bool bad = cc.target == CcTarget::State ? violates(cc, ens.state(i, k))
                                                                  : violates(cc, ens.control(i, k));
                    count += bad ? 1 : 0;
                }
                const double r = static_cast<double>(count) / ens.samples;
                rate.node_rates.push_back(r);
                rate.max_rate = std::max(rate.max_rate, r);
            }
            out.push_back(std::move(rate));
        }
        return out;
    }

    double violation_limit(double p, int samples)
    {
        return p + 3.0 * std::sqrt(p * (1.0 - p) / samples);
    }

    TerminalCheck terminal_check(const Mat &s_n, const Mat &p_fin)
    {
        const Mat c = cholesky(p_fin);
        const Mat scaled = c.triangularView<Eigen::Lower>().solve(s_n);
        if (!scaled.allFinite() || s_n.diagonal().cwiseAbs().minCoeff() == 0.0)
            throw NotPositiveDefinite("terminal_check: singular terminal square-root covariance");
        TerminalCheck out;
        const double sigma = spectral_norm(scaled);
        out.ratio = sigma * sigma;
        out.pass = out.ratio <= 1.0 + 1e-6;
        return out;
    }

    TerminalCheck terminal_check(const McEnsemble &ens, const Mat &p_fin)
    {
        return terminal_check(cholesky(sample_covariance(ens, ens.horizon)), p_fin);
    }

    Vec sample_mean(const McEnsemble &ens, int k)
    {
        Vec mean = Vec::Zero(ens.n);
        for (int i = 0; i < ens.samples; ++i)
            mean += ens.state(i, k);
        return mean / ens.samples;
    }

    Mat sample_covariance(const McEnsemble &ens, int k)
    {
        if (ens.samples < 2)
            throw InvalidParameter("sample_covariance: need at least two samples");
        const Vec mean = sample_mean(ens, k);
        Mat c = Mat::Zero(ens.n, ens.n);
        for (int i = 0; i < ens.samples; ++i)
        {
            const Vec d = ens.state(i, k) - mean;
            c.noalias() += d * d.transpose();
        }
        return c / (ens.samples - 1);
    }

    EnvelopeCheck envelope_check(const McEnsemble &ens, const Policy &policy, int i0, int i1)
    {
        if (i0 < 0 || i1 < 0 || i0 >= ens.n || i1 >= ens.n || i0 == i1)
            throw InvalidParameter("envelope_check: invalid projection indices");
        EnvelopeCheck out;
        // Squared Mahalanobis distance of a 2D Gaussian is chi^2_2, so P(d^2 <= 9) = 1 - exp(-4.5).
        out.expected = 1.0 - std::exp(-4.5);
        out.node_threshold = out.expected - 3.0 * std::sqrt(out.expected * (1.0 - out.expected) / ens.samples);
        int passing = 0;
        for (int k = 0; k <= ens.horizon; ++k)
        {
            const Mat p = policy.s[k] * policy.s[k].transpose();
            Eigen::Matrix2d p2;
            p2 << p(i0, i0), p(i0, i1), p(i1, i0), p(i1, i1);
            const Eigen::LDLT<Eigen::Matrix2d> ldlt(p2);
            long inside = 0;
            for (int i = 0; i < ens.samples; ++i)
            {
                const auto x = ens.state(i, k);
                const Eigen::Vector2d d(x(i0) - policy.mu[k](i0), x(i1) - policy.mu[k](i1));
                inside += d.dot(ldlt.solve(d)) <= 9.0 ? 1 : 0;
            }
            const double frac = static_cast<double>(inside) / ens.samples;
            out.inside.push_back(frac);
            passing += frac >= out.node_threshold ? 1 : 0;
        }
        out.nodes_passing = static_cast<double>(passing) / (ens.horizon + 1);
        out.pass = out.nodes_passing >= 0.97;
        return out;
    }

    MomentCheck moment_check(const McEnsemble &ens, const Policy &policy)
    {
        MomentCheck out;
        for (int k = 0; k <= ens.horizon; ++k)
        {
            const Mat p = policy.s[k] * policy.s[k].transpose();
            const Vec mean = sample_mean(ens, k);
            double z = 0.0;
            for (int i = 0; i < ens.n; ++i)
            {
                const double se = std::sqrt(p(i, i) / ens.samples);
                const double err = std::abs(mean(i) - policy.mu[k](i));
                z = std::max(z, se > 0.0 ? err / se : (err > 0.0 ? INFINITY : 0.0));
            }
            out.mean_z.push_back(z);
            const double rel = ens.samples > 1 ? (sample_covariance(ens, k) - p).norm() / p.norm() : 0.0;
            out.cov_rel_err.push_back(rel);
            out.max_mean_z = std::max(out.max_mean_z, z);
            out.max_cov_rel_err = std::max(out.max_cov_rel_err, rel);
        }
        return out;
    }

    std::vector<double> loss_series(const LtvSystem &sys, const Policy &policy)
    {
        std::vector<double> loss(sys.horizon);
        for (int k = 0; k < sys.horizon; ++k)
            loss[k] = covariance_propagation_loss(sys, k, policy.k[k], policy.s[k] * policy.s[k].transpose(),
                                                  policy.s[k + 1] * policy.s[k + 1].transpose());
        return loss;
    }

} // namespace sqrtcs
