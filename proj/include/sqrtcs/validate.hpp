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
#include <string>
#include <vector>

#include "sqrtcs/kernels.hpp"
#include "sqrtcs/problem.hpp"
#include "sqrtcs/scp.hpp"

namespace sqrtcs
{
    using McEnsemble = Ensemble;

    /// Closed-loop Monte Carlo of `policy` from x_0 ~ N(mu_init, P_init).
    McEnsemble simulate(const LtvSystem &sys, const Policy &policy, const Vec &mu_init, const Mat &p_init,
                        int samples, std::uint64_t seed, Exec exec = Exec::kParallel);

    struct CcRate
    {
        std::string label;
        double p = 0.0;                 // allowed violation probability
        std::vector<int> nodes;
        std::vector<double> node_rates; // empirical violation fraction per node
        double max_rate = 0.0;
    };

    /// Empirical violation fractions of the raw chance constraints (keep-out regions included).
    std::vector<CcRate> cc_violation_rates(const McEnsemble &ens, const CsProblem &problem);

    /// Allowed rate plus a binomial 3-sigma margin: p + 3 sqrt(p (1 - p) / M).
    double violation_limit(double p, int samples);

    struct TerminalCheck
    {
        double ratio = 0.0; // lambda_max(P_fin^{-1/2} S S^T P_fin^{-T/2})
        bool pass = false;  // ratio <= 1 + 1e-6
    };

    TerminalCheck terminal_check(const Mat &s_n, const Mat &p_fin);

    /// Terminal check on the sample covariance of the final states.
    TerminalCheck terminal_check(const McEnsemble &ens, const Mat &p_fin);

    struct EnvelopeCheck
    {
        std::vector<double> inside;     // per node fraction inside the projected 3-sigma ellipse
        double expected = 0.0;          // 1 - exp(-4.5)
        double node_threshold = 0.0;    // expected - 3 sqrt(expected (1 - expected) / M)
        double nodes_passing = 0.0;     // fraction of nodes at or above the threshold
        bool pass = false;              // nodes_passing >= 0.97
    };

    /// Samples against the 3-sigma ellipse of the planned covariance projected on two state
    /// components (default x-y).
    EnvelopeCheck envelope_check(const McEnsemble &ens, const Policy &policy, int i0 = 0, int i1 = 1);

    struct MomentCheck
    {
        std::vector<double> mean_z;      // per node max_i |mean_i - mu_i| / (sigma_i / sqrt(M))
        std::vector<double> cov_rel_err; // per node ||C - S S^T||_F / ||S S^T||_F
        double max_mean_z = 0.0;
        double max_cov_rel_err = 0.0;
    };

    MomentCheck moment_check(const McEnsemble &ens, const Policy &policy);

    Vec sample_mean(const McEnsemble &ens, int k);
    Mat sample_covariance(const McEnsemble &ens, int k);

    /// Loss_k for k = 0..N-1 with P_k = S_k S_k^T and K_k from the policy.
    std::vector<double> loss_series(const LtvSystem &sys, const Policy &policy);

} // namespace sqrtcs
