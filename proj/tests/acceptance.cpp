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

// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include <boost/math/distributions/normal.hpp>

#include "sqrtcs/config.hpp"
#include "sqrtcs/fullcov.hpp"
#include "sqrtcs/pipeline.hpp"
#include "sqrtcs/reformulate.hpp"
#include "sqrtcs/validate.hpp"
#include "test_util.hpp"

using namespace sqrtcs;
using sqrtcs::testing::randn;
using sqrtcs::testing::random_lower_pd;

namespace
{
    namespace fs = std::filesystem;
    using Clock = std::chrono::steady_clock;

    const fs::path kConfigDir = SQRTCS_CONFIG_DIR;

    double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

    int failures = 0;

    void verdict(int id, bool pass, const std::string &what, const std::string &detail)
    {
        std::printf("criterion %d: %s  %s (%s)\n", id, pass ? "PASS" : "FAIL", what.c_str(), detail.c_str());
        std::fflush(stdout);
        if (!pass)
            ++failures;
    }

    void info(int id, const std::string &detail)
    {
        std::printf("criterion %d: INFO  %s\n", id, detail.c_str());
        std::fflush(stdout);
    }

    std::string fmt(const char *f, auto... args)
    {
        char buf[512];
        std::snprintf(buf, sizeof buf, f, args...);
        return buf;
    }

    double oracle_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

    // Random LTV step with n <= 8, m <= 4 and a noise input of random width.
    void propagation_equivalence()
    {
        const auto t0 = Clock::now();
        std::mt19937_64 rng(20260101);
        std::uniform_int_distribution<int> dn(1, 8), dm(1, 4);
        double worst = 0.0;
        for (int trial = 0; trial < 1000; ++trial)
        {
            const int n = dn(rng), m = dm(rng);
            const int nw = std::uniform_int_distribution<int>(1, n)(rng);
            LtvSystem sys;
            sys.n = n;
            sys.m = m;
            sys.nw = nw;
            sys.horizon = 1;
            sys.a = {randn(rng, n, n)};
            sys.b = {randn(rng, n, m)};
            sys.g = {0.3 * randn(rng, n, nw)};
            const Mat s = random_lower_pd(rng, n);
            const Mat k = randn(rng, m, n);
            const Mat acl = sys.a[0] + sys.b[0] * k;
            const Mat p_next = acl * s * s.transpose() * acl.transpose() + sys.g[0] * sys.g[0].transpose();
            const Mat s_next = propagate_cov_sqrt(sys, 0, s, k * s);
            worst = std::max(worst, (s_next * s_next.transpose() - p_next).norm() / p_next.norm());
        }
        const double t = seconds_since(t0);
        verdict(1, worst <= 1e-12 && t < 5.0, "square-root propagation equals full covariance propagation",
                fmt("1000 instances, max rel err %.2e <= 1e-12, %.2f s < 5 s", worst, t));
    }

    Mat r_of(const Mat &m) { return qr_econ_pos(m).r; }

    void qr_derivative_check()
    {
        const auto t0 = Clock::now();
        std::mt19937_64 rng(7);
        std::uniform_int_distribution<int> dq(1, 6), extra(0, 6);
        double worst_fd = 0.0, worst_order = 0.0;
        int order_ok = 0, exact = 0;
        for (int trial = 0; trial < 200; ++trial)
        {
            const int q = dq(rng), p = q + extra(rng);
            const Mat m = randn(rng, p, q);
            const Mat dm = randn(rng, p, q);
            const QrPair ref = qr_econ_pos(m);
            const Mat dr = qr_derivative(dm, ref);

            const double h = 1e-7;
            const Mat fd = (r_of(m + h * dm) - r_of(m - h * dm)) / (2.0 * h);
            worst_fd = std::max(worst_fd, (fd - dr).norm() / std::max(dr.norm(), 1e-300));

            // Remainder of the first-order model; halving h should quarter it. For a 1 x 1 input
            // R = |m| is locally linear and the remainder is pure rounding.
            const auto remainder = [&](double step) { return (r_of(m + step * dm) - ref.r - step * dr).norm(); };
            const double e1 = remainder(1e-3), e2 = remainder(5e-4);
            if (e1 <= 1e-13 * (1.0 + ref.r.norm()))
            {
                ++exact;
                ++order_ok;
                continue;
            }
            const double ratio = e1 / e2;
            worst_order = std::max(worst_order, std::abs(std::log2(ratio) - 2.0));
            if (ratio > 3.5 && ratio < 4.5)
                ++order_ok;
        }
        const double t = seconds_since(t0);
        verdict(2, worst_fd <= 1e-6 && order_ok == 200 && t < 5.0, "QR derivative matches finite differences",
                fmt("200 references, max rel FD err %.2e <= 1e-6, O(h^2) remainder for %d/200 (%d exact to "
                    "rounding), max |log2 ratio - 2| %.3f, %.2f s < 5 s",
                    worst_fd, order_ok, exact, worst_order, t));
    }

    struct ParityRun
    {
        int horizon = 0;
        PlanResult res;
        double fullcov = 0.0;
    };

    std::vector<ParityRun> parity_and_convergence(const ScenarioConfig &cfg, const ConicBackend &backend)
    {
        const auto t0 = Clock::now();
        std::vector<ParityRun> runs;
        std::string detail;
        bool ok = true;
        for (int nh : {10, 20, 40})
        {
            const ScenarioConfig c = with_horizon(cfg, nh);
            const CsProblem p = to_problem(c);
            ParityRun run{nh, plan(p, c.scp, backend, c.reference), 0.0};
            const FullCovSolution fc = solve_fullcov_unconstrained(p, backend);
            run.fullcov = fc.cost;
            const bool conv = run.res.scp.report.status == ScpStatus::Converged && is_success(fc.status);
            const double ratio = run.res.scp.report.final_cost / fc.cost;
            ok = ok && conv && std::abs(ratio - 1.0) <= 1e-3;
            detail += fmt("N=%d ratio %.7f; ", nh, ratio);
            runs.push_back(std::move(run));
        }
        const double t = seconds_since(t0);
        verdict(3, ok && t < 60.0, "converged cost within 0.1% of the full-covariance baseline",
                detail + fmt("%.1f s < 60 s", t));

        // Convergence discipline on the same runs.
        bool disc = true;
        detail.clear();
        for (const auto &run : runs)
        {
            const auto &rep = run.res.scp.report;
            const auto &last = rep.iterations.back();
            double min_dl = std::numeric_limits<double>::infinity();
            for (const auto &it : rep.iterations)
                min_dl = std::min(min_dl, it.delta_l);
            const int count = static_cast<int>(rep.iterations.size());
            disc = disc && rep.status == ScpStatus::Converged && std::abs(last.delta_j) <= 1e-4 && last.chi <= 1e-4 &&
                   count <= 100 && min_dl >= -1e-9;
            detail += fmt("N=%d: %d iters, |dJ| %.1e, chi %.1e, min dL %.1e; ", run.horizon, count,
                          std::abs(last.delta_j), last.chi, min_dl);
        }
        detail.resize(detail.size() - 2);
        verdict(4, disc, "|dJ| <= 1e-4, chi <= 1e-4 within 100 iterations, dL >= -1e-9 throughout", detail);
        return runs;
    }

    void obstacle(const ConicBackend &backend)
    {
        const auto t0 = Clock::now();
        const ScenarioConfig cfg = load_config(kConfigDir / "obstacle_2d.toml");
        const CsProblem p = to_problem(cfg);
        const PlanResult res = plan(p, cfg.scp, backend, cfg.reference);
        const auto &rep = res.scp.report;
        const int samples = 10000;
        const McEnsemble ens = simulate(p.sys, res.scp.policy, p.mu_init, p.p_init, samples, cfg.montecarlo.seed);
        bool ok = rep.status == ScpStatus::Converged && rep.final_chi <= 1e-4;
        const double limit = violation_limit(0.005, samples);
        std::string rates;
        for (const auto &r : cc_violation_rates(ens, p))
        {
            ok = ok && r.max_rate <= limit;
            rates += fmt("%s %.4f, ", r.label.c_str(), r.max_rate);
        }
        const double t = seconds_since(t0);
        verdict(5, ok && t < 120.0, "obstacle scenario feasible and Monte Carlo rates within limit",
                fmt("%s, chi %.2e, M=%d, max rates ", to_string(rep.status), rep.final_chi, samples) + rates +
                    fmt("limit %.5f, %.1f s < 120 s", limit, t));
    }

    void rendezvous(const ConicBackend &backend)
    {
        const auto t0 = Clock::now();
        const ScenarioConfig cfg = load_config(kConfigDir / "rendezvous_cwh.toml");
        const CsProblem p = to_problem(cfg);
        const PlanResult res = plan(p, cfg.scp, backend, cfg.reference);
        const auto &rep = res.scp.report;
        const bool conv = rep.status == ScpStatus::Converged;
        const double ratio = terminal_check(res.scp.policy.s.back(), p.p_fin).ratio;
        const auto loss = loss_series(p.sys, res.scp.policy);
        const double max_loss = *std::max_element(loss.begin(), loss.end());
        const McEnsemble ens = simulate(p.sys, res.scp.policy, p.mu_init, p.p_init, 1000, cfg.montecarlo.seed);
        const EnvelopeCheck env = envelope_check(ens, res.scp.policy);
        const double t = seconds_since(t0);
        const bool ok = conv && cfg.scp.eps_opt == 1e-5 && cfg.scp.eps_feas == 1e-5 && ratio >= 0.999 &&
                        ratio <= 1.0 + 1e-6 && max_loss <= 1e-6 && env.pass && t < 60.0;
        verdict(6, ok, "rendezvous converges, terminal constraint active, lossless propagation, 3-sigma envelopes",
                fmt("%s at eps 1e-5 in %zu iters, terminal ratio %.8f in [0.999, 1+1e-6], max loss %.2e <= 1e-6, "
                    "envelope %.0f%% of nodes >= 97%%, %.1f s < 60 s",
                    to_string(rep.status), rep.iterations.size(), ratio, max_loss, 100.0 * env.nodes_passing, t));

        // Same scenario at tighter tolerances.
        ScpParams tight = cfg.scp;
        tight.eps_opt = tight.eps_feas = 1e-8;
        const PlanResult res2 = plan(p, tight, backend, cfg.reference);
        const auto loss2 = loss_series(p.sys, res2.scp.policy);
        const McEnsemble ens2 = simulate(p.sys, res2.scp.policy, p.mu_init, p.p_init, 1000, cfg.montecarlo.seed);
        info(6, fmt("with eps 1e-8: %s in %zu iters, terminal ratio %.8f, max loss %.2e, envelope %.0f%% of nodes",
                    to_string(res2.scp.report.status), res2.scp.report.iterations.size(),
                    terminal_check(res2.scp.policy.s.back(), p.p_fin).ratio,
                    *std::max_element(loss2.begin(), loss2.end()),
                    100.0 * envelope_check(ens2, res2.scp.policy).nodes_passing));
    }

    void scalability(const ScenarioConfig &cfg, const ConicBackend &backend)
    {
        const auto timed = [&](int nh) {
            const ScenarioConfig c = with_horizon(cfg, nh);
            const CsProblem p = to_problem(c);
            const auto t0 = Clock::now();
            const PlanResult res = plan(p, c.scp, backend, c.reference);
            return std::make_pair(seconds_since(t0), res.scp.report);
        };
        // Median of three short runs so that one scheduler hiccup does not set the baseline.
        std::vector<double> t10;
        ScpReport rep10;
        for (int i = 0; i < 3; ++i)
        {
            auto [t, rep] = timed(10);
            t10.push_back(t);
            rep10 = rep;
        }
        std::sort(t10.begin(), t10.end());
        const auto [t160, rep160] = timed(160);
        const double ratio = t160 / t10[1];
        const bool ok = rep10.status == ScpStatus::Converged && rep160.status == ScpStatus::Converged && ratio <= 50.0;
        verdict(7, ok, "wall clock at N=160 within 50x of N=10",
                fmt("N=10 %.2f s (%zu iters), N=160 %.2f s (%zu iters, %s), ratio %.1f <= 50", t10[1],
                    rep10.iterations.size(), t160, rep160.iterations.size(), to_string(rep160.status), ratio));
    }

    void exact_cc()
    {
        std::mt19937_64 rng(99);
        std::uniform_real_distribution<double> up(0.001, 0.2), offset(-0.5, 0.5), coin(0.0, 1.0);
        boost::math::normal_distribution<double> std_normal;
        CsProblem p;
        p.sys = build_double_integrator(3, 2, 1.0, 0.05);
        const int n = p.n(), m = p.m();
        int agree = 0, near_threshold = 0;
        for (int trial = 0; trial < 100; ++trial)
        {
            const bool state = trial % 2 == 0;
            const int dim = state ? n : m;
            Iterate z;
            z.mu = {randn(rng, n, 1), Vec::Zero(n), Vec::Zero(n)};
            z.s = {random_lower_pd(rng, n), Mat::Identity(n, n), Mat::Identity(n, n)};
            z.v = {randn(rng, m, 1), Vec::Zero(m)};
            z.l = {randn(rng, m, n), Mat::Zero(m, n)};
            const Vec mean = state ? z.mu[0] : z.v[0];
            const Mat root = state ? z.s[0] : z.l[0];

            AffineCc cc;
            cc.alpha = randn(rng, dim, 1);
            cc.p = up(rng);
            const double sigma = (root.transpose() * cc.alpha).norm();
            const double z_q = boost::math::quantile(std_normal, 1.0 - cc.p);
            // Thresholds near the decision boundary, some within 1e-6 standard deviations.
            const double shift = coin(rng) < 0.2 ? 1e-6 * offset(rng) : offset(rng);
            cc.beta = cc.alpha.dot(mean) + sigma * (z_q + shift);

            CcSpec spec;
            spec.label = "cc";
            spec.target = state ? CcTarget::State : CcTarget::Control;
            spec.form = cc;
            spec.nodes = {0};
            const bool descriptor_ok = descriptor_value(affine_cc_descriptor(p, spec, 0), z) <= 0.0;

            const double standardized = (cc.beta - cc.alpha.dot(mean)) / sigma;
            const bool oracle_ok = oracle_cdf(standardized) >= 1.0 - cc.p;
            if (std::abs(standardized - z_q) <= 1e-9)
            {
                ++near_threshold;
                ++agree;
            }
            else if (descriptor_ok == oracle_ok)
                ++agree;
        }
        verdict(8, agree == 100, "affine chance-constraint descriptor sign matches the normal CDF test",
                fmt("%d/100 agree, %d within quantile tolerance 1e-9", agree, near_threshold));
    }
} // namespace

int main()
{
    const auto backend = make_default_backend();
    propagation_equivalence();
    qr_derivative_check();
    const ScenarioConfig di = load_config(kConfigDir / "double_integrator_3d.toml");
    parity_and_convergence(di, *backend);
    obstacle(*backend);
    rendezvous(*backend);
    scalability(di, *backend);
    exact_cc();
    std::printf("%d of 8 criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
