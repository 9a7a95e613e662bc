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

#include <algorithm>
#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "sqrtcs/error.hpp"
#include "sqrtcs/reformulate.hpp"
#include "sqrtcs/scp.hpp"
#include "scenarios.hpp"
#include "test_util.hpp"

using namespace sqrtcs;
using sqrtcs::testing::randn;
using sqrtcs::testing::random_spd;

namespace
{
    // Full-covariance optimum of the double integrator at N = 10, computed offline with
    // cvxpy + Clarabel by tests/oracles/fullcov_double_integrator.py.
    constexpr double kOracleCostN10 = 18.182430934902;

    Iterate random_controls(const CsProblem &p, std::mt19937_64 &rng)
    {
        std::vector<Vec> v(p.horizon());
        std::vector<Mat> l(p.horizon());
        for (int k = 0; k < p.horizon(); ++k)
        {
            v[k] = randn(rng, p.m(), 1);
            l[k] = 0.3 * randn(rng, p.m(), p.n());
        }
        return rollout(p, v, l);
    }

    std::vector<Vec> zero_lambda(const CsProblem &p)
    {
        return std::vector<Vec>(p.horizon(), Vec::Zero(tril_size(p.n())));
    }

    const ScpResult &double_integrator_n10()
    {
        static const ScpResult res = [] {
            const auto p = sqrtcs::testing::double_integrator_problem(10);
            const auto backend = make_default_backend();
            return solve(p, ScpParams{}, initial_iterate(p), *backend);
        }();
        return res;
    }
} // namespace

TEST(InitialGuess, ConstantWhenEqual)
{
    std::mt19937_64 rng(21);
    const Mat p = random_spd(rng, 4);
    const auto seq = initial_guess(p, p, 5);
    ASSERT_EQ(seq.size(), 6u);
    const Mat s = cholesky(p);
    for (const auto &sk : seq)
        EXPECT_LE((sk - s).norm(), 1e-14);
}

TEST(InitialGuess, GeodesicMidpoint)
{
    const auto seq = initial_guess(Mat::Identity(3, 3), 4.0 * Mat::Identity(3, 3), 2);
    ASSERT_EQ(seq.size(), 3u);
    EXPECT_LE((seq[0] - Mat::Identity(3, 3)).norm(), 1e-15);
    EXPECT_LE((seq[1] - std::sqrt(2.0) * Mat::Identity(3, 3)).norm(), 1e-14);
    EXPECT_LE((seq[2] - 2.0 * Mat::Identity(3, 3)).norm(), 1e-15);
}

TEST(InitialGuess, EndpointsAndPositiveDiagonal)
{
    std::mt19937_64 rng(22);
    const Mat a = random_spd(rng, 5), b = random_spd(rng, 5);
    const auto seq = initial_guess(a, b, 7);
    EXPECT_LE((seq.front() - cholesky(a)).norm(), 1e-14);
    EXPECT_LE((seq.back() - cholesky(b)).norm(), 1e-14);
    for (const auto &s : seq)
    {
        EXPECT_GT(s.diagonal().minCoeff(), 0.0);
        EXPECT_EQ(Mat(s.triangularView<Eigen::StrictlyUpper>()).norm(), 0.0);
    }
    Mat bad = Mat::Identity(5, 5);
    bad(4, 4) = -1.0;
    EXPECT_THROW(initial_guess(a, bad, 3), NotPositiveDefinite);
}

TEST(Defect, ZeroOnRolloutAndDetectsPerturbation)
{
    std::mt19937_64 rng(23);
    const auto p = sqrtcs::testing::double_integrator_problem(6);
    Iterate z = random_controls(p, rng);
    EXPECT_LE(nonlinear_defect(p, z).chi, 1e-13);

    for (double delta : {1e-4, 1e-3})
    {
        Iterate y = z;
        y.s[3](2, 1) += delta;
        const Defect d = nonlinear_defect(p, y);
        EXPECT_GE(d.chi, 0.5 * delta);
        double sq = 0.0;
        for (const auto &e : d.per_node)
            sq += e.squaredNorm();
        EXPECT_NEAR(d.chi, std::sqrt(sq), 1e-15);
        EXPECT_NEAR(d.chi, d.stacked.norm(), 1e-15);
    }
}

TEST(PenalizedCost, Examples)
{
    std::mt19937_64 rng(24);
    const auto p = sqrtcs::testing::double_integrator_problem(5);
    const Iterate z = random_controls(p, rng);
    const auto lam0 = zero_lambda(p);
    EXPECT_NEAR(penalized_cost(p, z, 10.0, lam0), objective_value(p, z), 1e-12);

    Iterate y = z;
    y.s[2](0, 0) += 0.01;
    y.s[4](3, 1) -= 0.02;
    const double chi = nonlinear_defect(p, y).chi;
    EXPECT_NEAR(penalized_cost(p, y, 10.0, lam0), objective_value(p, y) + 5.0 * chi * chi, 1e-12);

    std::vector<Vec> lam(5);
    for (auto &l : lam)
        l = randn(rng, 21, 1);
    const Defect d = nonlinear_defect(p, y);
    double lin = 0.0;
    for (int k = 0; k < 5; ++k)
        lin += lam[k].dot(d.per_node[k]);
    EXPECT_NEAR(penalized_cost(p, y, 10.0, lam), objective_value(p, y) + lin + 5.0 * chi * chi, 1e-12);
}

TEST(ScpParams, Validation)
{
    ScpParams ok;
    EXPECT_NO_THROW(ok.validate());
    auto bad = [](auto mutate) {
        ScpParams p;
        mutate(p);
        return p;
    };
    EXPECT_THROW(bad([](ScpParams &p) { p.eps_feas = 0.0; }).validate(), InvalidParameter);
    EXPECT_THROW(bad([](ScpParams &p) { p.rho1 = 0.8; }).validate(), InvalidParameter);
    EXPECT_THROW(bad([](ScpParams &p) { p.alpha1 = 1.0; }).validate(), InvalidParameter);
    EXPECT_THROW(bad([](ScpParams &p) { p.r_min = 20.0; }).validate(), InvalidParameter);
    EXPECT_THROW(bad([](ScpParams &p) { p.max_iter = 0; }).validate(), InvalidParameter);
}

TEST(Scp, StayPut)
{
    CsProblem p;
    p.sys.n = 2;
    p.sys.m = 2;
    p.sys.nw = 2;
    p.sys.horizon = 4;
    p.sys.a.assign(4, Mat::Identity(2, 2));
    p.sys.b.assign(4, Mat::Identity(2, 2));
    p.sys.g.assign(4, Mat::Zero(2, 2));
    p.mu_init = Vec::Zero(2);
    p.mu_fin = Vec::Zero(2);
    p.p_init = (Mat(2, 2) << 2.0, 0.5, 0.5, 1.0).finished();
    p.p_fin = p.p_init;
    EoqCost c;
    c.q.assign(4, Mat::Zero(2, 2));
    c.r.assign(4, Mat::Identity(2, 2));
    p.cost = c;
    const auto backend = make_default_backend();
    const auto res = solve(p, ScpParams{}, initial_iterate(p), *backend);
    ASSERT_EQ(res.report.status, ScpStatus::Converged) << res.report.message;
    EXPECT_NEAR(res.report.final_cost, 0.0, 1e-8);
    for (int k = 0; k < 4; ++k)
    {
        EXPECT_LE(res.policy.v[k].norm(), 1e-6);
        EXPECT_LE(res.z.l[k].norm(), 1e-4);
    }
}

TEST(Scp, DoubleIntegratorMatchesOracle)
{
    const auto &res = double_integrator_n10();
    const auto &rep = res.report;
    ASSERT_EQ(rep.status, ScpStatus::Converged) << rep.message;
    EXPECT_LE(rep.final_chi, 1e-4);
    EXPECT_LE(std::abs(rep.iterations.back().delta_j), 1e-4);
    EXPECT_LE(static_cast<int>(rep.iterations.size()), 101);
    EXPECT_LE(std::abs(rep.final_cost - kOracleCostN10) / kOracleCostN10, 1e-3);
}

TEST(Scp, PredictedReductionNonnegative)
{
    for (const auto &it : double_integrator_n10().report.iterations)
        EXPECT_GE(it.delta_l, -1e-9) << "iteration " << it.index;
}

TEST(Scp, TrustRegionAndWeightUpdates)
{
    const ScpParams prm;
    const auto &its = double_integrator_n10().report.iterations;
    for (std::size_t i = 1; i + 1 < its.size(); ++i)
    {
        const auto &a = its[i];
        const auto &b = its[i + 1];
        double r = a.r;
        if (!a.accepted || a.rho < prm.rho1)
            r = std::max(a.r / prm.alpha1, prm.r_min);
        else if (a.rho >= prm.rho2)
            r = std::min(prm.alpha2 * a.r, prm.r_max);
        EXPECT_DOUBLE_EQ(b.r, r) << i;
        if (!a.accepted)
            EXPECT_EQ(b.w, a.w) << i;
        else
            EXPECT_TRUE(b.w == a.w || b.w == std::min(prm.beta * a.w, prm.w_max)) << i;
    }
}

TEST(Scp, ReusedSolvesFollowRejections)
{
    const auto &its = double_integrator_n10().report.iterations;
    int reused = 0;
    for (std::size_t i = 1; i < its.size(); ++i)
    {
        if (!its[i].reused)
            continue;
        ++reused;
        EXPECT_FALSE(its[i - 1].accepted) << i;
        EXPECT_LT(its[i].r, its[i - 1].r) << i;
        EXPECT_EQ(its[i].cost, its[i - 1].cost) << i;
        EXPECT_EQ(its[i].delta_l, its[i - 1].delta_l) << i;
        EXPECT_EQ(its[i].solve_time, 0.0) << i;
    }
    EXPECT_GT(reused, 0);
}

TEST(Scp, GainRecovery)
{
    const auto &res = double_integrator_n10();
    for (std::size_t k = 0; k < res.policy.k.size(); ++k)
    {
        const Mat &l = res.z.l[k];
        EXPECT_LE((res.policy.k[k] * res.z.s[k] - l).norm(), 1e-10 * l.norm()) << k;
    }
}

TEST(Scp, MaxIterationsReportsHistory)
{
    const auto p = sqrtcs::testing::double_integrator_problem(10);
    ScpParams prm;
    prm.max_iter = 3;
    const auto backend = make_default_backend();
    const auto res = solve(p, prm, initial_iterate(p), *backend);
    EXPECT_EQ(res.report.status, ScpStatus::MaxIterations);
    EXPECT_EQ(res.report.iterations.size(), 4u);
    EXPECT_STREQ(to_string(res.report.status), "max_iter");
}
