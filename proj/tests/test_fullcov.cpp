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

#include <random>

#include <gtest/gtest.h>

#include "sqrtcs/error.hpp"
#include "sqrtcs/fullcov.hpp"
#include "scenarios.hpp"
#include "test_util.hpp"

using namespace sqrtcs;
using sqrtcs::testing::randn;
using sqrtcs::testing::random_spd;

namespace
{
    // Optimal costs from tests/oracles/fullcov_double_integrator.py (cvxpy + Clarabel).
    struct OracleCase
    {
        int horizon;
        double cost;
    };
    constexpr OracleCase kOracle[] = {{10, 18.182430934902}, {20, 35.884148667664}, {40, 71.365166810010}};
} // namespace

TEST(FullCov, MatchesIndependentOracle)
{
    const auto backend = make_default_backend();
    for (const auto &c : kOracle)
    {
        const auto p = sqrtcs::testing::double_integrator_problem(c.horizon);
        const auto sol = solve_fullcov_unconstrained(p, *backend);
        ASSERT_TRUE(is_success(sol.status)) << c.horizon;
        EXPECT_NEAR(sol.cost, c.cost, 1e-6 * c.cost) << c.horizon;
    }
}

TEST(FullCov, RelaxationTightAndFeasible)
{
    const auto p = sqrtcs::testing::double_integrator_problem(10);
    const auto backend = make_default_backend();
    const auto sol = solve_fullcov_unconstrained(p, *backend);
    ASSERT_EQ(sol.p.size(), 11u);
    EXPECT_LE((sol.p[0] - p.p_init).norm(), 1e-8);
    EXPECT_LE((sol.mu[10] - p.mu_fin).norm(), 1e-8);
    const Eigen::SelfAdjointEigenSolver<Mat> term(p.p_fin - sol.p[10]);
    EXPECT_GE(term.eigenvalues().minCoeff(), -1e-8);
    const auto gains = sol.gains();
    for (int k = 0; k < 10; ++k)
    {
        EXPECT_GT(Eigen::SelfAdjointEigenSolver<Mat>(sol.p[k]).eigenvalues().minCoeff(), 0.0);
        const Mat schur = sol.u[k] * sol.p[k].ldlt().solve(sol.u[k].transpose());
        EXPECT_LE((sol.y[k] - schur).norm(), 1e-6) << k;
        EXPECT_LE((gains[k] * sol.p[k] - sol.u[k]).norm(), 1e-10 * (1.0 + sol.u[k].norm())) << k;
        // The tight relaxation makes the recursion consistent with the recovered gain.
        EXPECT_LE(covariance_propagation_loss(p.sys, k, gains[k], sol.p[k], sol.p[k + 1]), 1e-6) << k;
    }
}

TEST(FullCov, StayPutZeroCost)
{
    CsProblem p;
    p.sys.n = 2;
    p.sys.m = 2;
    p.sys.nw = 2;
    p.sys.horizon = 3;
    p.sys.a.assign(3, Mat::Identity(2, 2));
    p.sys.b.assign(3, Mat::Identity(2, 2));
    p.sys.g.assign(3, Mat::Zero(2, 2));
    p.mu_init = Vec::Zero(2);
    p.mu_fin = Vec::Zero(2);
    p.p_init = Mat::Identity(2, 2);
    p.p_fin = Mat::Identity(2, 2);
    EoqCost c;
    c.q.assign(3, Mat::Zero(2, 2));
    c.r.assign(3, Mat::Identity(2, 2));
    p.cost = c;
    const auto backend = make_default_backend();
    const auto sol = solve_fullcov_unconstrained(p, *backend);
    EXPECT_NEAR(sol.cost, 0.0, 1e-7);
    for (const auto &u : sol.u)
        EXPECT_LE(u.norm(), 1e-4);
}

TEST(FullCov, RejectsUnsupportedProblems)
{
    const auto backend = make_default_backend();
    auto q = sqrtcs::testing::rendezvous_problem();
    EXPECT_THROW(solve_fullcov_unconstrained(q, *backend), InvalidSpec);
    auto o = sqrtcs::testing::obstacle_problem(10);
    EXPECT_THROW(solve_fullcov_unconstrained(o, *backend), InvalidSpec);
}

TEST(Loss, Examples)
{
    std::mt19937_64 rng(31);
    auto sys = sqrtcs::testing::double_integrator_problem(3).sys;
    const Mat p = random_spd(rng, 6);
    const Mat k = randn(rng, 3, 6);
    const Mat next = propagate_cov_full(sys, 1, p, k);
    EXPECT_LE(covariance_propagation_loss(sys, 1, k, p, next), 1e-15);
    EXPECT_NEAR(covariance_propagation_loss(sys, 1, k, p, 2.0 * next), 0.5, 1e-14);
    EXPECT_THROW(covariance_propagation_loss(sys, 1, k, p, Mat::Identity(5, 5)), ShapeMismatch);
    EXPECT_THROW(covariance_propagation_loss(sys, 1, Mat::Zero(3, 5), p, next), ShapeMismatch);
}
