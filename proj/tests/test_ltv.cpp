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

#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "sqrtcs/error.hpp"
#include "sqrtcs/ltv.hpp"
#include "test_util.hpp"

using namespace sqrtcs;
using sqrtcs::testing::randn;
using sqrtcs::testing::randn_vec;
using sqrtcs::testing::random_lower_pd;
using sqrtcs::testing::rel_fro;

namespace
{
    LtvSystem random_system(std::mt19937_64 &rng, int n, int m, int nw)
    {
        LtvSystem sys;
        sys.n = n;
        sys.m = m;
        sys.nw = nw;
        sys.horizon = 1;
        sys.a = {randn(rng, n, n)};
        sys.b = {randn(rng, n, m)};
        sys.g = {0.3 * randn(rng, n, nw)};
        return sys;
    }

    // Closed-form CWH state transition matrix.
    Mat cwh_stm(double nm, double t)
    {
        const double c = std::cos(nm * t), s = std::sin(nm * t);
        Mat phi = Mat::Zero(6, 6);
        phi(0, 0) = 4 - 3 * c;
        phi(1, 0) = 6 * (s - nm * t);
        phi(1, 1) = 1;
        phi(2, 2) = c;
        phi(0, 3) = s / nm;
        phi(0, 4) = 2 * (1 - c) / nm;
        phi(1, 3) = 2 * (c - 1) / nm;
        phi(1, 4) = (4 * s - 3 * nm * t) / nm;
        phi(2, 5) = s / nm;
        phi(3, 0) = 3 * nm * s;
        phi(4, 0) = 6 * nm * (c - 1);
        phi(5, 2) = -nm * s;
        phi(3, 3) = c;
        phi(3, 4) = 2 * s;
        phi(4, 3) = -2 * s;
        phi(4, 4) = 4 * c - 3;
        phi(5, 5) = c;
        return phi;
    }
} // namespace

TEST(DoubleIntegrator, ThreeAxisMatrices)
{
    const auto sys = build_double_integrator(3, 10, 3.0, 0.05);
    ASSERT_EQ(sys.n, 6);
    ASSERT_EQ(sys.m, 3);
    ASSERT_EQ(sys.horizon, 10);
    EXPECT_NEAR(sys.a[0](0, 3), 0.3, 1e-15);
    EXPECT_NEAR(sys.b[0](0, 0), 0.045, 1e-15);
    EXPECT_NEAR(sys.b[0](3, 0), 0.3, 1e-15);
    EXPECT_NEAR(sys.g[0](0, 0), 0.12247448713915890, 1e-15);
    EXPECT_LT((sys.g[0] - sys.g[0](0, 0) * Mat::Identity(6, 6)).norm(), 1e-16);
}

TEST(DoubleIntegrator, NoiselessUnitStep)
{
    const auto sys = build_double_integrator_dt(1, 4, 1.0, 0.0);
    Mat a(2, 2);
    a << 1, 1, 0, 1;
    EXPECT_TRUE(sys.a[0] == a);
    EXPECT_EQ(sys.g[0].norm(), 0.0);
}

TEST(DoubleIntegrator, PlanarObstacleStep)
{
    const auto sys = build_double_integrator(2, 30, 30.0, 0.005);
    EXPECT_NEAR(sys.g[0](3, 3), std::sqrt(0.005), 1e-16);
    EXPECT_EQ(sys.n, 4);
}

TEST(DoubleIntegrator, InvalidDimension)
{
    EXPECT_THROW(build_double_integrator(4, 10, 1.0, 0.1), InvalidDimension);
    EXPECT_THROW(build_double_integrator(0, 10, 1.0, 0.1), InvalidDimension);
}

TEST(Cwh, MeanMotion)
{
    EXPECT_NEAR(cwh_mean_motion(7228.0, 3.986e5), std::sqrt(3.986e5 / std::pow(7228.0, 3)), 1e-18);
    EXPECT_NEAR(cwh_mean_motion(7228.0, 3.986e5), 1.0274e-3, 1e-7);
}

TEST(Cwh, ZohMatchesClosedFormTransition)
{
    const double dt = 30.0;
    const auto sys = build_cwh_zoh(7228.0, 3.986e5, dt, 14, 1e-6);
    const double nm = cwh_mean_motion(7228.0, 3.986e5);
    const Mat phi = cwh_stm(nm, dt);
    EXPECT_LT((sys.a[0] * phi.inverse() - Mat::Identity(6, 6)).norm(), 1e-10);

    // B = int_0^dt Phi(tau) Bc dtau by composite Simpson.
    const int panels = 200;
    Mat acc = Mat::Zero(6, 3);
    for (int i = 0; i <= panels; ++i)
    {
        const double w = (i == 0 || i == panels) ? 1.0 : (i % 2 ? 4.0 : 2.0);
        acc += w * cwh_stm(nm, dt * i / panels).rightCols(3);
    }
    acc *= dt / (3.0 * panels);
    EXPECT_LT(rel_fro(sys.b[0], acc), 1e-10);
    EXPECT_NEAR(sys.g[0](3, 0), 1e-6 * std::sqrt(dt), 1e-20);
    EXPECT_EQ(sys.g[0].topRows(3).norm(), 0.0);
}

TEST(Cwh, ZeroGravityLimitIsDoubleIntegrator)
{
    const auto cwh = build_cwh_zoh(1e9, 1e-12, 10.0, 3, 1e-3);
    const auto di = build_double_integrator_dt(3, 3, 10.0, 0.0);
    EXPECT_LT((cwh.a[0] - di.a[0]).norm(), 1e-9);
    EXPECT_LT((cwh.b[0] - di.b[0]).norm(), 1e-9);
    EXPECT_THROW(build_cwh_zoh(-1.0, 1.0, 1.0, 3, 1.0), InvalidParameter);
}

TEST(PropagateMean, Basics)
{
    const auto sys = build_double_integrator_dt(1, 2, 1.0, 0.0);
    Vec mu(2);
    mu << 0, 1;
    const Vec next = propagate_mean(sys, 0, mu, Vec::Zero(1));
    EXPECT_EQ(next(0), 1.0);
    EXPECT_EQ(next(1), 1.0);
    EXPECT_THROW(propagate_mean(sys, 0, Vec::Zero(3), Vec::Zero(1)), ShapeMismatch);
    EXPECT_THROW(propagate_mean(sys, 2, mu, Vec::Zero(1)), ShapeMismatch);
}

TEST(PropagateMean, MonteCarloSampleMean)
{
    std::mt19937_64 rng(99);
    const auto sys = random_system(rng, 3, 2, 3);
    const Vec mu = randn_vec(rng, 3);
    const Vec v = randn_vec(rng, 2);
    const Mat s = random_lower_pd(rng, 3);
    const Mat k = 0.2 * randn(rng, 2, 3);
    const Mat p_next = propagate_cov_full(sys, 0, s * s.transpose(), k);

    const int draws = 1000000;
    std::normal_distribution<double> nd;
    Vec sum = Vec::Zero(3);
    for (int i = 0; i < draws; ++i)
    {
        Vec e(3), w(3);
        for (int j = 0; j < 3; ++j)
        {
            e(j) = nd(rng);
            w(j) = nd(rng);
        }
        const Vec dx = s * e;
        const Vec x = mu + dx;
        const Vec u = v + k * dx;
        sum += sys.a[0] * x + sys.b[0] * u + sys.g[0] * w;
    }
    const Vec mean = sum / draws;
    const Vec expect = propagate_mean(sys, 0, mu, v);
    for (int j = 0; j < 3; ++j)
        EXPECT_LE(std::abs(mean(j) - expect(j)), 3.0 * std::sqrt(p_next(j, j) / draws)) << j;
}

TEST(PropagateCov, TrivialCases)
{
    LtvSystem sys;
    sys.n = 2;
    sys.m = 1;
    sys.nw = 2;
    sys.horizon = 1;
    sys.a = {Mat::Identity(2, 2)};
    sys.b = {Mat::Ones(2, 1)};
    sys.g = {Mat::Zero(2, 2)};
    Mat p(2, 2);
    p << 2, 0.5, 0.5, 1;
    EXPECT_LT((propagate_cov_full(sys, 0, p, Mat::Zero(1, 2)) - p).norm(), 1e-15);

    const Mat s = cholesky(p);
    EXPECT_LT((propagate_cov_sqrt(sys, 0, s, Mat::Zero(1, 2)) - s).norm(), 1e-14);

    sys.a = {Mat::Zero(2, 2)};
    Mat g(2, 2);
    g << 1, 0, 2, 3;
    sys.g = {g};
    EXPECT_LT((propagate_cov_full(sys, 0, p, Mat::Zero(1, 2)) - g * g.transpose()).norm(), 1e-14);

    sys.a = {Mat::Identity(2, 2)};
    sys.g = {Mat::Identity(2, 2)};
    const Mat s_next = propagate_cov_sqrt(sys, 0, Mat::Identity(2, 2), Mat::Zero(1, 2));
    EXPECT_LT((s_next - std::sqrt(2.0) * Mat::Identity(2, 2)).norm(), 1e-15);
}

TEST(PropagateCov, SqrtMatchesFullRandom)
{
    std::mt19937_64 rng(2024);
    for (int trial = 0; trial < 1000; ++trial)
    {
        const int n = 1 + trial % 8;
        const int m = 1 + trial % 4;
        const auto sys = random_system(rng, n, m, n);
        const Mat s = random_lower_pd(rng, n);
        const Mat l = randn(rng, m, n);
        const Mat s_next = propagate_cov_sqrt(sys, 0, s, l);
        const Mat k = gain_from_sqrt(l, s);
        const Mat p_next = propagate_cov_full(sys, 0, s * s.transpose(), k);
        ASSERT_LE(rel_fro(s_next * s_next.transpose(), p_next), 1e-12) << "trial " << trial;
        ASSERT_TRUE((s_next.diagonal().array() > 0).all());
        ASSERT_EQ(Mat(s_next.triangularView<Eigen::StrictlyUpper>()).norm(), 0.0);

        // Gain recovery: K S = L and L L^T = K P K^T.
        ASSERT_LE((k * s - l).norm(), 1e-10 * std::max(1.0, l.norm()));
        ASSERT_LE(rel_fro(k * s * s.transpose() * k.transpose(), l * l.transpose()), 1e-10);
    }
}

TEST(Linearization, ExactAtReference)
{
    std::mt19937_64 rng(8);
    const auto sys = random_system(rng, 4, 2, 4);
    const Mat s = random_lower_pd(rng, 4);
    const Mat l = randn(rng, 2, 4);
    const auto lin = linearize_sqrt_step(sys, 0, s, l);
    EXPECT_TRUE(lin.predict(sys, Mat::Zero(4, 4), Mat::Zero(2, 4)) == propagate_cov_sqrt(sys, 0, s, l));
    EXPECT_LT((lin.qr.q * lin.qr.r - lin.x_ref.transpose()).norm(), 1e-12 * lin.x_ref.norm());
}

TEST(Linearization, SecondOrderAccurate)
{
    std::mt19937_64 rng(9);
    for (int trial = 0; trial < 20; ++trial)
    {
        const auto sys = random_system(rng, 4, 2, 4);
        const Mat s = random_lower_pd(rng, 4);
        const Mat l = randn(rng, 2, 4);
        const Mat ds = Mat(randn(rng, 4, 4).triangularView<Eigen::Lower>());
        const Mat dl = randn(rng, 2, 4);
        const auto lin = linearize_sqrt_step(sys, 0, s, l);
        auto err = [&](double h) {
            return (propagate_cov_sqrt(sys, 0, s + h * ds, l + h * dl) - lin.predict(sys, h * ds, h * dl)).norm();
        };
        EXPECT_NEAR(err(1e-3) / err(5e-4), 4.0, 0.25);
        const Mat pred = lin.predict(sys, ds, dl);
        EXPECT_EQ(Mat(pred.triangularView<Eigen::StrictlyUpper>()).norm(), 0.0);
    }
}
