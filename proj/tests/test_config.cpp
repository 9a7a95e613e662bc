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

#include <filesystem>
#include <fstream>
#include <random>
#include <string>

#include <gtest/gtest.h>

#include "sqrtcs/config.hpp"
#include "sqrtcs/error.hpp"
#include "sqrtcs/report.hpp"
#include "scenarios.hpp"

using namespace sqrtcs;

namespace
{
    const std::filesystem::path kConfigs = SQRTCS_CONFIG_DIR;

    std::string error_of(const std::string &text)
    {
        try
        {
            parse_config(text);
        }
        catch (const ConfigError &e)
        {
            return e.what();
        }
        return "";
    }

    const char *kMinimal = R"(
[dynamics]
kind = "double_integrator"
dim = 1
horizon = 3
dt_s = 0.5
noise_density = 0.1
[boundary]
mu_init = [0.0, 0.0]
p_init = [[1.0, 0.0], [0.0, 1.0]]
mu_fin = [1.0, 0.0]
p_fin = [[0.5, 0.0], [0.0, 0.5]]
[cost]
kind = "eoq"
q = [[0.0, 0.0], [0.0, 0.0]]
r = [[1.0]]
)";

    void expect_same_problem(const CsProblem &a, const CsProblem &b)
    {
        ASSERT_EQ(a.horizon(), b.horizon());
        for (int k = 0; k < a.horizon(); ++k)
        {
            EXPECT_EQ(a.sys.a[k], b.sys.a[k]);
            EXPECT_EQ(a.sys.b[k], b.sys.b[k]);
            EXPECT_EQ(a.sys.g[k], b.sys.g[k]);
        }
        EXPECT_EQ(a.mu_init, b.mu_init);
        EXPECT_EQ(a.mu_fin, b.mu_fin);
        EXPECT_EQ(a.p_init, b.p_init);
        EXPECT_EQ(a.p_fin, b.p_fin);
        EXPECT_EQ(a.cost.index(), b.cost.index());
        EXPECT_EQ(a.ccs.size(), b.ccs.size());
    }
} // namespace

TEST(Config, BundledScenariosMatchReferenceProblems)
{
    const auto di = to_problem(load_config(kConfigs / "double_integrator_3d.toml"));
    expect_same_problem(di, sqrtcs::testing::double_integrator_problem(10));
    EXPECT_EQ(std::get<EoqCost>(di.cost).q[3], std::get<EoqCost>(sqrtcs::testing::double_integrator_problem(10).cost).q[3]);

    const auto ob_cfg = load_config(kConfigs / "obstacle_2d.toml");
    const auto ob = to_problem(ob_cfg);
    expect_same_problem(ob, sqrtcs::testing::obstacle_problem(40));
    EXPECT_EQ(ob_cfg.scp.eps_opt, 1e-2);
    EXPECT_EQ(ob_cfg.scp.eps_feas, 1e-4);
    EXPECT_EQ(ob_cfg.montecarlo.samples, 10000);

    const auto rd_cfg = load_config(kConfigs / "rendezvous_cwh.toml");
    const auto rd = to_problem(rd_cfg);
    expect_same_problem(rd, sqrtcs::testing::rendezvous_problem());
    EXPECT_EQ(rd_cfg.scp.d_x, sqrtcs::testing::rendezvous_d_x());
    EXPECT_EQ(rd_cfg.scp.eps_opt, 1e-5);
    EXPECT_EQ(std::get<QonCost>(rd.cost).p_j, 0.99);
}

TEST(Config, RoundTripIsExact)
{
    for (const char *name : {"double_integrator_3d.toml", "obstacle_2d.toml", "rendezvous_cwh.toml"})
    {
        const auto cfg = load_config(kConfigs / name);
        const auto back = parse_config(to_toml(cfg));
        EXPECT_TRUE(back == cfg) << name;
        EXPECT_EQ(to_toml(back), to_toml(cfg)) << name;
    }

    // Values without a short decimal form survive.
    auto cfg = parse_config(kMinimal);
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> ud(-1.0, 1.0);
    cfg.mu_init << ud(rng) / 3.0, 1e-300 * ud(rng);
    cfg.p_init(0, 0) = 1.0 + std::ldexp(1.0, -52);
    cfg.montecarlo.seed = 123456789012345ULL;
    cfg.compare_horizons = {3, 6};
    cfg.dynamics.kind = DynamicsKind::Explicit;
    cfg.dynamics.dt_s.reset();
    cfg.dynamics.a = Mat::Identity(2, 2);
    cfg.dynamics.b = Mat::Ones(2, 1) * (1.0 / 7.0);
    cfg.dynamics.g = Mat::Identity(2, 2) * 0.1;
    const auto back = parse_config(to_toml(cfg));
    EXPECT_TRUE(back == cfg);
    EXPECT_EQ(back.mu_init(0), cfg.mu_init(0));
    EXPECT_EQ(back.p_init(0, 0), cfg.p_init(0, 0));
}

TEST(Config, FieldLevelErrors)
{
    std::string text = kMinimal;
    const auto cut = text.find("p_fin");
    const std::string no_pfin = text.substr(0, cut) + text.substr(text.find("\n", cut) + 1);
    EXPECT_NE(error_of(no_pfin).find("boundary.p_fin: missing"), std::string::npos) << error_of(no_pfin);

    std::string typo = text;
    typo.replace(typo.find("noise_density"), 13, "noise_densty");
    EXPECT_NE(error_of(typo).find("dynamics.noise_densty: unknown field"), std::string::npos);

    std::string both = text;
    both.replace(both.find("dt_s = 0.5"), 10, "dt_s = 0.5\ntotal_time_s = 1.5");
    EXPECT_NE(error_of(both).find("exactly one"), std::string::npos);

    std::string ragged = text;
    ragged.replace(ragged.find("[[1.0, 0.0], [0.0, 1.0]]"), 24, "[[1.0, 0.0], [0.0]]");
    EXPECT_NE(error_of(ragged).find("boundary.p_init"), std::string::npos);

    EXPECT_NE(error_of("[dynamics\n").find("<string>:"), std::string::npos);
    EXPECT_NE(error_of(text + "[scp]\nrho1 = 0.9\n").find("scp"), std::string::npos);

    // Shape problems are only visible once the problem is built.
    std::string bad_q = text;
    bad_q.replace(bad_q.find("q = [[0.0, 0.0], [0.0, 0.0]]"), 28, "q = [[0.0]]");
    EXPECT_THROW(to_problem(parse_config(bad_q)), ConfigError);
    std::string not_pd = text;
    not_pd.replace(not_pd.find("[[0.5, 0.0], [0.0, 0.5]]"), 24, "[[0.5, 0.0], [0.0, -0.5]]");
    EXPECT_THROW(to_problem(parse_config(not_pd)), ConfigError);

    EXPECT_THROW(load_config(kConfigs / "does_not_exist.toml"), ConfigError);
}

TEST(Config, WithHorizon)
{
    const auto cfg = load_config(kConfigs / "double_integrator_3d.toml");
    const auto p40 = to_problem(with_horizon(cfg, 40));
    EXPECT_EQ(p40.horizon(), 40);
    EXPECT_NEAR(p40.sys.a[0](0, 3), 3.0 / 40.0, 1e-15);
    EXPECT_EQ(std::get<EoqCost>(p40.cost).q.size(), 40u);

    const auto rd = load_config(kConfigs / "rendezvous_cwh.toml");
    const auto r7 = to_problem(with_horizon(rd, 7));
    EXPECT_EQ(r7.sys.a[0], to_problem(rd).sys.a[0]);
}

TEST(Report, EllipsePoints)
{
    Vec mu(3);
    mu << 1.0, 2.0, 3.0;
    Mat s = Mat::Zero(3, 3);
    s.diagonal() << 2.0, 0.5, 1.0;
    const Mat pts = ellipse_points(mu, s, 0, 1, 4);
    ASSERT_EQ(pts.rows(), 4);
    for (int t = 0; t < 4; ++t)
    {
        const double dx = (pts(t, 0) - 1.0) / 6.0, dy = (pts(t, 1) - 2.0) / 1.5;
        EXPECT_NEAR(dx * dx + dy * dy, 1.0, 1e-12);
    }
}

TEST(Report, PolicyRoundTrip)
{
    const auto p = sqrtcs::testing::double_integrator_problem(3);
    PlanResult res;
    res.convex_problem = p;
    res.scp.z = rollout(p, std::vector<Vec>(3, Vec::Ones(3)), std::vector<Mat>(3, 0.1 * Mat::Ones(3, 6)));
    res.scp.policy = make_policy(res.scp.z);
    res.scp.report.status = ScpStatus::Converged;
    ScenarioConfig cfg;
    cfg.name = "t";
    const auto j = solve_report(cfg, p, res, "test");
    const auto back = policy_from_report(nlohmann::json::parse(j.dump()));
    for (int k = 0; k < 3; ++k)
    {
        EXPECT_EQ(back.v[k], res.scp.policy.v[k]);
        EXPECT_EQ(back.k[k], res.scp.policy.k[k]);
    }
    EXPECT_EQ(back.s[3], res.scp.policy.s[3]);
    EXPECT_EQ(back.mu[3], res.scp.policy.mu[3]);
    EXPECT_THROW(policy_from_report(nlohmann::json::object()), ReportError);
    EXPECT_THROW(read_report("/nonexistent/report.json"), ReportError);
}
