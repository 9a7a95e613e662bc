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

// Command-line driver: solve, compare and mc over scenario files.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <limits>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "sqrtcs/config.hpp"
#include "sqrtcs/error.hpp"
#include "sqrtcs/fullcov.hpp"
#include "sqrtcs/pipeline.hpp"
#include "sqrtcs/report.hpp"
#include "sqrtcs/validate.hpp"

namespace fs = std::filesystem;
using namespace sqrtcs;

namespace
{
    enum Exit : int
    {
        kOk = 0,
        kInternal = 1,
        kConfig = 2,
        kBackend = 3,
        kNotConverged = 4,
        kMissingReport = 5
    };

    double max_of(const std::vector<double> &v) { return v.empty() ? 0.0 : *std::max_element(v.begin(), v.end()); }

    int cmd_solve(const fs::path &config, const fs::path &out)
    {
        const ScenarioConfig cfg = load_config(config);
        const CsProblem problem = to_problem(cfg);
        const auto backend = make_default_backend();
        const PlanResult res = plan(problem, cfg.scp, *backend, cfg.reference);
        write_solve_outputs(out, cfg, problem, res, backend->name());

        const auto &rep = res.scp.report;
        std::printf("%s: %s after %zu iterations, cost %.10g, chi %.3e, %.2f s\n", cfg.name.c_str(),
                    to_string(rep.status), rep.iterations.size(), rep.final_cost, rep.final_chi, rep.wall_time);
        if (rep.status == ScpStatus::Converged)
        {
            const auto tc = terminal_check(res.scp.policy.s.back(), problem.p_fin);
            std::printf("terminal ratio %.10f, max loss %.3e\n", tc.ratio,
                        max_of(loss_series(problem.sys, res.scp.policy)));
        }
        std::printf("wrote %s\n", (out / kReportFile).string().c_str());
        switch (rep.status)
        {
        case ScpStatus::Converged:
            return kOk;
        case ScpStatus::BackendFailure:
            std::fprintf(stderr, "backend failure: %s\n", rep.message.c_str());
            return kBackend;
        default:
            return kNotConverged;
        }
    }

    int cmd_compare(const fs::path &config, const fs::path &out)
    {
        const ScenarioConfig cfg = load_config(config);
        {
            const CsProblem base = to_problem(cfg);
            if (!std::holds_alternative<EoqCost>(base.cost) || !base.ccs.empty())
                throw ConfigError(config.string() + ": compare needs an EoQ cost and no chance constraints");
        }
        std::vector<int> horizons = cfg.compare_horizons;
        if (horizons.empty())
            horizons.push_back(cfg.dynamics.horizon);

        const auto backend = make_default_backend();
        std::vector<CompareRow> rows;
        int code = kOk;
        std::printf("%6s %14s %14s %10s %9s %9s\n", "N", "sqrt_cost", "fullcov_cost", "ratio", "sqrt_s", "full_s");
        for (int h : horizons)
        {
            const ScenarioConfig c = with_horizon(cfg, h);
            const CsProblem p = to_problem(c);
            CompareRow row;
            row.horizon = h;

            const PlanResult res = plan(p, c.scp, *backend, c.reference);
            row.sqrt_status = to_string(res.scp.report.status);
            row.sqrt_cost = res.scp.report.final_cost;
            row.sqrt_time = res.scp.report.wall_time;
            row.sqrt_iterations = static_cast<int>(res.scp.report.iterations.size());
            row.sqrt_max_loss = max_of(loss_series(p.sys, res.scp.policy));
            if (res.scp.report.status == ScpStatus::BackendFailure)
                code = kBackend;
            else if (res.scp.report.status != ScpStatus::Converged && code == kOk)
                code = kNotConverged;

            try
            {
                const FullCovSolution fc = solve_fullcov_unconstrained(p, *backend);
                row.fullcov_status = to_string(fc.status);
                row.fullcov_cost = fc.cost;
                row.fullcov_time = fc.solve_time;
                const auto gains = fc.gains();
                std::vector<double> loss;
                for (int k = 0; k < h; ++k)
                    loss.push_back(covariance_propagation_loss(p.sys, k, gains[k], fc.p[k], fc.p[k + 1]));
                row.fullcov_max_loss = max_of(loss);
                row.ratio = row.sqrt_cost / row.fullcov_cost;
            }
            catch (const BackendFailure &e)
            {
                row.fullcov_status = to_string(e.status());
                row.fullcov_cost = row.ratio = std::numeric_limits<double>::quiet_NaN();
                code = kBackend;
            }
            std::printf("%6d %14.8f %14.8f %10.7f %9.3f %9.3f\n", h, row.sqrt_cost, row.fullcov_cost, row.ratio,
                        row.sqrt_time, row.fullcov_time);
            rows.push_back(row);
        }
        write_compare_outputs(out, cfg, rows);
        std::printf("wrote %s\n", (out / kCompareCsv).string().c_str());
        return code;
    }

    int cmd_mc(const fs::path &config, const fs::path &report_path, std::optional<int> samples,
               std::optional<std::uint64_t> seed)
    {
        if (!fs::exists(report_path))
            throw ReportError(report_path.string() + ": report not found; run solve first");
        const ScenarioConfig cfg = load_config(config);
        const CsProblem problem = to_problem(cfg);
        const auto report = read_report(report_path);
        const Policy policy = policy_from_report(report);
        if (static_cast<int>(policy.v.size()) != problem.horizon() || policy.mu.front().size() != problem.n() ||
            policy.v.front().size() != problem.m())
            throw ConfigError(report_path.string() + ": report does not match the scenario dimensions");

        const int m = samples.value_or(cfg.montecarlo.samples);
        const std::uint64_t s = seed.value_or(cfg.montecarlo.seed);
        if (m < 1)
            throw ConfigError("--samples must be positive");
        const McEnsemble ens = simulate(problem.sys, policy, problem.mu_init, problem.p_init, m, s);
        const McSummary mc = summarize_ensemble(ens, problem, policy, cfg.report);
        append_mc_summary(report_path, mc, ens, cfg.montecarlo.export_samples);

        std::printf("%s: %d samples, seed %llu\n", cfg.name.c_str(), m, static_cast<unsigned long long>(s));
        for (std::size_t i = 0; i < mc.rates.size(); ++i)
            std::printf("  %-12s max rate %.5f (limit %.5f) %s\n", mc.rates[i].label.c_str(), mc.rates[i].max_rate,
                        mc.limits[i], mc.rates[i].max_rate <= mc.limits[i] ? "ok" : "EXCEEDED");
        std::printf("  terminal ratio planned %.8f", mc.planned_terminal.ratio);
        if (mc.has_sample_terminal)
            std::printf(", sample %.6f", mc.sample_terminal.ratio);
        std::printf("\n  3-sigma envelope: %.1f%% of nodes pass\n", 100.0 * mc.envelope.nodes_passing);
        if (mc.has_moments)
            std::printf("  moments: max mean z %.2f, max covariance error %.4f\n", mc.moments.max_mean_z,
                        mc.moments.max_cov_rel_err);
        std::printf("updated %s\n", report_path.string().c_str());
        return kOk;
    }

    template <class F>
    int guarded(F &&f)
    {
        try
        {
            return f();
        }
        catch (const ConfigError &e)
        {
            std::fprintf(stderr, "config error: %s\n", e.what());
            return kConfig;
        }
        catch (const ReportError &e)
        {
            std::fprintf(stderr, "report error: %s\n", e.what());
            return kMissingReport;
        }
        catch (const BackendFailure &e)
        {
            std::fprintf(stderr, "backend failure: %s\n", e.what());
            return kBackend;
        }
        catch (const UnsupportedCone &e)
        {
            std::fprintf(stderr, "backend failure: %s\n", e.what());
            return kBackend;
        }
        catch (const std::exception &e)
        {
            std::fprintf(stderr, "error: %s\n", e.what());
            return kInternal;
        }
    }
} // namespace

int main(int argc, char **argv)
{
    CLI::App app{"Chance-constrained covariance steering with square-root covariance propagation"};
    app.require_subcommand(1);
    app.footer("Exit codes: 0 ok, 1 internal error, 2 config error, 3 backend failure, 4 not converged, "
               "5 missing report.\nSQRTCS_BACKEND_TOL overrides the conic solver tolerances.");

    std::string config, out_dir, report;
    std::optional<int> samples;
    std::optional<std::uint64_t> seed;

    auto *solve = app.add_subcommand("solve", "Run the SCP solver and write report + CSV tables");
    solve->add_option("config", config, "Scenario TOML file")->required();
    solve->add_option("-o,--out", out_dir, "Output directory")->required();

    auto *compare = app.add_subcommand("compare", "Sweep horizons against the full-covariance baseline");
    compare->add_option("config", config, "Scenario TOML file")->required();
    compare->add_option("-o,--out", out_dir, "Output directory")->required();

    auto *mc = app.add_subcommand("mc", "Monte Carlo validation of a solved policy");
    mc->add_option("config", config, "Scenario TOML file")->required();
    mc->add_option("-r,--report", report, "report.json written by solve")->required();
    mc->add_option("-n,--samples", samples, "Override montecarlo.samples");
    mc->add_option("-s,--seed", seed, "Override montecarlo.seed");

    try
    {
        app.parse(argc, argv);
    }
    catch (const CLI::ParseError &e)
    {
        const int code = app.exit(e);
        return code == 0 ? kOk : kConfig;
    }

    if (*solve)
        return guarded([&] { return cmd_solve(config, out_dir); });
    if (*compare)
        return guarded([&] { return cmd_compare(config, out_dir); });
    return guarded([&] { return cmd_mc(config, report, samples, seed); });
}
