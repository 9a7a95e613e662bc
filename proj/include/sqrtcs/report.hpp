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

#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "sqrtcs/config.hpp"
#include "sqrtcs/pipeline.hpp"
#include "sqrtcs/validate.hpp"

namespace sqrtcs
{
    /// Output files of `solve`, relative to the output directory.
    inline constexpr const char *kReportFile = "report.json";
    inline constexpr const char *kTrajectoryCsv = "trajectory.csv";
    inline constexpr const char *kEllipseCsv = "ellipses.csv";
    inline constexpr const char *kIterationCsv = "iterations.csv";
    inline constexpr const char *kLossCsv = "loss.csv";
    inline constexpr const char *kCompareCsv = "compare.csv";
    inline constexpr const char *kCompareReport = "compare.json";
    inline constexpr const char *kSamplesCsv = "mc_samples.csv";

    /// 3-sigma ellipse of the (i, j) projection of S S^T around (mu_i, mu_j), `points` samples.
    Mat ellipse_points(const Vec &mu, const Mat &s, int i, int j, int points);

    /// Report document of a finished `solve`. Timing fields are the only non-deterministic entries.
    nlohmann::json solve_report(const ScenarioConfig &cfg, const CsProblem &problem, const PlanResult &plan,
                                const std::string &backend_name);

    /// Writes the report and the per-node CSV tables into `dir` (created if needed).
    void write_solve_outputs(const std::filesystem::path &dir, const ScenarioConfig &cfg, const CsProblem &problem,
                             const PlanResult &plan, const std::string &backend_name);

    struct CompareRow
    {
        int horizon = 0;
        std::string sqrt_status;
        double sqrt_cost = 0.0;
        double sqrt_time = 0.0;
        int sqrt_iterations = 0;
        double sqrt_max_loss = 0.0;
        std::string fullcov_status;
        double fullcov_cost = 0.0;
        double fullcov_time = 0.0;
        double fullcov_max_loss = 0.0;
        double ratio = 0.0; // sqrt_cost / fullcov_cost
    };

    void write_compare_outputs(const std::filesystem::path &dir, const ScenarioConfig &cfg,
                               const std::vector<CompareRow> &rows);

    /// Parses a report file. Throws ReportError when missing or malformed.
    nlohmann::json read_report(const std::filesystem::path &path);

    /// Policy stored in a report. Throws ReportError.
    Policy policy_from_report(const nlohmann::json &report);

    struct McSummary
    {
        int samples = 0;
        std::uint64_t seed = 0;
        std::vector<CcRate> rates;
        std::vector<double> limits;
        TerminalCheck planned_terminal;
        bool has_sample_terminal = false; // needs at least n + 1 samples
        TerminalCheck sample_terminal;
        EnvelopeCheck envelope;
        bool has_moments = false; // needs at least two samples
        MomentCheck moments;
    };

    McSummary summarize_ensemble(const McEnsemble &ens, const CsProblem &problem, const Policy &policy,
                                 const ReportConfig &rc);

    nlohmann::json to_json(const McSummary &mc);

    /// Adds the summary under "monte_carlo" (replacing an earlier one) and writes the first
    /// `export_samples` trajectories next to the report.
    void append_mc_summary(const std::filesystem::path &report_path, const McSummary &mc, const McEnsemble &ens,
                           int export_samples);

} // namespace sqrtcs
