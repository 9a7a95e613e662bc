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
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "sqrtcs/pipeline.hpp"
#include "sqrtcs/problem.hpp"
#include "sqrtcs/scp.hpp"

namespace sqrtcs
{
    enum class DynamicsKind
    {
        DoubleIntegrator,
        Cwh,
        Explicit
    };

    struct DynamicsConfig
    {
        DynamicsKind kind = DynamicsKind::DoubleIntegrator;
        int horizon = 0;
        /// Exactly one of the two is set. For "cwh" only dt_s is accepted.
        std::optional<double> total_time_s;
        std::optional<double> dt_s;

        // double_integrator
        int dim = 0;
        double noise_density = 0.0;

        // cwh
        double orbit_radius_km = 0.0;
        double grav_param_km3_s2 = 0.0;
        double accel_noise = 0.0;

        // explicit, time invariant
        Mat a;
        Mat b;
        Mat g;
    };

    enum class CostKind
    {
        Eoq,
        Qon
    };

    /// Time-invariant weights; repeated over the horizon.
    struct CostConfig
    {
        CostKind kind = CostKind::Eoq;
        Mat q;
        Mat r;
        Mat wx;
        Mat wu;
        double p_j = 0.9;
    };

    struct MonteCarloConfig
    {
        int samples = 1000;
        std::uint64_t seed = 0;
        /// Trajectories written to the sample CSV.
        int export_samples = 100;
    };

    struct ReportConfig
    {
        /// State components of the 2D covariance-ellipse projection.
        int ellipse_i = 0;
        int ellipse_j = 1;
        int ellipse_points = 64;
    };

    struct ScenarioConfig
    {
        std::string name;
        DynamicsConfig dynamics;
        Vec mu_init;
        Vec mu_fin;
        Mat p_init;
        Mat p_fin;
        CostConfig cost;
        std::vector<CcSpec> chance_constraints;
        MatrixNorm matrix_norm = MatrixNorm::Spectral;
        ScpParams scp;
        ReferenceOptions reference;
        MonteCarloConfig montecarlo;
        /// Horizons for `compare`; empty means the dynamics horizon only.
        std::vector<int> compare_horizons;
        ReportConfig report;
    };

    /// Parses TOML text. Throws ConfigError naming the offending field.
    ScenarioConfig parse_config(std::string_view text, const std::string &source = "<string>");

    /// Throws ConfigError when the file cannot be read or parsed.
    ScenarioConfig load_config(const std::filesystem::path &path);

    /// TOML text that parses back to an identical configuration.
    std::string to_toml(const ScenarioConfig &cfg);

    /// Builds and validates the problem. Library validation errors are rethrown as ConfigError.
    CsProblem to_problem(const ScenarioConfig &cfg);

    /// Same configuration with a different horizon. A fixed total_time_s keeps the total
    /// time, a fixed dt_s keeps the step.
    ScenarioConfig with_horizon(const ScenarioConfig &cfg, int horizon);

    /// Field-wise equality; fields belonging to another dynamics or cost kind are ignored.
    bool operator==(const ScenarioConfig &a, const ScenarioConfig &b);

} // namespace sqrtcs
