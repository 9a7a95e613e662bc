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

#include "sqrtcs/report.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numbers>

#include "sqrtcs/error.hpp"

namespace sqrtcs
{
    namespace
    {
        using nlohmann::json;

        json to_json(const Vec &v)
        {
            json a = json::array();
            for (Eigen::Index i = 0; i < v.size(); ++i)
                a.push_back(v(i));
            return a;
        }

        json to_json(const Mat &m)
        {
            json a = json::array();
            for (Eigen::Index i = 0; i < m.rows(); ++i)
                a.push_back(to_json(Vec(m.row(i).transpose())));
            return a;
        }

        // Non-finite numbers become null, which nlohmann would otherwise emit anyway.
        json number(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

        Vec vec_from(const json &j)
        {
            Vec v(static_cast<Eigen::Index>(j.size()));
            for (std::size_t i = 0; i < j.size(); ++i)
                v(static_cast<Eigen::Index>(i)) = j.at(i).get<double>();
            return v;
        }

        Mat mat_from(const json &j)
        {
            if (j.empty())
                return Mat();
            Mat m(static_cast<Eigen::Index>(j.size()), static_cast<Eigen::Index>(j.at(0).size()));
            for (std::size_t i = 0; i < j.size(); ++i)
            {
                if (j.at(i).size() != static_cast<std::size_t>(m.cols()))
                    throw ReportError("ragged matrix in report");
                for (std::size_t c = 0; c < j.at(i).size(); ++c)
                    m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) = j.at(i).at(c).get<double>();
            }
            return m;
        }

        std::ofstream open_out(const std::filesystem::path &p)
        {
            std::ofstream os(p);
            if (!os)
                throw ReportError(p.string() + ": cannot open for writing");
            os << std::setprecision(17);
            return os;
        }

        void write_json(const std::filesystem::path &p, const json &j)
        {
            auto os = open_out(p);
            os << j.dump(2) << "\n";
            if (!os)
                throw ReportError(p.string() + ": write failed");
        }

        json iteration_json(const ScpIteration &it)
        {
            return {{"index", it.index},       {"delta_j", number(it.delta_j)}, {"delta_l", number(it.delta_l)},
                    {"rho", number(it.rho)},   {"chi", number(it.chi)},         {"r", it.r},
                    {"w", it.w},               {"cost", number(it.cost)},       {"accepted", it.accepted},
                    {"solve_time_s", it.solve_time},
                    {"solver_iterations", it.solver_iterations},
                    {"reused", it.reused}};
        }

        json rate_json(const CcRate &r, double limit)
        {
            return {{"label", r.label},       {"p", r.p},           {"limit", limit},
                    {"max_rate", r.max_rate}, {"pass", r.max_rate <= limit}, {"nodes", r.nodes},
                    {"node_rates", r.node_rates}};
        }
    } // namespace

    Mat ellipse_points(const Vec &mu, const Mat &s, int i, int j, int points)
    {
        const Mat p = s * s.transpose();
        Eigen::Matrix2d p2;
        p2 << p(i, i), p(i, j), p(j, i), p(j, j);
        // Symmetric root handles a degenerate projection.
        const Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(p2);
        const Eigen::Matrix2d root =
            es.eigenvectors() * es.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal();
        Mat out(points, 2);
        for (int t = 0; t < points; ++t)
        {
            const double th = 2.0 * std::numbers::pi * t / points;
            const Eigen::Vector2d d = 3.0 * root * Eigen::Vector2d(std::cos(th), std::sin(th));
            out(t, 0) = mu(i) + d(0);
            out(t, 1) = mu(j) + d(1);
        }
        return out;
    }

    nlohmann::json solve_report(const ScenarioConfig &cfg, const CsProblem &problem, const PlanResult &plan,
                                const std::string &backend_name)
    {
        const auto &rep = plan.scp.report;
        const auto &pol = plan.scp.policy;
        json j;
        j["schema"] = "sqrtcs.report/1";
        j["scenario"] = cfg.name;
        j["backend"] = backend_name;
        j["n"] = problem.n();
        j["m"] = problem.m();
        j["horizon"] = problem.horizon();
        j["status"] = to_string(rep.status);
        j["converged"] = rep.status == ScpStatus::Converged;
        j["message"] = rep.message;
        j["final_cost"] = number(rep.final_cost);
        j["final_chi"] = number(rep.final_chi);
        j["eps_opt"] = cfg.scp.eps_opt;
        j["eps_feas"] = cfg.scp.eps_feas;
        j["wall_time_s"] = rep.wall_time;
        j["iteration_count"] = static_cast<int>(rep.iterations.size());
        json its = json::array();
        for (const auto &it : rep.iterations)
            its.push_back(iteration_json(it));
        j["iterations"] = its;

        json mu = json::array(), s = json::array(), v = json::array(), k = json::array();
        for (const auto &x : pol.mu)
            mu.push_back(to_json(x));
        for (const auto &x : pol.s)
            s.push_back(to_json(x));
        for (const auto &x : pol.v)
            v.push_back(to_json(x));
        for (const auto &x : pol.k)
            k.push_back(to_json(x));
        j["policy"] = {{"mu", mu}, {"s", s}, {"v", v}, {"k", k}};

        if (!plan.reference_mu.empty())
        {
            json ref = json::array();
            for (const auto &x : plan.reference_mu)
                ref.push_back(to_json(x));
            j["reference_mu"] = ref;
        }

        const auto tc = terminal_check(pol.s.back(), problem.p_fin);
        j["terminal"] = {{"ratio", tc.ratio}, {"pass", tc.pass}};
        const auto loss = loss_series(problem.sys, pol);
        j["loss"] = loss;
        j["max_loss"] = loss.empty() ? 0.0 : *std::max_element(loss.begin(), loss.end());
        return j;
    }

    void write_solve_outputs(const std::filesystem::path &dir, const ScenarioConfig &cfg, const CsProblem &problem,
                             const PlanResult &plan, const std::string &backend_name)
    {
        std::filesystem::create_directories(dir);
        const json rep = solve_report(cfg, problem, plan, backend_name);
        write_json(dir / kReportFile, rep);

        const auto &pol = plan.scp.policy;
        const int n = problem.n(), m = problem.m(), nh = problem.horizon();
        {
            auto os = open_out(dir / kTrajectoryCsv);
            os << "k";
            for (int i = 0; i < n; ++i)
                os << ",mu_" << i;
            for (int i = 0; i < n; ++i)
                os << ",sigma_" << i;
            for (int i = 0; i < m; ++i)
                os << ",v_" << i;
            os << "\n";
            for (int k = 0; k <= nh; ++k)
            {
                os << k;
                for (int i = 0; i < n; ++i)
                    os << "," << pol.mu[k](i);
                const Vec sigma = (pol.s[k] * pol.s[k].transpose()).diagonal().cwiseSqrt();
                for (int i = 0; i < n; ++i)
                    os << "," << sigma(i);
                for (int i = 0; i < m; ++i)
                {
                    os << ",";
                    if (k < nh)
                        os << pol.v[k](i);
                }
                os << "\n";
            }
        }
        {
            auto os = open_out(dir / kEllipseCsv);
            os << "k,point,x_" << cfg.report.ellipse_i << ",x_" << cfg.report.ellipse_j << "\n";
            for (int k = 0; k <= nh; ++k)
            {
                const Mat pts =
                    ellipse_points(pol.mu[k], pol.s[k], cfg.report.ellipse_i, cfg.report.ellipse_j,
                                   cfg.report.ellipse_points);
                for (int t = 0; t < pts.rows(); ++t)
                    os << k << "," << t << "," << pts(t, 0) << "," << pts(t, 1) << "\n";
            }
        }
        {
            auto os = open_out(dir / kIterationCsv);
            os << "index,delta_j,delta_l,rho,chi,r,w,cost,accepted,solve_time_s,solver_iterations,reused\n";
            for (const auto &it : plan.scp.report.iterations)
                os << it.index << "," << it.delta_j << "," << it.delta_l << "," << it.rho << "," << it.chi << ","
                   << it.r << "," << it.w << "," << it.cost << "," << (it.accepted ? 1 : 0) << "," << it.solve_time << ","
                   << it.solver_iterations << "," << (it.reused ? 1 : 0) << "\n";
        }
        {
            auto os = open_out(dir / kLossCsv);
            os << "k,loss\n";
            const auto &loss = rep.at("loss");
            for (std::size_t k = 0; k < loss.size(); ++k)
                os << k << "," << loss[k].get<double>() << "\n";
        }
    }

    void write_compare_outputs(const std::filesystem::path &dir, const ScenarioConfig &cfg,
                               const std::vector<CompareRow> &rows)
    {
        std::filesystem::create_directories(dir);
        json arr = json::array();
        auto os = open_out(dir / kCompareCsv);
        os << "horizon,sqrt_status,sqrt_cost,sqrt_time_s,sqrt_iterations,sqrt_max_loss,fullcov_status,fullcov_cost,"
              "fullcov_time_s,fullcov_max_loss,cost_ratio\n";
        for (const auto &r : rows)
        {
            os << r.horizon << "," << r.sqrt_status << "," << r.sqrt_cost << "," << r.sqrt_time << ","
               << r.sqrt_iterations << "," << r.sqrt_max_loss << "," << r.fullcov_status << "," << r.fullcov_cost
               << "," << r.fullcov_time << "," << r.fullcov_max_loss << "," << r.ratio << "\n";
            arr.push_back({{"horizon", r.horizon},
                           {"sqrt_status", r.sqrt_status},
                           {"sqrt_cost", number(r.sqrt_cost)},
                           {"sqrt_time_s", r.sqrt_time},
                           {"sqrt_iterations", r.sqrt_iterations},
                           {"sqrt_max_loss", number(r.sqrt_max_loss)},
                           {"fullcov_status", r.fullcov_status},
                           {"fullcov_cost", number(r.fullcov_cost)},
                           {"fullcov_time_s", r.fullcov_time},
                           {"fullcov_max_loss", number(r.fullcov_max_loss)},
                           {"cost_ratio", number(r.ratio)}});
        }
        write_json(dir / kCompareReport, {{"schema", "sqrtcs.compare/1"}, {"scenario", cfg.name}, {"rows", arr}});
    }

    nlohmann::json read_report(const std::filesystem::path &path)
    {
        std::ifstream in(path);
        if (!in)
            throw ReportError(path.string() + ": report not found");
        try
        {
            return json::parse(in);
        }
        catch (const json::exception &e)
        {
            throw ReportError(path.string() + ": " + e.what());
        }
    }

    Policy policy_from_report(const nlohmann::json &report)
    {
        try
        {
            const auto &p = report.at("policy");
            Policy pol;
            for (const auto &x : p.at("mu"))
                pol.mu.push_back(vec_from(x));
            for (const auto &x : p.at("s"))
                pol.s.push_back(mat_from(x));
            for (const auto &x : p.at("v"))
                pol.v.push_back(vec_from(x));
            for (const auto &x : p.at("k"))
                pol.k.push_back(mat_from(x));
            if (pol.mu.size() != pol.v.size() + 1 || pol.s.size() != pol.mu.size() || pol.k.size() != pol.v.size())
                throw ReportError("report policy has inconsistent lengths");
            return pol;
        }
        catch (const json::exception &e)
        {
            throw ReportError(std::string("report has no usable policy: ") + e.what());
        }
    }

    McSummary summarize_ensemble(const McEnsemble &ens, const CsProblem &problem, const Policy &policy,
                                 const ReportConfig &rc)
    {
        McSummary mc;
        mc.samples = ens.samples;
        mc.seed = ens.seed;
        mc.rates = cc_violation_rates(ens, problem);
        for (const auto &r : mc.rates)
            mc.limits.push_back(violation_limit(r.p, ens.samples));
        mc.planned_terminal = terminal_check(policy.s.back(), problem.p_fin);
        if (ens.samples > ens.n)
        {
            try
            {
                mc.sample_terminal = terminal_check(ens, problem.p_fin);
                mc.has_sample_terminal = true;
            }
            catch (const NotPositiveDefinite &)
            {
            }
        }
        mc.envelope = envelope_check(ens, policy, rc.ellipse_i, rc.ellipse_j);
        if (ens.samples >= 2)
        {
            mc.moments = moment_check(ens, policy);
            mc.has_moments = true;
        }
        return mc;
    }

    nlohmann::json to_json(const McSummary &mc)
    {
        json rates = json::array();
        for (std::size_t i = 0; i < mc.rates.size(); ++i)
            rates.push_back(rate_json(mc.rates[i], mc.limits[i]));
        json j = {{"samples", mc.samples},
                  {"seed", mc.seed},
                  {"violation_rates", rates},
                  {"terminal_planned", {{"ratio", mc.planned_terminal.ratio}, {"pass", mc.planned_terminal.pass}}},
                  {"envelope",
                   {{"expected", mc.envelope.expected},
                    {"node_threshold", mc.envelope.node_threshold},
                    {"inside", mc.envelope.inside},
                    {"nodes_passing", mc.envelope.nodes_passing},
                    {"pass", mc.envelope.pass}}}};
        if (mc.has_sample_terminal)
            j["terminal_sample"] = {{"ratio", mc.sample_terminal.ratio}, {"pass", mc.sample_terminal.pass}};
        else
            j["terminal_sample"] = nullptr;
        if (mc.has_moments)
            j["moments"] = {{"max_mean_z", mc.moments.max_mean_z},
                            {"max_cov_rel_err", mc.moments.max_cov_rel_err},
                            {"mean_z", mc.moments.mean_z},
                            {"cov_rel_err", mc.moments.cov_rel_err}};
        else
            j["moments"] = nullptr;
        return j;
    }

    void append_mc_summary(const std::filesystem::path &report_path, const McSummary &mc, const McEnsemble &ens,
                           int export_samples)
    {
        json rep = read_report(report_path);
        rep["monte_carlo"] = to_json(mc);
        write_json(report_path, rep);

        const auto dir = report_path.has_parent_path() ? report_path.parent_path() : std::filesystem::path(".");
        auto os = open_out(dir / kSamplesCsv);
        os << "sample,k";
        for (int i = 0; i < ens.n; ++i)
            os << ",x_" << i;
        for (int i = 0; i < ens.m; ++i)
            os << ",u_" << i;
        os << "\n";
        const int count = std::min(export_samples, ens.samples);
        for (int s = 0; s < count; ++s)
            for (int k = 0; k <= ens.horizon; ++k)
            {
                os << s << "," << k;
                const auto x = ens.state(s, k);
                for (int i = 0; i < ens.n; ++i)
                    os << "," << x(i);
                for (int i = 0; i < ens.m; ++i)
                {
                    os << ",";
                    if (k < ens.horizon)
                        os << ens.control(s, k)(i);
                }
                os << "\n";
            }
    }

} // namespace sqrtcs
