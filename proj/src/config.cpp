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

#include "sqrtcs/config.hpp"

#include <fstream>
#include <initializer_list>
#include <limits>
#include <sstream>

#include <toml.hpp>

#include "sqrtcs/error.hpp"

namespace sqrtcs
{
    namespace
    {
        [[noreturn]] void fail(const std::string &path, const std::string &what)
        {
            throw ConfigError(path + ": " + what);
        }

        std::string join(const std::string &path, std::string_view key)
        {
            return path.empty() ? std::string(key) : path + "." + std::string(key);
        }

        void check_keys(const toml::table &t, const std::string &path, std::initializer_list<std::string_view> allowed)
        {
            for (const auto &[k, v] : t)
            {
                bool ok = false;
                for (auto a : allowed)
                    ok = ok || k.str() == a;
                if (!ok)
                    fail(join(path, k.str()), "unknown field");
            }
        }

        const toml::table &table_at(const toml::table &t, std::string_view key, const std::string &path)
        {
            const auto *node = t.get(key);
            if (!node)
                fail(join(path, key), "missing");
            const auto *tbl = node->as_table();
            if (!tbl)
                fail(join(path, key), "expected a table");
            return *tbl;
        }

        double as_number(const toml::node &n, const std::string &path)
        {
            if (const auto *f = n.as_floating_point())
                return f->get();
            if (const auto *i = n.as_integer())
                return static_cast<double>(i->get());
            fail(path, "expected a number");
        }

        double number(const toml::table &t, std::string_view key, const std::string &path)
        {
            const auto *node = t.get(key);
            if (!node)
                fail(join(path, key), "missing");
            return as_number(*node, join(path, key));
        }

        double number_or(const toml::table &t, std::string_view key, const std::string &path, double dflt)
        {
            return t.contains(key) ? number(t, key, path) : dflt;
        }

        std::optional<double> maybe_number(const toml::table &t, std::string_view key, const std::string &path)
        {
            if (!t.contains(key))
                return std::nullopt;
            return number(t, key, path);
        }

        std::int64_t integer(const toml::table &t, std::string_view key, const std::string &path)
        {
            const auto *node = t.get(key);
            if (!node)
                fail(join(path, key), "missing");
            const auto *i = node->as_integer();
            if (!i)
                fail(join(path, key), "expected an integer");
            return i->get();
        }

        int int_or(const toml::table &t, std::string_view key, const std::string &path, int dflt)
        {
            if (!t.contains(key))
                return dflt;
            const std::int64_t v = integer(t, key, path);
            if (v < std::numeric_limits<int>::min() || v > std::numeric_limits<int>::max())
                fail(join(path, key), "integer out of range");
            return static_cast<int>(v);
        }

        std::string string(const toml::table &t, std::string_view key, const std::string &path)
        {
            const auto *node = t.get(key);
            if (!node)
                fail(join(path, key), "missing");
            const auto *s = node->as_string();
            if (!s)
                fail(join(path, key), "expected a string");
            return s->get();
        }

        std::string string_or(const toml::table &t, std::string_view key, const std::string &path,
                              const std::string &dflt)
        {
            return t.contains(key) ? string(t, key, path) : dflt;
        }

        const toml::array &array_at(const toml::table &t, std::string_view key, const std::string &path)
        {
            const auto *node = t.get(key);
            if (!node)
                fail(join(path, key), "missing");
            const auto *arr = node->as_array();
            if (!arr)
                fail(join(path, key), "expected an array");
            return *arr;
        }

        Vec vector_from(const toml::array &arr, const std::string &path)
        {
            Vec v(static_cast<Eigen::Index>(arr.size()));
            for (std::size_t i = 0; i < arr.size(); ++i)
                v(static_cast<Eigen::Index>(i)) = as_number(arr[i], path + "[" + std::to_string(i) + "]");
            return v;
        }

        Vec vector(const toml::table &t, std::string_view key, const std::string &path)
        {
            return vector_from(array_at(t, key, path), join(path, key));
        }

        std::vector<int> int_list(const toml::table &t, std::string_view key, const std::string &path)
        {
            std::vector<int> out;
            if (!t.contains(key))
                return out;
            const auto &arr = array_at(t, key, path);
            for (std::size_t i = 0; i < arr.size(); ++i)
            {
                const auto *v = arr[i].as_integer();
                if (!v)
                    fail(join(path, key) + "[" + std::to_string(i) + "]", "expected an integer");
                out.push_back(static_cast<int>(v->get()));
            }
            return out;
        }

        /// Nested arrays, one inner array per row.
        Mat matrix(const toml::table &t, std::string_view key, const std::string &path)
        {
            const std::string where = join(path, key);
            const auto &rows = array_at(t, key, path);
            if (rows.empty())
                fail(where, "empty matrix");
            Eigen::Index cols = -1;
            Mat m;
            for (std::size_t i = 0; i < rows.size(); ++i)
            {
                const auto *row = rows[i].as_array();
                if (!row)
                    fail(where, "expected an array of rows");
                const Vec r = vector_from(*row, where + "[" + std::to_string(i) + "]");
                if (cols < 0)
                {
                    cols = r.size();
                    m.resize(static_cast<Eigen::Index>(rows.size()), cols);
                }
                else if (r.size() != cols)
                    fail(where, "rows have different lengths");
                m.row(static_cast<Eigen::Index>(i)) = r.transpose();
            }
            return m;
        }

        Mat matrix_or_empty(const toml::table &t, std::string_view key, const std::string &path)
        {
            return t.contains(key) ? matrix(t, key, path) : Mat();
        }

        DynamicsConfig parse_dynamics(const toml::table &t, const std::string &path)
        {
            DynamicsConfig d;
            const std::string kind = string(t, "kind", path);
            d.horizon = int_or(t, "horizon", path, 0);
            if (!t.contains("horizon"))
                fail(join(path, "horizon"), "missing");
            d.total_time_s = maybe_number(t, "total_time_s", path);
            d.dt_s = maybe_number(t, "dt_s", path);
            if (kind == "double_integrator")
            {
                check_keys(t, path, {"kind", "horizon", "total_time_s", "dt_s", "dim", "noise_density"});
                d.kind = DynamicsKind::DoubleIntegrator;
                d.dim = int_or(t, "dim", path, 0);
                if (!t.contains("dim"))
                    fail(join(path, "dim"), "missing");
                d.noise_density = number(t, "noise_density", path);
            }
            else if (kind == "cwh")
            {
                check_keys(t, path,
                           {"kind", "horizon", "dt_s", "orbit_radius_km", "grav_param_km3_s2", "accel_noise"});
                d.kind = DynamicsKind::Cwh;
                d.orbit_radius_km = number(t, "orbit_radius_km", path);
                d.grav_param_km3_s2 = number(t, "grav_param_km3_s2", path);
                d.accel_noise = number(t, "accel_noise", path);
                if (!d.dt_s)
                    fail(join(path, "dt_s"), "missing");
            }
            else if (kind == "explicit")
            {
                check_keys(t, path, {"kind", "horizon", "total_time_s", "dt_s", "a", "b", "g"});
                d.kind = DynamicsKind::Explicit;
                d.a = matrix(t, "a", path);
                d.b = matrix(t, "b", path);
                d.g = matrix(t, "g", path);
            }
            else
                fail(join(path, "kind"), "expected double_integrator, cwh or explicit, got '" + kind + "'");
            if (d.kind != DynamicsKind::Explicit && d.total_time_s.has_value() == d.dt_s.has_value())
                fail(path, "set exactly one of total_time_s and dt_s");
            return d;
        }

        CostConfig parse_cost(const toml::table &t, const std::string &path)
        {
            CostConfig c;
            const std::string kind = string(t, "kind", path);
            if (kind == "eoq")
            {
                check_keys(t, path, {"kind", "q", "r"});
                c.kind = CostKind::Eoq;
                c.q = matrix(t, "q", path);
                c.r = matrix(t, "r", path);
            }
            else if (kind == "qon")
            {
                check_keys(t, path, {"kind", "wx", "wu", "p_j"});
                c.kind = CostKind::Qon;
                c.wx = matrix(t, "wx", path);
                c.wu = matrix(t, "wu", path);
                c.p_j = number(t, "p_j", path);
            }
            else
                fail(join(path, "kind"), "expected eoq or qon, got '" + kind + "'");
            return c;
        }

        CcSpec parse_cc(const toml::table &t, const std::string &path)
        {
            CcSpec cc;
            cc.label = string_or(t, "label", path, "");
            const std::string target = string_or(t, "target", path, "state");
            if (target == "state")
                cc.target = CcTarget::State;
            else if (target == "control")
                cc.target = CcTarget::Control;
            else
                fail(join(path, "target"), "expected state or control");
            cc.nodes = int_list(t, "nodes", path);
            const std::string kind = string(t, "kind", path);
            if (kind == "affine")
            {
                check_keys(t, path, {"label", "target", "nodes", "kind", "alpha", "beta", "p"});
                AffineCc a;
                a.alpha = vector(t, "alpha", path);
                a.beta = number(t, "beta", path);
                a.p = number(t, "p", path);
                cc.form = a;
            }
            else if (kind == "norm")
            {
                check_keys(t, path, {"label", "target", "nodes", "kind", "gamma", "p"});
                NormCc nc;
                nc.gamma = number(t, "gamma", path);
                nc.p = number(t, "p", path);
                cc.form = nc;
            }
            else if (kind == "keepout")
            {
                check_keys(t, path, {"label", "target", "nodes", "kind", "center", "radius", "p", "position_index"});
                KeepOutCc k;
                k.center = vector(t, "center", path);
                k.radius = number(t, "radius", path);
                k.p = number(t, "p", path);
                if (t.contains("position_index"))
                    k.position_index = int_list(t, "position_index", path);
                cc.form = k;
            }
            else
                fail(join(path, "kind"), "expected affine, norm or keepout, got '" + kind + "'");
            if (cc.label.empty())
                cc.label = kind;
            return cc;
        }

        ScpParams parse_scp(const toml::table &t, const std::string &path)
        {
            check_keys(t, path,
                       {"eps_feas", "eps_opt", "rho0", "rho1", "rho2", "alpha1", "alpha2", "beta", "gamma", "r_min",
                        "r_max", "r_init", "w_init", "w_max", "max_iter", "d_x"});
            ScpParams p;
            p.eps_feas = number_or(t, "eps_feas", path, p.eps_feas);
            p.eps_opt = number_or(t, "eps_opt", path, p.eps_opt);
            p.rho0 = number_or(t, "rho0", path, p.rho0);
            p.rho1 = number_or(t, "rho1", path, p.rho1);
            p.rho2 = number_or(t, "rho2", path, p.rho2);
            p.alpha1 = number_or(t, "alpha1", path, p.alpha1);
            p.alpha2 = number_or(t, "alpha2", path, p.alpha2);
            p.beta = number_or(t, "beta", path, p.beta);
            p.gamma = number_or(t, "gamma", path, p.gamma);
            p.r_min = number_or(t, "r_min", path, p.r_min);
            p.r_max = number_or(t, "r_max", path, p.r_max);
            p.r_init = number_or(t, "r_init", path, p.r_init);
            p.w_init = number_or(t, "w_init", path, p.w_init);
            p.w_max = number_or(t, "w_max", path, p.w_max);
            p.max_iter = int_or(t, "max_iter", path, p.max_iter);
            p.d_x = matrix_or_empty(t, "d_x", path);
            try
            {
                p.validate();
            }
            catch (const InvalidParameter &e)
            {
                fail(path, e.what());
            }
            return p;
        }

        ScenarioConfig parse_root(const toml::table &root)
        {
            check_keys(root, "",
                       {"name", "matrix_norm", "dynamics", "boundary", "cost", "chance_constraints", "scp",
                        "reference", "montecarlo", "compare", "report"});
            ScenarioConfig cfg;
            cfg.name = string_or(root, "name", "", "scenario");
            const std::string norm = string_or(root, "matrix_norm", "", "spectral");
            if (norm == "spectral")
                cfg.matrix_norm = MatrixNorm::Spectral;
            else if (norm == "frobenius")
                cfg.matrix_norm = MatrixNorm::Frobenius;
            else
                fail("matrix_norm", "expected spectral or frobenius");

            cfg.dynamics = parse_dynamics(table_at(root, "dynamics", ""), "dynamics");

            const auto &bnd = table_at(root, "boundary", "");
            check_keys(bnd, "boundary", {"mu_init", "p_init", "mu_fin", "p_fin"});
            cfg.mu_init = vector(bnd, "mu_init", "boundary");
            cfg.p_init = matrix(bnd, "p_init", "boundary");
            cfg.mu_fin = vector(bnd, "mu_fin", "boundary");
            cfg.p_fin = matrix(bnd, "p_fin", "boundary");

            cfg.cost = parse_cost(table_at(root, "cost", ""), "cost");

            if (const auto *node = root.get("chance_constraints"))
            {
                const auto *arr = node->as_array();
                if (!arr)
                    fail("chance_constraints", "expected an array of tables");
                for (std::size_t i = 0; i < arr->size(); ++i)
                {
                    const std::string where = "chance_constraints[" + std::to_string(i) + "]";
                    const auto *t = (*arr)[i].as_table();
                    if (!t)
                        fail(where, "expected a table");
                    cfg.chance_constraints.push_back(parse_cc(*t, where));
                }
            }

            if (root.contains("scp"))
                cfg.scp = parse_scp(table_at(root, "scp", ""), "scp");

            if (root.contains("reference"))
            {
                const auto &t = table_at(root, "reference", "");
                check_keys(t, "reference", {"lift_factor", "max_iter", "tol"});
                cfg.reference.lift_factor = number_or(t, "lift_factor", "reference", cfg.reference.lift_factor);
                cfg.reference.max_iter = int_or(t, "max_iter", "reference", cfg.reference.max_iter);
                cfg.reference.tol = number_or(t, "tol", "reference", cfg.reference.tol);
            }

            if (root.contains("montecarlo"))
            {
                const auto &t = table_at(root, "montecarlo", "");
                check_keys(t, "montecarlo", {"samples", "seed", "export_samples"});
                cfg.montecarlo.samples = int_or(t, "samples", "montecarlo", cfg.montecarlo.samples);
                if (t.contains("seed"))
                {
                    const std::int64_t s = integer(t, "seed", "montecarlo");
                    if (s < 0)
                        fail("montecarlo.seed", "must be non-negative");
                    cfg.montecarlo.seed = static_cast<std::uint64_t>(s);
                }
                cfg.montecarlo.export_samples =
                    int_or(t, "export_samples", "montecarlo", cfg.montecarlo.export_samples);
                if (cfg.montecarlo.samples < 1)
                    fail("montecarlo.samples", "must be positive");
                if (cfg.montecarlo.export_samples < 0)
                    fail("montecarlo.export_samples", "must be non-negative");
            }

            if (root.contains("compare"))
            {
                const auto &t = table_at(root, "compare", "");
                check_keys(t, "compare", {"horizons"});
                cfg.compare_horizons = int_list(t, "horizons", "compare");
                for (int h : cfg.compare_horizons)
                    if (h < 1)
                        fail("compare.horizons", "horizons must be positive");
            }

            if (root.contains("report"))
            {
                const auto &t = table_at(root, "report", "");
                check_keys(t, "report", {"ellipse_axes", "ellipse_points"});
                if (t.contains("ellipse_axes"))
                {
                    const auto axes = int_list(t, "ellipse_axes", "report");
                    if (axes.size() != 2)
                        fail("report.ellipse_axes", "expected two state indices");
                    cfg.report.ellipse_i = axes[0];
                    cfg.report.ellipse_j = axes[1];
                }
                cfg.report.ellipse_points = int_or(t, "ellipse_points", "report", cfg.report.ellipse_points);
                if (cfg.report.ellipse_points < 3)
                    fail("report.ellipse_points", "need at least 3 points");
            }
            return cfg;
        }

        toml::array to_array(const Vec &v)
        {
            toml::array a;
            for (Eigen::Index i = 0; i < v.size(); ++i)
                a.push_back(v(i));
            return a;
        }

        toml::array to_array(const Mat &m)
        {
            toml::array a;
            for (Eigen::Index i = 0; i < m.rows(); ++i)
                a.push_back(to_array(Vec(m.row(i).transpose())));
            return a;
        }

        toml::array to_array(const std::vector<int> &v)
        {
            toml::array a;
            for (int x : v)
                a.push_back(x);
            return a;
        }

        bool same(const Mat &a, const Mat &b) { return a.rows() == b.rows() && a.cols() == b.cols() && a == b; }

        bool same(const CcSpec &a, const CcSpec &b)
        {
            if (a.label != b.label || a.target != b.target || a.nodes != b.nodes || a.form.index() != b.form.index())
                return false;
            if (const auto *x = std::get_if<AffineCc>(&a.form))
            {
                const auto &y = std::get<AffineCc>(b.form);
                return same(x->alpha, y.alpha) && x->beta == y.beta && x->p == y.p;
            }
            if (const auto *x = std::get_if<NormCc>(&a.form))
            {
                const auto &y = std::get<NormCc>(b.form);
                return x->gamma == y.gamma && x->p == y.p;
            }
            const auto &x = std::get<KeepOutCc>(a.form);
            const auto &y = std::get<KeepOutCc>(b.form);
            return same(x.center, y.center) && x.radius == y.radius && x.p == y.p &&
                   x.position_index == y.position_index;
        }

        bool same(const ScpParams &a, const ScpParams &b)
        {
            return a.eps_feas == b.eps_feas && a.eps_opt == b.eps_opt && a.rho0 == b.rho0 && a.rho1 == b.rho1 &&
                   a.rho2 == b.rho2 && a.alpha1 == b.alpha1 && a.alpha2 == b.alpha2 && a.beta == b.beta &&
                   a.gamma == b.gamma && a.r_min == b.r_min && a.r_max == b.r_max && a.r_init == b.r_init &&
                   a.w_init == b.w_init && a.w_max == b.w_max && a.max_iter == b.max_iter && same(a.d_x, b.d_x);
        }
    } // namespace

    ScenarioConfig parse_config(std::string_view text, const std::string &source)
    {
        toml::table root;
        try
        {
            root = toml::parse(text, source);
        }
        catch (const toml::parse_error &e)
        {
            std::ostringstream os;
            os << source << ":" << e.source().begin.line << ":" << e.source().begin.column << ": "
               << e.description();
            throw ConfigError(os.str());
        }
        return parse_root(root);
    }

    ScenarioConfig load_config(const std::filesystem::path &path)
    {
        std::ifstream in(path);
        if (!in)
            throw ConfigError(path.string() + ": cannot open file");
        std::ostringstream ss;
        ss << in.rdbuf();
        return parse_config(ss.str(), path.string());
    }

    std::string to_toml(const ScenarioConfig &cfg)
    {
        toml::table root;
        root.insert("name", cfg.name);
        root.insert("matrix_norm", cfg.matrix_norm == MatrixNorm::Spectral ? "spectral" : "frobenius");

        toml::table dyn;
        const auto &d = cfg.dynamics;
        dyn.insert("horizon", d.horizon);
        if (d.total_time_s)
            dyn.insert("total_time_s", *d.total_time_s);
        if (d.dt_s)
            dyn.insert("dt_s", *d.dt_s);
        switch (d.kind)
        {
        case DynamicsKind::DoubleIntegrator:
            dyn.insert("kind", "double_integrator");
            dyn.insert("dim", d.dim);
            dyn.insert("noise_density", d.noise_density);
            break;
        case DynamicsKind::Cwh:
            dyn.insert("kind", "cwh");
            dyn.insert("orbit_radius_km", d.orbit_radius_km);
            dyn.insert("grav_param_km3_s2", d.grav_param_km3_s2);
            dyn.insert("accel_noise", d.accel_noise);
            break;
        case DynamicsKind::Explicit:
            dyn.insert("kind", "explicit");
            dyn.insert("a", to_array(d.a));
            dyn.insert("b", to_array(d.b));
            dyn.insert("g", to_array(d.g));
            break;
        }
        root.insert("dynamics", dyn);

        toml::table bnd;
        bnd.insert("mu_init", to_array(cfg.mu_init));
        bnd.insert("p_init", to_array(cfg.p_init));
        bnd.insert("mu_fin", to_array(cfg.mu_fin));
        bnd.insert("p_fin", to_array(cfg.p_fin));
        root.insert("boundary", bnd);

        toml::table cost;
        if (cfg.cost.kind == CostKind::Eoq)
        {
            cost.insert("kind", "eoq");
            cost.insert("q", to_array(cfg.cost.q));
            cost.insert("r", to_array(cfg.cost.r));
        }
        else
        {
            cost.insert("kind", "qon");
            cost.insert("wx", to_array(cfg.cost.wx));
            cost.insert("wu", to_array(cfg.cost.wu));
            cost.insert("p_j", cfg.cost.p_j);
        }
        root.insert("cost", cost);

        toml::array ccs;
        for (const auto &cc : cfg.chance_constraints)
        {
            toml::table t;
            t.insert("label", cc.label);
            t.insert("target", cc.target == CcTarget::State ? "state" : "control");
            if (!cc.nodes.empty())
                t.insert("nodes", to_array(cc.nodes));
            if (const auto *a = std::get_if<AffineCc>(&cc.form))
            {
                t.insert("kind", "affine");
                t.insert("alpha", to_array(a->alpha));
                t.insert("beta", a->beta);
                t.insert("p", a->p);
            }
            else if (const auto *nc = std::get_if<NormCc>(&cc.form))
            {
                t.insert("kind", "norm");
                t.insert("gamma", nc->gamma);
                t.insert("p", nc->p);
            }
            else
            {
                const auto &k = std::get<KeepOutCc>(cc.form);
                t.insert("kind", "keepout");
                t.insert("center", to_array(k.center));
                t.insert("radius", k.radius);
                t.insert("p", k.p);
                t.insert("position_index", to_array(k.position_index));
            }
            ccs.push_back(std::move(t));
        }
        if (!ccs.empty())
            root.insert("chance_constraints", ccs);

        const auto &p = cfg.scp;
        toml::table scp;
        scp.insert("eps_feas", p.eps_feas);
        scp.insert("eps_opt", p.eps_opt);
        scp.insert("rho0", p.rho0);
        scp.insert("rho1", p.rho1);
        scp.insert("rho2", p.rho2);
        scp.insert("alpha1", p.alpha1);
        scp.insert("alpha2", p.alpha2);
        scp.insert("beta", p.beta);
        scp.insert("gamma", p.gamma);
        scp.insert("r_min", p.r_min);
        scp.insert("r_max", p.r_max);
        scp.insert("r_init", p.r_init);
        scp.insert("w_init", p.w_init);
        scp.insert("w_max", p.w_max);
        scp.insert("max_iter", p.max_iter);
        if (p.d_x.size() > 0)
            scp.insert("d_x", to_array(p.d_x));
        root.insert("scp", scp);

        toml::table ref;
        ref.insert("lift_factor", cfg.reference.lift_factor);
        ref.insert("max_iter", cfg.reference.max_iter);
        ref.insert("tol", cfg.reference.tol);
        root.insert("reference", ref);

        toml::table mc;
        mc.insert("samples", cfg.montecarlo.samples);
        mc.insert("seed", static_cast<std::int64_t>(cfg.montecarlo.seed));
        mc.insert("export_samples", cfg.montecarlo.export_samples);
        root.insert("montecarlo", mc);

        if (!cfg.compare_horizons.empty())
        {
            toml::table cmp;
            cmp.insert("horizons", to_array(cfg.compare_horizons));
            root.insert("compare", cmp);
        }

        toml::table rep;
        rep.insert("ellipse_axes", to_array(std::vector<int>{cfg.report.ellipse_i, cfg.report.ellipse_j}));
        rep.insert("ellipse_points", cfg.report.ellipse_points);
        root.insert("report", rep);

        std::ostringstream os;
        os << root << "\n";
        return os.str();
    }

    CsProblem to_problem(const ScenarioConfig &cfg)
    {
        try
        {
            const auto &d = cfg.dynamics;
            CsProblem p;
            switch (d.kind)
            {
            case DynamicsKind::DoubleIntegrator:
                p.sys = d.total_time_s ? build_double_integrator(d.dim, d.horizon, *d.total_time_s, d.noise_density)
                                       : build_double_integrator_dt(d.dim, d.horizon, *d.dt_s, d.noise_density);
                break;
            case DynamicsKind::Cwh:
                p.sys = build_cwh_zoh(d.orbit_radius_km, d.grav_param_km3_s2, *d.dt_s, d.horizon, d.accel_noise);
                break;
            case DynamicsKind::Explicit:
                if (d.horizon < 1)
                    throw ConfigError("dynamics.horizon: must be positive");
                p.sys.n = static_cast<int>(d.a.rows());
                p.sys.m = static_cast<int>(d.b.cols());
                p.sys.nw = static_cast<int>(d.g.cols());
                p.sys.horizon = d.horizon;
                p.sys.a.assign(d.horizon, d.a);
                p.sys.b.assign(d.horizon, d.b);
                p.sys.g.assign(d.horizon, d.g);
                break;
            }
            p.mu_init = cfg.mu_init;
            p.mu_fin = cfg.mu_fin;
            p.p_init = cfg.p_init;
            p.p_fin = cfg.p_fin;
            if (cfg.cost.kind == CostKind::Eoq)
            {
                EoqCost c;
                c.q.assign(d.horizon, cfg.cost.q);
                c.r.assign(d.horizon, cfg.cost.r);
                p.cost = c;
            }
            else
            {
                QonCost c;
                c.wx.assign(d.horizon, cfg.cost.wx);
                c.wu.assign(d.horizon, cfg.cost.wu);
                c.p_j = cfg.cost.p_j;
                p.cost = c;
            }
            p.ccs = cfg.chance_constraints;
            p.matrix_norm = cfg.matrix_norm;
            p.validate();
            if (cfg.scp.d_x.size() > 0 && cfg.scp.d_x.rows() != p.n())
                throw ConfigError("scp.d_x: must be " + std::to_string(p.n()) + " x " + std::to_string(p.n()));
            const int ne = p.n();
            if (cfg.report.ellipse_i < 0 || cfg.report.ellipse_j < 0 || cfg.report.ellipse_i >= ne ||
                cfg.report.ellipse_j >= ne || cfg.report.ellipse_i == cfg.report.ellipse_j)
                throw ConfigError("report.ellipse_axes: need two distinct state indices");
            return p;
        }
        catch (const ConfigError &)
        {
            throw;
        }
        catch (const Error &e)
        {
            throw ConfigError(std::string("scenario '") + cfg.name + "': " + e.what());
        }
    }

    ScenarioConfig with_horizon(const ScenarioConfig &cfg, int horizon)
    {
        ScenarioConfig out = cfg;
        out.dynamics.horizon = horizon;
        return out;
    }

    bool operator==(const ScenarioConfig &a, const ScenarioConfig &b)
    {
        const auto &x = a.dynamics;
        const auto &y = b.dynamics;
        if (a.name != b.name || a.matrix_norm != b.matrix_norm)
            return false;
        // Fields of the other dynamics and cost kinds are not part of the configuration.
        if (x.kind != y.kind || x.horizon != y.horizon || x.total_time_s != y.total_time_s || x.dt_s != y.dt_s)
            return false;
        switch (x.kind)
        {
        case DynamicsKind::DoubleIntegrator:
            if (x.dim != y.dim || x.noise_density != y.noise_density)
                return false;
            break;
        case DynamicsKind::Cwh:
            if (x.orbit_radius_km != y.orbit_radius_km || x.grav_param_km3_s2 != y.grav_param_km3_s2 ||
                x.accel_noise != y.accel_noise)
                return false;
            break;
        case DynamicsKind::Explicit:
            if (!same(x.a, y.a) || !same(x.b, y.b) || !same(x.g, y.g))
                return false;
            break;
        }
        if (!same(a.mu_init, b.mu_init) || !same(a.mu_fin, b.mu_fin) || !same(a.p_init, b.p_init) ||
            !same(a.p_fin, b.p_fin))
            return false;
        if (a.cost.kind != b.cost.kind)
            return false;
        if (a.cost.kind == CostKind::Eoq && (!same(a.cost.q, b.cost.q) || !same(a.cost.r, b.cost.r)))
            return false;
        if (a.cost.kind == CostKind::Qon &&
            (!same(a.cost.wx, b.cost.wx) || !same(a.cost.wu, b.cost.wu) || a.cost.p_j != b.cost.p_j))
            return false;
        if (a.chance_constraints.size() != b.chance_constraints.size())
            return false;
        for (std::size_t i = 0; i < a.chance_constraints.size(); ++i)
            if (!same(a.chance_constraints[i], b.chance_constraints[i]))
                return false;
        return same(a.scp, b.scp) && a.reference.lift_factor == b.reference.lift_factor &&
               a.reference.max_iter == b.reference.max_iter && a.reference.tol == b.reference.tol &&
               a.montecarlo.samples == b.montecarlo.samples && a.montecarlo.seed == b.montecarlo.seed &&
               a.montecarlo.export_samples == b.montecarlo.export_samples &&
               a.compare_horizons == b.compare_horizons && a.report.ellipse_i == b.report.ellipse_i &&
               a.report.ellipse_j == b.report.ellipse_j && a.report.ellipse_points == b.report.ellipse_points;
    }

} // namespace sqrtcs
