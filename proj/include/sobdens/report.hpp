#pragma once

#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "approximant.hpp"
#include "capacity.hpp"
#include "hyperbolic.hpp"
#include "svg.hpp"

namespace sobdens {

using nlohmann::json;

/// "3..6" or "3,4,5".
inline std::vector<int> parse_m_list(const std::string& text)
{
    std::vector<int> out;
    auto to_int = [&](const std::string& s) {
        std::size_t used = 0;
        int v = 0;
        try {
            v = std::stoi(s, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used == 0 || used != s.size())
            throw ConfigError("bad level list '" + text + "'");
        return v;
    };
    if (auto dots = text.find(".."); dots != std::string::npos) {
        int a = to_int(text.substr(0, dots)), b = to_int(text.substr(dots + 2));
        if (b < a)
            throw ConfigError("empty level range '" + text + "'");
        for (int m = a; m <= b; ++m)
            out.push_back(m);
        return out;
    }
    std::size_t start = 0;
    while (start <= text.size()) {
        auto comma = text.find(',', start);
        out.push_back(to_int(text.substr(start, comma == std::string::npos ? std::string::npos : comma - start)));
        if (comma == std::string::npos)
            break;
        start = comma + 1;
    }
    return out;
}

/// Declarative run description; the JSON form carries a schema version.
struct RunConfig {
    static constexpr int schema_version = 1;

    std::string map = "identity";
    std::string field = "const:1";
    double p = 1.0;
    std::vector<int> m_list{3, 4, 5};
    int n_max = 3;
    int K = 12;
    int cell_density = 16;
    int quadrature_base = 16;
    int radial_points = 4;
    int angular_points = 2;
    ConstantsPolicy policy = ConstantsPolicy::PaperFormula;
    int partition_samples = 100000;
    int pairs = 1000;
    int capacity_grid = 256;
    double ring_r = 0.25;
    double ring_R = 0.5;
    bool capacity_estimates = false;
    int inner_pairs = 8;
    std::string output = "out";
    std::uint64_t seed = 1;
    unsigned threads = 0;  ///< 0 = hardware concurrency; results do not depend on it

    void validate() const
    {
        auto range = [](const char* what, double v, double lo, double hi) {
            if (!(v >= lo && v <= hi))
                throw ConfigError(std::string(what) + " = " + detail::fixed(v) + " outside [" + detail::fixed(lo) +
                                  ", " + detail::fixed(hi) + "]");
        };
        maps::from_spec(map);
        range("p", p, 1.0, 16.0);
        if (m_list.empty())
            throw ConfigError("level list is empty");
        for (std::size_t k = 0; k < m_list.size(); ++k) {
            range("m", m_list[k], 2, 12);
            if (k > 0 && m_list[k] <= m_list[k - 1])
                throw ConfigError("level list must be strictly increasing");
        }
        range("n_max", n_max, 3, 8);
        range("K", K, 2, 256);
        range("grid.cell_density", cell_density, 4, 256);
        range("quadrature.base", quadrature_base, 4, 1024);
        range("quadrature.radial_points", radial_points, 1, 16);
        range("quadrature.angular_points", angular_points, 1, 16);
        range("samples.partition", partition_samples, 1000, 1e7);
        range("samples.pairs", pairs, 10, 1e6);
        range("capacity.grid", capacity_grid, 16, 2048);
        range("capacity.ring.r", ring_r, 1e-3, 1.0);
        range("capacity.ring.R", ring_R, 1e-3, 1.0);
        if (!(ring_r < ring_R))
            throw ConfigError("capacity ring needs r < R");
        range("capacity.inner_pairs", inner_pairs, 1, 1000);
        if (output.empty())
            throw ConfigError("output directory is empty");
    }

    RunSettings settings() const
    {
        RunSettings s;
        s.n_max = n_max;
        s.K = K;
        s.policy = policy;
        s.cell_density = cell_density;
        s.quadrature_base = quadrature_base;
        s.radial_points = radial_points;
        s.angular_points = angular_points;
        if (threads > 0)
            s.threads = threads;
        return s;
    }

    json to_json() const
    {
        return {{"version", schema_version},
                {"map", map},
                {"field", field},
                {"p", p},
                {"m", m_list},
                {"n_max", n_max},
                {"K", K},
                {"grid", {{"cell_density", cell_density}}},
                {"quadrature", {{"base", quadrature_base}, {"radial_points", radial_points}, {"angular_points", angular_points}}},
                {"constants", policy_name(policy)},
                {"samples", {{"partition", partition_samples}, {"pairs", pairs}}},
                {"capacity",
                 {{"grid", capacity_grid},
                  {"ring", {ring_r, ring_R}},
                  {"estimates", capacity_estimates},
                  {"inner_pairs", inner_pairs}}},
                {"output", output},
                {"seed", seed}};
    }

    /// Unknown keys and a missing seed are errors; absent keys keep defaults.
    static RunConfig from_json(const json& j)
    {
        RunConfig c;
        try {
            if (!j.is_object())
                throw ConfigError("config must be a JSON object");
            auto only = [](const json& obj, const std::string& where, std::set<std::string> keys) {
                for (const auto& [k, v] : obj.items())
                    if (!keys.count(k))
                        throw ConfigError("unknown key '" + where + k + "'");
            };
            only(j, "", {"version", "map", "field", "p", "m", "n_max", "K", "grid", "quadrature", "constants", "samples",
                         "capacity", "output", "seed"});
            if (!j.contains("version") || j.at("version").get<int>() != schema_version)
                throw ConfigError("config version must be " + std::to_string(schema_version));
            if (!j.contains("seed"))
                throw ConfigError("config must set 'seed'");
            c.seed = j.at("seed").get<std::uint64_t>();
            c.map = j.value("map", c.map);
            c.field = j.value("field", c.field);
            c.p = j.value("p", c.p);
            if (j.contains("m"))
                c.m_list = j.at("m").is_string() ? parse_m_list(j.at("m").get<std::string>()) : j.at("m").get<std::vector<int>>();
            c.n_max = j.value("n_max", c.n_max);
            c.K = j.value("K", c.K);
            if (j.contains("grid")) {
                only(j.at("grid"), "grid.", {"cell_density"});
                c.cell_density = j.at("grid").value("cell_density", c.cell_density);
            }
            if (j.contains("quadrature")) {
                const auto& q = j.at("quadrature");
                only(q, "quadrature.", {"base", "radial_points", "angular_points"});
                c.quadrature_base = q.value("base", c.quadrature_base);
                c.radial_points = q.value("radial_points", c.radial_points);
                c.angular_points = q.value("angular_points", c.angular_points);
            }
            if (j.contains("constants")) {
                auto name = j.at("constants").get<std::string>();
                if (name == "paper-formula")
                    c.policy = ConstantsPolicy::PaperFormula;
                else if (name == "fallback-doubling")
                    c.policy = ConstantsPolicy::FallbackDoubling;
                else
                    throw ConfigError("constants must be paper-formula or fallback-doubling, not '" + name + "'");
            }
            if (j.contains("samples")) {
                const auto& s = j.at("samples");
                only(s, "samples.", {"partition", "pairs"});
                c.partition_samples = s.value("partition", c.partition_samples);
                c.pairs = s.value("pairs", c.pairs);
            }
            if (j.contains("capacity")) {
                const auto& s = j.at("capacity");
                only(s, "capacity.", {"grid", "ring", "estimates", "inner_pairs"});
                c.capacity_grid = s.value("grid", c.capacity_grid);
                if (s.contains("ring")) {
                    auto ring = s.at("ring").get<std::vector<double>>();
                    if (ring.size() != 2)
                        throw ConfigError("capacity.ring must be [r, R]");
                    c.ring_r = ring[0];
                    c.ring_R = ring[1];
                }
                c.capacity_estimates = s.value("estimates", c.capacity_estimates);
                c.inner_pairs = s.value("inner_pairs", c.inner_pairs);
            }
            c.output = j.value("output", c.output);
        } catch (const json::exception& e) {
            throw ConfigError(std::string("config: ") + e.what());
        }
        c.validate();
        return c;
    }
};

inline RunConfig load_config(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw IoError("cannot read config '" + path + "'");
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError("config '" + path + "' is not valid JSON: " + e.what());
    }
    return with_context("config '" + path + "': ", [&] { return RunConfig::from_json(j); });
}

/// One pass/fail line of a summary.
struct Check {
    std::string name;
    bool pass = false;
    double value = 0.0;
    double lo = -std::numeric_limits<double>::infinity();
    double hi = std::numeric_limits<double>::infinity();
};

inline void to_json(json& j, const Check& c)
{
    auto bound = [](double x) { return std::isfinite(x) ? json(x) : json(nullptr); };
    j = {{"name", c.name}, {"pass", c.pass}, {"value", bound(c.value)}, {"band", {bound(c.lo), bound(c.hi)}}};
}

inline Check check_band(std::string name, double value, double lo, double hi)
{
    return {std::move(name), value >= lo && value <= hi, value, lo, hi};
}

inline Check check_true(std::string name, bool ok) { return {std::move(name), ok, ok ? 1.0 : 0.0, 1.0, 1.0}; }

/// Result of one subcommand: the summary document and the per-m rows.
struct Outcome {
    std::string command;
    json results = json::object();
    std::vector<Check> checks;
    std::vector<SobolevRow> rows;
    bool svg = false;

    bool pass() const
    {
        for (const auto& c : checks)
            if (!c.pass)
                return false;
        return true;
    }

    json summary(const RunConfig& cfg) const
    {
        return {{"version", RunConfig::schema_version},
                {"command", command},
                {"config", cfg.to_json()},
                {"results", results},
                {"checks", checks},
                {"pass", pass()}};
    }
};

inline const char* report_csv_header =
    "m,p,err_lp,err_grad,err_w1p,sup_u,sup_um,lip_um,tail_energy,tail_area,min_phi,localized,nodes,c1,c2,policy,formula_ok";

inline std::string report_csv(const std::vector<SobolevRow>& rows)
{
    std::string out = std::string(report_csv_header) + "\n";
    char buf[64];
    auto num = [&](double x) {
        std::snprintf(buf, sizeof buf, "%.17g", x);
        return std::string(buf);
    };
    for (const auto& r : rows)
        out += std::to_string(r.m) + "," + num(r.p) + "," + num(r.err_lp) + "," + num(r.err_grad) + "," +
               num(r.err_w1p) + "," + num(r.sup_u) + "," + num(r.sup_um) + "," + num(r.lip_um) + "," +
               num(r.tail_energy) + "," + num(r.tail_area) + "," + num(r.min_phi) + "," + (r.localized ? "1" : "0") +
               "," + std::to_string(r.nodes) + "," + num(r.constants.c1) + "," + num(r.constants.c2) + "," +
               policy_name(r.constants.policy) + "," + (r.constants.formula_ok ? "1" : "0") + "\n";
    return out;
}

namespace detail {

inline json constants_json(const PartitionConfig& c)
{
    return {{"c1", c.c1},           {"c2", c.c2},   {"C1", c.C1},
            {"C2", c.C2},           {"C3", c.C3},   {"formula_c1", c.formula_c1},
            {"policy", policy_name(c.policy)}, {"formula_ok", c.formula_ok}, {"doublings", c.doublings}};
}

// Named stage for error messages: "stage layer (m = 4): ...".
template <class F>
decltype(auto) stage(const std::string& name, int m, F&& f)
{
    std::string prefix = "stage " + name + (m >= 0 ? " (m = " + std::to_string(m) + ")" : "") + ": ";
    return with_context(prefix, std::forward<F>(f));
}

inline std::pair<Decomposition, BoundaryLayer> decomposition_and_layer(const ConformalMap& map, int m, const RunConfig& cfg)
{
    Decomposition d = stage("decomposition", m, [&] { return build_measured(map, m, cfg.cell_density); });
    LayerConfig lc;
    lc.n_max = cfg.n_max;
    lc.K = cfg.K;
    BoundaryLayer layer = stage("layer", m, [&] { return build_layer(map, d, lc); });
    return {std::move(d), std::move(layer)};
}

} // namespace detail

/// Cells, Whitney constants, distortion and arc spacing for each level.
inline Outcome run_decompose(const RunConfig& cfg)
{
    Outcome out;
    out.command = "decompose";
    out.svg = true;
    auto map = maps::from_spec(cfg.map);
    json levels = json::array();
    for (int m : cfg.m_list) {
        auto [d, layer] = detail::decomposition_and_layer(map, m, cfg);
        double worst = 0.0, gap_lo = 1e300, gap_hi = 0.0;
        int violations = 0;
        for (const auto& mt : d.metrics) {
            worst = std::max(worst, mt.distortion_ratio() / std::exp(3.0 * mt.hyperbolic_diameter));
            violations += mt.distortion_bound_holds() ? 0 : 1;
        }
        for (int j = 0; j < d.count() * 2; ++j) {
            double g = beta_gap(arc_pair(m, j, cfg.n_max), arc_pair(m, j + 1, cfg.n_max));
            gap_lo = std::min(gap_lo, g);
            gap_hi = std::max(gap_hi, g);
        }
        std::vector<double> diam;
        for (int j = 0; j < d.count(); ++j)
            diam.push_back(d.diam(j));
        levels.push_back({{"m", m},
                          {"cells", d.count()},
                          {"whitney_lambda", d.max_lambda()},
                          {"distortion_worst", worst},
                          {"beta_gap", {gap_lo, gap_hi}},
                          {"c_geo", layer.c_geo()},
                          {"diam", diam}});
        out.checks.push_back(check_band("distortion m=" + std::to_string(m), violations, 0, 0));
        out.checks.push_back(check_band("beta gap low m=" + std::to_string(m), gap_lo, std::ldexp(pi, -m - 2) - 1e-9, 1e300));
        out.checks.push_back(check_band("beta gap high m=" + std::to_string(m), gap_hi, 0.0, std::ldexp(pi, -m + 1) + 1e-9));
    }
    out.results["levels"] = levels;
    return out;
}

/// Convergence of u_m to u in W^{1,p} with tails and localization.
inline Outcome run_approximate(const RunConfig& cfg)
{
    Outcome out;
    out.command = "approximate";
    out.svg = true;
    auto map = maps::from_spec(cfg.map);
    auto u = fields::from_spec(cfg.field, map);
    out.rows = detail::stage("approximant", -1, [&] { return convergence_run(u, map, cfg.p, cfg.m_list, cfg.settings()); });
    json rows = json::array();
    bool localized = true, lip_finite = true;
    bool is_const = u.spec.rfind("const", 0) == 0;
    for (const auto& r : out.rows) {
        rows.push_back({{"m", r.m},
                        {"err_lp", r.err_lp},
                        {"err_grad", r.err_grad},
                        {"err_w1p", r.err_w1p},
                        {"lip_um", r.lip_um},
                        {"sup_u", r.sup_u},
                        {"sup_um", r.sup_um},
                        {"tail_energy", r.tail_energy},
                        {"tail_area", r.tail_area},
                        {"min_phi", r.min_phi},
                        {"localized", r.localized},
                        {"constants", detail::constants_json(r.constants)}});
        localized = localized && r.localized;
        lip_finite = lip_finite && std::isfinite(r.lip_um);
    }
    out.results["field"] = u.spec;
    out.results["rows"] = rows;
    out.checks.push_back(check_true("localized", localized));
    out.checks.push_back(check_true("lip_um finite", lip_finite));
    if (is_const) {
        double worst = 0.0;
        for (const auto& r : out.rows)
            worst = std::max(worst, r.err_w1p);
        out.checks.push_back(check_band("constant reproduction", worst, 0.0, 1e-10));
    } else {
        bool decreasing = true;
        for (std::size_t k = 1; k < out.rows.size(); ++k)
            decreasing = decreasing && out.rows[k].err_w1p < out.rows[k - 1].err_w1p;
        out.checks.push_back(check_true("error strictly decreasing", decreasing));
        out.results["error_ratio"] = out.rows.back().err_w1p / out.rows.front().err_w1p;
        bool tails = true;
        for (std::size_t k = 1; k < out.rows.size(); ++k)
            tails = tails && out.rows[k].tail_energy < out.rows[k - 1].tail_energy &&
                    out.rows[k].tail_area < out.rows[k - 1].tail_area;
        out.checks.push_back(check_true("tails strictly decreasing", tails));
    }
    if (!u.smooth) {
        auto g = gradient_sweep(u, map, {10, 12, 14, 16}, cfg.settings().threads);
        bool grows = true;
        for (std::size_t k = 1; k < g.size(); ++k)
            grows = grows && g[k] > g[k - 1];
        out.results["grad_u_sweep"] = g;
        out.checks.push_back(check_true("sampled |grad u| grows under refinement", grows));
    }
    return out;
}

/// Ring law on the configured lattice; with estimates on, the map-based
/// reports as well.
inline Outcome run_capacity(const RunConfig& cfg)
{
    Outcome out;
    out.command = "capacity";
    auto r = detail::stage("capacity", -1, [&] { return capacity(ring_problem(cfg.ring_r, cfg.ring_R, cfg.capacity_grid)); });
    double exact = ring_capacity_exact(cfg.ring_r, cfg.ring_R);
    out.results["ring"] = {{"r", cfg.ring_r},     {"R", cfg.ring_R},          {"grid", cfg.capacity_grid},
                           {"value", r.value},    {"full_norm", r.full_norm}, {"exact", exact},
                           {"residual", r.residual}, {"sweeps", r.sweeps}};
    out.checks.push_back(check_band("ring within 10%", r.value / exact, 0.9, 1.1));
    if (cfg.capacity_estimates) {
        auto map = maps::from_spec(cfg.map);
        int n = std::min(cfg.capacity_grid, 256);
        auto e = detail::stage("capacity", -1, [&] { return verify_estimates(map, n, cfg.seed); });
        json rings = json::array(), lbs = json::array();
        for (const auto& x : e.rings)
            rings.push_back({{"r_over_R", x.ratio_r_over_R}, {"value", x.value}, {"exact", x.exact}});
        for (const auto& lb : e.lower_bounds)
            lbs.push_back({{"delta", lb.delta}, {"pairs", lb.pairs}, {"C", lb.C}});
        out.results["estimates"] = {{"rings", rings},
                                    {"lower_bounds", lbs},
                                    {"invariance", {e.invariance_disk, e.invariance_image}}};
        for (const auto& x : e.rings)
            out.checks.push_back(check_band("ring ratio r/R=" + detail::fixed(x.ratio_r_over_R), x.ratio(), 0.8, 1.2));
        out.checks.push_back(check_true("monotone in E", e.monotone_E));
        out.checks.push_back(check_true("monotone in F", e.monotone_F));
        out.checks.push_back(check_true("monotone in Omega", e.monotone_Omega));
        out.checks.push_back(check_band("conformal invariance", e.invariance_ratio(), 0.8, 1.2));
        auto L = detail::stage("capacity", -1, [&] { return inner_capacity_check(map, cfg.inner_pairs, 1.0, 128, cfg.seed); });
        json prof = json::array();
        for (const auto& p : L.profile)
            prof.push_back({{"delta", p.delta}, {"energy", p.energy}, {"energy_log_delta", p.scaled()}});
        out.results["inner_capacity"] = {{"pairs", L.pairs},
                                      {"asserted", L.asserted},
                                      {"constant", std::isfinite(L.constant) ? json(L.constant) : json(nullptr)},
                                      {"profile", prof}};
        out.checks.push_back(check_true("inner constant positive", L.asserted == 0 || L.constant > 0.0));
    }
    return out;
}

/// The geometric and partition properties for each level, plus the
/// Gehring-Hayman ratio of the map.
inline Outcome run_verify(const RunConfig& cfg)
{
    Outcome out;
    out.command = "verify";
    out.svg = true;
    auto map = maps::from_spec(cfg.map);
    json levels = json::array();
    for (int m : cfg.m_list) {
        auto [d, layer] = detail::decomposition_and_layer(map, m, cfg);
        const std::string tag = " m=" + std::to_string(m);
        int violations = 0;
        {
            ImageCurve boundary(map, 1.0, default_boundary_samples(m));
            for (int l = 0; l <= m; ++l)
                for (const auto& c : level_cells(l))
                    violations += cell_metrics(map, c, cfg.cell_density, boundary).distortion_bound_holds() ? 0 : 1;
        }
        double gap_lo = 1e300, gap_hi = 0.0;
        for (int j = 0; j < d.count() * 2; ++j) {
            double g = beta_gap(arc_pair(m, j, cfg.n_max), arc_pair(m, j + 1, cfg.n_max));
            gap_lo = std::min(gap_lo, g);
            gap_hi = std::max(gap_hi, g);
        }
        auto g = layer_grid_config(m, cfg.n_max);
        auto sep = detail::stage("separation", m, [&] { return verify_separation(PullbackGrid(map, g), layer, d); });
        auto sep2 = detail::stage("separation", m, [&] { return verify_separation(PullbackGrid(map, g.doubled()), layer, d); });
        auto st = detail::stage("partition", m, [&] { return build_stage(map, m, cfg.settings()); });
        auto pr = detail::stage("partition", m, [&] {
            return verify_partition(*st.partition, static_cast<std::size_t>(cfg.partition_samples), cfg.seed);
        });
        levels.push_back({{"m", m},
                          {"cells", d.count()},
                          {"whitney_lambda", d.max_lambda()},
                          {"distortion_violations", violations},
                          {"beta_gap", {gap_lo, gap_hi}},
                          {"separation",
                           {{"c_low", sep.c_low}, {"c_high", sep.c_high}, {"c_sep", sep.c_sep}, {"c_geo", sep.c_geo},
                            {"diam_ratio", sep.diam_ratio}}},
                          {"separation_doubled", {{"c_low", sep2.c_low}, {"c_high", sep2.c_high}, {"c_sep", sep2.c_sep}}},
                          {"constants", detail::constants_json(st.constants)},
                          {"partition",
                           {{"samples", pr.samples},
                            {"min_phi", pr.min_phi},
                            {"max_sum_error", pr.max_sum_error},
                            {"max_overlap", pr.max_overlap},
                            {"psi_one_on_core", pr.psi_one_on_core},
                            {"psi_zero_on_layer", pr.psi_zero_on_layer},
                            {"supports_ok", pr.supports_ok},
                            {"lip_psi", pr.lip_psi},
                            {"lip_bump", pr.lip_bump},
                            {"lip_normalized", pr.lip_normalized}}}});
        out.checks.push_back(check_band("distortion violations" + tag, violations, 0, 0));
        out.checks.push_back(check_band("beta gap low" + tag, gap_lo, std::ldexp(pi, -m - 2) - 1e-9, 1e300));
        out.checks.push_back(check_band("beta gap high" + tag, gap_hi, 0.0, std::ldexp(pi, -m + 1) + 1e-9));
        out.checks.push_back(check_true("separation bands positive" + tag, sep.ok() && sep2.ok()));
        out.checks.push_back(check_band("c_low doubling ratio" + tag, sep.c_low / sep2.c_low, 0.8, 1.2));
        out.checks.push_back(check_band("c_high doubling ratio" + tag, sep.c_high / sep2.c_high, 0.8, 1.2));
        out.checks.push_back(check_band("c_sep doubling ratio" + tag, sep.c_sep / sep2.c_sep, 0.8, 1.2));
        if (st.constants.formula_ok)
            out.checks.push_back(check_band("min Phi" + tag, pr.min_phi, 0.25, 1e300));
        out.checks.push_back(check_band("normalized sum error" + tag, pr.max_sum_error, 0.0, 1e-12));
        out.checks.push_back(check_true("psi and supports" + tag, pr.psi_one_on_core && pr.psi_zero_on_layer && pr.supports_ok));
    }
    out.results["levels"] = levels;
    auto gh = gehring_hayman(map, cfg.pairs, 33, cfg.seed);
    auto gh2 = gehring_hayman(map, cfg.pairs, 65, cfg.seed);
    out.results["gehring_hayman"] = {{"pairs", gh.pairs}, {"max_ratio", gh.max_ratio}, {"mean_ratio", gh.mean_ratio},
                                     {"max_ratio_refined", gh2.max_ratio}};
    out.checks.push_back(check_band("Gehring-Hayman refinement ratio", gh2.max_ratio / gh.max_ratio, 0.8, 1.2));
    return out;
}

/// Output directory: SOBDENS_OUTPUT_DIR when set, else the configured one.
inline std::filesystem::path output_directory(const RunConfig& cfg)
{
    const char* env = std::getenv("SOBDENS_OUTPUT_DIR");
    return (env && *env) ? std::filesystem::path(env) : std::filesystem::path(cfg.output);
}

inline void write_text(const std::filesystem::path& path, const std::string& text)
{
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw IoError("cannot open '" + path.string() + "' for writing");
    out << text;
    if (!out)
        throw IoError("write to '" + path.string() + "' failed");
}

/// summary.json always; report.csv when there are rows; decomposition.svg
/// for the first level when the command builds a decomposition.
inline std::vector<std::filesystem::path> write_artifacts(const Outcome& o, const RunConfig& cfg)
{
    auto dir = output_directory(cfg);
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec)
        throw IoError("cannot create output directory '" + dir.string() + "': " + ec.message());
    std::vector<std::filesystem::path> written;
    written.push_back(dir / "summary.json");
    write_text(written.back(), o.summary(cfg).dump(2) + "\n");
    if (!o.rows.empty()) {
        written.push_back(dir / "report.csv");
        write_text(written.back(), report_csv(o.rows));
    }
    if (o.svg) {
        auto map = maps::from_spec(cfg.map);
        auto [d, layer] = detail::decomposition_and_layer(map, cfg.m_list.front(), cfg);
        written.push_back(dir / "decomposition.svg");
        write_svg(written.back().string(), map, d, layer);
    }
    return written;
}

} // namespace sobdens
