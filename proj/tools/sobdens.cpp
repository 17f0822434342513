// Command line driver: decompose, approximate, capacity, verify, render.
//
// Exit status: 0 all checks pass, 1 some check failed, 2 bad configuration,
// 3 a construction stage failed, 4 output could not be written.

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>

#include <sobdens/sobdens.hpp>

namespace {

struct Flags {
    std::string config;
    std::string map, field, m, constants, out, svg;
    std::optional<double> p;
    std::optional<int> n_max, K, grid, pairs, samples, inner_pairs;
    std::optional<std::uint64_t> seed;
    std::vector<double> ring;
    bool estimates = false;
    unsigned threads = 0;
};

void add_common(CLI::App* sub, Flags& f)
{
    sub->add_option("--config", f.config, "JSON run configuration")->check(CLI::ExistingFile);
    sub->add_option("--map", f.map, "map spec, e.g. cardioid or quadratic:a=0.25");
    sub->add_option("--m", f.m, "levels, e.g. 3..6 or 3,5");
    sub->add_option("--n-max", f.n_max, "cut depth");
    sub->add_option("--K", f.K, "endpoint samples per arc");
    sub->add_option("--constants", f.constants, "paper-formula or fallback-doubling");
    sub->add_option("--seed", f.seed, "seed for sampled checks");
    sub->add_option("--out", f.out, "output directory");
    sub->add_option("--threads", f.threads, "worker threads (results do not depend on this)");
}

sobdens::RunConfig resolve(const Flags& f)
{
    using namespace sobdens;
    RunConfig c = f.config.empty() ? RunConfig{} : load_config(f.config);
    if (!f.map.empty())
        c.map = f.map;
    if (!f.field.empty())
        c.field = f.field;
    if (f.p)
        c.p = *f.p;
    if (!f.m.empty())
        c.m_list = parse_m_list(f.m);
    if (f.n_max)
        c.n_max = *f.n_max;
    if (f.K)
        c.K = *f.K;
    if (!f.constants.empty()) {
        json j = c.to_json();
        j["constants"] = f.constants;
        c.policy = RunConfig::from_json(j).policy;
    }
    if (f.seed)
        c.seed = *f.seed;
    if (!f.out.empty())
        c.output = f.out;
    if (f.grid)
        c.capacity_grid = *f.grid;
    if (f.ring.size() == 2) {
        c.ring_r = f.ring[0];
        c.ring_R = f.ring[1];
    }
    if (f.estimates)
        c.capacity_estimates = true;
    if (f.inner_pairs)
        c.inner_pairs = *f.inner_pairs;
    if (f.pairs)
        c.pairs = *f.pairs;
    if (f.samples)
        c.partition_samples = *f.samples;
    c.threads = f.threads;
    c.validate();
    return c;
}

void print(const sobdens::Outcome& o, const std::vector<std::filesystem::path>& written)
{
    for (const auto& c : o.checks)
        std::printf("%-4s %s = %.6g\n", c.pass ? "ok" : "FAIL", c.name.c_str(), c.value);
    for (const auto& p : written)
        std::printf("wrote %s\n", p.string().c_str());
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Sobolev density construction on conformal images of the disk"};
    app.require_subcommand(1);
    Flags f;

    auto* decompose = app.add_subcommand("decompose", "dyadic cells, cuts and Whitney constants per level");
    add_common(decompose, f);

    auto* approximate = app.add_subcommand("approximate", "convergence of u_m to u in W^{1,p}");
    add_common(approximate, f);
    approximate->add_option("--field", f.field, "field spec, e.g. const:1 or power:theta=0,beta=0.5");
    approximate->add_option("--p", f.p, "Sobolev exponent");

    auto* cap = app.add_subcommand("capacity", "discrete capacity: ring law and estimate checks");
    add_common(cap, f);
    cap->add_option("--ring", f.ring, "inner and outer radius")->expected(2);
    cap->add_option("--grid", f.grid, "lattice nodes per side");
    cap->add_flag("--estimates", f.estimates, "also monotonicity, lower bound, invariance and inner-distance checks");
    cap->add_option("--inner-pairs", f.inner_pairs, "continuum pairs for the inner-distance check");

    auto* verify = app.add_subcommand("verify", "geometric, separation and partition properties");
    add_common(verify, f);
    verify->add_option("--pairs", f.pairs, "random pairs for the geodesic length ratio");
    verify->add_option("--samples", f.samples, "partition samples");

    auto* render = app.add_subcommand("render", "decomposition.svg for the first level");
    add_common(render, f);
    render->add_option("--svg", f.svg, "output file (default: <out>/decomposition.svg)");

    CLI11_PARSE(app, argc, argv);

    using namespace sobdens;
    try {
        RunConfig cfg = resolve(f);
        if (render->parsed()) {
            auto map = maps::from_spec(cfg.map);
            const int m = cfg.m_list.front();
            Decomposition d = with_context("stage decomposition (m = " + std::to_string(m) + "): ",
                                           [&] { return build_measured(map, m, cfg.cell_density); });
            LayerConfig lc;
            lc.n_max = cfg.n_max;
            lc.K = cfg.K;
            BoundaryLayer layer = with_context("stage layer (m = " + std::to_string(m) + "): ",
                                               [&] { return build_layer(map, d, lc); });
            std::filesystem::path path = f.svg.empty() ? output_directory(cfg) / "decomposition.svg" : std::filesystem::path(f.svg);
            if (path.has_parent_path())
                std::filesystem::create_directories(path.parent_path());
            write_svg(path.string(), map, d, layer);
            std::printf("wrote %s\n", path.string().c_str());
            return 0;
        }
        Outcome o = decompose->parsed()     ? run_decompose(cfg)
                    : approximate->parsed() ? run_approximate(cfg)
                    : cap->parsed()         ? run_capacity(cfg)
                                            : run_verify(cfg);
        auto written = write_artifacts(o, cfg);
        print(o, written);
        return o.pass() ? 0 : 1;
    } catch (const ConfigError& e) {
        std::cerr << "configuration error: " << e.what() << "\n";
        return 2;
    } catch (const IoError& e) {
        std::cerr << "output error: " << e.what() << "\n";
        return 4;
    } catch (const std::filesystem::filesystem_error& e) {
        std::cerr << "output error: " << e.what() << "\n";
        return 4;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
}
