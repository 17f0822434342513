#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <memory>
#include <string>
#include <vector>

#include "boundary.hpp"
#include "boundary_layer.hpp"
#include "differences.hpp"
#include "dyadic.hpp"
#include "errors.hpp"
#include "geometry.hpp"
#include "pullback_grid.hpp"

namespace sobdens {

enum class ConstantsPolicy { PaperFormula, FallbackDoubling };

inline const char* policy_name(ConstantsPolicy p)
{
    return p == ConstantsPolicy::PaperFormula ? "paper-formula" : "fallback-doubling";
}

struct PartitionConfig {
    double c1 = 0.0;
    double c2 = 0.0;
    double C1 = 0.0;  ///< max dist(x, bdry) / dist(x, J_m) over the pullback of Omega_{m-1}
    double C2 = 0.0;  ///< max scaled dist(x, S_{j-1} u S_j) / dist(x, J_m) over R_j
    double C3 = 0.0;  ///< max dist(x, bdry) / diam(R_j) over R_j
    double formula_c1 = 0.0;
    ConstantsPolicy policy = ConstantsPolicy::FallbackDoubling;
    bool formula_ok = false;  ///< formula c1 passed psi = 1 on Omega_{m-1} and Phi >= 1/4
    int doublings = 0;
    double check_min_phi = 0.0;
};

/// Everything the partition needs that does not depend on c1, c2: the grid,
/// node labels, image curves and inner distances from each S_j.
struct PartitionSetup {
    ConformalMap map;
    int m = 0;
    int n_max = 0;
    std::vector<double> diam;
    PullbackGrid grid;
    ImageCurve boundary;  ///< image of the unit circle
    ImageCurve core;      ///< image of the circle of radius 1 - 2^{-m-1}
    std::vector<int> s_label;
    std::vector<int> r_label;
    /// Per j: (node, dist_Omega(node, S_j)) for distances up to 2 diam(R_j).
    std::vector<std::vector<ShortestPaths::Source>> dist;

    int count() const { return static_cast<int>(diam.size()); }
    int wrap(int j) const { return ((j % count()) + count()) % count(); }
    double core_radius() const { return dyadic_radius(m + 1); }
    double inner_radius() const { return dyadic_radius(m); }
    double cap_radius() const { return grid.cap_radius(); }

    double dist_to_layer(Complex w) const { return core.distance(w); }
    double dist_to_boundary(Complex w) const { return boundary.distance(w); }
};

inline std::size_t curve_samples(int m, int n_max)
{
    return std::max<std::size_t>(4096, std::size_t{1} << std::min(m + n_max + 6, 20));
}

inline std::shared_ptr<const PartitionSetup> prepare_partition(const ConformalMap& map, const Decomposition& d,
                                                               const BoundaryLayer& layer, const GridConfig& grid_cfg)
{
    if (layer.empty() || layer.m() != d.m)
        throw ConfigError("partition needs a built layer for the same m");
    if (d.metrics.size() != d.cells.size())
        throw ConfigError("partition needs a measured decomposition");
    const int m = d.m;
    const std::size_t samples = curve_samples(m, layer.config().n_max);
    auto s = std::make_shared<PartitionSetup>(PartitionSetup{map, m, layer.config().n_max, {}, PullbackGrid(map, grid_cfg),
                                                              ImageCurve(map, 1.0, samples),
                                                              ImageCurve(map, dyadic_radius(m + 1), samples), {}, {}, {}});
    for (int j = 0; j < d.count(); ++j)
        s->diam.push_back(d.diam(j));
    s->s_label = layer_labels(s->grid, layer);
    s->r_label.resize(s->grid.size());
    for (std::size_t k = 0; k < s->grid.size(); ++k)
        s->r_label[k] = d.locate(s->grid.position(static_cast<int>(k)));

    const int n = d.count();
    std::vector<std::vector<ShortestPaths::Source>> members(static_cast<std::size_t>(n));
    for (std::size_t k = 0; k < s->s_label.size(); ++k)
        if (s->s_label[k] >= 0)
            members[static_cast<std::size_t>(s->s_label[k])].push_back({static_cast<int>(k), 0.0});
    ShortestPaths sp(s->grid);
    s->dist.resize(static_cast<std::size_t>(n));
    for (int j = 0; j < n; ++j) {
        const auto& src = members[static_cast<std::size_t>(j)];
        if (src.empty())
            throw ResolutionError("layer cell " + std::to_string(j) + " holds no grid nodes");
        sp.run(src, 2.0 * s->diam[static_cast<std::size_t>(j)]);
        auto& out = s->dist[static_cast<std::size_t>(j)];
        for (int v : sp.settled())
            out.push_back({v, sp.distance(v)});
        std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.node < b.node; });
    }
    return s;
}

struct Bump {
    int j;
    double value;
};

/// psi, the nonzero bumps and Phi at one pullback point.
struct PartitionValue {
    static constexpr int capacity = 32;
    double psi = 0.0;
    std::array<Bump, capacity> bumps{};
    int count = 0;
    double Phi = 0.0;

    double bump(int j) const
    {
        for (int k = 0; k < count; ++k)
            if (bumps[static_cast<std::size_t>(k)].j == j)
                return bumps[static_cast<std::size_t>(k)].value;
        return 0.0;
    }
    double normalized_psi() const { return psi / Phi; }
    double normalized(int j) const { return bump(j) / Phi; }
    double normalized_sum() const
    {
        double s = psi / Phi;
        for (int k = 0; k < count; ++k)
            s += bumps[static_cast<std::size_t>(k)].value / Phi;
        return s;
    }
};

class Partition {
public:
    Partition(std::shared_ptr<const PartitionSetup> setup, double c1, double c2) : setup_(std::move(setup)), c1_(c1), c2_(c2)
    {
        if (!(c1 > 0.0) || !(c2 > 1.0))
            throw ConfigError("partition needs c1 > 0 and c2 > 1");
        const auto& s = *setup_;
        std::vector<std::size_t> count(s.grid.size() + 1, 0);
        auto value = [&](int j, double d) { return std::max(1.0 - 2.0 * d / ((c2_ - 1.0) * s.diam[static_cast<std::size_t>(j)]), 0.0); };
        for (int j = 0; j < s.count(); ++j)
            for (const auto& e : s.dist[static_cast<std::size_t>(j)])
                if (value(j, e.dist) > 0.0)
                    ++count[static_cast<std::size_t>(e.node) + 1];
        for (std::size_t k = 0; k < s.grid.size(); ++k)
            count[k + 1] += count[k];
        offset_ = count;
        entries_.resize(offset_.back());
        std::vector<std::size_t> fill(offset_.begin(), offset_.end() - 1);
        for (int j = 0; j < s.count(); ++j)
            for (const auto& e : s.dist[static_cast<std::size_t>(j)]) {
                double v = value(j, e.dist);
                if (v > 0.0)
                    entries_[fill[static_cast<std::size_t>(e.node)]++] = {j, v};
            }
    }

    const PartitionSetup& setup() const { return *setup_; }
    std::shared_ptr<const PartitionSetup> setup_ptr() const { return setup_; }
    int m() const { return setup_->m; }
    double c1() const { return c1_; }
    double c2() const { return c2_; }

    std::span<const Bump> node_bumps(int node) const
    {
        std::size_t b = offset_[static_cast<std::size_t>(node)], e = offset_[static_cast<std::size_t>(node) + 1];
        return {entries_.data() + b, e - b};
    }

    /// Difference step at z: the level step, shrunk so that it resolves the
    /// band of width about 2^{-m-1} / c1 where psi climbs from 0 to 1.
    double step(Complex z) const
    {
        return std::min(fd_step(setup_->m, z), (1.0 - setup_->core_radius()) / (8.0 * c1_));
    }

    double psi(Complex z) const
    {
        const auto& s = *setup_;
        if (std::abs(z) >= s.core_radius() * (1.0 - 1e-12))
            return 0.0;
        Complex w = s.map.eval(z).w;
        double dj = s.dist_to_layer(w), db = s.dist_to_boundary(w);
        return std::min(1.0, c1_ * dj / db);
    }

    PartitionValue evaluate(Complex z) const
    {
        PartitionValue out;
        auto st = setup_->grid.stencil(z);
        out.psi = psi(z);
        for (int k = 0; k < st.size; ++k)
            for (const Bump& b : node_bumps(st.node[static_cast<std::size_t>(k)])) {
                double add = st.weight[static_cast<std::size_t>(k)] * b.value;
                int i = 0;
                while (i < out.count && out.bumps[static_cast<std::size_t>(i)].j != b.j)
                    ++i;
                if (i == out.count) {
                    if (out.count == PartitionValue::capacity)
                        throw ConstructionError("bump overlap exceeds evaluator capacity");
                    out.bumps[static_cast<std::size_t>(out.count++)] = {b.j, 0.0};
                }
                out.bumps[static_cast<std::size_t>(i)].value += add;
            }
        int kept = 0;
        for (int i = 0; i < out.count; ++i)
            if (out.bumps[static_cast<std::size_t>(i)].value > 0.0)
                out.bumps[static_cast<std::size_t>(kept++)] = out.bumps[static_cast<std::size_t>(i)];
        out.count = kept;
        std::sort(out.bumps.begin(), out.bumps.begin() + kept, [](const Bump& a, const Bump& b) { return a.j < b.j; });
        out.Phi = out.psi;
        for (int i = 0; i < out.count; ++i)
            out.Phi += out.bumps[static_cast<std::size_t>(i)].value;
        return out;
    }

private:
    std::shared_ptr<const PartitionSetup> setup_;
    double c1_;
    double c2_;
    std::vector<std::size_t> offset_;
    std::vector<Bump> entries_;
};

/// Pullback points of Omega_{m-1}: rings 1 - 2^{-k}, k = 1..m, plus a few
/// inner radii.
inline std::vector<Complex> core_samples(int m, int angular)
{
    std::vector<Complex> out{Complex{0.0}};
    std::vector<double> radii{0.25};
    for (int k = 1; k <= m; ++k)
        radii.push_back(dyadic_radius(k));
    for (double r : radii)
        for (int i = 0; i < angular; ++i)
            out.push_back(std::polar(r, 2.0 * pi * (i + 0.5) / angular));
    return out;
}

/// Quasi-random pullback points spread evenly in log(1 - |z|) from the edge of
/// Omega_{m-2} to just inside the grid cap.
inline std::vector<Complex> layer_samples(int m, int cap_level, std::size_t count, std::uint64_t seed)
{
    std::vector<Complex> out;
    out.reserve(count);
    const double lo = m - 1, hi = cap_level - 0.2;
    const std::uint64_t skip = 1 + seed * 7919;
    for (std::size_t i = 0; i < count; ++i) {
        double t = radical_inverse(skip + i, 2), a = radical_inverse(skip + i, 3);
        double r = 1.0 - std::exp2(-(lo + t * (hi - lo)));
        out.push_back(std::polar(r, 2.0 * pi * a));
    }
    return out;
}

/// Interpolated inner distance from a sparse (node, dist) table; nodes not in
/// the table count as `beyond`.
class DistanceLookup {
public:
    explicit DistanceLookup(std::size_t n) : dense_(n, -1.0) {}
    void load(const std::vector<ShortestPaths::Source>& table)
    {
        clear();
        for (const auto& e : table) {
            dense_[static_cast<std::size_t>(e.node)] = e.dist;
            loaded_.push_back(e.node);
        }
    }
    void clear()
    {
        for (int v : loaded_)
            dense_[static_cast<std::size_t>(v)] = -1.0;
        loaded_.clear();
    }
    double at(int node, double beyond) const
    {
        double d = dense_[static_cast<std::size_t>(node)];
        return d < 0.0 ? beyond : d;
    }

private:
    std::vector<double> dense_;
    std::vector<int> loaded_;
};

/// Whether c2 = 1 + s passes the support separation checks at grid nodes:
/// non-adjacent c2 S_i disjoint, c2 S_i away from R_r unless r in {i, i+1, i+2},
/// and c2 S_i outside the pullback of Omega_{m-1}.
inline bool support_checks_pass(const PartitionSetup& s, double sc)
{
    const int n = s.count();
    std::vector<std::vector<int>> owners(s.grid.size());
    const double inner = s.inner_radius() * (1.0 + 1e-12);
    for (int i = 0; i < n; ++i)
        for (const auto& e : s.dist[static_cast<std::size_t>(i)]) {
            if (e.dist > sc * s.diam[static_cast<std::size_t>(i)])
                continue;
            if (std::abs(s.grid.position(e.node)) <= inner)
                return false;
            int r = s.r_label[static_cast<std::size_t>(e.node)];
            if (r >= 0) {
                int off = s.wrap(r - i);
                if (off > 2)
                    return false;
            }
            owners[static_cast<std::size_t>(e.node)].push_back(i);
        }
    for (const auto& o : owners)
        for (std::size_t a = 0; a < o.size(); ++a)
            for (std::size_t b = a + 1; b < o.size(); ++b) {
                int gap = std::abs(o[a] - o[b]);
                gap = std::min(gap, n - gap);
                if (gap >= 2)
                    return false;
            }
    return true;
}

struct PhiCheck {
    bool psi_one = true;
    double min_phi = std::numeric_limits<double>::infinity();
    bool ok() const { return psi_one && min_phi >= 0.25; }
};

inline PhiCheck check_phi(const Partition& p, const std::vector<Complex>& core_pts, const std::vector<Complex>& pts)
{
    PhiCheck c;
    for (Complex z : core_pts)
        if (p.psi(z) != 1.0)
            c.psi_one = false;
    for (Complex z : pts)
        c.min_phi = std::min(c.min_phi, p.evaluate(z).Phi);
    return c;
}

/// Estimates C1, C2, C3, picks c2 by halving c2 - 1 from 2 and sets
/// c1 = 2 max{C1, C2 C3 / (c2 - 1)}. With the fallback policy c1 is doubled
/// until psi = 1 on Omega_{m-1} and Phi >= 1/4 on check samples.
inline PartitionConfig choose_constants(const std::shared_ptr<const PartitionSetup>& setup, ConstantsPolicy policy)
{
    const PartitionSetup& s = *setup;
    PartitionConfig cfg;
    cfg.policy = policy;
    const int m = s.m;
    const int angular = std::max(256, 1 << std::min(m + 6, 14));

    auto core_pts = core_samples(m, angular);
    for (Complex z : core_pts) {
        Complex w = s.map.eval(z).w;
        cfg.C1 = std::max(cfg.C1, s.dist_to_boundary(w) / s.dist_to_layer(w));
    }

    DistanceLookup prev(s.grid.size()), here(s.grid.size());
    const int n = s.count();
    const auto cells = level_cells(m);
    for (int j = 0; j < n; ++j) {
        const int jm = s.wrap(j - 1);
        const double dj = s.diam[static_cast<std::size_t>(j)], dm = s.diam[static_cast<std::size_t>(jm)];
        prev.load(s.dist[static_cast<std::size_t>(jm)]);
        here.load(s.dist[static_cast<std::size_t>(j)]);
        // dist to S_{j-1} u S_j, with the S_{j-1} part rescaled by diam(R_j) / diam(R_{j-1})
        auto node_dist = [&](int v) { return std::min(prev.at(v, 2.0 * dm) * dj / dm, here.at(v, 2.0 * dj)); };
        for (Complex z : cells[static_cast<std::size_t>(j)].interior_samples(6)) {
            double d = s.grid.stencil(z).apply(node_dist);
            Complex w = s.map.eval(z).w;
            cfg.C3 = std::max(cfg.C3, s.dist_to_boundary(w) / dj);
            cfg.C2 = std::max(cfg.C2, d / s.dist_to_layer(w));
        }
    }

    double sc = 2.0;
    while (!support_checks_pass(s, sc)) {
        sc *= 0.5;
        if (sc < 1.0 / 64.0)
            throw ConstructionError("support separation fails for every c2 - 1 down to 1/64");
    }
    cfg.c2 = 1.0 + sc;
    cfg.formula_c1 = 2.0 * std::max(cfg.C1, cfg.C2 * cfg.C3 / sc);
    cfg.c1 = cfg.formula_c1;

    auto check_pts = layer_samples(m, s.grid.config().cap_level, 4096, 0);
    auto check = check_phi(Partition(setup, cfg.c1, cfg.c2), core_pts, check_pts);
    cfg.formula_ok = check.ok();
    cfg.check_min_phi = check.min_phi;
    if (policy == ConstantsPolicy::FallbackDoubling)
        while (!check.ok()) {
            if (++cfg.doublings > 40)
                throw ConstructionError("c1 doubling did not reach psi = 1 on the core and Phi >= 1/4");
            cfg.c1 *= 2.0;
            check = check_phi(Partition(setup, cfg.c1, cfg.c2), core_pts, check_pts);
            cfg.check_min_phi = check.min_phi;
        }
    return cfg;
}

struct PartitionReport {
    std::size_t samples = 0;
    double min_phi = std::numeric_limits<double>::infinity();
    double max_sum_error = 0.0;
    int max_overlap = 0;
    bool psi_one_on_core = true;   ///< psi = 1 and no bumps on the pullback of Omega_{m-1}
    bool psi_zero_on_layer = true;
    bool supports_ok = true;       ///< every nonzero bump lies in c2 S_j (grid test)
    double s_interior_one = 0.0;   ///< fraction of S_j samples with phi_j = 1
    double lip_psi = 0.0;          ///< max |grad psi| diam(R_j) on R_j
    double lip_bump = 0.0;         ///< max |grad phi_j| diam(R_j)
    double lip_normalized = 0.0;   ///< same for the normalized members
    double lip_psi_half = 0.0;     ///< the three above with step h / 2
    double lip_bump_half = 0.0;
    double lip_normalized_half = 0.0;
};

inline PartitionReport verify_partition(const Partition& p, std::size_t sample_count, std::uint64_t seed = 1)
{
    const auto& s = p.setup();
    const int m = s.m;
    PartitionReport rep;
    auto pts = layer_samples(m, s.grid.config().cap_level, sample_count, seed);
    rep.samples = pts.size();
    std::size_t in_s = 0, one = 0;

    const std::size_t lip_every = std::max<std::size_t>(1, sample_count / 20000);
    for (std::size_t i = 0; i < pts.size(); ++i) {
        Complex z = pts[i];
        auto v = p.evaluate(z);
        rep.min_phi = std::min(rep.min_phi, v.Phi);
        rep.max_sum_error = std::max(rep.max_sum_error, std::abs(v.normalized_sum() - 1.0));
        rep.max_overlap = std::max(rep.max_overlap, v.count);
        double r = std::abs(z);
        if (r <= s.inner_radius() && (v.psi != 1.0 || v.count != 0))
            rep.psi_one_on_core = false;
        if (r >= s.core_radius() * (1.0 - 1e-12) && v.psi != 0.0)
            rep.psi_zero_on_layer = false;
        auto st = s.grid.stencil(z);
        for (int k = 0; k < v.count; ++k) {
            int j = v.bumps[static_cast<std::size_t>(k)].j;
            // stencil nodes carrying bump j must lie inside c2 S_j
            for (int q = 0; q < st.size; ++q) {
                for (const Bump& b : p.node_bumps(st.node[static_cast<std::size_t>(q)]))
                    if (b.j == j) {
                        int node = st.node[static_cast<std::size_t>(q)];
                        const auto& tab = s.dist[static_cast<std::size_t>(j)];
                        auto it = std::lower_bound(tab.begin(), tab.end(), node,
                                                   [](const auto& e, int nd) { return e.node < nd; });
                        if (it == tab.end() || it->node != node ||
                            it->dist > (p.c2() - 1.0) * s.diam[static_cast<std::size_t>(j)])
                            rep.supports_ok = false;
                    }
            }
        }

        if (i % lip_every != 0)
            continue;
        for (int half = 0; half < 2; ++half) {
            double h = p.step(z) * (half ? 0.5 : 1.0);
            int rj = s.inner_radius() <= r && r <= s.core_radius()
                         ? std::min(static_cast<int>(angle_of(z) / std::ldexp(pi, -m)), s.count() - 1)
                         : -1;
            if (rj >= 0) {
                double g = image_gradient_norm(s.map, [&](Complex x) { return p.psi(x); }, z, h);
                double& slot = half ? rep.lip_psi_half : rep.lip_psi;
                slot = std::max(slot, g * s.diam[static_cast<std::size_t>(rj)]);
            }
            for (int k = 0; k < v.count; ++k) {
                int j = v.bumps[static_cast<std::size_t>(k)].j;
                double dj = s.diam[static_cast<std::size_t>(j)];
                double gb = image_gradient_norm(s.map, [&](Complex x) { return p.evaluate(x).bump(j); }, z, h);
                double gn = image_gradient_norm(s.map, [&](Complex x) { return p.evaluate(x).normalized(j); }, z, h);
                double& sb = half ? rep.lip_bump_half : rep.lip_bump;
                double& sn = half ? rep.lip_normalized_half : rep.lip_normalized;
                sb = std::max(sb, gb * dj);
                sn = std::max(sn, gn * dj);
            }
        }
    }

    // phi_j = 1 on S_j wherever the whole stencil lies in S_j.
    for (Complex z : pts) {
        if (std::abs(z) < s.core_radius())
            continue;
        auto st = s.grid.stencil(z);
        int lab = -2;
        bool uniform = true;
        for (int q = 0; q < st.size; ++q) {
            int l = s.s_label[static_cast<std::size_t>(st.node[static_cast<std::size_t>(q)])];
            if (lab == -2)
                lab = l;
            else if (l != lab)
                uniform = false;
        }
        if (!uniform || lab < 0)
            continue;
        ++in_s;
        if (p.evaluate(z).bump(lab) >= 1.0 - 1e-12)
            ++one;
    }
    rep.s_interior_one = in_s ? static_cast<double>(one) / static_cast<double>(in_s) : 1.0;
    return rep;
}

} // namespace sobdens
