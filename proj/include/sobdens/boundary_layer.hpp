#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "conformal_map.hpp"
#include "dyadic.hpp"
#include "errors.hpp"
#include "geometry.hpp"
#include "hyperbolic.hpp"
#include "pullback_grid.hpp"

namespace sobdens {

struct LayerConfig {
    int n_max = 3;
    int K = 12;                  ///< endpoint samples per arc
    int geodesic_samples = 33;
    double hard_ratio = 50.0;    ///< cut length / diam(R_j) above this fails the build
};

/// Pullback radius where cuts stop: 1 - 2^{-m-n_max-4}.
inline double cut_cap_radius(int m, int n_max) { return dyadic_radius(m + n_max + 4); }

struct GeodesicCut {
    int j = 0;
    int n_max = 3;
    Complex beta_end{};
    Complex delta_end{};
    std::vector<Complex> geodesic;  ///< beta_end to delta_end
    std::vector<Complex> polyline;  ///< clipped to |z| >= core radius, plus the radial tail
    double image_length = 0.0;      ///< of the geodesic part
    double diam = 0.0;              ///< diam(R_j) used for the ratio
    double ratio() const { return image_length / diam; }
};

/// Radial segment from a to radius r1, `pieces` segments, a excluded.
inline void append_radial(std::vector<Complex>& out, Complex a, double r1, int pieces)
{
    double r0 = std::abs(a);
    Complex u = a / r0;
    for (int k = 1; k <= pieces; ++k)
        out.push_back(u * (r0 + (r1 - r0) * k / static_cast<double>(pieces)));
}

/// Part of `line` after its last entry into |z| >= radius. The crossing point
/// is found on the segment exactly.
inline std::vector<Complex> clip_outside(const std::vector<Complex>& line, double radius)
{
    std::size_t last_in = line.size();
    for (std::size_t k = 0; k < line.size(); ++k)
        if (std::abs(line[k]) < radius)
            last_in = k;
    if (last_in == line.size())
        return line;
    if (last_in + 1 == line.size())
        throw ConstructionError("cut ends inside the core");
    Complex a = line[last_in], b = line[last_in + 1];
    // |a + t (b - a)| = radius, root in (0, 1]
    Complex d = b - a;
    double qa = std::norm(d), qb = 2.0 * dot(a, d), qc = std::norm(a) - radius * radius;
    double t = (-qb + std::sqrt(std::max(0.0, qb * qb - 4.0 * qa * qc))) / (2.0 * qa);
    std::vector<Complex> out{a + std::clamp(t, 0.0, 1.0) * d};
    out.insert(out.end(), line.begin() + static_cast<std::ptrdiff_t>(last_in) + 1, line.end());
    return out;
}

/// Shortest image of a hyperbolic geodesic between K samples of beta_j and K
/// samples of delta_j^{n_max}. Ties within 1e-12 keep the earlier pair.
inline GeodesicCut compute_cut(const ConformalMap& map, int m, int j, const LayerConfig& cfg, double diam_j)
{
    if (cfg.n_max < 3)
        throw ConfigError("n_max must be at least 3");
    if (cfg.K < 8)
        throw ConfigError("cut search needs at least 8 endpoint samples per arc");
    ArcPair arcs = arc_pair(m, j, cfg.n_max);
    GeodesicCut best;
    best.j = arcs.j;
    best.n_max = cfg.n_max;
    best.diam = diam_j;
    best.image_length = std::numeric_limits<double>::infinity();
    for (int a = 0; a < cfg.K; ++a) {
        Complex zb = arcs.beta_at(a / static_cast<double>(cfg.K - 1));
        for (int b = 0; b < cfg.K; ++b) {
            Complex zd = arcs.delta_at(b / static_cast<double>(cfg.K - 1));
            auto g = geodesic_between(zb, zd, cfg.geodesic_samples);
            double len = image_length(map, g.polyline);
            if (len < best.image_length - 1e-12) {
                best.image_length = len;
                best.beta_end = zb;
                best.delta_end = zd;
                best.geodesic = std::move(g.polyline);
            }
        }
    }
    if (!(best.image_length <= cfg.hard_ratio * diam_j))
        throw ConstructionError("cut " + std::to_string(best.j) + " has image length " +
                                std::to_string(best.image_length) + " above " + std::to_string(cfg.hard_ratio) +
                                " * diam(R_j)");
    best.polyline = clip_outside(best.geodesic, arcs.beta_radius);
    append_radial(best.polyline, best.delta_end, cut_cap_radius(m, cfg.n_max), 8);
    return best;
}

/// Closed pullback polygon of S_j: the cuts gamma_j and gamma_{j+1} joined by
/// arcs slightly inside the core circle and slightly outside the unit circle.
struct LayerCell {
    int j = 0;
    std::vector<Complex> polygon;
};

inline constexpr double layer_outer_radius = 1.05;

class BoundaryLayer {
public:
    BoundaryLayer() = default;

    int m() const { return m_; }
    int count() const { return static_cast<int>(cuts_.size()); }
    bool empty() const { return cuts_.empty(); }
    const LayerConfig& config() const { return cfg_; }
    const std::vector<GeodesicCut>& cuts() const { return cuts_; }
    const std::vector<LayerCell>& cells() const { return cells_; }
    const GeodesicCut& cut(int j) const { return cuts_[static_cast<std::size_t>(wrap(j))]; }
    int wrap(int j) const { return ((j % count()) + count()) % count(); }
    double core_radius() const { return dyadic_radius(m_ + 1); }
    double cap_radius() const { return cut_cap_radius(m_, cfg_.n_max); }

    /// Largest cut length to diam(R_j) ratio.
    double c_geo() const
    {
        double c = 0.0;
        for (const auto& g : cuts_)
            c = std::max(c, g.ratio());
        return c;
    }

    /// Index of the S_j containing z; -1 inside the core or outside the disk.
    /// Points within rounding of the core circle count as layer points.
    int locate(Complex z) const
    {
        double r = std::abs(z);
        if (r < core_radius() * (1.0 - 1e-12) || r >= 1.0)
            return -1;
        double w = std::ldexp(pi, -m_);
        double t = angle_of(z) / w;
        // S_j spans at most angles [(j + 1/2) w, (j + 2) w].
        int lo = static_cast<int>(std::ceil(t - 2.0)), hi = static_cast<int>(std::floor(t - 0.5));
        int cand[4];
        int nc = 0;
        for (int j = lo; j <= hi && nc < 4; ++j)
            cand[nc++] = wrap(j);
        std::sort(cand, cand + nc);
        for (int k = 0; k < nc; ++k)
            if (point_in_polygon(cells_[static_cast<std::size_t>(cand[k])].polygon, z))
                return cand[k];
        int best = -1;
        double bd = std::numeric_limits<double>::infinity();
        for (int k = 0; k < nc; ++k) {
            double d = polyline_distance(cells_[static_cast<std::size_t>(cand[k])].polygon, z, true);
            if (d < bd) {
                bd = d;
                best = cand[k];
            }
        }
        return best;
    }

    friend BoundaryLayer build_layer(const ConformalMap& map, const Decomposition& d, const LayerConfig& cfg);

private:
    int m_ = 0;
    LayerConfig cfg_;
    std::vector<GeodesicCut> cuts_;
    std::vector<LayerCell> cells_;
};

inline std::vector<Complex> arc_points(double radius, double t0, double t1, int pieces)
{
    std::vector<Complex> out;
    for (int k = 0; k <= pieces; ++k)
        out.push_back(std::polar(radius, t0 + (t1 - t0) * k / static_cast<double>(pieces)));
    return out;
}

/// Cuts for every j and the layer cells between consecutive cuts. The
/// decomposition must be measured (diam(R_j) is needed).
inline BoundaryLayer build_layer(const ConformalMap& map, const Decomposition& d, const LayerConfig& cfg)
{
    if (d.metrics.size() != d.cells.size())
        throw ConfigError("build_layer needs a measured decomposition");
    BoundaryLayer layer;
    layer.m_ = d.m;
    layer.cfg_ = cfg;
    const int n = d.count();
    layer.cuts_.resize(static_cast<std::size_t>(n));
    for (int j = 0; j < n; ++j)
        layer.cuts_[static_cast<std::size_t>(j)] = compute_cut(map, d.m, j, cfg, d.diam(j));

    for (int j = 0; j < n; ++j)
        if (polylines_intersect(layer.cut(j).polyline, layer.cut(j + 1).polyline))
            throw ConstructionError("cuts " + std::to_string(j) + " and " + std::to_string((j + 1) % n) +
                                    " intersect");

    const double inner = layer.core_radius() - std::ldexp(1.0, -d.m - 2);
    for (int j = 0; j < n; ++j) {
        const auto& a = layer.cut(j).polyline;
        const auto& b = layer.cut(j + 1).polyline;
        double ta = std::arg(a.front()), tb = std::arg(b.front());
        double ea = std::arg(a.back()), eb = std::arg(b.back());
        while (tb <= ta)
            tb += 2.0 * pi;
        while (eb <= ea)
            eb += 2.0 * pi;
        LayerCell cell;
        cell.j = j;
        auto& poly = cell.polygon;
        poly.push_back(std::polar(inner, ta));
        poly.insert(poly.end(), a.begin(), a.end());
        poly.push_back(std::polar(layer_outer_radius, ea));
        auto outer = arc_points(layer_outer_radius, ea, eb, 16);
        poly.insert(poly.end(), outer.begin() + 1, outer.end());
        poly.insert(poly.end(), b.rbegin(), b.rend());
        auto back = arc_points(inner, tb, ta, 16);
        poly.insert(poly.end(), back.begin(), back.end() - 1);
        layer.cells_.push_back(std::move(cell));
    }
    return layer;
}

/// Grid nodes along a pullback polyline, without repeats.
inline std::vector<int> rasterize(const PullbackGrid& grid, const std::vector<Complex>& line)
{
    std::vector<int> out;
    auto add = [&](Complex z) {
        if (std::abs(z) > grid.cap_radius())
            z *= grid.cap_radius() / std::abs(z);
        int nd = grid.nearest_node(z);
        if (out.empty() || out.back() != nd)
            out.push_back(nd);
    };
    for (std::size_t k = 0; k + 1 < line.size(); ++k) {
        Complex a = line[k], b = line[k + 1];
        double step = 0.5 * grid.radial_spacing(std::min(std::abs(a), std::abs(b)));
        int pieces = std::max(1, static_cast<int>(std::ceil(std::abs(b - a) / step)));
        for (int i = 0; i < pieces; ++i)
            add(a + (b - a) * (i / static_cast<double>(pieces)));
    }
    if (!line.empty())
        add(line.back());
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

/// S_j label per grid node (-1 in the core).
inline std::vector<int> layer_labels(const PullbackGrid& grid, const BoundaryLayer& layer)
{
    std::vector<int> lab(grid.size());
    for (std::size_t k = 0; k < grid.size(); ++k)
        lab[k] = layer.locate(grid.position(static_cast<int>(k)));
    return lab;
}

/// Grid for separation and partition work on a level-m layer.
inline GridConfig layer_grid_config(int m, int n_max)
{
    GridConfig g;
    g.cap_level = m + n_max + 4;
    g.base_angular = 16;
    g.rings_per_level = 2;
    g.saturation_level = m + 3;
    return g;
}

struct SeparationReport {
    double c_low = 0.0;     ///< min over j of dist(gamma_j, gamma_{j+1}) / diam(R_j)
    double c_high = 0.0;
    double c_sep = 0.0;     ///< min over non-adjacent i, j of dist(S_i, S_j) / max diam
    double c_geo = 0.0;
    double diam_ratio = 0.0;  ///< max diam(R_{j+1}) / diam(R_j) either way
    std::vector<double> cut_gaps;
    bool ok() const { return c_low > 0.0 && c_sep > 0.0 && std::isfinite(c_high); }
};

inline SeparationReport verify_separation(const PullbackGrid& grid, const BoundaryLayer& layer,
                                          const Decomposition& d)
{
    if (layer.empty())
        throw ConfigError("separation check needs a built layer");
    const int n = layer.count();
    SeparationReport rep;
    rep.c_geo = layer.c_geo();
    rep.c_low = std::numeric_limits<double>::infinity();
    rep.c_sep = std::numeric_limits<double>::infinity();

    std::vector<std::vector<int>> cut_nodes(static_cast<std::size_t>(n));
    for (int j = 0; j < n; ++j)
        cut_nodes[static_cast<std::size_t>(j)] = rasterize(grid, layer.cut(j).polyline);

    ShortestPaths sp(grid);
    std::vector<char> target(grid.size(), 0);
    for (int j = 0; j < n; ++j) {
        const auto& next = cut_nodes[static_cast<std::size_t>((j + 1) % n)];
        for (int v : next)
            target[static_cast<std::size_t>(v)] = 1;
        std::vector<ShortestPaths::Source> src;
        for (int v : cut_nodes[static_cast<std::size_t>(j)])
            src.push_back({v, 0.0});
        double hit = std::numeric_limits<double>::infinity();
        sp.run(src, std::numeric_limits<double>::infinity(), [&](int v, double dist) {
            if (target[static_cast<std::size_t>(v)]) {
                hit = dist;
                return true;
            }
            return false;
        });
        for (int v : next)
            target[static_cast<std::size_t>(v)] = 0;
        double ratio = hit / d.diam(j);
        rep.cut_gaps.push_back(ratio);
        rep.c_low = std::min(rep.c_low, ratio);
        rep.c_high = std::max(rep.c_high, ratio);
        rep.diam_ratio = std::max({rep.diam_ratio, d.diam(j + 1) / d.diam(j), d.diam(j) / d.diam(j + 1)});
    }

    auto labels = layer_labels(grid, layer);
    std::vector<std::vector<ShortestPaths::Source>> members(static_cast<std::size_t>(n));
    for (std::size_t k = 0; k < labels.size(); ++k)
        if (labels[k] >= 0)
            members[static_cast<std::size_t>(labels[k])].push_back({static_cast<int>(k), 0.0});
    double dmax = 0.0;
    for (int j = 0; j < n; ++j)
        dmax = std::max(dmax, d.diam(j));
    if (n >= 4) {
        for (int i = 0; i < n; ++i) {
            const auto& src = members[static_cast<std::size_t>(i)];
            if (src.empty())
                throw ResolutionError("layer cell " + std::to_string(i) + " holds no grid nodes");
            sp.run(src, std::numeric_limits<double>::infinity(), [&](int v, double dist) {
                if (dist > rep.c_sep * dmax)
                    return true;
                int j = labels[static_cast<std::size_t>(v)];
                if (j < 0)
                    return false;
                int gap = std::abs(i - j);
                gap = std::min(gap, n - gap);
                if (gap >= 2)
                    rep.c_sep = std::min(rep.c_sep, dist / std::max(d.diam(i), d.diam(j)));
                return false;
            });
        }
    }
    return rep;
}

} // namespace sobdens
