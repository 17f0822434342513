#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <queue>
#include <span>
#include <vector>

#include "conformal_map.hpp"
#include "errors.hpp"
#include "geometry.hpp"

namespace sobdens {

struct GridConfig {
    int cap_level = 8;        ///< outermost ring at radius 1 - 2^-cap_level
    int base_angular = 16;    ///< nodes per ring in the central half-disk
    int rings_per_level = 2;  ///< rings per dyadic annulus
    int saturation_level = -1;  ///< angular count stops doubling past this level; -1 = never

    GridConfig doubled() const
    {
        GridConfig g = *this;
        g.base_angular *= 2;
        g.rings_per_level *= 2;
        return g;
    }
};

/// Polar graph on the closed disk of radius 1 - 2^-cap_level whose rings follow
/// the dyadic annuli 1 - 2^-l and whose angular count doubles per level.
/// Edge weights are image lengths |phi'(midpoint)| * |a - b|.
class PullbackGrid {
public:
    struct Ring {
        double radius;
        int count;
        int offset;
        int level;
    };

    struct Stencil {
        std::array<int, 4> node{};
        std::array<double, 4> weight{};
        int size = 0;

        template <class F>
        double apply(F&& value) const
        {
            double s = 0.0;
            for (int k = 0; k < size; ++k)
                s += weight[k] * value(node[k]);
            return s;
        }
    };

    PullbackGrid(const ConformalMap& map, GridConfig cfg) : cfg_(cfg)
    {
        if (cfg.cap_level < 1 || cfg.cap_level > 24)
            throw ConfigError("grid cap level must lie in [1, 24]");
        if (cfg.base_angular < 4 || cfg.base_angular % 4 != 0)
            throw ConfigError("grid base angular count must be a positive multiple of 4");
        if (cfg.rings_per_level < 1)
            throw ConfigError("grid needs at least one ring per level");
        build_rings();
        build_edges(map);
    }

    const GridConfig& config() const { return cfg_; }
    std::size_t size() const { return positions_.size(); }
    double cap_radius() const { return rings_.back().radius; }
    const std::vector<Ring>& rings() const { return rings_; }
    Complex position(int node) const { return positions_[static_cast<std::size_t>(node)]; }
    int ring_of(int node) const { return ring_of_[static_cast<std::size_t>(node)]; }

    struct Neighbor {
        int node;
        double weight;
    };
    std::span<const Neighbor> neighbors(int node) const
    {
        auto b = adj_offset_[static_cast<std::size_t>(node)];
        auto e = adj_offset_[static_cast<std::size_t>(node) + 1];
        return {adj_.data() + b, e - b};
    }

    /// Piecewise bilinear (in radius and angle) interpolation weights.
    Stencil stencil(Complex z) const
    {
        const double r = std::abs(z);
        if (!(r <= cap_radius() * (1.0 + 1e-14)))
            throw DomainError("point beyond the grid radius cap");
        Stencil st;
        std::size_t k = ring_index(r);
        if (k + 1 >= rings_.size()) {
            add_ring(st, rings_.back(), z, 1.0);
            return st;
        }
        const Ring& lo = rings_[k];
        const Ring& hi = rings_[k + 1];
        double g = (r - lo.radius) / (hi.radius - lo.radius);
        g = std::clamp(g, 0.0, 1.0);
        if (g < 1.0)
            add_ring(st, lo, z, 1.0 - g);
        if (g > 0.0)
            add_ring(st, hi, z, g);
        return st;
    }

    /// Nearest node in the pullback plane; ties go to the lower node id, which
    /// orders nodes by (level, ring, angular index).
    int nearest_node(Complex z) const
    {
        const double r = std::abs(z);
        if (!(r <= cap_radius() * (1.0 + 1e-14)))
            throw DomainError("point beyond the grid radius cap");
        std::size_t k = ring_index(r);
        int best = -1;
        double best_d = std::numeric_limits<double>::infinity();
        auto consider_ring = [&](const Ring& ring) {
            if (ring.count == 1) {
                consider(ring.offset, z, best, best_d);
                return;
            }
            double t = angle_of(z) / (2.0 * pi) * ring.count;
            int i0 = static_cast<int>(std::floor(t)) % ring.count;
            consider(ring.offset + i0, z, best, best_d);
            consider(ring.offset + (i0 + 1) % ring.count, z, best, best_d);
        };
        consider_ring(rings_[k]);
        if (k + 1 < rings_.size())
            consider_ring(rings_[k + 1]);
        if (k > 0)
            consider_ring(rings_[k - 1]);
        return best;
    }

    /// Radial gap of the band containing radius r.
    double radial_spacing(double r) const
    {
        std::size_t k = ring_index(std::min(r, cap_radius()));
        if (k + 1 >= rings_.size())
            k = rings_.size() - 2;
        return rings_[k + 1].radius - rings_[k].radius;
    }

private:
    std::size_t ring_index(double r) const
    {
        auto it = std::upper_bound(ring_radii_.begin(), ring_radii_.end(), r);
        std::size_t k = static_cast<std::size_t>(it - ring_radii_.begin());
        return k == 0 ? 0 : k - 1;
    }

    void consider(int node, Complex z, int& best, double& best_d) const
    {
        double d = std::abs(position(node) - z);
        if (d < best_d || (d == best_d && node < best)) {
            best_d = d;
            best = node;
        }
    }

    void add_ring(Stencil& st, const Ring& ring, Complex z, double w) const
    {
        if (ring.count == 1) {
            st.node[st.size] = ring.offset;
            st.weight[st.size++] = w;
            return;
        }
        double t = angle_of(z) / (2.0 * pi) * ring.count;
        double fl = std::floor(t);
        double f = t - fl;
        int i0 = static_cast<int>(fl) % ring.count;
        int i1 = (i0 + 1) % ring.count;
        st.node[st.size] = ring.offset + i0;
        st.weight[st.size++] = w * (1.0 - f);
        st.node[st.size] = ring.offset + i1;
        st.weight[st.size++] = w * f;
    }

    void build_rings()
    {
        const int s = cfg_.rings_per_level;
        auto push_ring = [&](double radius, int count, int level) {
            int offset = static_cast<int>(positions_.size());
            rings_.push_back({radius, count, offset, level});
            ring_radii_.push_back(radius);
            for (int i = 0; i < count; ++i) {
                positions_.push_back(count == 1 ? Complex{0.0}
                                                : std::polar(radius, 2.0 * pi * i / static_cast<double>(count)));
                ring_of_.push_back(static_cast<int>(rings_.size()) - 1);
            }
        };
        push_ring(0.0, 1, 0);
        for (int k = 1; k <= 2 * s; ++k)
            push_ring(0.5 * k / (2.0 * s), cfg_.base_angular, 0);
        for (int l = 1; l < cfg_.cap_level; ++l) {
            int lev = cfg_.saturation_level >= 0 ? std::min(l, cfg_.saturation_level) : l;
            int count = cfg_.base_angular << lev;
            double inner = 1.0 - std::ldexp(1.0, -l);
            double width = std::ldexp(1.0, -l - 1);
            for (int k = 1; k <= s; ++k)
                push_ring(inner + width * k / s, count, l);
        }
    }

    void build_edges(const ConformalMap& map)
    {
        struct E {
            int a, b;
        };
        std::vector<E> edges;
        for (std::size_t k = 0; k < rings_.size(); ++k) {
            const Ring& ring = rings_[k];
            if (ring.count >= 3)
                for (int i = 0; i < ring.count; ++i)
                    edges.push_back({ring.offset + i, ring.offset + (i + 1) % ring.count});
            if (k + 1 == rings_.size())
                continue;
            const Ring& out = rings_[k + 1];
            if (ring.count == 1) {
                for (int i = 0; i < out.count; ++i)
                    edges.push_back({ring.offset, out.offset + i});
                continue;
            }
            int ratio = out.count / ring.count;
            for (int i = 0; i < ring.count; ++i) {
                int c = i * ratio;
                for (int d = -1; d <= 1; ++d)
                    edges.push_back({ring.offset + i, out.offset + ((c + d) % out.count + out.count) % out.count});
            }
        }
        std::vector<std::size_t> degree(positions_.size() + 1, 0);
        for (const E& e : edges) {
            ++degree[static_cast<std::size_t>(e.a)];
            ++degree[static_cast<std::size_t>(e.b)];
        }
        adj_offset_.assign(positions_.size() + 1, 0);
        for (std::size_t i = 0; i < positions_.size(); ++i)
            adj_offset_[i + 1] = adj_offset_[i] + degree[i];
        adj_.resize(adj_offset_.back());
        std::vector<std::size_t> fill(adj_offset_.begin(), adj_offset_.end() - 1);
        for (const E& e : edges) {
            Complex pa = position(e.a), pb = position(e.b);
            double w = std::abs(map.eval(0.5 * (pa + pb)).deriv) * std::abs(pa - pb);
            adj_[fill[static_cast<std::size_t>(e.a)]++] = {e.b, w};
            adj_[fill[static_cast<std::size_t>(e.b)]++] = {e.a, w};
        }
    }

    GridConfig cfg_;
    std::vector<Ring> rings_;
    std::vector<double> ring_radii_;
    std::vector<Complex> positions_;
    std::vector<int> ring_of_;
    std::vector<std::size_t> adj_offset_;
    std::vector<Neighbor> adj_;
};

/// Reusable Dijkstra workspace over a PullbackGrid. Only nodes touched by the
/// last run are reset, so bounded runs stay local.
class ShortestPaths {
public:
    explicit ShortestPaths(const PullbackGrid& grid)
        : grid_(&grid), dist_(grid.size(), std::numeric_limits<double>::infinity()) {}

    struct Source {
        int node;
        double dist = 0.0;
    };

    /// Settles nodes in order of distance up to `cutoff`. `stop(node, d)` is
    /// called on every settled node; returning true ends the run.
    template <class Stop>
    void run(std::span<const Source> sources, double cutoff, Stop&& stop)
    {
        reset();
        using Item = std::pair<double, int>;
        std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
        for (const Source& s : sources) {
            if (s.dist < dist_[static_cast<std::size_t>(s.node)]) {
                if (dist_[static_cast<std::size_t>(s.node)] == std::numeric_limits<double>::infinity())
                    touched_.push_back(s.node);
                dist_[static_cast<std::size_t>(s.node)] = s.dist;
                heap.push({s.dist, s.node});
            }
        }
        while (!heap.empty()) {
            auto [d, u] = heap.top();
            heap.pop();
            if (d > dist_[static_cast<std::size_t>(u)])
                continue;
            if (d > cutoff)
                break;
            settled_.push_back(u);
            if (stop(u, d))
                break;
            for (const auto& nb : grid_->neighbors(u)) {
                double nd = d + nb.weight;
                double& cur = dist_[static_cast<std::size_t>(nb.node)];
                if (nd < cur) {
                    if (cur == std::numeric_limits<double>::infinity())
                        touched_.push_back(nb.node);
                    cur = nd;
                    heap.push({nd, nb.node});
                }
            }
        }
    }

    void run(std::span<const Source> sources, double cutoff = std::numeric_limits<double>::infinity())
    {
        run(sources, cutoff, [](int, double) { return false; });
    }

    /// Final distance for settled nodes; tentative or infinite otherwise.
    double distance(int node) const { return dist_[static_cast<std::size_t>(node)]; }
    const std::vector<int>& settled() const { return settled_; }

private:
    void reset()
    {
        for (int n : touched_)
            dist_[static_cast<std::size_t>(n)] = std::numeric_limits<double>::infinity();
        touched_.clear();
        settled_.clear();
    }

    const PullbackGrid* grid_;
    std::vector<double> dist_;
    std::vector<int> touched_;
    std::vector<int> settled_;
};

/// Inner distance between phi(a) and phi(b): shortest weighted path between
/// the grid nodes nearest to a and b.
inline double inner_distance(const PullbackGrid& grid, Complex a, Complex b)
{
    int na = grid.nearest_node(a);
    int nb = grid.nearest_node(b);
    ShortestPaths sp(grid);
    ShortestPaths::Source src{na, 0.0};
    sp.run(std::span<const ShortestPaths::Source>(&src, 1), std::numeric_limits<double>::infinity(),
           [nb](int node, double) { return node == nb; });
    double d = sp.distance(nb);
    if (!std::isfinite(d))
        throw ConstructionError("pullback grid is disconnected");
    return d;
}

} // namespace sobdens
