#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <vector>

#include "conformal_map.hpp"
#include "dyadic.hpp"
#include "errors.hpp"
#include "geometry.hpp"

namespace sobdens {

namespace detail {

struct GaussRule {
    std::vector<double> x;  ///< nodes in (0, 1)
    std::vector<double> w;  ///< weights summing to 1
};

/// Gauss-Legendre on [0, 1] by Newton iteration on P_n.
inline GaussRule gauss_legendre(int n)
{
    GaussRule g;
    for (int i = 0; i < n; ++i) {
        double x = std::cos(pi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= n; ++k) {
                double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = pk;
            }
            double pn = n == 1 ? x : p1, pm = n == 1 ? 1.0 : p0;
            dp = n * (x * pn - pm) / (x * x - 1.0);
            double dx = pn / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16)
                break;
        }
        g.x.push_back(0.5 * (1.0 - x));
        g.w.push_back(1.0 / ((1.0 - x * x) * dp * dp));
    }
    return g;
}

} // namespace detail

struct QuadratureChunk {
    int level;
    int k0;  ///< first angular segment
    int k1;  ///< one past the last
};

struct QuadratureConfig {
    int cap_level = 8;         ///< outer radius 1 - 2^-cap_level
    int first_level = 0;       ///< panels below this level are skipped
    int base_angular = 16;     ///< angular segments in the central panel [0, 1/2]
    int radial_points = 4;
    int angular_points = 2;
    int saturation_level = -1; ///< angular segments stop doubling past this level; -1 = never
};

/// Tensor polar rule on the disk of radius 1 - 2^-cap_level. Panel 0 is
/// [0, 1/2]; panel l >= 1 is the dyadic annulus [1 - 2^-l, 1 - 2^-l-1] cut into
/// base * 2^l angular segments, each with Gauss points in r and theta. Nodes
/// are produced on the fly.
class PolarQuadrature {
public:
    explicit PolarQuadrature(QuadratureConfig cfg) : cfg_(cfg)
    {
        if (cfg.cap_level < 1 || cfg.cap_level > 30)
            throw ConfigError("quadrature cap level must lie in [1, 30]");
        if (cfg.first_level < 0 || cfg.first_level >= cfg.cap_level)
            throw ConfigError("quadrature first level must lie below the cap level");
        if (cfg.base_angular < 2 || cfg.radial_points < 1 || cfg.angular_points < 1)
            throw ConfigError("quadrature needs positive point counts");
        radial_ = detail::gauss_legendre(cfg.radial_points);
        central_ = detail::gauss_legendre(2 * cfg.radial_points);
        angular_ = detail::gauss_legendre(cfg.angular_points);
    }

    const QuadratureConfig& config() const { return cfg_; }
    double cap_radius() const { return dyadic_radius(cfg_.cap_level); }

    double panel_inner(int l) const { return l == 0 ? 0.0 : dyadic_radius(l); }
    double panel_outer(int l) const { return l == 0 ? 0.5 : dyadic_radius(l + 1); }
    int segments(int l) const
    {
        int lev = cfg_.saturation_level >= 0 ? std::min(l, cfg_.saturation_level) : l;
        return cfg_.base_angular << lev;
    }

    std::size_t size() const
    {
        std::size_t n = 0;
        for (int l = cfg_.first_level; l < cfg_.cap_level; ++l)
            n += static_cast<std::size_t>(segments(l)) * (l == 0 ? central_ : radial_).x.size();
        return n * angular_.x.size();
    }

    /// f(z, weight) for every node of panels first_level..cap_level-1.
    template <class F>
    void for_each(F&& f) const
    {
        for (int l = cfg_.first_level; l < cfg_.cap_level; ++l)
            for_each_in_panel(l, 0.0, 2.0 * pi, f);
    }

    /// Nodes of panel l with angle in [t0, t1]; t0, t1 must fall on segment edges.
    template <class F>
    void for_each_in_panel(int l, double t0, double t1, F&& f) const
    {
        const double dt = 2.0 * pi / segments(l);
        const int k0 = static_cast<int>(std::llround(t0 / dt)), k1 = static_cast<int>(std::llround(t1 / dt));
        if (std::abs(k0 * dt - t0) > 1e-9 * dt || std::abs(k1 * dt - t1) > 1e-9 * dt)
            throw ResolutionError("angular range does not align with quadrature segments");
        for_each_in_chunk({l, k0, k1}, f);
    }

    /// Fixed split of the node set into runs of at most max_segments angular
    /// segments. Sums formed per chunk and then combined in chunk order do not
    /// depend on how chunks are scheduled.
    std::vector<QuadratureChunk> chunks(int max_segments = 512) const
    {
        std::vector<QuadratureChunk> out;
        for (int l = cfg_.first_level; l < cfg_.cap_level; ++l)
            for (int k = 0; k < segments(l); k += max_segments)
                out.push_back({l, k, std::min(k + max_segments, segments(l))});
        return out;
    }

    template <class F>
    void for_each_in_chunk(const QuadratureChunk& c, F&& f) const
    {
        const double dt = 2.0 * pi / segments(c.level);
        const double r0 = panel_inner(c.level), r1 = panel_outer(c.level);
        const auto& rad = c.level == 0 ? central_ : radial_;
        for (std::size_t a = 0; a < rad.x.size(); ++a) {
            double r = r0 + (r1 - r0) * rad.x[a];
            double wr = (r1 - r0) * rad.w[a] * r;
            for (int k = c.k0; k < c.k1; ++k)
                for (std::size_t b = 0; b < angular_.x.size(); ++b) {
                    double t = (k + angular_.x[b]) * dt;
                    f(std::polar(r, t), wr * dt * angular_.w[b]);
                }
        }
    }

private:
    QuadratureConfig cfg_;
    detail::GaussRule radial_;
    detail::GaussRule central_;  ///< radial rule for the wide panel [0, 1/2]
    detail::GaussRule angular_;
};

/// Quadrature for level-m work: cap at m + n_max + 4, matching the cut tails.
inline QuadratureConfig level_quadrature(int m, int n_max, int first_level = 0)
{
    QuadratureConfig q;
    q.cap_level = m + n_max + 4;
    q.first_level = first_level;
    q.saturation_level = m + 3;
    return q;
}

} // namespace sobdens
