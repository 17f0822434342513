#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "boundary.hpp"
#include "conformal_map.hpp"
#include "errors.hpp"
#include "geometry.hpp"
#include "hyperbolic.hpp"

namespace sobdens {

inline double dyadic_radius(int l) { return 1.0 - std::ldexp(1.0, -l); }

/// Closed annular sector Q_{l,j}. Level 0 holds the two half-disks of B(0, 1/2).
struct DyadicCell {
    int level = 0;
    int index = 0;
    double r_inner = 0.0;
    double r_outer = 0.0;
    double theta0 = 0.0;
    double theta1 = 0.0;

    double angular_width() const { return theta1 - theta0; }

    bool contains(Complex z, double tol = 1e-12) const
    {
        double r = std::abs(z);
        if (r < r_inner - tol || r > r_outer + tol)
            return false;
        if (r == 0.0)
            return true;
        double a = angle_of(z);
        if (a >= theta0 - tol && a <= theta1 + tol)
            return true;
        return theta1 >= 2.0 * pi - tol && a <= tol;
    }

    Complex at(double radial_fraction, double angular_fraction) const
    {
        return std::polar(r_inner + radial_fraction * (r_outer - r_inner),
                          theta0 + angular_fraction * (theta1 - theta0));
    }

    /// Closed loop: inner arc, radial edge at theta1, outer arc back, radial edge at theta0.
    std::vector<Complex> boundary_loop(int per_side) const
    {
        std::vector<Complex> out;
        out.reserve(static_cast<std::size_t>(4 * per_side));
        for (int k = 0; k < per_side; ++k)
            out.push_back(at(0.0, static_cast<double>(k) / per_side));
        for (int k = 0; k < per_side; ++k)
            out.push_back(at(static_cast<double>(k) / per_side, 1.0));
        for (int k = 0; k < per_side; ++k)
            out.push_back(at(1.0, 1.0 - static_cast<double>(k) / per_side));
        for (int k = 0; k < per_side; ++k)
            out.push_back(at(1.0 - static_cast<double>(k) / per_side, 0.0));
        return out;
    }

    std::vector<Complex> interior_samples(int per_side) const
    {
        std::vector<Complex> out;
        out.reserve(static_cast<std::size_t>(per_side * per_side));
        for (int i = 0; i < per_side; ++i)
            for (int k = 0; k < per_side; ++k)
                out.push_back(at((i + 0.5) / per_side, (k + 0.5) / per_side));
        return out;
    }

    double pullback_area() const { return 0.5 * (theta1 - theta0) * (r_outer * r_outer - r_inner * r_inner); }
};

/// All cells of level l, counterclockwise from the positive real axis.
inline std::vector<DyadicCell> level_cells(int l)
{
    if (l < 0 || l > 30)
        throw ConfigError("dyadic level out of range");
    std::vector<DyadicCell> out;
    if (l == 0) {
        out.push_back({0, 0, 0.0, 0.5, 0.0, pi});
        out.push_back({0, 1, 0.0, 0.5, pi, 2.0 * pi});
        return out;
    }
    const int count = 1 << (l + 1);
    const double width = std::ldexp(pi, -l);
    for (int j = 0; j < count; ++j)
        out.push_back({l, j, dyadic_radius(l), dyadic_radius(l + 1), j * width, (j + 1) * width});
    return out;
}

/// Image-side data for one cell R_j = phi(Q_{m,j}).
struct CellMetrics {
    double image_diameter = 0.0;
    double inscribed_radius = 0.0;
    double boundary_distance = 0.0;  ///< dist(R_j, boundary of the image domain)
    double whitney_lambda = 0.0;     ///< smallest lambda satisfying both Whitney conditions
    double deriv_min = 0.0;
    double deriv_max = 0.0;
    double hyperbolic_diameter = 0.0;

    double distortion_ratio() const { return deriv_max / deriv_min; }
    /// max|phi'| / min|phi'| <= exp(3 * hyperbolic diameter)
    bool distortion_bound_holds() const { return distortion_ratio() <= std::exp(3.0 * hyperbolic_diameter); }
};

inline CellMetrics cell_metrics(const ConformalMap& map, const DyadicCell& cell, int sample_density,
                                const ImageCurve& boundary)
{
    if (sample_density < 16)
        throw ConfigError("cell metrics need at least 16 samples per side");
    CellMetrics out;
    auto loop = cell.boundary_loop(sample_density);
    auto interior = cell.interior_samples(sample_density);

    std::vector<Complex> image(loop.size());
    out.deriv_min = std::numeric_limits<double>::infinity();
    auto track = [&](Complex z) {
        auto v = map.eval(z);
        double d = std::abs(v.deriv);
        out.deriv_min = std::min(out.deriv_min, d);
        out.deriv_max = std::max(out.deriv_max, d);
        return v.w;
    };
    for (std::size_t k = 0; k < loop.size(); ++k)
        image[k] = track(loop[k]);

    for (std::size_t a = 0; a < image.size(); ++a)
        for (std::size_t b = a + 1; b < image.size(); ++b)
            out.image_diameter = std::max(out.image_diameter, std::abs(image[a] - image[b]));

    for (Complex z : interior)
        out.inscribed_radius = std::max(out.inscribed_radius, polyline_distance(image, track(z), true));

    out.boundary_distance = std::numeric_limits<double>::infinity();
    for (Complex w : image)
        out.boundary_distance = std::min(out.boundary_distance, boundary.distance(w));

    double lam_disk = out.image_diameter / out.inscribed_radius;
    double lam_dist = std::max(out.image_diameter / out.boundary_distance, out.boundary_distance / out.image_diameter);
    out.whitney_lambda = std::max(lam_disk, lam_dist);
    out.hyperbolic_diameter = hyperbolic_diameter(loop);
    return out;
}

/// Level-m cells and their images R_j, plus the radii describing the core
/// Omega_m = phi(closed disk of radius 1 - 2^{-m-1}), the annulus image D_m and
/// the boundary layer J_m.
struct Decomposition {
    int m = 2;
    std::vector<DyadicCell> cells;
    std::vector<CellMetrics> metrics;  ///< empty until measure()

    int count() const { return static_cast<int>(cells.size()); }
    double core_radius() const { return dyadic_radius(m + 1); }
    double inner_radius() const { return dyadic_radius(m); }
    double angular_width() const { return std::ldexp(pi, -m); }
    int wrap(int j) const { return ((j % count()) + count()) % count(); }

    double diam(int j) const { return metrics.at(static_cast<std::size_t>(wrap(j))).image_diameter; }

    /// Cell index by angle, ties to the lower index; the radius is not checked.
    int sector_of(Complex z) const
    {
        double t = angle_of(z) / angular_width();
        double fl = std::floor(t);
        int j = static_cast<int>(fl);
        if (t == fl && j > 0)
            --j;
        return std::min(j, count() - 1);
    }

    /// Index of the cell containing z, or -1 outside the closed annulus A_m.
    int locate(Complex z) const
    {
        double r = std::abs(z);
        if (r < inner_radius() || r > core_radius())
            return -1;
        return sector_of(z);
    }

    double max_lambda() const
    {
        double best = 0.0;
        for (const auto& mt : metrics)
            best = std::max(best, mt.whitney_lambda);
        return best;
    }

    double annulus_area() const
    {
        return pi * (core_radius() * core_radius() - inner_radius() * inner_radius());
    }
};

inline Decomposition build_cells(int m)
{
    if (m < 2 || m > 14)
        throw ConfigError("decomposition level m must lie in [2, 14]");
    Decomposition d;
    d.m = m;
    d.cells = level_cells(m);
    return d;
}

inline std::size_t default_boundary_samples(int m) { return std::max<std::size_t>(4096, std::size_t{1} << (m + 8)); }

inline void measure(Decomposition& d, const ConformalMap& map, int sample_density, const ImageCurve& boundary)
{
    d.metrics.clear();
    d.metrics.reserve(d.cells.size());
    for (const auto& c : d.cells)
        d.metrics.push_back(cell_metrics(map, c, sample_density, boundary));
}

inline Decomposition build_measured(const ConformalMap& map, int m, int sample_density = 16)
{
    Decomposition d = build_cells(m);
    ImageCurve boundary(map, 1.0, default_boundary_samples(m));
    measure(d, map, sample_density, boundary);
    return d;
}

/// beta_j on the core circle and delta_j^n deeper in, both over the second
/// half of the angular range of Q_{m,j}.
struct ArcPair {
    int m = 2;
    int j = 0;
    int n = 3;
    double beta_radius = 0.0;
    double delta_radius = 0.0;
    double theta0 = 0.0;
    double theta1 = 0.0;

    Complex beta_at(double t) const { return std::polar(beta_radius, theta0 + t * (theta1 - theta0)); }
    Complex delta_at(double t) const { return std::polar(delta_radius, theta0 + t * (theta1 - theta0)); }
};

inline ArcPair arc_pair(int m, int j, int n)
{
    if (n < 3)
        throw ConfigError("arc pair depth n must be at least 3");
    if (m < 1)
        throw ConfigError("arc pair level m must be positive");
    const int count = 1 << (m + 1);
    j = ((j % count) + count) % count;
    ArcPair a;
    a.m = m;
    a.j = j;
    a.n = n;
    a.beta_radius = dyadic_radius(m + 1);
    a.delta_radius = dyadic_radius(m + n);
    a.theta0 = (2 * j + 1) * std::ldexp(pi, -m - 1);
    a.theta1 = (j + 1) * std::ldexp(pi, -m);
    return a;
}

/// Euclidean distance between the beta arcs of two pairs (same circle).
inline double beta_gap(const ArcPair& a, const ArcPair& b)
{
    auto wrap = [](double x) {
        x = std::fmod(x, 2.0 * pi);
        return x < 0 ? x + 2.0 * pi : x;
    };
    // Intervals overlap if either start lies inside the other interval.
    auto inside = [&](double x, double lo, double hi) { return wrap(x - lo) <= hi - lo; };
    if (inside(b.theta0, a.theta0, a.theta1) || inside(a.theta0, b.theta0, b.theta1))
        return 0.0;
    double sep = std::min(wrap(b.theta0 - a.theta1), wrap(a.theta0 - b.theta1));
    return 2.0 * a.beta_radius * std::sin(0.5 * std::min(sep, pi));
}

} // namespace sobdens
