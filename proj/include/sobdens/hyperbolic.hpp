#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "conformal_map.hpp"
#include "errors.hpp"
#include "geometry.hpp"

namespace sobdens {

// Metric convention throughout: density 2 / (1 - |z|^2).

inline double hyperbolic_distance(Complex z, Complex w)
{
    if (!(std::abs(z) < 1.0) || !(std::abs(w) < 1.0))
        throw DomainError("hyperbolic distance needs points in the open disk");
    double t = std::abs((z - w) / (1.0 - std::conj(z) * w));
    return std::log1p(t) - std::log1p(-t);
}

/// Line element 2|dz| / (1 - |z|^2).
inline double hyperbolic_density(Complex z) { return 2.0 / (1.0 - std::norm(z)); }

struct HyperbolicGeodesic {
    enum class Kind { DiameterSegment, CircularArc };

    Kind kind = Kind::DiameterSegment;
    Complex center{0.0};
    double radius = 0.0;
    Complex start{0.0};
    Complex end{0.0};
    std::vector<Complex> polyline;
};

/// Hyperbolic geodesic joining two points of the closed disk, sampled with
/// `samples` points including both endpoints.
inline HyperbolicGeodesic geodesic_between(Complex z, Complex w, int samples = 33)
{
    constexpr double boundary_slack = 1e-12;
    if (std::abs(z) > 1.0 + boundary_slack || std::abs(w) > 1.0 + boundary_slack)
        throw DomainError("geodesic endpoints must lie in the closed disk");
    if (std::abs(z - w) <= 1e-15)
        throw DegenerateInputError("geodesic between coincident points");
    if (samples < 2)
        throw ConfigError("geodesic needs at least two samples");

    HyperbolicGeodesic g;
    g.start = z;
    g.end = w;
    g.polyline.reserve(static_cast<std::size_t>(samples));

    const double det = cross(z, w);  // zx*wy - zy*wx
    if (std::abs(det) <= 1e-12 * std::abs(z) * std::abs(w) || std::abs(z) == 0.0 || std::abs(w) == 0.0) {
        g.kind = HyperbolicGeodesic::Kind::DiameterSegment;
        for (int k = 0; k < samples; ++k) {
            double t = static_cast<double>(k) / (samples - 1);
            g.polyline.push_back(z + t * (w - z));
        }
        g.polyline.back() = w;
        return g;
    }

    // Orthogonality to the unit circle plus incidence gives Re(conj(c) p) = (1 + |p|^2) / 2.
    const double rz = 0.5 * (1.0 + std::norm(z));
    const double rw = 0.5 * (1.0 + std::norm(w));
    const double cx = (rz * w.imag() - rw * z.imag()) / det;
    const double cy = (z.real() * rw - w.real() * rz) / det;
    g.kind = HyperbolicGeodesic::Kind::CircularArc;
    g.center = Complex(cx, cy);
    g.radius = std::sqrt(std::norm(g.center) - 1.0);

    double a0 = std::arg(z - g.center);
    double a1 = std::arg(w - g.center);
    double sweep = a1 - a0;
    while (sweep > pi) sweep -= 2.0 * pi;
    while (sweep <= -pi) sweep += 2.0 * pi;
    for (int k = 0; k < samples; ++k) {
        double t = static_cast<double>(k) / (samples - 1);
        g.polyline.push_back(g.center + g.radius * std::polar(1.0, a0 + t * sweep));
    }
    g.polyline.front() = z;
    g.polyline.back() = w;
    return g;
}

namespace detail {
// 5-point Gauss-Legendre on [0, 1].
inline constexpr std::array<double, 5> gl5_nodes{0.04691007703066800, 0.23076534494715845, 0.5,
                                                 0.76923465505284155, 0.95308992296933200};
inline constexpr std::array<double, 5> gl5_weights{0.11846344252809454, 0.23931433524968324, 0.28444444444444444,
                                                   0.23931433524968324, 0.11846344252809454};
} // namespace detail

/// Length of the image phi(polyline): composite 5-point Gauss quadrature of
/// |phi'| along each pullback segment.
inline double image_length(const ConformalMap& map, const std::vector<Complex>& polyline)
{
    if (polyline.empty())
        throw ConfigError("image_length of an empty polyline");
    for (Complex p : polyline)
        if (!(std::abs(p) < 1.0))
            throw DomainError("image_length polyline leaves the open disk");
    CompensatedSum total;
    for (std::size_t i = 0; i + 1 < polyline.size(); ++i) {
        Complex a = polyline[i], b = polyline[i + 1];
        double len = std::abs(b - a);
        if (len == 0.0)
            continue;
        double seg = 0.0;
        for (std::size_t q = 0; q < 5; ++q)
            seg += detail::gl5_weights[q] * std::abs(map.eval(a + detail::gl5_nodes[q] * (b - a)).deriv);
        total += seg * len;
    }
    return total.value();
}

/// Hyperbolic length of a polyline, same quadrature as image_length.
inline double hyperbolic_length(const std::vector<Complex>& polyline)
{
    CompensatedSum total;
    for (std::size_t i = 0; i + 1 < polyline.size(); ++i) {
        Complex a = polyline[i], b = polyline[i + 1];
        double seg = 0.0;
        for (std::size_t q = 0; q < 5; ++q)
            seg += detail::gl5_weights[q] * hyperbolic_density(a + detail::gl5_nodes[q] * (b - a));
        total += seg * std::abs(b - a);
    }
    return total.value();
}

/// Hyperbolic diameter of a finite sample set.
inline double hyperbolic_diameter(const std::vector<Complex>& pts)
{
    double best = 0.0;
    for (std::size_t i = 0; i < pts.size(); ++i)
        for (std::size_t k = i + 1; k < pts.size(); ++k)
            best = std::max(best, hyperbolic_distance(pts[i], pts[k]));
    return best;
}

struct GehringHaymanReport {
    int pairs = 0;
    int samples = 0;
    double max_ratio = 0.0;
    double mean_ratio = 0.0;
    Complex worst_z{0.0};
    Complex worst_w{0.0};
};

/// length(phi(geodesic)) / length(phi(chord)) over random pairs, area-uniform
/// in the disk of radius r_max. Both curves use `samples` points.
inline GehringHaymanReport gehring_hayman(const ConformalMap& map, int pairs = 1000, int samples = 33,
                                          std::uint64_t seed = 1, double r_max = 1.0 - 0x1p-10)
{
    if (pairs < 1 || samples < 2 || !(r_max > 0.0 && r_max < 1.0))
        throw ConfigError("Gehring-Hayman check needs pairs >= 1, samples >= 2 and 0 < r_max < 1");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    auto draw = [&] { return std::polar(r_max * std::sqrt(U(rng)), 2.0 * pi * U(rng)); };
    GehringHaymanReport rep;
    rep.pairs = pairs;
    rep.samples = samples;
    CompensatedSum total;
    for (int k = 0; k < pairs; ++k) {
        Complex z = draw(), w = draw();
        std::vector<Complex> chord;
        for (int i = 0; i < samples; ++i)
            chord.push_back(z + (w - z) * (i / double(samples - 1)));
        double c = image_length(map, chord);
        if (!(c > 0.0))
            continue;
        double ratio = image_length(map, geodesic_between(z, w, samples).polyline) / c;
        total += ratio;
        if (ratio > rep.max_ratio) {
            rep.max_ratio = ratio;
            rep.worst_z = z;
            rep.worst_w = w;
        }
    }
    rep.mean_ratio = total.value() / pairs;
    return rep;
}

} // namespace sobdens
