#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "conformal_map.hpp"
#include "errors.hpp"
#include "geometry.hpp"

namespace sobdens {

/// Radius used for boundary values. On |z| = 1 a chain can sit exactly on a
/// branch cut (the slit map does), so boundary values are radial limits taken
/// from just inside.
inline constexpr double boundary_radius = 1.0 - 0x1p-44;

inline double sampling_radius(double radius) { return std::min(radius, boundary_radius); }

/// phi(radius * e^{2 pi i k / n}) for k = 0..n-1. Samples that hit a pole of
/// the chain come back non-finite.
inline std::vector<Complex> circle_image(const ConformalMap& map, double radius, std::size_t n)
{
    std::vector<Complex> out(n);
    const double r = sampling_radius(radius);
    for (std::size_t k = 0; k < n; ++k)
        out[k] = map.eval_unchecked(std::polar(r, 2.0 * pi * static_cast<double>(k) / static_cast<double>(n))).w;
    return out;
}

inline bool finite(Complex w) { return std::isfinite(w.real()) && std::isfinite(w.imag()); }

/// dist(phi(z), boundary) as the minimum over `boundary_samples` images of
/// equally spaced points of the unit circle.
inline double boundary_distance(const ConformalMap& map, Complex z, std::size_t boundary_samples)
{
    if (boundary_samples < 64)
        throw ConfigError("boundary_distance needs at least 64 boundary samples");
    Complex w = map.eval(z).w;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < boundary_samples; ++k) {
        Complex b = map.eval_unchecked(std::polar(boundary_radius, 2.0 * pi * static_cast<double>(k) / static_cast<double>(boundary_samples))).w;
        if (finite(b))
            best = std::min(best, std::abs(w - b));
    }
    return best;
}

/// Image of a circle |z| = radius as a closed polyline with nearest-segment
/// queries. radius = 1 gives the boundary of the image domain; smaller radii
/// give the boundaries of the compact cores.
class ImageCurve {
public:
    ImageCurve() = default;
    ImageCurve(const ConformalMap& map, double radius, std::size_t samples)
        : radius_(radius), points_(circle_image(map, radius, samples)), index_(points_, true)
    {
        if (index_.empty())
            throw ConstructionError("image curve has no finite samples");
    }

    double radius() const { return radius_; }
    const std::vector<Complex>& points() const { return points_; }
    double distance(Complex w) const { return index_.distance(w); }

private:
    double radius_ = 1.0;
    std::vector<Complex> points_;
    SegmentIndex index_;
};

} // namespace sobdens
