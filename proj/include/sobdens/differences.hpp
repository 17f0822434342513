#pragma once

#include <algorithm>
#include <cmath>

#include "conformal_map.hpp"
#include "dyadic.hpp"

namespace sobdens {

/// Finite-difference step at pullback point z for level m: 2^{-m-6}, shrunk
/// near the unit circle so the stencil stays well inside the disk.
inline double fd_step(int m, Complex z) { return std::min(std::ldexp(1.0, -m - 6), (1.0 - std::abs(z)) / 32.0); }

/// Central-difference gradient of f in pullback coordinates.
template <class F>
Complex pullback_gradient(F&& f, Complex z, double h)
{
    double gx = (f(z + Complex{h, 0.0}) - f(z - Complex{h, 0.0})) / (2.0 * h);
    double gy = (f(z + Complex{0.0, h}) - f(z - Complex{0.0, h})) / (2.0 * h);
    return {gx, gy};
}

/// |grad (g)| at phi(z) in the image, from the pullback gradient of g o phi.
template <class F>
double image_gradient_norm(const ConformalMap& map, F&& f, Complex z, double h)
{
    return std::abs(pullback_gradient(f, z, h)) / std::abs(map.eval(z).deriv);
}

} // namespace sobdens
