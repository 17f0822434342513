#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <string>
#include <string_view>

#include "boundary.hpp"
#include "conformal_map.hpp"
#include "errors.hpp"
#include "spec_string.hpp"

namespace sobdens {

/// A real function on the image domain, evaluated at image points w.
struct ScalarField {
    std::string spec;
    std::function<double(Complex)> eval;
    bool bounded = true;
    bool smooth = true;
    /// Known bound on |u| (infinity when unbounded).
    double sup = std::numeric_limits<double>::infinity();
    /// Exponent of a |w - w0|^beta singularity; NaN when there is none.
    double beta = std::numeric_limits<double>::quiet_NaN();
    bool log_singular = false;
    Complex w0{0.0, 0.0};
    /// Pullback angle of w0 for fields singular at phi(e^{i theta0}); NaN otherwise.
    double theta0 = std::numeric_limits<double>::quiet_NaN();

    double operator()(Complex w) const { return eval(w); }

    /// u in W^{1,p} near a boundary point needs p (1 - beta) < 2; the loglog
    /// field has gradient in L^p exactly for p <= 2.
    void require_sobolev(double p) const
    {
        if (!(p >= 1.0))
            throw ConfigError("Sobolev exponent must satisfy p >= 1");
        if (std::isfinite(beta) && !(p * (1.0 - beta) < 2.0))
            throw ConfigError("field " + spec + " is not in W^{1,p}: p (1 - beta) >= 2");
        if (log_singular && p > 2.0)
            throw ConfigError("field " + spec + " is not in W^{1,p} for p > 2");
    }
};

/// phi(e^{i theta}). The exact value is used when the chain is finite there
/// and agrees with the radial limit; otherwise the radial limit.
inline Complex boundary_point(const ConformalMap& map, double theta)
{
    Complex limit = map.eval_unchecked(std::polar(boundary_radius, theta)).w;
    Complex exact = map.eval_unchecked(std::polar(1.0, theta)).w;
    if (!finite(limit))
        throw ConfigError("map has no finite boundary value at the requested angle");
    if (finite(exact) && std::abs(exact - limit) <= 1e-6 * (1.0 + std::abs(limit)))
        return exact;
    return limit;
}

namespace fields {

inline ScalarField constant(double c)
{
    ScalarField f;
    f.spec = "const:" + std::to_string(c);
    f.eval = [c](Complex) { return c; };
    f.sup = std::abs(c);
    return f;
}

inline ScalarField real_part(double sup)
{
    ScalarField f;
    f.spec = "re";
    f.eval = [](Complex w) { return w.real(); };
    f.sup = sup;
    return f;
}

inline ScalarField imag_part(double sup)
{
    ScalarField f;
    f.spec = "im";
    f.eval = [](Complex w) { return w.imag(); };
    f.sup = sup;
    return f;
}

/// |w - w0|^beta, 0 < beta < 1.
inline ScalarField power(Complex w0, double beta, double sup)
{
    if (!(beta > 0.0 && beta < 1.0))
        throw ConfigError("power field needs 0 < beta < 1");
    ScalarField f;
    f.spec = "power";
    f.eval = [w0, beta](Complex w) { return std::pow(std::abs(w - w0), beta); };
    f.smooth = false;
    f.sup = sup;
    f.beta = beta;
    f.w0 = w0;
    return f;
}

/// scale * log log(e + 1/|w - w0|): unbounded, but in W^{1,p} for p <= 2.
inline ScalarField loglog(Complex w0, double scale)
{
    if (!(scale > 0.0))
        throw ConfigError("loglog field needs scale > 0");
    ScalarField f;
    f.spec = "loglog";
    f.eval = [w0, scale](Complex w) { return scale * std::log(std::log(std::numbers::e + 1.0 / std::abs(w - w0))); };
    f.bounded = false;
    f.smooth = false;
    f.log_singular = true;
    f.w0 = w0;
    return f;
}

/// sup |w| over the boundary samples, used as the bound for coordinate fields.
inline double image_radius(const ConformalMap& map)
{
    double best = 0.0;
    for (Complex w : circle_image(map, 1.0, 4096))
        if (finite(w))
            best = std::max(best, std::abs(w));
    return best;
}

/// Catalog: const:c, re, im, power:theta=..,beta=.., loglog:theta=..,scale=..
inline ScalarField from_spec(const SpecString& s, const ConformalMap& map)
{
    ScalarField f;
    if (s.name == "const")
        f = constant(s.number("value"));
    else if (s.name == "re")
        f = real_part(image_radius(map));
    else if (s.name == "im")
        f = imag_part(image_radius(map));
    else if (s.name == "power") {
        Complex w0 = boundary_point(map, s.number("theta", 0.0));
        double beta = s.number("beta", 0.5);
        double diam = 0.0;
        for (Complex w : circle_image(map, 1.0, 4096))
            if (finite(w))
                diam = std::max(diam, std::abs(w - w0));
        f = power(w0, beta, std::pow(diam, beta));
        f.theta0 = s.number("theta", 0.0);
    } else if (s.name == "loglog") {
        f = loglog(boundary_point(map, s.number("theta", 0.0)), s.number("scale", 1.0));
        f.theta0 = s.number("theta", 0.0);
    } else
        throw ConfigError("unknown field '" + s.name + "' (known: const, re, im, power, loglog)");
    f.spec = s.name;
    for (const auto& [k, v] : s.params)
        f.spec += (f.spec.size() == s.name.size() ? ":" : ",") + (k == "value" ? v : k + "=" + v);
    return f;
}

inline ScalarField from_spec(std::string_view text, const ConformalMap& map)
{
    return from_spec(SpecString::parse(text), map);
}

} // namespace fields

/// max(min(u, M), -M).
inline ScalarField truncate(const ScalarField& u, double M)
{
    if (!(M > 0.0))
        throw ConfigError("truncation level must be positive");
    ScalarField f = u;
    f.spec = u.spec + "|M=" + std::to_string(M);
    f.eval = [inner = u.eval, M](Complex w) { return std::clamp(inner(w), -M, M); };
    f.bounded = true;
    f.sup = std::min(u.sup, M);
    return f;
}

} // namespace sobdens
