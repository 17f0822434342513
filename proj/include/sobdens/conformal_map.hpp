#pragma once

#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "errors.hpp"
#include "spec_string.hpp"

namespace sobdens {

using Complex = std::complex<double>;

inline constexpr double pi = std::numbers::pi;

/// (a z + b) / (c z + d)
struct Mobius {
    Complex a{1.0}, b{0.0}, c{0.0}, d{1.0};
};

/// Principal branch of z^k.
struct Power {
    double k = 1.0;
};

/// coeffs[0] + coeffs[1] z + coeffs[2] z^2 + ...
struct Polynomial {
    std::vector<Complex> coeffs;
};

/// s z + t
struct Affine {
    Complex s{1.0}, t{0.0};
};

using Primitive = std::variant<Mobius, Power, Polynomial, Affine>;

struct MapValue {
    Complex w;
    Complex deriv;
};

namespace detail {

inline bool is_integer(double k) { return std::floor(k) == k && std::abs(k) <= 64.0; }

inline Complex int_pow(Complex z, int n)
{
    Complex out{1.0};
    Complex base = n < 0 ? 1.0 / z : z;
    for (int i = 0; i < std::abs(n); ++i)
        out *= base;
    return out;
}

template <bool Checked>
MapValue apply(const Mobius& f, Complex z)
{
    Complex den = f.c * z + f.d;
    if constexpr (Checked) {
        if (den == Complex{0.0})
            throw SingularityError("mobius pole hit");
    }
    Complex det = f.a * f.d - f.b * f.c;
    return {(f.a * z + f.b) / den, det / (den * den)};
}

template <bool Checked>
MapValue apply(const Power& f, Complex z)
{
    if (is_integer(f.k)) {
        int n = static_cast<int>(f.k);
        if (n == 0)
            return {1.0, 0.0};
        if constexpr (Checked) {
            if (n < 0 && z == Complex{0.0})
                throw SingularityError("negative power at the origin");
        }
        Complex zn1 = int_pow(z, n - 1);
        return {zn1 * z, static_cast<double>(n) * zn1};
    }
    if (z == Complex{0.0}) {
        if constexpr (Checked)
            throw SingularityError("branch point of non-integer power");
        return {0.0, Complex{std::numeric_limits<double>::infinity()}};
    }
    Complex v = std::pow(z, f.k);
    return {v, f.k * v / z};
}

template <bool Checked>
MapValue apply(const Polynomial& f, Complex z)
{
    Complex v{0.0}, dv{0.0};
    for (auto it = f.coeffs.rbegin(); it != f.coeffs.rend(); ++it) {
        dv = dv * z + v;
        v = v * z + *it;
    }
    return {v, dv};
}

template <bool Checked>
MapValue apply(const Affine& f, Complex z)
{
    return {f.s * z + f.t, f.s};
}

} // namespace detail

/// A conformal map of the unit disk, stored as a chain of primitives applied
/// first to last. Composition of chains is concatenation, so any composition
/// tree over the primitives flattens to one of these.
class ConformalMap {
public:
    ConformalMap() = default;
    ConformalMap(std::string name, std::vector<Primitive> chain, bool univalent = true, bool bounded = true)
        : name_(std::move(name)), chain_(std::move(chain)), univalent_(univalent), bounded_(bounded) {}

    const std::string& name() const { return name_; }
    bool asserted_univalent() const { return univalent_; }
    bool bounded_image() const { return bounded_; }
    const std::vector<Primitive>& chain() const { return chain_; }

    /// phi(z) and phi'(z) by the chain rule. Requires |z| < 1.
    MapValue eval(Complex z) const
    {
        if (!(std::abs(z) < 1.0))
            throw DomainError("argument outside the open unit disk");
        return run<true>(z);
    }

    /// Same as eval without the disk check; used for boundary sampling where
    /// poles may produce non-finite values that callers filter out.
    MapValue eval_unchecked(Complex z) const { return run<false>(z); }

    Complex operator()(Complex z) const { return eval(z).w; }
    Complex derivative(Complex z) const { return eval(z).deriv; }

    /// outer ∘ inner
    friend ConformalMap compose(const ConformalMap& outer, const ConformalMap& inner)
    {
        std::vector<Primitive> chain = inner.chain_;
        chain.insert(chain.end(), outer.chain_.begin(), outer.chain_.end());
        return ConformalMap(outer.name_ + "∘" + inner.name_, std::move(chain),
                            outer.univalent_ && inner.univalent_, outer.bounded_);
    }

private:
    template <bool Checked>
    MapValue run(Complex z) const
    {
        MapValue acc{z, 1.0};
        for (const auto& prim : chain_) {
            MapValue step = std::visit([&](const auto& f) { return detail::apply<Checked>(f, acc.w); }, prim);
            acc.w = step.w;
            acc.deriv *= step.deriv;
        }
        return acc;
    }

    std::string name_ = "identity";
    std::vector<Primitive> chain_;
    bool univalent_ = true;
    bool bounded_ = true;
};

namespace maps {

inline ConformalMap identity() { return ConformalMap("identity", {}); }

/// z - z^2/2; derivative vanishes at z = 1, giving an inward cusp at 1/2.
inline ConformalMap cardioid()
{
    return ConformalMap("cardioid", {Polynomial{{0.0, 1.0, -0.5}}});
}

/// z + a z^2, univalent for |a| <= 1/2.
inline ConformalMap quadratic(double a)
{
    if (std::abs(a) > 0.5)
        throw ConfigError("quadratic map z + a z^2 is univalent only for |a| <= 1/2");
    return ConformalMap("quadratic", {Polynomial{{0.0, 1.0, a}}});
}

/// Disk onto the disk minus the radius [0, 1): disk -> upper half-plane ->
/// first quadrant -> upper half-disk -> slit disk.
inline ConformalMap slit()
{
    const Complex i{0.0, 1.0};
    return ConformalMap("slit", {Mobius{i, i, -1.0, 1.0}, Power{0.5}, Mobius{1.0, -1.0, 1.0, 1.0}, Power{2.0}});
}

/// Disk automorphism z -> (z - a) / (1 - conj(a) z).
inline ConformalMap disk_automorphism(Complex a)
{
    if (!(std::abs(a) < 1.0))
        throw ConfigError("disk automorphism requires |a| < 1");
    return ConformalMap("automorphism", {Mobius{1.0, -a, -std::conj(a), 1.0}});
}

inline ConformalMap from_spec(const SpecString& spec)
{
    if (spec.name == "identity")
        return identity();
    if (spec.name == "cardioid")
        return cardioid();
    if (spec.name == "quadratic")
        return quadratic(spec.number("a", 0.25));
    if (spec.name == "slit")
        return slit();
    throw ConfigError("unknown map '" + spec.name + "' (known: identity, cardioid, quadratic, slit)");
}

inline ConformalMap from_spec(std::string_view text) { return from_spec(SpecString::parse(text)); }

inline std::vector<std::string> builtin_names() { return {"identity", "cardioid", "quadratic:a=0.25", "slit"}; }

} // namespace maps

} // namespace sobdens
