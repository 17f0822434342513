#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <numbers>
#include <vector>

#include <boost/geometry.hpp>
#include <boost/geometry/index/rtree.hpp>

namespace sobdens {

using Complex = std::complex<double>;

/// Neumaier-compensated running sum.
class CompensatedSum {
public:
    void add(double x)
    {
        double t = sum_ + x;
        if (std::abs(sum_) >= std::abs(x))
            comp_ += (sum_ - t) + x;
        else
            comp_ += (x - t) + sum_;
        sum_ = t;
    }
    CompensatedSum& operator+=(double x) { add(x); return *this; }
    double value() const { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

inline double cross(Complex a, Complex b) { return a.real() * b.imag() - a.imag() * b.real(); }
inline double dot(Complex a, Complex b) { return a.real() * b.real() + a.imag() * b.imag(); }

/// Angle in [0, 2pi).
inline double angle_of(Complex z)
{
    double a = std::arg(z);
    if (a < 0.0)
        a += 2.0 * std::numbers::pi;
    if (a >= 2.0 * std::numbers::pi)
        a = 0.0;
    return a;
}

inline double segment_distance(Complex p, Complex a, Complex b)
{
    Complex ab = b - a;
    double len2 = std::norm(ab);
    if (len2 == 0.0)
        return std::abs(p - a);
    double t = std::clamp(dot(p - a, ab) / len2, 0.0, 1.0);
    return std::abs(p - (a + t * ab));
}

inline bool segments_intersect(Complex a, Complex b, Complex c, Complex d)
{
    auto orient = [](Complex p, Complex q, Complex r) { return cross(q - p, r - p); };
    auto on_segment = [](Complex p, Complex q, Complex r) {
        return std::min(p.real(), r.real()) <= q.real() && q.real() <= std::max(p.real(), r.real()) &&
               std::min(p.imag(), r.imag()) <= q.imag() && q.imag() <= std::max(p.imag(), r.imag());
    };
    double d1 = orient(c, d, a), d2 = orient(c, d, b), d3 = orient(a, b, c), d4 = orient(a, b, d);
    if (((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) && ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0)))
        return true;
    if (d1 == 0 && on_segment(c, a, d)) return true;
    if (d2 == 0 && on_segment(c, b, d)) return true;
    if (d3 == 0 && on_segment(a, c, b)) return true;
    if (d4 == 0 && on_segment(a, d, b)) return true;
    return false;
}

inline bool polylines_intersect(const std::vector<Complex>& p, const std::vector<Complex>& q)
{
    for (std::size_t i = 0; i + 1 < p.size(); ++i)
        for (std::size_t k = 0; k + 1 < q.size(); ++k)
            if (segments_intersect(p[i], p[i + 1], q[k], q[k + 1]))
                return true;
    return false;
}

/// Even-odd crossing rule; the polygon is implicitly closed.
inline bool point_in_polygon(const std::vector<Complex>& poly, Complex p)
{
    bool inside = false;
    const std::size_t n = poly.size();
    for (std::size_t i = 0, k = n - 1; i < n; k = i++) {
        Complex a = poly[i], b = poly[k];
        if ((a.imag() > p.imag()) != (b.imag() > p.imag())) {
            double x = a.real() + (p.imag() - a.imag()) * (b.real() - a.real()) / (b.imag() - a.imag());
            if (p.real() < x)
                inside = !inside;
        }
    }
    return inside;
}

inline double polyline_distance(const std::vector<Complex>& poly, Complex p, bool closed = false)
{
    double best = std::numeric_limits<double>::infinity();
    if (poly.size() == 1)
        return std::abs(p - poly[0]);
    for (std::size_t i = 0; i + 1 < poly.size(); ++i)
        best = std::min(best, segment_distance(p, poly[i], poly[i + 1]));
    if (closed && poly.size() > 2)
        best = std::min(best, segment_distance(p, poly.back(), poly.front()));
    return best;
}

/// Nearest-segment queries against a fixed polyline (R-tree backed).
class SegmentIndex {
    using BgPoint = boost::geometry::model::point<double, 2, boost::geometry::cs::cartesian>;
    using BgSegment = boost::geometry::model::segment<BgPoint>;
    using Tree = boost::geometry::index::rtree<BgSegment, boost::geometry::index::rstar<16>>;

public:
    SegmentIndex() = default;

    /// Non-finite vertices split the polyline; segments touching them are dropped.
    explicit SegmentIndex(const std::vector<Complex>& polyline, bool closed = false)
    {
        std::vector<BgSegment> segs;
        const std::size_t n = polyline.size();
        const std::size_t count = closed ? n : (n == 0 ? 0 : n - 1);
        for (std::size_t i = 0; i < count; ++i) {
            Complex a = polyline[i], b = polyline[(i + 1) % n];
            if (!std::isfinite(a.real()) || !std::isfinite(a.imag()) || !std::isfinite(b.real()) ||
                !std::isfinite(b.imag()))
                continue;
            segs.emplace_back(BgPoint(a.real(), a.imag()), BgPoint(b.real(), b.imag()));
        }
        tree_ = Tree(segs.begin(), segs.end());
    }

    bool empty() const { return tree_.empty(); }
    std::size_t size() const { return tree_.size(); }

    double distance(Complex p) const
    {
        BgPoint q(p.real(), p.imag());
        double best = std::numeric_limits<double>::infinity();
        for (auto it = tree_.qbegin(boost::geometry::index::nearest(q, 1)); it != tree_.qend(); ++it)
            best = std::min(best, boost::geometry::distance(q, *it));
        return best;
    }

private:
    Tree tree_;
};

/// Radical-inverse low-discrepancy sequence.
inline double radical_inverse(std::uint64_t i, unsigned base)
{
    double inv = 1.0 / base, f = inv, out = 0.0;
    while (i > 0) {
        out += f * static_cast<double>(i % base);
        i /= base;
        f *= inv;
    }
    return out;
}

} // namespace sobdens
