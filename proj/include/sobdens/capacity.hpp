#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <memory>
#include <numbers>
#include <limits>
#include <queue>
#include <random>
#include <vector>

#include "boundary.hpp"
#include "conformal_map.hpp"
#include "errors.hpp"
#include "geometry.hpp"
#include "pullback_grid.hpp"

namespace sobdens {

/// Square lattice of nx * ny nodes with spacing h and lower-left node origin.
struct Lattice {
    Complex origin{0.0, 0.0};
    double h = 1.0;
    int nx = 0;
    int ny = 0;

    static Lattice square(Complex center, double half_width, int n)
    {
        if (n < 3 || !(half_width > 0.0))
            throw ConfigError("lattice needs n >= 3 and a positive width");
        return {center - Complex{half_width, half_width}, 2.0 * half_width / (n - 1), n, n};
    }

    std::size_t size() const { return static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny); }
    int index(int i, int k) const { return k * nx + i; }
    Complex node(int i, int k) const { return origin + Complex{i * h, k * h}; }
    Complex node(int idx) const { return node(idx % nx, idx / nx); }

    /// Index of the node at w, or -1 when w is not a node.
    int find(Complex w) const
    {
        Complex g = (w - origin) / h;
        double i = std::round(g.real()), k = std::round(g.imag());
        if (i < 0 || k < 0 || i >= nx || k >= ny || std::abs(g - Complex(i, k)) > 1e-9)
            return -1;
        return index(static_cast<int>(i), static_cast<int>(k));
    }
};

enum class NodeRole : std::uint8_t { Outside, Free, E, F };

/// Lattice problem for Cap(E, F, Omega): nodes outside Omega and edges that
/// leave Omega carry no energy.
struct CapacityProblem {
    Lattice lattice;
    std::vector<NodeRole> role;
    std::vector<std::uint8_t> edge_right;  ///< edge (i,k)-(i+1,k) lies in Omega
    std::vector<std::uint8_t> edge_up;     ///< edge (i,k)-(i,k+1) lies in Omega
    double tolerance = 1e-8;
    int max_sweeps = 200000;

    int count(NodeRole r) const { return static_cast<int>(std::count(role.begin(), role.end(), r)); }
};

using RegionTest = std::function<bool(Complex)>;
using EdgeTest = std::function<bool(Complex, Complex)>;

namespace detail {

inline bool edge_connected(const CapacityProblem& p, NodeRole r)
{
    const Lattice& L = p.lattice;
    std::vector<std::uint8_t> seen(L.size(), 0);
    int start = -1, total = 0;
    for (std::size_t v = 0; v < L.size(); ++v)
        if (p.role[v] == r) {
            ++total;
            if (start < 0)
                start = static_cast<int>(v);
        }
    if (start < 0)
        return false;
    std::queue<int> q;
    q.push(start);
    seen[static_cast<std::size_t>(start)] = 1;
    int reached = 0;
    auto visit = [&](int v, bool ok) {
        if (ok && !seen[static_cast<std::size_t>(v)] && p.role[static_cast<std::size_t>(v)] == r) {
            seen[static_cast<std::size_t>(v)] = 1;
            q.push(v);
        }
    };
    while (!q.empty()) {
        int v = q.front();
        q.pop();
        ++reached;
        int i = v % L.nx, k = v / L.nx;
        if (i + 1 < L.nx)
            visit(v + 1, p.edge_right[static_cast<std::size_t>(v)]);
        if (i > 0)
            visit(v - 1, p.edge_right[static_cast<std::size_t>(v - 1)]);
        if (k + 1 < L.ny)
            visit(v + L.nx, p.edge_up[static_cast<std::size_t>(v)]);
        if (k > 0)
            visit(v - L.nx, p.edge_up[static_cast<std::size_t>(v - L.nx)]);
    }
    return reached == total;
}

} // namespace detail

/// Rasterizes Omega, E and F onto the lattice. Edges count when both ends lie
/// in Omega and edge_ok accepts them.
inline CapacityProblem make_problem(const Lattice& L, const RegionTest& omega, const RegionTest& in_E,
                                    const RegionTest& in_F, const EdgeTest& edge_ok = {})
{
    CapacityProblem p;
    p.lattice = L;
    p.role.assign(L.size(), NodeRole::Outside);
    p.edge_right.assign(L.size(), 0);
    p.edge_up.assign(L.size(), 0);
    for (int k = 0; k < L.ny; ++k)
        for (int i = 0; i < L.nx; ++i) {
            Complex x = L.node(i, k);
            auto v = static_cast<std::size_t>(L.index(i, k));
            if (!omega(x))
                continue;
            bool e = in_E(x), f = in_F(x);
            if (e && f)
                throw ConfigError("E and F share lattice node " + std::to_string(v));
            p.role[v] = e ? NodeRole::E : f ? NodeRole::F : NodeRole::Free;
        }
    for (int k = 0; k < L.ny; ++k)
        for (int i = 0; i < L.nx; ++i) {
            auto v = static_cast<std::size_t>(L.index(i, k));
            if (p.role[v] == NodeRole::Outside)
                continue;
            if (i + 1 < L.nx && p.role[v + 1] != NodeRole::Outside)
                p.edge_right[v] = !edge_ok || edge_ok(L.node(i, k), L.node(i + 1, k));
            if (k + 1 < L.ny && p.role[v + static_cast<std::size_t>(L.nx)] != NodeRole::Outside)
                p.edge_up[v] = !edge_ok || edge_ok(L.node(i, k), L.node(i, k + 1));
        }
    return p;
}

/// E and F must be nonempty and edge-connected.
inline void validate(const CapacityProblem& p)
{
    if (p.role.size() != p.lattice.size())
        throw ConfigError("capacity problem does not match its lattice");
    for (NodeRole r : {NodeRole::E, NodeRole::F})
        if (!detail::edge_connected(p, r))
            throw ConfigError(std::string(r == NodeRole::E ? "E" : "F") + " is empty or not edge-connected");
}

struct CapacityResult {
    double value = 0.0;         ///< gradient energy sum over edges (u_a - u_b)^2
    double full_norm = 0.0;     ///< value + h^2 sum u^2 over Omega nodes
    double residual = 0.0;
    int sweeps = 0;
    double min_u = 0.0;
    double max_u = 0.0;
    std::vector<double> u;
};

/// Lexicographic successive over-relaxation for the 5-point Laplacian with
/// u = 1 on E, u = 0 on F and natural conditions on the boundary of Omega.
/// The residual is the largest |mean of neighbours - u| over free nodes.
inline CapacityResult capacity(const CapacityProblem& p)
{
    validate(p);
    const Lattice& L = p.lattice;
    CapacityResult r;
    r.u.assign(L.size(), 0.0);
    for (std::size_t v = 0; v < L.size(); ++v)
        if (p.role[v] == NodeRole::E)
            r.u[v] = 1.0;
    struct Node {
        int v;
        int nb[4];
        int deg;
    };
    std::vector<Node> free;
    for (int k = 0; k < L.ny; ++k)
        for (int i = 0; i < L.nx; ++i) {
            int v = L.index(i, k);
            if (p.role[static_cast<std::size_t>(v)] != NodeRole::Free)
                continue;
            Node n{v, {0, 0, 0, 0}, 0};
            if (i + 1 < L.nx && p.edge_right[static_cast<std::size_t>(v)])
                n.nb[n.deg++] = v + 1;
            if (i > 0 && p.edge_right[static_cast<std::size_t>(v - 1)])
                n.nb[n.deg++] = v - 1;
            if (k + 1 < L.ny && p.edge_up[static_cast<std::size_t>(v)])
                n.nb[n.deg++] = v + L.nx;
            if (k > 0 && p.edge_up[static_cast<std::size_t>(v - L.nx)])
                n.nb[n.deg++] = v - L.nx;
            if (n.deg > 0)
                free.push_back(n);
        }
    const double omega = 2.0 / (1.0 + std::sin(pi / std::max(L.nx, L.ny)));
    auto mean = [&](const Node& n) {
        double s = 0.0;
        for (int q = 0; q < n.deg; ++q)
            s += r.u[static_cast<std::size_t>(n.nb[q])];
        return s / n.deg;
    };
    for (r.sweeps = 1;; ++r.sweeps) {
        for (const Node& n : free) {
            double& x = r.u[static_cast<std::size_t>(n.v)];
            x += omega * (mean(n) - x);
        }
        if (r.sweeps % 10 == 0 || r.sweeps == p.max_sweeps) {
            r.residual = 0.0;
            for (const Node& n : free)
                r.residual = std::max(r.residual, std::abs(mean(n) - r.u[static_cast<std::size_t>(n.v)]));
            if (r.residual <= p.tolerance)
                break;
            if (r.sweeps >= p.max_sweeps)
                throw SolverError("relaxation did not reach the residual tolerance", r.residual);
        }
    }
    CompensatedSum grad, mass;
    r.min_u = 1.0;
    r.max_u = 0.0;
    for (int k = 0; k < L.ny; ++k)
        for (int i = 0; i < L.nx; ++i) {
            auto v = static_cast<std::size_t>(L.index(i, k));
            if (p.role[v] == NodeRole::Outside)
                continue;
            double x = r.u[v];
            r.min_u = std::min(r.min_u, x);
            r.max_u = std::max(r.max_u, x);
            mass += x * x;
            if (p.edge_right[v])
                grad += (x - r.u[v + 1]) * (x - r.u[v + 1]);
            if (p.edge_up[v])
                grad += (x - r.u[v + static_cast<std::size_t>(L.nx)]) * (x - r.u[v + static_cast<std::size_t>(L.nx)]);
        }
    r.value = grad.value();
    r.full_norm = r.value + L.h * L.h * mass.value();
    return r;
}

/// Cap(closed disk r, circle R) about `center`, with F the closed exterior of
/// the circle; the analytic value is 2 pi / log(R / r).
inline CapacityProblem ring_problem(double r, double R, int n, Complex center = 0.0)
{
    if (!(r > 0.0 && R > r))
        throw ConfigError("ring problem needs 0 < r < R");
    Lattice L = Lattice::square(center, 1.1 * R, n);
    return make_problem(
        L, [](Complex) { return true; }, [=](Complex x) { return std::abs(x - center) <= r; },
        [=](Complex x) { return std::abs(x - center) >= R; });
}

inline double ring_capacity_exact(double r, double R) { return 2.0 * pi / std::log(R / r); }

/// Even-odd fill of a closed polygon at the lattice nodes, by scanlines.
inline std::vector<std::uint8_t> polygon_mask(const Lattice& L, const std::vector<Complex>& poly)
{
    std::vector<std::uint8_t> inside(L.size(), 0);
    std::vector<double> xs;
    for (int k = 0; k < L.ny; ++k) {
        double y = L.node(0, k).imag();
        xs.clear();
        for (std::size_t s = 0; s < poly.size(); ++s) {
            Complex a = poly[s], b = poly[(s + 1) % poly.size()];
            if ((a.imag() > y) != (b.imag() > y))
                xs.push_back(a.real() + (y - a.imag()) * (b.real() - a.real()) / (b.imag() - a.imag()));
        }
        std::sort(xs.begin(), xs.end());
        for (int i = 0; i < L.nx; ++i) {
            auto below = std::lower_bound(xs.begin(), xs.end(), L.node(i, k).real()) - xs.begin();
            inside[static_cast<std::size_t>(L.index(i, k))] = below % 2 == 1;
        }
    }
    return inside;
}

/// Region given by a node mask; points off the lattice are outside.
inline RegionTest mask_region(const Lattice& L, std::vector<std::uint8_t> mask, bool complement = false)
{
    return [L, mask = std::move(mask), complement](Complex w) {
        int v = L.find(w);
        return v >= 0 && (mask[static_cast<std::size_t>(v)] != 0) != complement;
    };
}

/// Lattice bucket of boundary segments, for exact edge-crossing tests.
class BoundaryCrossing {
public:
    BoundaryCrossing(const Lattice& L, std::vector<Complex> boundary) : L_(L), pts_(std::move(boundary))
    {
        buckets_.resize(L.size());
        for (std::size_t s = 0; s < pts_.size(); ++s) {
            Complex a = pts_[s], b = pts_[(s + 1) % pts_.size()];
            if (!finite(a) || !finite(b))
                continue;
            int i0 = cell_x(std::min(a.real(), b.real())), i1 = cell_x(std::max(a.real(), b.real()));
            int k0 = cell_y(std::min(a.imag(), b.imag())), k1 = cell_y(std::max(a.imag(), b.imag()));
            for (int k = k0; k <= k1; ++k)
                for (int i = i0; i <= i1; ++i)
                    buckets_[static_cast<std::size_t>(L.index(i, k))].push_back(static_cast<int>(s));
        }
    }

    /// True when segment a-b meets the boundary polyline.
    bool crosses(Complex a, Complex b) const
    {
        int i0 = cell_x(std::min(a.real(), b.real())), i1 = cell_x(std::max(a.real(), b.real()));
        int k0 = cell_y(std::min(a.imag(), b.imag())), k1 = cell_y(std::max(a.imag(), b.imag()));
        for (int k = k0; k <= k1; ++k)
            for (int i = i0; i <= i1; ++i)
                for (int s : buckets_[static_cast<std::size_t>(L_.index(i, k))])
                    if (segments_intersect(a, b, pts_[static_cast<std::size_t>(s)], pts_[(static_cast<std::size_t>(s) + 1) % pts_.size()]))
                        return true;
        return false;
    }

private:
    int cell_x(double x) const { return std::clamp(static_cast<int>(std::floor((x - L_.origin.real()) / L_.h)), 0, L_.nx - 1); }
    int cell_y(double y) const { return std::clamp(static_cast<int>(std::floor((y - L_.origin.imag()) / L_.h)), 0, L_.ny - 1); }

    Lattice L_;
    std::vector<Complex> pts_;
    std::vector<std::vector<int>> buckets_;
};

/// Omega = phi(disk) on a lattice over its bounding box: nodes inside the
/// boundary polygon, edges that do not cross the boundary (this removes edges
/// through a slit).
struct ImageDomain {
    Lattice lattice;
    std::vector<Complex> boundary;
    std::vector<std::uint8_t> inside;  ///< node mask, rasterized once
    std::shared_ptr<BoundaryCrossing> crossing;

    ImageDomain(const ConformalMap& map, int n, std::size_t boundary_samples = 8192)
    {
        boundary = circle_image(map, 1.0, boundary_samples);
        double x0 = 1e300, x1 = -1e300, y0 = 1e300, y1 = -1e300;
        for (Complex w : boundary) {
            x0 = std::min(x0, w.real());
            x1 = std::max(x1, w.real());
            y0 = std::min(y0, w.imag());
            y1 = std::max(y1, w.imag());
        }
        double half = 0.5 * std::max(x1 - x0, y1 - y0) * 1.02;
        // irrational offset keeps nodes off symmetry lines such as a slit
        Complex c{0.5 * (x0 + x1) + 1e-3 * std::numbers::sqrt2, 0.5 * (y0 + y1) + 1e-3 * std::numbers::sqrt3};
        lattice = Lattice::square(c, half, n);
        crossing = std::make_shared<BoundaryCrossing>(lattice, boundary);
        inside = polygon_mask(lattice, boundary);
    }

    /// Mask lookup for lattice nodes, polygon test elsewhere.
    bool contains(Complex w) const
    {
        int v = lattice.find(w);
        return v >= 0 ? inside[static_cast<std::size_t>(v)] != 0 : point_in_polygon(boundary, w);
    }
    RegionTest region() const
    {
        return [this](Complex w) { return contains(w); };
    }
    EdgeTest edges() const
    {
        return [this](Complex a, Complex b) { return !crossing->crosses(a, b); };
    }
};

struct EstimateReport {
    struct Ring {
        double ratio_r_over_R;
        double value;
        double exact;
        double ratio() const { return value / exact; }
    };
    std::vector<Ring> rings;
    bool monotone_E = false;
    bool monotone_F = false;
    bool monotone_Omega = false;
    struct LowerBound {
        double delta;
        int pairs;
        double C;  ///< min capacity over pairs with min diam / dist >= delta
    };
    std::vector<LowerBound> lower_bounds;
    double invariance_disk = 0.0;
    double invariance_image = 0.0;
    double invariance_ratio() const { return invariance_image / invariance_disk; }
};

namespace detail {

inline double segment_distance_between(Complex a, Complex b, Complex c, Complex d)
{
    if (segments_intersect(a, b, c, d))
        return 0.0;
    return std::min({segment_distance(a, c, d), segment_distance(b, c, d), segment_distance(c, a, b),
                     segment_distance(d, a, b)});
}

/// Nodes within 0.75 h of a segment: every lattice cell the segment crosses
/// has a corner in the band, which keeps the band edge-connected.
inline RegionTest near_segment(Complex a, Complex b, double h)
{
    return [=](Complex x) { return segment_distance(x, a, b) <= 0.75 * h; };
}

} // namespace detail

/// Ring law, monotonicity on nested problems, the lower bound C(delta) on
/// random segment pairs in the disk, and conformal invariance for `map`.
inline EstimateReport verify_estimates(const ConformalMap& map, int n = 256, std::uint64_t seed = 1)
{
    EstimateReport rep;
    const double R = 0.5;
    for (double q : {0.5, 0.25, 0.125}) {
        auto res = capacity(ring_problem(q * R, R, n));
        rep.rings.push_back({q, res.value, ring_capacity_exact(q * R, R)});
    }

    // nested problems on the disk of radius 0.9
    Lattice L = Lattice::square(0.0, 1.0, n / 2);
    auto disk = [](double rad) { return [rad](Complex x) { return std::abs(x) <= rad; }; };
    auto e_small = [](Complex x) { return std::abs(x + 0.4) <= 0.1; };
    auto e_big = [](Complex x) { return std::abs(x + 0.4) <= 0.2; };
    auto f_small = [](Complex x) { return std::abs(x - 0.4) <= 0.1; };
    auto f_big = [](Complex x) { return std::abs(x - 0.4) <= 0.2; };
    double base = capacity(make_problem(L, disk(0.9), e_small, f_small)).value;
    rep.monotone_E = capacity(make_problem(L, disk(0.9), e_big, f_small)).value >= base;
    rep.monotone_F = capacity(make_problem(L, disk(0.9), e_small, f_big)).value >= base;
    rep.monotone_Omega = capacity(make_problem(L, disk(0.7), e_small, f_small)).value <= base;

    // random segment continua in the disk
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> U(-0.8, 0.8);
    struct Pair {
        double ratio, cap;
    };
    std::vector<Pair> pairs;
    while (pairs.size() < 12) {
        Complex a{U(rng), U(rng)}, b{U(rng), U(rng)}, c{U(rng), U(rng)}, d{U(rng), U(rng)};
        if (std::abs(a) > 0.8 || std::abs(b) > 0.8 || std::abs(c) > 0.8 || std::abs(d) > 0.8)
            continue;
        double dist = detail::segment_distance_between(a, b, c, d);
        if (dist < 4.0 * L.h || std::abs(a - b) < 4.0 * L.h || std::abs(c - d) < 4.0 * L.h)
            continue;
        double ratio = std::min(std::abs(a - b), std::abs(c - d)) / dist;
        try {
            auto res = capacity(make_problem(L, disk(1.0), detail::near_segment(a, b, L.h), detail::near_segment(c, d, L.h)));
            pairs.push_back({ratio, res.value});
        } catch (const ConfigError&) {
        }
    }
    for (double delta : {0.25, 0.5, 1.0}) {
        EstimateReport::LowerBound lb{delta, 0, std::numeric_limits<double>::infinity()};
        for (const auto& pr : pairs)
            if (pr.ratio >= delta) {
                ++lb.pairs;
                lb.C = std::min(lb.C, pr.cap);
            }
        rep.lower_bounds.push_back(lb);
    }

    // invariance: E = disk(z1, 0.15), F = {|z| >= 0.8}, and their images
    const Complex z1{-0.2, 0.1};
    Lattice D = Lattice::square(0.0, 1.0, n);
    rep.invariance_disk = capacity(make_problem(
        D, disk(1.0), [&](Complex x) { return std::abs(x - z1) <= 0.15; }, [](Complex x) { return std::abs(x) >= 0.8; })).value;
    auto e_img = circle_image(compose(map, ConformalMap("shift", {Affine{0.15, z1}})), 1.0, 2048);
    auto f_img = circle_image(map, 0.8, 4096);
    ImageDomain dom(map, n);
    rep.invariance_image = capacity(make_problem(
        dom.lattice, dom.region(), mask_region(dom.lattice, polygon_mask(dom.lattice, e_img)),
        mask_region(dom.lattice, polygon_mask(dom.lattice, f_img), true), dom.edges())).value;
    return rep;
}

struct InnerCapacityReport {
    double c0 = 0.0;
    int pairs = 0;
    int asserted = 0;          ///< pairs with capacity >= c0
    double constant = std::numeric_limits<double>::infinity();  ///< min over asserted pairs of min diam / dist
    struct Profile {
        double delta;
        double energy;
        double scaled() const { return energy * std::log(delta); }
    };
    std::vector<Profile> profile;  ///< energy of the logarithmic test function
};

/// Capacity against inner diameters and distances on `trial_pairs` random pairs of
/// continua (images of pullback segments), plus the energy of the explicit
/// logarithmic profile about phi(0) for a sweep of delta.
inline InnerCapacityReport inner_capacity_check(const ConformalMap& map, int trial_pairs, double c0 = 1.0, int n = 192,
                                   std::uint64_t seed = 1)
{
    InnerCapacityReport rep;
    rep.c0 = c0;
    ImageDomain dom(map, n);
    const double h = dom.lattice.h;
    GridConfig gc;
    gc.cap_level = 8;
    gc.base_angular = 32;
    gc.rings_per_level = 4;
    PullbackGrid grid(map, gc);
    ShortestPaths sp(grid);

    // continuum as grid nodes along a pullback segment
    auto nodes_on = [&](Complex a, Complex b) {
        std::vector<int> out;
        for (int k = 0; k <= 64; ++k) {
            int v = grid.nearest_node(a + (b - a) * (k / 64.0));
            if (out.empty() || out.back() != v)
                out.push_back(v);
        }
        return out;
    };
    auto run_from = [&](const std::vector<int>& src) {
        std::vector<ShortestPaths::Source> s;
        for (int v : src)
            s.push_back({v, 0.0});
        sp.run(s);
    };
    auto diam_inner = [&](const std::vector<int>& set) {
        double best = 0.0;
        for (int v : {set.front(), set[set.size() / 2], set.back()}) {
            run_from({v});
            for (int w : set)
                best = std::max(best, sp.distance(w));
        }
        return best;
    };

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> R(0.0, 0.9), T(0.0, 2.0 * pi), L(0.1, 0.5);
    while (rep.pairs < trial_pairs) {
        auto seg = [&] {
            Complex a = std::polar(R(rng), T(rng));
            Complex b = a + std::polar(L(rng), T(rng));
            return std::pair{a, b};
        };
        auto [a, b] = seg();
        auto [c, d] = seg();
        if (std::abs(b) > 0.9 || std::abs(d) > 0.9 || segments_intersect(a, b, c, d))
            continue;
        auto e_line = std::vector<Complex>{};
        auto f_line = std::vector<Complex>{};
        for (int k = 0; k <= 256; ++k) {
            e_line.push_back(map(a + (b - a) * (k / 256.0)));
            f_line.push_back(map(c + (d - c) * (k / 256.0)));
        }
        auto close_to = [h](const std::vector<Complex>& line) {
            return [&line, h](Complex w) { return polyline_distance(line, w) <= 0.75 * h; };
        };
        CapacityResult res;
        try {
            res = capacity(make_problem(dom.lattice, dom.region(), close_to(e_line), close_to(f_line), dom.edges()));
        } catch (const ConfigError&) {
            continue;  // the rasterized continua touch or break apart at this resolution
        }
        ++rep.pairs;
        if (res.value < c0)
            continue;
        ++rep.asserted;
        auto E = nodes_on(a, b), F = nodes_on(c, d);
        double dE = diam_inner(E), dF = diam_inner(F);
        run_from(E);
        double dist = std::numeric_limits<double>::infinity();
        for (int v : F)
            dist = std::min(dist, sp.distance(v));
        if (dist > 0.0)
            rep.constant = std::min(rep.constant, std::min(dE, dF) / dist);
    }

    // f = log(D / |x - z|) / log(delta) between D / delta and D, inside the
    // ball B(z, D) that lies in Omega, where inner distance is Euclidean.
    const Complex z = map(0.0);
    const double D = 0.5 * boundary_distance(map, 0.0, 8192);
    auto f = [&](Complex x, double delta) {
        double r = std::abs(x - z);
        if (r <= D / delta)
            return 1.0;
        if (r >= D)
            return 0.0;
        return std::log(D / r) / std::log(delta);
    };
    for (double delta : {4.0, 8.0, 16.0}) {
        Lattice B = Lattice::square(z, 1.05 * D, n * 2);
        CompensatedSum e;
        for (int k = 0; k < B.ny; ++k)
            for (int i = 0; i < B.nx; ++i) {
                double v = f(B.node(i, k), delta);
                if (i + 1 < B.nx)
                    e += std::pow(v - f(B.node(i + 1, k), delta), 2);
                if (k + 1 < B.ny)
                    e += std::pow(v - f(B.node(i, k + 1), delta), 2);
            }
        rep.profile.push_back({delta, e.value()});
    }
    return rep;
}

} // namespace sobdens
