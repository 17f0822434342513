#include <gtest/gtest.h>

#include <cmath>
#include <queue>
#include <random>

#include <sobdens/boundary.hpp>
#include <sobdens/conformal_map.hpp>
#include <sobdens/hyperbolic.hpp>
#include <sobdens/pullback_grid.hpp>

using namespace sobdens;

namespace {

Complex random_disk_point(std::mt19937_64& rng, double rmax)
{
    std::uniform_real_distribution<double> u(0.0, 1.0);
    return std::polar(rmax * std::sqrt(u(rng)), 2.0 * pi * u(rng));
}

std::vector<ConformalMap> builtin_maps()
{
    std::vector<ConformalMap> out;
    for (const auto& name : maps::builtin_names())
        out.push_back(maps::from_spec(name));
    return out;
}

// Hyperbolic length of the circular arc from z to w around `center`,
// integrated in the angle parameter with composite Simpson.
double arc_hyperbolic_length(Complex center, double radius, Complex z, Complex w, int panels)
{
    double a0 = std::arg(z - center), a1 = std::arg(w - center);
    double sweep = a1 - a0;
    while (sweep > pi) sweep -= 2 * pi;
    while (sweep <= -pi) sweep += 2 * pi;
    auto f = [&](double t) {
        Complex p = center + radius * std::polar(1.0, a0 + t * sweep);
        return 2.0 / (1.0 - std::norm(p)) * radius * std::abs(sweep);
    };
    double h = 1.0 / panels, s = f(0) + f(1);
    for (int k = 1; k < panels; ++k)
        s += (k % 2 ? 4.0 : 2.0) * f(k * h);
    return s * h / 3.0;
}

// Independent inner-distance oracle: uniform Cartesian lattice on the pullback
// disk with 16-neighbour moves, weights |phi'(midpoint)| * length.
double lattice_inner_distance(const ConformalMap& map, Complex a, Complex b, int n, double rmax)
{
    const double h = 2.0 / n;
    auto idx = [&](int i, int k) { return i * (n + 1) + k; };
    auto pos = [&](int i, int k) { return Complex(-1.0 + i * h, -1.0 + k * h); };
    std::vector<double> dist(static_cast<std::size_t>((n + 1) * (n + 1)), INFINITY);
    auto nearest = [&](Complex z) {
        int i = static_cast<int>(std::lround((z.real() + 1.0) / h));
        int k = static_cast<int>(std::lround((z.imag() + 1.0) / h));
        return std::pair{i, k};
    };
    auto [ai, ak] = nearest(a);
    auto [bi, bk] = nearest(b);
    using Item = std::tuple<double, int, int>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
    dist[static_cast<std::size_t>(idx(ai, ak))] = 0.0;
    heap.push({0.0, ai, ak});
    const int moves[16][2] = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}, {1, 1}, {1, -1}, {-1, 1}, {-1, -1},
                              {2, 1}, {2, -1}, {-2, 1}, {-2, -1}, {1, 2}, {1, -2}, {-1, 2}, {-1, -2}};
    while (!heap.empty()) {
        auto [d, i, k] = heap.top();
        heap.pop();
        if (d > dist[static_cast<std::size_t>(idx(i, k))])
            continue;
        if (i == bi && k == bk)
            return d;
        for (auto& mv : moves) {
            int ni = i + mv[0], nk = k + mv[1];
            if (ni < 0 || nk < 0 || ni > n || nk > n)
                continue;
            Complex p = pos(i, k), q = pos(ni, nk);
            if (std::abs(q) > rmax)
                continue;
            double nd = d + std::abs(map.eval(0.5 * (p + q)).deriv) * std::abs(q - p);
            if (nd < dist[static_cast<std::size_t>(idx(ni, nk))]) {
                dist[static_cast<std::size_t>(idx(ni, nk))] = nd;
                heap.push({nd, ni, nk});
            }
        }
    }
    return INFINITY;
}

} // namespace

TEST(ConformalMap, IdentityEval)
{
    auto v = maps::identity().eval({0.3, 0.4});
    EXPECT_EQ(v.w, Complex(0.3, 0.4));
    EXPECT_EQ(v.deriv, Complex(1.0));
}

TEST(ConformalMap, CardioidEval)
{
    auto m = maps::cardioid();
    auto v0 = m.eval(0.0);
    EXPECT_EQ(v0.w, Complex(0.0));
    EXPECT_EQ(v0.deriv, Complex(1.0));
    auto v = m.eval(0.5);
    EXPECT_NEAR(v.w.real(), 0.375, 1e-15);
    EXPECT_NEAR(v.deriv.real(), 0.5, 1e-15);
}

TEST(ConformalMap, DomainAndSingularityErrors)
{
    EXPECT_THROW(maps::cardioid().eval({1.0, 0.0}), DomainError);
    EXPECT_THROW(maps::identity().eval({0.8, 0.8}), DomainError);
    ConformalMap pole("pole", {Mobius{1.0, 0.0, 1.0, -0.5}});
    EXPECT_THROW(pole.eval(0.5), SingularityError);
    EXPECT_THROW(maps::quadratic(0.6), ConfigError);
    EXPECT_THROW(maps::from_spec("no-such-map"), ConfigError);
}

TEST(ConformalMap, ChainRuleMatchesFiniteDifferences)
{
    std::mt19937_64 rng(7);
    const double h = 1e-6;
    for (const auto& map : builtin_maps()) {
        double worst = 0.0;
        for (int trial = 0; trial < 1000; ++trial) {
            Complex z = random_disk_point(rng, 0.95);
            Complex fd = (map(z + h) - map(z - h)) / (2.0 * h);
            Complex d = map.derivative(z);
            ASSERT_GT(std::abs(d), 0.0) << map.name();
            worst = std::max(worst, std::abs(fd - d) / std::abs(d));
        }
        EXPECT_LE(worst, 1e-6) << map.name();
    }
}

TEST(ConformalMap, SlitMapLandsInSlitDisk)
{
    auto m = maps::slit();
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 500; ++trial) {
        Complex w = m(random_disk_point(rng, 0.999));
        EXPECT_LT(std::abs(w), 1.0);
        EXPECT_FALSE(std::abs(w.imag()) < 1e-14 && w.real() >= 0.0);
    }
    EXPECT_NEAR(std::abs(m.eval_unchecked(Complex(0.0, -1.0)).w), 0.0, 1e-12);  // slit tip
}

TEST(ConformalMap, ComposeIsChainConcatenation)
{
    auto inner = maps::disk_automorphism({0.2, -0.1});
    auto outer = maps::cardioid();
    auto both = compose(outer, inner);
    Complex z(0.3, 0.25);
    auto v = both.eval(z);
    EXPECT_NEAR(std::abs(v.w - outer(inner(z))), 0.0, 1e-15);
    EXPECT_NEAR(std::abs(v.deriv - outer.derivative(inner(z)) * inner.derivative(z)), 0.0, 1e-14);
}

TEST(Hyperbolic, DistanceExamples)
{
    EXPECT_EQ(hyperbolic_distance(0.0, 0.0), 0.0);
    EXPECT_NEAR(hyperbolic_distance(0.0, 0.5), std::log(3.0), 1e-15);
    EXPECT_THROW(hyperbolic_distance(0.0, 1.0), DomainError);
}

TEST(Hyperbolic, DistanceMatchesIntegratedDensity)
{
    Complex z(0.5, 0.0), w(0.0, 0.5);
    auto g = geodesic_between(z, w);
    double oracle = arc_hyperbolic_length(g.center, g.radius, z, w, 20000);
    EXPECT_NEAR(hyperbolic_distance(z, w), oracle, 1e-8);
}

TEST(Hyperbolic, TriangleInequalityAndMobiusInvariance)
{
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 2000; ++trial) {
        Complex a = random_disk_point(rng, 0.99), b = random_disk_point(rng, 0.99), c = random_disk_point(rng, 0.99);
        EXPECT_LE(hyperbolic_distance(a, c), hyperbolic_distance(a, b) + hyperbolic_distance(b, c) + 1e-12);
        EXPECT_NEAR(hyperbolic_distance(a, b), hyperbolic_distance(b, a), 1e-12);
        auto t = maps::disk_automorphism(random_disk_point(rng, 0.9));
        double before = hyperbolic_distance(a, b);
        double after = hyperbolic_distance(t(a), t(b));
        EXPECT_NEAR(after, before, 1e-9 * std::max(1.0, before));
    }
}

TEST(Hyperbolic, GeodesicExamples)
{
    auto seg = geodesic_between(0.0, 0.9);
    EXPECT_EQ(seg.kind, HyperbolicGeodesic::Kind::DiameterSegment);
    EXPECT_EQ(seg.polyline.front(), Complex(0.0));
    EXPECT_EQ(seg.polyline.back(), Complex(0.9));

    for (double theta : {0.0, 0.7, 2.0, 4.5}) {
        auto radial = geodesic_between(std::polar(0.2, theta), std::polar(0.7, theta));
        EXPECT_EQ(radial.kind, HyperbolicGeodesic::Kind::DiameterSegment) << theta;
    }

    // Bisection oracle for a center on the diagonal c0 (1 + i): incidence at 0.5
    // and orthogonality |c|^2 - r^2 = 1.
    auto residual = [](double c0) { return std::norm(Complex(c0, c0) - 0.5) - (2 * c0 * c0 - 1.0); };
    double lo = 0.6, hi = 10.0;
    for (int it = 0; it < 200; ++it) {
        double mid = 0.5 * (lo + hi);
        (residual(lo) * residual(mid) <= 0 ? hi : lo) = mid;
    }
    auto arc = geodesic_between({0.5, 0.0}, {0.0, 0.5});
    ASSERT_EQ(arc.kind, HyperbolicGeodesic::Kind::CircularArc);
    EXPECT_NEAR(arc.center.real(), lo, 1e-10);
    EXPECT_NEAR(arc.center.imag(), lo, 1e-10);
    EXPECT_NEAR(std::norm(arc.center) - arc.radius * arc.radius, 1.0, 1e-10);
    for (Complex p : arc.polyline)
        EXPECT_NEAR(std::abs(p - arc.center), arc.radius, 1e-12);

    EXPECT_THROW(geodesic_between(0.3, 0.3), DegenerateInputError);
}

TEST(Hyperbolic, GeodesicIsLengthMinimizer)
{
    std::mt19937_64 rng(5);
    std::normal_distribution<double> noise(0.0, 1.0);
    for (int trial = 0; trial < 200; ++trial) {
        Complex z = random_disk_point(rng, 0.95), w = random_disk_point(rng, 0.95);
        auto g = geodesic_between(z, w, 2001);
        double len = hyperbolic_length(g.polyline);
        EXPECT_NEAR(len, hyperbolic_distance(z, w), 1e-6 * std::max(1.0, len));
        auto bent = g.polyline;
        double amp = 0.01 * (1.0 - std::max(std::abs(z), std::abs(w)));
        for (std::size_t k = 1; k + 1 < bent.size(); ++k) {
            double t = static_cast<double>(k) / (bent.size() - 1);
            bent[k] += amp * std::sin(pi * t) * Complex(noise(rng) * 0.1 + 1.0, 0.5);
        }
        EXPECT_GE(hyperbolic_length(bent), len - 1e-9);
    }
}

TEST(ImageLength, Examples)
{
    EXPECT_NEAR(image_length(maps::identity(), {0.0, 0.9}), 0.9, 1e-15);
    std::vector<Complex> quarter;
    for (int k = 0; k <= 4000; ++k)
        quarter.push_back(std::polar(0.5, 0.5 * pi * k / 4000.0));
    EXPECT_NEAR(image_length(maps::identity(), quarter), pi / 4.0, 1e-7);
    EXPECT_NEAR(image_length(maps::cardioid(), {0.0, 0.5}), 0.375, 1e-14);
    EXPECT_THROW(image_length(maps::identity(), {}), ConfigError);
    EXPECT_THROW(image_length(maps::identity(), {0.0, 1.0}), DomainError);
}

TEST(ImageLength, RefinementStable)
{
    auto map = maps::slit();
    auto g = geodesic_between({0.3, 0.6}, {-0.7, 0.1}, 65);
    auto fine = geodesic_between({0.3, 0.6}, {-0.7, 0.1}, 129);
    double a = image_length(map, g.polyline), b = image_length(map, fine.polyline);
    EXPECT_LE(std::abs(a - b) / b, 1e-3);
}

TEST(InnerDistance, ConvexIdentity)
{
    PullbackGrid grid(maps::identity(), {.cap_level = 6});
    EXPECT_NEAR(inner_distance(grid, 0.0, 0.5), 0.5, 1e-12);
    EXPECT_NEAR(inner_distance(grid, -0.9, 0.9), 1.8, 0.02);
    EXPECT_GE(inner_distance(grid, {0.3, 0.2}, {-0.4, 0.5}), std::abs(Complex(0.7, -0.3)) - 0.02);
}

TEST(InnerDistance, CardioidAroundCuspMatchesLatticeOracle)
{
    auto map = maps::cardioid();
    Complex a = std::polar(0.9, 0.3), b = std::polar(0.9, -0.3);
    PullbackGrid grid(map, {.cap_level = 7, .base_angular = 64, .rings_per_level = 8});
    double d = inner_distance(grid, a, b);
    double oracle = lattice_inner_distance(map, a, b, 600, 0.95);
    EXPECT_NEAR(d, oracle, 0.03 * oracle);
    EXPECT_GT(d, std::abs(map(a) - map(b)));
}

TEST(InnerDistance, BeyondCapIsDomainError)
{
    PullbackGrid grid(maps::identity(), {.cap_level = 4});
    EXPECT_THROW(inner_distance(grid, 0.0, 0.99), DomainError);
}

TEST(PullbackGrid, EdgeWeightsAreMidpointImageLengths)
{
    auto map = maps::cardioid();
    PullbackGrid grid(map, {.cap_level = 5});
    for (int node = 0; node < static_cast<int>(grid.size()); node += 37) {
        for (auto nb : grid.neighbors(node)) {
            Complex a = grid.position(node), b = grid.position(nb.node);
            EXPECT_GT(nb.weight, 0.0);
            EXPECT_NEAR(nb.weight, image_length(map, {a, b}), 2e-2 * nb.weight);
        }
    }
}

TEST(PullbackGrid, StencilReproducesLinearFunctionsOnRings)
{
    PullbackGrid grid(maps::identity(), {.cap_level = 5});
    std::mt19937_64 rng(2);
    for (int trial = 0; trial < 500; ++trial) {
        Complex z = random_disk_point(rng, grid.cap_radius());
        auto st = grid.stencil(z);
        double wsum = st.apply([](int) { return 1.0; });
        EXPECT_NEAR(wsum, 1.0, 1e-14);
        double r = st.apply([&](int n) { return std::abs(grid.position(n)); });
        EXPECT_NEAR(r, std::abs(z), 1e-12);
    }
}

TEST(BoundaryDistance, Examples)
{
    EXPECT_NEAR(boundary_distance(maps::identity(), 0.25, 4096), 0.75, 1e-12);
    EXPECT_NEAR(boundary_distance(maps::identity(), 0.0, 4096), 1.0, 1e-12);
    EXPECT_THROW(boundary_distance(maps::identity(), 0.0, 32), ConfigError);

    auto map = maps::cardioid();
    Complex w = map(0.9);
    double oracle = INFINITY;
    for (int k = 0; k < 1000000; ++k)
        oracle = std::min(oracle, std::abs(w - map.eval_unchecked(std::polar(1.0, 2 * pi * k / 1e6)).w));
    EXPECT_NEAR(boundary_distance(map, 0.9, 8192), oracle, 1e-6);
    ImageCurve curve(map, 1.0, 8192);
    EXPECT_NEAR(curve.distance(w), oracle, 1e-6);
}

// Boundary values sit on the square-root branch cut for the slit map; the
// polyline must still trace the boundary without chords through the interior.
TEST(BoundaryDistance, SlitCurveHasNoInteriorChords)
{
    auto map = maps::slit();
    auto pts = circle_image(map, 1.0, 8192);
    for (std::size_t k = 0; k < pts.size(); ++k) {
        ASSERT_TRUE(finite(pts[k]));
        EXPECT_LT(std::abs(pts[k] - pts[(k + 1) % pts.size()]), 0.1) << k;
    }
    ImageCurve curve(map, 1.0, 8192);
    for (double t : {0.2, 1.0, 2.0, 3.0}) {
        Complex z = std::polar(0.97, t);
        EXPECT_NEAR(curve.distance(map(z)), boundary_distance(map, z, 100000), 1e-4);
    }
}

TEST(GehringHayman, IdentityWorstPairMatchesArcLength)
{
    auto rep = gehring_hayman(maps::identity(), 1000, 33);
    Complex z = rep.worst_z, w = rep.worst_w;
    // geodesic as the automorphism image of a radius, densely sampled
    auto Tinv = [&](Complex v) { return (v + z) / (1.0 + std::conj(z) * v); };
    Complex e = (w - z) / (1.0 - std::conj(z) * w);
    auto dense = [&](int n) {
        double len = 0.0;
        for (int k = 0; k < n; ++k)
            len += std::abs(Tinv(e * ((k + 1.0) / n)) - Tinv(e * (double(k) / n)));
        return len;
    };
    double l1 = dense(4000), l2 = dense(8000);
    double exact = (l2 + (l2 - l1) / 3.0) / std::abs(w - z);
    // an inscribed polyline falls short of the arc by O(samples^-2)
    double fine = gehring_hayman(maps::identity(), 1000, 257).max_ratio;
    EXPECT_LT(rep.max_ratio, exact);
    EXPECT_NEAR(fine, exact, 2e-5);
    EXPECT_GT((exact - rep.max_ratio) / (exact - fine), 30.0);
    EXPECT_GE(rep.mean_ratio, 1.0);
}

TEST(GehringHayman, FiniteAndStableUnderRefinement)
{
    for (const auto& map : {maps::identity(), maps::cardioid(), maps::quadratic(0.5), maps::slit()}) {
        auto coarse = gehring_hayman(map, 1000, 33);
        auto fine = gehring_hayman(map, 1000, 65);
        EXPECT_TRUE(std::isfinite(coarse.max_ratio)) << map.name();
        EXPECT_GE(coarse.max_ratio, 1.0) << map.name();
        EXPECT_NEAR(fine.max_ratio / coarse.max_ratio, 1.0, 0.2) << map.name();
    }
    EXPECT_THROW(gehring_hayman(maps::identity(), 0), ConfigError);
}
