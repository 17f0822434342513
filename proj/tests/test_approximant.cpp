#include <gtest/gtest.h>

#include <map>
#include <random>

#include <sobdens/approximant.hpp>

using namespace sobdens;

namespace {

const Stage& stage(const std::string& name, int m)
{
    static std::map<std::pair<std::string, int>, Stage> cache;
    auto key = std::make_pair(name, m);
    auto it = cache.find(key);
    if (it == cache.end())
        it = cache.emplace(key, build_stage(maps::from_spec(name), m, {})).first;
    return it->second;
}

// Midpoint rule with n x n points on a polar rectangle, weight r.
template <class F>
double polar_midpoint(double r0, double r1, double t0, double t1, int n, F&& f)
{
    double dr = (r1 - r0) / n, dt = (t1 - t0) / n, s = 0.0;
    for (int i = 0; i < n; ++i)
        for (int k = 0; k < n; ++k) {
            double r = r0 + (i + 0.5) * dr, t = t0 + (k + 0.5) * dt;
            s += f(r, t) * r * dr * dt;
        }
    return s;
}

QuadratureConfig plain(int cap, int sat = -1)
{
    QuadratureConfig c;
    c.cap_level = cap;
    c.saturation_level = sat;
    return c;
}

} // namespace

TEST(Quadrature, GaussRule)
{
    for (int n : {1, 2, 3, 5}) {
        auto g = detail::gauss_legendre(n);
        double s = 0.0, m = 0.0;
        for (int i = 0; i < n; ++i) {
            s += g.w[static_cast<std::size_t>(i)];
            m += g.w[static_cast<std::size_t>(i)] * std::pow(g.x[static_cast<std::size_t>(i)], 2 * n - 1);
        }
        EXPECT_NEAR(s, 1.0, 1e-14);
        EXPECT_NEAR(m, 1.0 / (2 * n), 1e-14) << n;
    }
}

TEST(Quadrature, CapDiskArea)
{
    for (int cap : {4, 8, 11}) {
        PolarQuadrature q(plain(cap, 8));
        CompensatedSum s;
        std::size_t n = 0;
        q.for_each([&](Complex, double w) { s += w; ++n; });
        double R = q.cap_radius();
        EXPECT_NEAR(s.value(), pi * R * R, 1e-4 * pi * R * R);
        EXPECT_EQ(n, q.size());
    }
}

TEST(Quadrature, RaisingTheCapHalvesTheMissingArea)
{
    double prev = 0.0;
    for (int cap = 6; cap <= 10; ++cap) {
        PolarQuadrature q(plain(cap, 6));
        CompensatedSum s;
        q.for_each([&](Complex, double w) { s += w; });
        double miss = pi - s.value();
        if (prev > 0.0) {
            EXPECT_NEAR(prev / miss, 2.0, 0.05);
        }
        prev = miss;
    }
}

TEST(Quadrature, Errors)
{
    EXPECT_THROW(PolarQuadrature(plain(0)), ConfigError);
    QuadratureConfig c = plain(5);
    c.first_level = 5;
    EXPECT_THROW(PolarQuadrature{c}, ConfigError);
    PolarQuadrature q(plain(5));
    EXPECT_THROW(q.for_each_in_panel(3, 0.0, 0.1, [](Complex, double) {}), ResolutionError);
}

TEST(Fields, Catalog)
{
    auto id = maps::identity();
    EXPECT_EQ(fields::from_spec("const:5", id)(Complex{0.3, 0.1}), 5.0);
    EXPECT_EQ(fields::from_spec("re", id)(Complex{0.3, 0.1}), 0.3);
    EXPECT_EQ(fields::from_spec("im", id)(Complex{0.3, 0.1}), 0.1);
    auto pw = fields::from_spec("power:theta=0,beta=0.5", id);
    EXPECT_EQ(pw.w0, Complex(1.0, 0.0));
    EXPECT_NEAR(pw(Complex{0.0, 0.0}), 1.0, 1e-15);
    EXPECT_FALSE(pw.smooth);
    auto car = fields::from_spec("power:theta=0,beta=0.5", maps::cardioid());
    EXPECT_NEAR(std::abs(car.w0 - 0.5), 0.0, 1e-15);
    auto ll = fields::from_spec("loglog:theta=0", id);
    EXPECT_FALSE(ll.bounded);
    EXPECT_NEAR(ll(Complex{0.0, 0.0}), std::log(std::log(std::numbers::e + 1.0)), 1e-15);
    // slit: the exact boundary value sits on a branch cut; the radial limit is used
    auto sl = fields::from_spec("power:theta=3.14159,beta=0.5", maps::slit());
    EXPECT_TRUE(std::isfinite(sl.w0.real()));
}

TEST(Fields, MembershipAndErrors)
{
    auto id = maps::identity();
    auto pw = fields::from_spec("power:theta=0,beta=0.5", id);
    EXPECT_NO_THROW(pw.require_sobolev(3.9));
    EXPECT_THROW(pw.require_sobolev(4.0), ConfigError);
    EXPECT_THROW(pw.require_sobolev(0.5), ConfigError);
    EXPECT_THROW(fields::from_spec("loglog:theta=0", id).require_sobolev(3.0), ConfigError);
    EXPECT_THROW(fields::from_spec("power:beta=1.5", id), ConfigError);
    EXPECT_THROW(fields::from_spec("cubic", id), ConfigError);
    EXPECT_THROW(fields::from_spec("const", id), ConfigError);
}

TEST(Truncate, Clamp)
{
    auto id = maps::identity();
    auto t = truncate(fields::constant(5.0), 3.0);
    EXPECT_EQ(t(Complex{0.1, 0.2}), 3.0);
    EXPECT_EQ(t.sup, 3.0);
    auto re = fields::from_spec("re", id);
    auto tr = truncate(re, 2.0);
    for (double x : {-0.9, -0.1, 0.0, 0.7})
        EXPECT_EQ(tr(Complex{x, 0.0}), re(Complex{x, 0.0}));
    EXPECT_THROW(truncate(re, 0.0), ConfigError);
}

TEST(Truncate, LogLogDistancesDecrease)
{
    auto id = maps::identity();
    auto d = truncation_distances(fields::from_spec("loglog:theta=0,scale=4", id), id, {2, 4, 8}, 1.0, 14);
    EXPECT_GT(d[0], d[1]);
    EXPECT_GT(d[1], d[2]);
    EXPECT_GT(d[2], 0.0);
    EXPECT_LE(d[2], 0.1 * d[0]);
}

TEST(CellAverage, ConstantIsExact)
{
    auto map = maps::cardioid();
    PolarQuadrature q(level_quadrature(3, 3, 3));
    for (const auto& c : level_cells(3))
        EXPECT_EQ(cell_average(fields::constant(5.0), map, c, q), 5.0);
}

TEST(CellAverage, MatchesBruteForce)
{
    auto id = maps::identity();
    PolarQuadrature q(level_quadrature(2, 3));
    const auto cell = level_cells(2)[0];
    auto area = polar_midpoint(cell.r_inner, cell.r_outer, cell.theta0, cell.theta1, 1000, [](double, double) { return 1.0; });
    auto mx = polar_midpoint(cell.r_inner, cell.r_outer, cell.theta0, cell.theta1, 1000,
                             [](double r, double t) { return r * std::cos(t); });
    EXPECT_NEAR(cell_average(fields::from_spec("re", id), id, cell, q), mx / area, 1e-5);
    auto ms = polar_midpoint(cell.r_inner, cell.r_outer, cell.theta0, cell.theta1, 1000,
                             [](double r, double t) { return std::sqrt(std::abs(std::polar(r, t) - 1.0)); });
    double a = cell_average(fields::from_spec("power:theta=0,beta=0.5", id), id, cell, q);
    EXPECT_TRUE(std::isfinite(a));
    EXPECT_NEAR(a, ms / area, 1e-5);
}

TEST(CellAverage, UncoveredCell)
{
    auto id = maps::identity();
    PolarQuadrature q(plain(4));
    EXPECT_THROW(cell_average(fields::constant(1.0), id, level_cells(5)[0], q), ResolutionError);
}

TEST(SobolevNorm, DiskCoordinate)
{
    auto id = maps::identity();
    PolarQuadrature q(plain(12));
    auto s = sobolev_norm(fields::from_spec("re", id), id, 2.0, q, 1e-3);
    double R = q.cap_radius();
    EXPECT_NEAR(s.value_p, pi * std::pow(R, 4) / 4, 1e-10);
    EXPECT_NEAR(s.grad_p, pi * R * R, 1e-10);
    // the collar beyond the cap has area about 2 pi 2^-12
    EXPECT_NEAR(s.value_p, pi / 4, 2e-3);
    EXPECT_NEAR(s.grad_p, pi, 2e-3);
}

TEST(SobolevNorm, ConstantGivesArea)
{
    auto car = maps::cardioid();
    PolarQuadrature q(plain(10, 8));
    auto s = sobolev_norm(fields::constant(1.0), car, 1.0, q, 1e-3);
    double R2 = std::pow(q.cap_radius(), 2);
    // area of the image of |z| < R under z - z^2/2
    EXPECT_NEAR(s.value_p, pi * (R2 + R2 * R2 / 2), 1e-10);
    EXPECT_EQ(s.grad_p, 0.0);
}

TEST(SobolevNorm, SingularFieldMatchesBruteForce)
{
    auto id = maps::identity();
    PolarQuadrature q(plain(16, 12));
    auto s = sobolev_norm(fields::from_spec("power:theta=0,beta=0.5", id), id, 1.0, q, 1e-3);
    // polar coordinates about w = 1: the disk is rho < -2 cos(alpha), alpha in (pi/2, 3pi/2)
    const int n = 1000;
    double total = 0.0;
    for (int k = 0; k < n; ++k) {
        double a = pi / 2 + (k + 0.5) * pi / n, rmax = -2.0 * std::cos(a);
        for (int i = 0; i < n; ++i) {
            double rho = (i + 0.5) * rmax / n;
            total += (std::sqrt(rho) + 0.5 / std::sqrt(rho)) * rho * (rmax / n) * (pi / n);
        }
    }
    EXPECT_NEAR(s.value_p + s.grad_p, total, 0.01 * total);
}

TEST(SobolevNorm, IdentityMatchesPlanarIntegrals)
{
    auto id = maps::identity();
    PolarQuadrature q(plain(11));
    ScalarField f;
    f.spec = "x^2 - y^2 + y";
    f.eval = [](Complex w) { return w.real() * w.real() - w.imag() * w.imag() + w.imag(); };
    auto s = sobolev_norm(f, id, 2.0, q, std::ldexp(1.0, -12));
    double R = q.cap_radius();
    EXPECT_NEAR(s.value_p, pi * std::pow(R, 6) / 6 + pi * std::pow(R, 4) / 4, 1e-6);
    EXPECT_NEAR(s.grad_p, 2 * pi * std::pow(R, 4) + pi * R * R, 1e-6);
}

TEST(SobolevNorm, DirichletEnergyIsConformallyInvariant)
{
    const Complex a{0.3, 0.2};
    auto aut = maps::disk_automorphism(a);
    PolarQuadrature q(plain(14, 10));
    auto s = sobolev_norm(fields::from_spec("re", aut), aut, 2.0, q, 1e-3);
    // the circle |z| = R goes to the circle with this center and radius
    const double R = q.cap_radius(), a2 = std::norm(a);
    const Complex c = -a * (1 - R * R) / (1 - a2 * R * R);
    const double rho = R * (1 - a2) / (1 - a2 * R * R);
    // second-order difference error with h = 1e-3
    EXPECT_NEAR(s.grad_p, pi * rho * rho, 1e-5);
    EXPECT_NEAR(s.value_p, pi * std::pow(rho, 4) / 4 + pi * rho * rho * c.real() * c.real(), 1e-8);
}

TEST(SobolevNorm, ThreadCountDoesNotChangeSums)
{
    auto car = maps::cardioid();
    PolarQuadrature q(plain(9));
    auto f = fields::from_spec("power:theta=0,beta=0.5", car);
    auto a = sobolev_norm(f, car, 1.5, q, 1e-3, 1);
    auto b = sobolev_norm(f, car, 1.5, q, 1e-3, 3);
    EXPECT_EQ(a.value_p, b.value_p);
    EXPECT_EQ(a.grad_p, b.grad_p);
    EXPECT_THROW(sobolev_norm(f, car, 0.5, q, 1e-3), ConfigError);
}

TEST(Approximant, ConstantReproduction)
{
    for (auto name : {"identity", "cardioid"}) {
        const auto& st = stage(name, 3);
        auto map = maps::from_spec(name);
        auto u = fields::constant(5.0);
        PolarQuadrature q(level_quadrature(3, 3, 3));
        auto um = assemble(u, st.partition, cell_averages(u, map, 3, q));
        for (Complex z : layer_samples(3, 10, 5000, 7)) {
            EXPECT_EQ(um.value(z), 5.0);
            EXPECT_EQ(um.error(z), 0.0);
        }
    }
}

TEST(Approximant, EqualsFieldOnCore)
{
    const auto& st = stage("cardioid", 4);
    auto map = maps::cardioid();
    auto u = fields::from_spec("power:theta=0,beta=0.5", map);
    PolarQuadrature q(level_quadrature(4, 3, 4));
    auto um = assemble(u, st.partition, cell_averages(u, map, 4, q));
    for (Complex z : core_samples(4, 256))
        if (std::abs(z) <= dyadic_radius(4)) {
            EXPECT_EQ(um.value(z), u(map(z)));
        }
}

TEST(Approximant, EqualsAverageAwayFromOtherSupports)
{
    const auto& st = stage("identity", 3);
    auto map = maps::identity();
    auto u = fields::from_spec("re", map);
    PolarQuadrature q(level_quadrature(3, 3, 3));
    auto um = assemble(u, st.partition, cell_averages(u, map, 3, q));
    const auto& s = *st.setup;
    const double half = st.constants.c2 - 1.0;
    // phi_i vanishes at a node farther than (c2 - 1) diam_i / 2 from S_i
    auto clear_of_others = [&](int node, int j) {
        for (int i = 0; i < s.count(); ++i) {
            if (i == j)
                continue;
            const auto& tab = s.dist[static_cast<std::size_t>(i)];
            auto it = std::lower_bound(tab.begin(), tab.end(), node, [](const auto& e, int v) { return e.node < v; });
            if (it != tab.end() && it->node == node && it->dist < half * s.diam[static_cast<std::size_t>(i)] / 2.0)
                return false;
        }
        return true;
    };
    int checked = 0;
    for (Complex z : layer_samples(3, 10, 20000, 3)) {
        if (std::abs(z) < s.core_radius())
            continue;
        int j = st.layer.locate(z);
        auto stc = s.grid.stencil(z);
        bool ok = j >= 0;
        for (int k = 0; ok && k < stc.size; ++k) {
            int node = stc.node[static_cast<std::size_t>(k)];
            ok = s.s_label[static_cast<std::size_t>(node)] == j && clear_of_others(node, j);
        }
        if (!ok)
            continue;
        ++checked;
        EXPECT_NEAR(um.value(z), um.averages()[static_cast<std::size_t>(j)], 1e-12);
    }
    EXPECT_GT(checked, 1000);
}

TEST(Approximant, MismatchedLevel)
{
    auto map = maps::identity();
    PolarQuadrature q(level_quadrature(4, 3, 4));
    auto avg = cell_averages(fields::constant(1.0), map, 4, q);
    EXPECT_THROW(assemble(fields::constant(1.0), stage("identity", 3).partition, avg), ConfigError);
}

TEST(RunLevel, BoundsAndLocalization)
{
    for (auto name : {"identity", "cardioid", "slit"}) {
        auto map = maps::from_spec(name);
        auto u = fields::from_spec("power:theta=0.5,beta=0.5", map);
        RunSettings rs;
        auto row = run_level(u, map, 1.0, 3, rs, stage(name, 3));
        EXPECT_TRUE(row.localized) << name;
        EXPECT_LE(row.sup_um, row.sup_u + 1e-12) << name;
        EXPECT_LE(row.sup_u, u.sup + 1e-12) << name;
        for (double v : {row.err_lp, row.err_grad, row.lip_um, row.tail_energy, row.tail_area}) {
            EXPECT_TRUE(std::isfinite(v)) << name;
            EXPECT_GT(v, 0.0) << name;
        }
        EXPECT_GE(row.min_phi, 0.25) << name;
    }
}

TEST(ConvergenceRun, ConstantField)
{
    for (double p : {1.0, 2.0}) {
        auto rows = convergence_run(fields::constant(1.0), maps::cardioid(), p, {3, 4});
        for (const auto& r : rows)
            EXPECT_LE(r.err_w1p, 1e-10);
    }
}

TEST(ConvergenceRun, ErrorDecreases)
{
    auto id = maps::identity();
    auto rows = convergence_run(fields::from_spec("power:theta=0,beta=0.5", id), id, 1.0, {3, 4, 5, 6});
    for (std::size_t k = 1; k < rows.size(); ++k) {
        EXPECT_LT(rows[k].err_w1p, rows[k - 1].err_w1p);
        EXPECT_LT(rows[k].tail_energy, rows[k - 1].tail_energy);
        EXPECT_LT(rows[k].tail_area, rows[k - 1].tail_area);
    }
}

TEST(ConvergenceRun, Errors)
{
    auto id = maps::identity();
    EXPECT_THROW(convergence_run(fields::from_spec("loglog:theta=0", id), id, 1.0, {3}), ConfigError);
    EXPECT_THROW(convergence_run(fields::from_spec("power:theta=0,beta=0.5", id), id, 4.0, {3}), ConfigError);
    try {
        convergence_run(fields::constant(1.0), id, 1.0, {1});
        FAIL();
    } catch (const ConfigError& e) {
        EXPECT_NE(std::string(e.what()).find("m = 1"), std::string::npos);
    }
}

TEST(TailEnergy, DecreasesForCatalogFields)
{
    auto car = maps::cardioid();
    for (auto spec : {"const:1", "re", "im", "power:theta=0,beta=0.5", "loglog:theta=0,scale=4"}) {
        auto u = fields::from_spec(spec, car);
        TailReport prev;
        for (int m = 3; m <= 6; ++m) {
            auto t = tail_energy(u, car, m, 1.0, 3);
            if (m > 3) {
                EXPECT_LT(t.energy, prev.energy) << spec << m;
                EXPECT_LT(t.area, prev.area) << spec << m;
            }
            prev = t;
        }
    }
}

TEST(Poincare, ConstantFieldIsExcluded)
{
    const auto& st = stage("identity", 3);
    auto map = maps::identity();
    PolarQuadrature q(level_quadrature(3, 3, 3));
    auto u = fields::constant(2.0);
    auto r = poincare_check(u, map, st.d, cell_averages(u, map, 3, q), q, 2.0);
    EXPECT_EQ(r.excluded, 2 * st.d.count());
    EXPECT_EQ(r.constant(), 0.0);
}

TEST(Poincare, CoordinateFieldIsStableInM)
{
    auto map = maps::identity();
    auto u = fields::from_spec("re", map);
    std::vector<double> cs;
    for (int m = 3; m <= 7; ++m) {
        auto d = build_measured(map, m);
        PolarQuadrature q(level_quadrature(m, 3, m));
        auto r = poincare_check(u, map, d, cell_averages(u, map, m, q), q, 2.0);
        EXPECT_EQ(r.excluded, 0);
        cs.push_back(r.constant());
    }
    for (double c : cs) {
        EXPECT_TRUE(std::isfinite(c));
        EXPECT_NEAR(c, cs.back(), 0.2 * cs.back());
    }
}

TEST(Poincare, CardioidSingularField)
{
    auto map = maps::cardioid();
    auto u = fields::from_spec("power:theta=0,beta=0.5", map);
    auto d = build_measured(map, 4);
    PolarQuadrature q(level_quadrature(4, 3, 4));
    auto r = poincare_check(u, map, d, cell_averages(u, map, 4, q), q, 2.0);
    EXPECT_TRUE(std::isfinite(r.constant()));
    EXPECT_GT(r.constant(), 0.0);
}
