#include <gtest/gtest.h>

#include <map>

#include <sobdens/partition.hpp>

using namespace sobdens;

namespace {

struct Built {
    Decomposition d;
    BoundaryLayer layer;
    std::shared_ptr<const PartitionSetup> setup;
    PartitionConfig cfg;
    std::shared_ptr<Partition> partition;
};

const Built& built(const std::string& name, int m)
{
    static std::map<std::pair<std::string, int>, Built> cache;
    auto key = std::make_pair(name, m);
    auto it = cache.find(key);
    if (it != cache.end())
        return it->second;
    Built b;
    auto map = maps::from_spec(name);
    b.d = build_measured(map, m);
    b.layer = build_layer(map, b.d, {});
    b.setup = prepare_partition(map, b.d, b.layer, layer_grid_config(m, 3));
    b.cfg = choose_constants(b.setup, ConstantsPolicy::PaperFormula);
    b.partition = std::make_shared<Partition>(b.setup, b.cfg.c1, b.cfg.c2);
    return cache.emplace(key, std::move(b)).first->second;
}

} // namespace

TEST(Partition, DeepInterior)
{
    for (auto name : {"identity", "cardioid"}) {
        auto v = built(name, 3).partition->evaluate(0.0);
        EXPECT_EQ(v.psi, 1.0);
        EXPECT_EQ(v.count, 0);
        EXPECT_EQ(v.Phi, 1.0);
    }
}

TEST(Partition, BumpIsOneInsideItsLayerCell)
{
    const auto& b = built("identity", 3);
    const double w = pi / 8;
    for (int j = 0; j < 16; ++j) {
        // middle of S_j, between the radial cuts at (j + 1/2) w and (j + 3/2) w
        Complex z = std::polar(0.97, (j + 1) * w);
        ASSERT_EQ(b.layer.locate(z), j);
        auto v = b.partition->evaluate(z);
        EXPECT_EQ(v.bump(j), 1.0) << j;
        EXPECT_EQ(v.psi, 0.0);
    }
}

TEST(Partition, NeighbourBumpsCoverCellWherePsiIsSmall)
{
    for (auto name : {"identity", "cardioid"}) {
        const auto& b = built(name, 3);
        int checked = 0;
        for (const auto& cell : b.d.cells) {
            // interior rows plus rows just inside the core circle, where psi is small
            auto pts = cell.interior_samples(12);
            for (double f : {1e-4, 1e-3, 1e-2, 0.05})
                for (int k = 0; k < 12; ++k)
                    pts.push_back(cell.at(1.0 - f, (k + 0.5) / 12));
            for (Complex z : pts) {
                auto v = b.partition->evaluate(z);
                if (v.psi > 0.5)
                    continue;
                ++checked;
                EXPECT_GE(v.bump(cell.index) + v.bump(b.d.wrap(cell.index - 1)), 0.25) << name << " " << z;
            }
        }
        EXPECT_GT(checked, 0) << name;
    }
}

TEST(ChooseConstants, IdentityMatchesDiskGeometry)
{
    std::vector<double> c1s, c2s, c3s;
    for (int m = 3; m <= 7; ++m) {
        const auto& cfg = built("identity", m).cfg;
        // dist(x, circle) / dist(x, core circle) peaks on |x| = 1 - 2^-m at 2^-m / 2^-m-1.
        EXPECT_NEAR(cfg.C1, 2.0, 1e-6);
        // Largest (1 - |x|) / diam over the sample rows: the innermost row of R_j.
        const double rin = dyadic_radius(m), width = std::ldexp(1.0, -m - 1);
        const double rho = dyadic_radius(m + 1), t = pi * std::ldexp(1.0, -m);
        const double diam = std::max(2 * rho * std::sin(t / 2), std::abs(std::polar(rho, t) - rin));
        EXPECT_NEAR(cfg.C3, (1.0 - (rin + width / 12)) / diam, 1e-3 * cfg.C3);
        // Straight radial path to the core circle.
        EXPECT_NEAR(cfg.C2, 1.0, 0.05);
        c1s.push_back(cfg.C1);
        c2s.push_back(cfg.C2);
        c3s.push_back(cfg.C3);
    }
    for (auto* v : {&c1s, &c2s, &c3s})
        for (double x : *v)
            EXPECT_NEAR(x, v->back(), 0.2 * v->back());
}

TEST(ChooseConstants, FormulaPathAndSupports)
{
    for (auto name : {"identity", "cardioid"})
        for (int m = 3; m <= 5; ++m) {
            const auto& b = built(name, m);
            EXPECT_TRUE(b.cfg.formula_ok) << name << m;
            EXPECT_NEAR(b.cfg.c1, 2 * std::max(b.cfg.C1, b.cfg.C2 * b.cfg.C3 / (b.cfg.c2 - 1)), 1e-12);
            EXPECT_GT(b.cfg.c2, 1.0);
            const auto& s = *b.setup;
            // psi = 1 on the pullback of Omega_{m-1}
            for (Complex z : core_samples(m, 512))
                EXPECT_EQ(b.partition->psi(z), 1.0);
            // c2 S_i stays outside Omega_{m-1}; non-adjacent c2 S_i are disjoint
            std::vector<std::vector<int>> owners(s.grid.size());
            for (int i = 0; i < s.count(); ++i)
                for (const auto& e : s.dist[static_cast<std::size_t>(i)])
                    if (e.dist <= (b.cfg.c2 - 1) * s.diam[static_cast<std::size_t>(i)]) {
                        EXPECT_GT(std::abs(s.grid.position(e.node)), dyadic_radius(m));
                        owners[static_cast<std::size_t>(e.node)].push_back(i);
                    }
            for (const auto& o : owners)
                for (int a : o)
                    for (int c : o) {
                        int gap = std::abs(a - c);
                        EXPECT_LE(std::min(gap, s.count() - gap), 1);
                    }
        }
}

TEST(ChooseConstants, SupportCheckRejectsWideSupports)
{
    const auto& b = built("cardioid", 3);
    EXPECT_TRUE(support_checks_pass(*b.setup, b.cfg.c2 - 1));
    EXPECT_FALSE(support_checks_pass(*b.setup, 2.0));
}

TEST(VerifyPartition, IdentityHundredThousand)
{
    const auto& b = built("identity", 3);
    auto rep = verify_partition(*b.partition, 100000);
    EXPECT_EQ(rep.samples, 100000u);
    EXPECT_GE(rep.min_phi, 0.25);
    EXPECT_LE(rep.max_sum_error, 1e-12);
    EXPECT_LE(rep.max_overlap, 3);
    EXPECT_TRUE(rep.psi_one_on_core);
    EXPECT_TRUE(rep.psi_zero_on_layer);
    EXPECT_TRUE(rep.supports_ok);
    EXPECT_EQ(rep.s_interior_one, 1.0);
}

TEST(VerifyPartition, GradientBoundsStableUnderStepHalving)
{
    for (auto name : {"identity", "cardioid", "slit"}) {
        const auto& b = built(name, 4);
        auto rep = verify_partition(*b.partition, 20000);
        EXPECT_GE(rep.min_phi, 0.25) << name;
        EXPECT_LE(rep.max_sum_error, 1e-12);
        for (auto [a, c] : {std::pair{rep.lip_psi, rep.lip_psi_half}, std::pair{rep.lip_bump, rep.lip_bump_half},
                            std::pair{rep.lip_normalized, rep.lip_normalized_half}}) {
            EXPECT_TRUE(std::isfinite(a));
            EXPECT_GT(a, 0.0);
            EXPECT_NEAR(a, c, 0.1 * c) << name;
        }
    }
}

TEST(Partition, Errors)
{
    const auto& b = built("identity", 3);
    EXPECT_THROW(b.partition->evaluate(Complex{0.99999, 0.0}), DomainError);
    EXPECT_THROW(Partition(b.setup, 1.0, 1.0), ConfigError);
    EXPECT_THROW(Partition(b.setup, 0.0, 1.5), ConfigError);
    auto map = maps::identity();
    auto d4 = build_measured(map, 4);
    EXPECT_THROW(prepare_partition(map, d4, b.layer, layer_grid_config(4, 3)), ConfigError);
}
