#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <string>
#include <vector>

#include "boundary_layer.hpp"
#include "differences.hpp"
#include "dyadic.hpp"
#include "fields.hpp"
#include "parallel.hpp"
#include "partition.hpp"
#include "quadrature.hpp"

namespace sobdens {

/// The two integrals of a W^{1,p} norm: int |f|^p and int |grad f|^p.
struct SobolevParts {
    double p = 1.0;
    double value_p = 0.0;
    double grad_p = 0.0;

    double lp() const { return std::pow(value_p, 1.0 / p); }
    double grad() const { return std::pow(grad_p, 1.0 / p); }
    double w1p() const { return std::pow(value_p + grad_p, 1.0 / p); }
};

namespace detail {

inline void require_exponent(double p)
{
    if (!(p >= 1.0) || !std::isfinite(p))
        throw ConfigError("Sobolev exponent must satisfy 1 <= p < infinity");
}

/// Per-chunk accumulation, merged in chunk order so the totals do not depend
/// on the number of threads.
template <class Acc, class F>
Acc integrate(const PolarQuadrature& q, unsigned threads, F&& per_node)
{
    auto cs = q.chunks();
    std::vector<Acc> part(cs.size());
    parallel_for(cs.size(), threads, [&](std::size_t i) {
        q.for_each_in_chunk(cs[i], [&](Complex z, double w) { per_node(part[i], cs[i].level, z, w); });
    });
    Acc total;
    for (const auto& a : part)
        total.merge(a);
    return total;
}

struct PartsAcc {
    CompensatedSum value, grad;
    void merge(const PartsAcc& o)
    {
        value += o.value.value();
        grad += o.grad.value();
    }
};

} // namespace detail

/// int_Omega |f|^p and int_Omega |grad f|^p by change of variables, for f
/// given through its pullback g = f o phi. The pullback gradient uses central
/// differences with step step(z).
template <class G, class Step>
SobolevParts sobolev_parts(G&& g, const ConformalMap& map, double p, const PolarQuadrature& q, Step&& step,
                           unsigned threads = default_threads())
{
    detail::require_exponent(p);
    auto acc = detail::integrate<detail::PartsAcc>(q, threads, [&](detail::PartsAcc& a, int, Complex z, double w) {
        double J = std::abs(map.eval(z).deriv);
        double gz = std::abs(pullback_gradient(g, z, step(z)));
        a.value += w * std::pow(std::abs(g(z)), p) * J * J;
        a.grad += w * std::pow(gz, p) * std::pow(J, 2.0 - p);
    });
    return {p, acc.value.value(), acc.grad.value()};
}

/// Norm parts of a field; the difference step is min(h, (1 - |z|) / 32).
inline SobolevParts sobolev_norm(const ScalarField& f, const ConformalMap& map, double p, const PolarQuadrature& q,
                                 double h, unsigned threads = default_threads())
{
    if (!(h > 0.0))
        throw ConfigError("difference step must be positive");
    return sobolev_parts([&](Complex z) { return f(map.eval(z).w); }, map, p, q,
                         [h](Complex z) { return std::min(h, (1.0 - std::abs(z)) / 32.0); }, threads);
}

/// Average of u o phi over the pullback cell with respect to area in the disk.
inline double cell_average(const ScalarField& u, const ConformalMap& map, const DyadicCell& cell,
                           const PolarQuadrature& q)
{
    const auto& cfg = q.config();
    if (cell.level < cfg.first_level || cell.level >= cfg.cap_level)
        throw ResolutionError("quadrature does not cover dyadic level " + std::to_string(cell.level));
    // Shifted by the first sample so that constants come back exactly.
    double shift = std::numeric_limits<double>::quiet_NaN();
    CompensatedSum num, den;
    q.for_each_in_panel(cell.level, cell.theta0, cell.theta1, [&](Complex z, double w) {
        double v = u(map.eval(z).w);
        if (std::isnan(shift))
            shift = v;
        num += w * (v - shift);
        den += w;
    });
    if (!(den.value() > 0.0))
        throw ResolutionError("no quadrature nodes in cell");
    return shift + num.value() / den.value();
}

struct CellAverages {
    int m = 0;
    std::vector<double> a;
};

inline CellAverages cell_averages(const ScalarField& u, const ConformalMap& map, int m, const PolarQuadrature& q,
                                  unsigned threads = default_threads())
{
    CellAverages out;
    out.m = m;
    auto cells = level_cells(m);
    out.a.resize(cells.size());
    parallel_for(cells.size(), threads, [&](std::size_t j) { out.a[j] = cell_average(u, map, cells[j], q); });
    return out;
}

/// u_m = (u psi + sum_j a_j phi_j) / Phi, evaluated in pullback coordinates.
class Approximant {
public:
    Approximant(ScalarField u, std::shared_ptr<const Partition> partition, CellAverages averages)
        : u_(std::move(u)), partition_(std::move(partition)), a_(std::move(averages))
    {
        if (a_.m != partition_->m())
            throw ConfigError("cell averages and partition belong to different levels");
        if (static_cast<int>(a_.a.size()) != partition_->setup().count())
            throw ConfigError("cell average count does not match the partition");
    }

    const ScalarField& field() const { return u_; }
    const Partition& partition() const { return *partition_; }
    const std::vector<double>& averages() const { return a_.a; }
    int m() const { return a_.m; }

    double field_at(Complex z) const { return u_(partition_->setup().map.eval(z).w); }

    /// u_m - u, written as sum_j phi_j (a_j - u) / Phi. This equals the
    /// assembled formula because psi + sum_j phi_j = Phi; it is exactly zero
    /// where no bump is active and for constant u.
    double error(Complex z) const { return error(z, partition_->evaluate(z)); }

    double error(Complex z, const PartitionValue& v) const
    {
        if (v.count == 0)
            return 0.0;
        double uz = field_at(z);
        double s = 0.0;
        for (int k = 0; k < v.count; ++k) {
            const Bump& b = v.bumps[static_cast<std::size_t>(k)];
            s += b.value * (a_.a[static_cast<std::size_t>(b.j)] - uz);
        }
        return s / v.Phi;
    }

    double value(Complex z) const { return field_at(z) + error(z); }

private:
    ScalarField u_;
    std::shared_ptr<const Partition> partition_;
    CellAverages a_;
};

inline Approximant assemble(const ScalarField& u, std::shared_ptr<const Partition> partition, CellAverages averages)
{
    return Approximant(u, std::move(partition), std::move(averages));
}

struct PoincareReport {
    int m = 0;
    double p = 1.0;
    std::vector<double> adjacent;  ///< |a_j - a_{j+1}|^p / (diam_j^{p-2} int_{R_j u R_{j+1}} |grad u|^p)
    std::vector<double> cell;      ///< int_{R_j} |u - a_j|^p / (diam_j^p int_{R_j} |grad u|^p)
    double max_adjacent = 0.0;
    double max_cell = 0.0;
    int excluded = 0;              ///< ratios with zero gradient integral

    double constant() const { return std::max(max_adjacent, max_cell); }
};

/// Both cell ratios of the discrete Poincare estimate for every j. Ratios
/// whose gradient integral vanishes are left at 0 and counted as excluded.
inline PoincareReport poincare_check(const ScalarField& u, const ConformalMap& map, const Decomposition& d,
                                     const CellAverages& avg, const PolarQuadrature& q, double p)
{
    detail::require_exponent(p);
    if (d.metrics.size() != d.cells.size())
        throw ConfigError("poincare check needs a measured decomposition");
    if (avg.m != d.m || static_cast<int>(avg.a.size()) != d.count())
        throw ConfigError("cell averages and decomposition belong to different levels");
    const int n = d.count(), m = d.m;
    std::vector<double> G(static_cast<std::size_t>(n)), V(static_cast<std::size_t>(n));
    auto g = [&](Complex z) { return u(map.eval(z).w); };
    parallel_for(static_cast<std::size_t>(n), default_threads(), [&](std::size_t j) {
        const DyadicCell& c = d.cells[j];
        CompensatedSum gs, vs;
        q.for_each_in_panel(m, c.theta0, c.theta1, [&](Complex z, double w) {
            double J = std::abs(map.eval(z).deriv);
            double gz = std::abs(pullback_gradient(g, z, fd_step(m, z)));
            gs += w * std::pow(gz, p) * std::pow(J, 2.0 - p);
            vs += w * std::pow(std::abs(g(z) - avg.a[j]), p) * J * J;
        });
        G[j] = gs.value();
        V[j] = vs.value();
    });
    PoincareReport r;
    r.m = m;
    r.p = p;
    r.adjacent.assign(static_cast<std::size_t>(n), 0.0);
    r.cell.assign(static_cast<std::size_t>(n), 0.0);
    for (int j = 0; j < n; ++j) {
        const auto uj = static_cast<std::size_t>(j), un = static_cast<std::size_t>(d.wrap(j + 1));
        const double diam = d.diam(j);
        const double gpair = G[uj] + G[un];
        if (gpair > 0.0)
            r.adjacent[uj] = std::pow(std::abs(avg.a[uj] - avg.a[un]), p) / (std::pow(diam, p - 2.0) * gpair);
        else
            ++r.excluded;
        if (G[uj] > 0.0)
            r.cell[uj] = V[uj] / (std::pow(diam, p) * G[uj]);
        else
            ++r.excluded;
        r.max_adjacent = std::max(r.max_adjacent, r.adjacent[uj]);
        r.max_cell = std::max(r.max_cell, r.cell[uj]);
    }
    return r;
}

struct TailReport {
    int m = 0;
    double energy = 0.0;  ///< int |u|^p + |grad u|^p over J_m u D_m
    double area = 0.0;    ///< |J_m u D_m|
};

/// Tail quantities over the pullback annulus |z| >= 1 - 2^-m, up to the cap.
inline TailReport tail_energy(const ScalarField& u, const ConformalMap& map, int m, double p, int n_max,
                              unsigned threads = default_threads())
{
    detail::require_exponent(p);
    PolarQuadrature q(level_quadrature(m, n_max, m));
    struct Acc {
        CompensatedSum energy, area;
        void merge(const Acc& o)
        {
            energy += o.energy.value();
            area += o.area.value();
        }
    };
    auto g = [&](Complex z) { return u(map.eval(z).w); };
    auto acc = detail::integrate<Acc>(q, threads, [&](Acc& a, int, Complex z, double w) {
        double J = std::abs(map.eval(z).deriv);
        double gz = std::abs(pullback_gradient(g, z, fd_step(m, z)));
        a.energy += w * (std::pow(std::abs(g(z)), p) * J * J + std::pow(gz, p) * std::pow(J, 2.0 - p));
        a.area += w * J * J;
    });
    return {m, acc.energy.value(), acc.area.value()};
}

struct RunSettings {
    int n_max = 3;
    int K = 12;
    ConstantsPolicy policy = ConstantsPolicy::PaperFormula;
    int cell_density = 16;
    int quadrature_base = 16;
    int radial_points = 4;
    int angular_points = 2;
    unsigned threads = default_threads();

    QuadratureConfig quadrature(int m, int first_level) const
    {
        QuadratureConfig q = level_quadrature(m, n_max, first_level);
        q.base_angular = quadrature_base;
        q.radial_points = radial_points;
        q.angular_points = angular_points;
        return q;
    }
};

/// Decomposition, layer, constants and partition for one level.
struct Stage {
    Decomposition d;
    BoundaryLayer layer;
    std::shared_ptr<const PartitionSetup> setup;
    PartitionConfig constants;
    std::shared_ptr<const Partition> partition;
};

inline Stage build_stage(const ConformalMap& map, int m, const RunSettings& s)
{
    Stage st;
    st.d = build_measured(map, m, s.cell_density);
    LayerConfig lc;
    lc.n_max = s.n_max;
    lc.K = s.K;
    st.layer = build_layer(map, st.d, lc);
    st.setup = prepare_partition(map, st.d, st.layer, layer_grid_config(m, s.n_max));
    st.constants = choose_constants(st.setup, s.policy);
    st.partition = std::make_shared<Partition>(st.setup, st.constants.c1, st.constants.c2);
    return st;
}

struct SobolevRow {
    int m = 0;
    double p = 1.0;
    double err_lp = 0.0;    ///< ||u - u_m||_{L^p}
    double err_grad = 0.0;  ///< ||grad (u - u_m)||_{L^p}
    double err_w1p = 0.0;
    double sup_u = 0.0;     ///< max |u| over the quadrature nodes used
    double sup_um = 0.0;
    double lip_um = 0.0;    ///< max |grad u_m| by differences over the nodes
    double tail_energy = 0.0;
    double tail_area = 0.0;
    double min_phi = std::numeric_limits<double>::infinity();
    bool localized = true;  ///< u_m = u and grad (u_m - u) = 0 on the pullback of Omega_{m-1}
    std::size_t nodes = 0;
    PartitionConfig constants;
};

/// One level of the convergence experiment. The error integrand vanishes on
/// the pullback of Omega_{m-1}, so the error integral runs over the panels
/// from level m - 1 outward; the inner panels are only checked for that.
inline SobolevRow run_level(const ScalarField& u, const ConformalMap& map, double p, int m, const RunSettings& s,
                            const Stage& st)
{
    SobolevRow row;
    row.m = m;
    row.p = p;
    row.constants = st.constants;
    PolarQuadrature avg_q(s.quadrature(m, m));
    Approximant um = assemble(u, st.partition, cell_averages(u, map, m, avg_q, s.threads));
    const Partition& part = um.partition();

    PolarQuadrature q(s.quadrature(m, m - 1));
    row.nodes = q.size();
    struct Acc {
        CompensatedSum err_v, err_g, tail_e, tail_a;
        double sup_u = 0.0, sup_um = 0.0, lip = 0.0, min_phi = std::numeric_limits<double>::infinity();
        void merge(const Acc& o)
        {
            err_v += o.err_v.value();
            err_g += o.err_g.value();
            tail_e += o.tail_e.value();
            tail_a += o.tail_a.value();
            sup_u = std::max(sup_u, o.sup_u);
            sup_um = std::max(sup_um, o.sup_um);
            lip = std::max(lip, o.lip);
            min_phi = std::min(min_phi, o.min_phi);
        }
    };
    auto e = [&](Complex x) { return um.error(x); };
    auto uf = [&](Complex x) { return um.field_at(x); };
    auto acc = detail::integrate<Acc>(q, s.threads, [&](Acc& a, int level, Complex z, double w) {
        double J = std::abs(map.eval(z).deriv);
        auto v = part.evaluate(z);
        double h = part.step(z);
        double uz = uf(z), ez = um.error(z, v);
        Complex gu = pullback_gradient(uf, z, h), ge = pullback_gradient(e, z, h);
        a.err_v += w * std::pow(std::abs(ez), p) * J * J;
        a.err_g += w * std::pow(std::abs(ge), p) * std::pow(J, 2.0 - p);
        if (level >= m) {
            a.tail_e += w * (std::pow(std::abs(uz), p) * J * J + std::pow(std::abs(gu), p) * std::pow(J, 2.0 - p));
            a.tail_a += w * J * J;
        }
        a.sup_u = std::max(a.sup_u, std::abs(uz));
        a.sup_um = std::max(a.sup_um, std::abs(uz + ez));
        a.lip = std::max(a.lip, std::abs(gu + ge) / J);
        a.min_phi = std::min(a.min_phi, v.Phi);
    });
    row.err_lp = std::pow(acc.err_v.value(), 1.0 / p);
    row.err_grad = std::pow(acc.err_g.value(), 1.0 / p);
    row.err_w1p = std::pow(acc.err_v.value() + acc.err_g.value(), 1.0 / p);
    row.tail_energy = acc.tail_e.value();
    row.tail_area = acc.tail_a.value();
    row.sup_u = acc.sup_u;
    row.sup_um = acc.sup_um;
    row.lip_um = acc.lip;
    row.min_phi = acc.min_phi;
    // the averages come from panel m nodes, which are part of q
    for (double a : um.averages())
        row.sup_u = std::max(row.sup_u, std::abs(a));

    if (m >= 2) {
        QuadratureConfig inner = s.quadrature(m, 0);
        inner.cap_level = m - 1;
        PolarQuadrature iq(inner);
        struct Flag {
            bool ok = true;
            void merge(const Flag& o) { ok = ok && o.ok; }
        };
        auto f = detail::integrate<Flag>(iq, s.threads, [&](Flag& a, int, Complex z, double) {
            if (e(z) != 0.0 || pullback_gradient(e, z, part.step(z)) != Complex{0.0, 0.0})
                a.ok = false;
        });
        row.localized = f.ok;
    }
    return row;
}

/// u_m for each m in m_list, with error norms, sup and Lipschitz estimates and
/// tail quantities. u must be bounded; truncate unbounded fields first.
inline std::vector<SobolevRow> convergence_run(const ScalarField& u, const ConformalMap& map, double p,
                                               const std::vector<int>& m_list, const RunSettings& s = {})
{
    detail::require_exponent(p);
    if (!u.bounded)
        throw ConfigError("convergence run needs a bounded field; truncate it first");
    u.require_sobolev(p);
    std::vector<SobolevRow> rows;
    for (int m : m_list)
        rows.push_back(with_context("m = " + std::to_string(m) + ": ", [&] {
            Stage st = build_stage(map, m, s);
            return run_level(u, map, p, m, s, st);
        }));
    return rows;
}

/// ||u - truncate(u, M)||_{W^{1,p}} for each M. For a field singular at
/// phi(e^{i theta0}) the rule is refocused there by a disk automorphism; the
/// integrals do not change under the substitution.
inline std::vector<double> truncation_distances(const ScalarField& u, const ConformalMap& map,
                                                const std::vector<double>& levels, double p, int cap_level = 16,
                                                unsigned threads = default_threads())
{
    detail::require_exponent(p);
    ConformalMap fmap = map;
    if (std::isfinite(u.theta0))
        fmap = compose(map, maps::disk_automorphism(-std::polar(1.0 - 1.0 / 16.0, u.theta0)));
    QuadratureConfig c;
    c.cap_level = cap_level;
    c.saturation_level = 12;
    PolarQuadrature q(c);
    std::vector<double> out;
    for (double M : levels) {
        ScalarField t = truncate(u, M);
        auto parts = sobolev_parts([&](Complex z) { Complex w = fmap.eval(z).w; return u(w) - t(w); }, fmap, p, q,
                                   [](Complex z) { return (1.0 - std::abs(z)) / 32.0; }, threads);
        out.push_back(parts.w1p());
    }
    return out;
}

/// max |grad u| over the quadrature nodes with caps cap_levels[k], a
/// refinement sweep toward the boundary.
inline std::vector<double> gradient_sweep(const ScalarField& u, const ConformalMap& map,
                                          const std::vector<int>& cap_levels, unsigned threads = default_threads())
{
    std::vector<double> out;
    auto g = [&](Complex z) { return u(map.eval(z).w); };
    for (int cap : cap_levels) {
        QuadratureConfig c;
        c.cap_level = cap;
        c.first_level = std::max(0, cap - 6);
        PolarQuadrature q(c);
        struct Max {
            double v = 0.0;
            void merge(const Max& o) { v = std::max(v, o.v); }
        };
        auto r = detail::integrate<Max>(q, threads, [&](Max& a, int, Complex z, double) {
            a.v = std::max(a.v, image_gradient_norm(map, g, z, (1.0 - std::abs(z)) / 32.0));
        });
        out.push_back(r.v);
    }
    return out;
}

} // namespace sobdens
