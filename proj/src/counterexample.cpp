#include "hjlab/counterexample.hpp"

#include <algorithm>
#include <cmath>

namespace hjlab {

namespace {

double pow43(double x) { return std::cbrt(x * x * x * x); }

struct ConstructionLagrangian {
    ConstructionL variant;
    double operator()(double q1, double q2) const {
        double a = pow43(std::fabs(q1));
        return variant == ConstructionL::Analytic ? a + 0.25 * q2 * q2 : a + q2 * q2;
    }
    double d1(double q1) const {
        double c = std::cbrt(std::fabs(q1));
        return (4.0 / 3.0) * c * (q1 >= 0 ? 1.0 : -1.0);
    }
    double d2(double q2) const {
        return variant == ConstructionL::Analytic ? 0.5 * q2 : 2.0 * q2;
    }
    // half-widths of a box containing the sublevel set {L <= c}
    double q1_width(double c) const { return std::pow(std::max(c, 0.0), 0.75); }
    double q2_width(double c) const {
        double root = std::sqrt(std::max(c, 0.0));
        return variant == ConstructionL::Analytic ? 2.0 * root : root;
    }
};

// Even-index lattice y = (i1 delta, i2 delta^{2/3}), i1 + i2 even.
struct Lattice {
    double px, py; // pitches

    bool valid(std::int64_t i1, std::int64_t i2) const { return ((i1 + i2) & 1) == 0; }
    double x(std::int64_t i1) const { return px * i1; }
    double y(std::int64_t i2) const { return py * i2; }
};

// min over lattice points near x of L(x - y_k); a +-2 index window around the
// rounded position covers every possible argmin (the nearest valid point is at
// most one pitch away, and two straight steps already cost more than L(d, py)).
double g1_value(const ConstructionLagrangian& L, const Lattice& lat, double x1, double x2) {
    std::int64_t c1 = static_cast<std::int64_t>(std::llround(x1 / lat.px));
    std::int64_t c2 = static_cast<std::int64_t>(std::llround(x2 / lat.py));
    double best = std::numeric_limits<double>::infinity();
    for (std::int64_t i1 = c1 - 2; i1 <= c1 + 2; ++i1)
        for (std::int64_t i2 = c2 - 2; i2 <= c2 + 2; ++i2) {
            if (!lat.valid(i1, i2)) continue;
            best = std::min(best, L(x1 - lat.x(i1), x2 - lat.y(i2)));
        }
    return best;
}

// Nearest lattice cell owner and the runner-up, with the gradient-based
// distance proxy to the shared boundary.
struct CellOwner {
    double y1 = 0, y2 = 0;
    double boundary_distance = 0;
};
CellOwner cell_owner(const ConstructionLagrangian& L, const Lattice& lat, double x1,
                     double x2) {
    std::int64_t c1 = static_cast<std::int64_t>(std::llround(x1 / lat.px));
    std::int64_t c2 = static_cast<std::int64_t>(std::llround(x2 / lat.py));
    double best = std::numeric_limits<double>::infinity(), second = best;
    double b1 = 0, b2 = 0, s1 = 0, s2 = 0;
    for (std::int64_t i1 = c1 - 2; i1 <= c1 + 2; ++i1)
        for (std::int64_t i2 = c2 - 2; i2 <= c2 + 2; ++i2) {
            if (!lat.valid(i1, i2)) continue;
            double v = L(x1 - lat.x(i1), x2 - lat.y(i2));
            if (v < best) {
                second = best;
                s1 = b1;
                s2 = b2;
                best = v;
                b1 = lat.x(i1);
                b2 = lat.y(i2);
            } else if (v < second) {
                second = v;
                s1 = lat.x(i1);
                s2 = lat.y(i2);
            }
        }
    CellOwner own;
    own.y1 = b1;
    own.y2 = b2;
    double g1 = L.d1(x1 - b1) - L.d1(x1 - s1);
    double g2 = L.d2(x2 - b2) - L.d2(x2 - s2);
    double gn = std::hypot(g1, g2);
    own.boundary_distance = gn > 1e-14 ? (second - best) / gn
                                       : std::numeric_limits<double>::infinity();
    return own;
}

} // namespace

double gamma_curve(const Vec& qbar, double s) {
    if (qbar.dim() != 2) throw input_error("gamma_curve: qbar must be planar");
    if (!(qbar[1] > 0)) throw input_error("gamma_curve: qbar2 must be > 0");
    return (pow43(std::fabs(s - qbar[0])) - pow43(std::fabs(s))) / (2 * qbar[1]) +
           qbar[1] / 2;
}

double gamma_curve_arclength(const Vec& qbar, int quad_points) {
    double a = 0, b = qbar[0];
    if (b < a) std::swap(a, b);
    double acc = 0;
    double prev_s = a, prev_g = gamma_curve(qbar, a);
    for (int i = 1; i <= quad_points; ++i) {
        double s = a + (b - a) * i / quad_points;
        double g = gamma_curve(qbar, s);
        acc += std::hypot(s - prev_s, g - prev_g);
        prev_s = s;
        prev_g = g;
    }
    return acc;
}

LatticeDatum build_datum(const LatticeDatumSpec& spec, bool enforce_precondition) {
    if (!(spec.delta > 0 && spec.delta < spec.ell && spec.ell < 1))
        throw input_error("build_datum: need 0 < delta < ell < 1");
    const double delta = spec.delta, ell = spec.ell;
    const double py = std::pow(delta, 2.0 / 3.0);
    ConstructionLagrangian L{spec.variant};
    Lattice lat{delta, py};

    // Lipschitz scale: sup |DL| over the fundamental cell [-d,d] x [-d^{2/3},d^{2/3}].
    double M_delta = std::hypot(L.d1(delta), L.d2(py));

    LatticeDatum out;
    out.spec = spec;
    out.M_delta = M_delta;
    out.m_delta_condition = M_delta <= ell / 2;
    if (enforce_precondition && !out.m_delta_condition)
        throw precondition_error("build_datum: M_delta exceeds ell/2");

    // Value scale of g1 (max over half a cell diagonal), with headroom.
    const double gstar = 1.3 * L(delta, py);
    const double q1w = L.q1_width(gstar);
    const double q2w = L.q2_width(gstar);

    // Tabulate u = eta * g0 on [-(2l+pad), 2l+pad]^2.
    const double h0 = py / 24.0;
    const double cover = 2 * ell + 4 * h0;
    GridSpec table_spec = GridSpec::with_spacing(Box::cube(2, cover), h0);
    auto table = std::make_shared<GridFunction>(table_spec);

    const double band_lo = 1.5 * ell, band_hi = 2.0 * ell;
    auto cutoff = [&](const Vec& yv) {
        double r = std::max(std::fabs(yv[0]), std::fabs(yv[1]));
        if (r <= band_lo) return 1.0;
        if (r >= band_hi) return 0.0;
        return (band_hi - r) / (band_hi - band_lo);
    };

    parallel_for(table_spec.total(), [&](std::int64_t f) {
        Vec yv = table_spec.point(f);
        double eta = cutoff(yv);
        if (eta == 0.0) {
            table->at(f) = 0.0;
            return;
        }
        // g0(y) = max_x { g1(x) - L(x - y) }, the max within the sublevel
        // window |x1-y1| <= q1w, |x2-y2| <= q2w (outside it L alone exceeds
        // every g1 value, so candidates cannot win against x = y).
        auto F = [&](double x1, double x2) {
            return g1_value(L, lat, x1, x2) - L(x1 - yv[0], x2 - yv[1]);
        };
        const int n1 = 13, n2 = 25;
        double best = F(yv[0], yv[1]);
        double bx1 = yv[0], bx2 = yv[1];
        for (int i = 0; i < n1; ++i)
            for (int j = 0; j < n2; ++j) {
                double x1 = yv[0] - q1w + 2 * q1w * i / (n1 - 1);
                double x2 = yv[1] - q2w + 2 * q2w * j / (n2 - 1);
                double v = F(x1, x2);
                if (v > best) {
                    best = v;
                    bx1 = x1;
                    bx2 = x2;
                }
            }
        // compass refinement of the inner maximizer
        double r1 = 2 * q1w / (n1 - 1), r2 = 2 * q2w / (n2 - 1);
        for (int level = 0; level < 14; ++level) {
            bool moved = true;
            while (moved) {
                moved = false;
                const double cand[4][2] = {{bx1 + r1, bx2}, {bx1 - r1, bx2},
                                           {bx1, bx2 + r2}, {bx1, bx2 - r2}};
                for (auto& c : cand) {
                    double v = F(c[0], c[1]);
                    if (v > best) {
                        best = v;
                        bx1 = c[0];
                        bx2 = c[1];
                        moved = true;
                    }
                }
            }
            r1 *= 0.5;
            r2 *= 0.5;
        }
        table->at(f) = eta * std::max(best, 0.0);
    }, 0);

    out.table_spacing = h0;
    out.sampled_lipschitz = table->lipschitz_estimate();

    InitialDatum d;
    d.dim = 2;
    double two_ell = 2 * ell;
    d.eval = [table, two_ell](const Vec& x) {
        if (std::fabs(x[0]) >= two_ell || std::fabs(x[1]) >= two_ell) return 0.0;
        return table->interpolate(x);
    };
    d.lipschitz = std::max(out.sampled_lipschitz * (1 + 1e-6), 1e-9);
    d.bound_at_origin = std::fabs(d.eval(Vec{0.0, 0.0})) + 1e-12;
    d.lower_bound = 0.0;
    d.name = "lattice_dual(delta=" + format_full(delta) + ")";
    out.datum = d;
    return out;
}

CounterexampleMeasurement solve_and_measure(const LatticeDatumSpec& spec, double h_factor,
                                            int threads) {
    const double delta = spec.delta, ell = spec.ell;
    const double py = std::pow(delta, 2.0 / 3.0);
    const double h = py / h_factor;
    if (h > py / 8.0) throw precondition_error("solve_and_measure: grid must resolve delta^{2/3}/8");

    auto built = build_datum(spec);
    auto model = HamiltonianModel::quartic2d();
    LagrangianView view(model);

    GridSpec grid = GridSpec::with_spacing(Box::cube(2, ell + 2 * h), h);
    SolveOptions opt;
    opt.threads = threads;
    opt.coarse_step_override = h; // must resolve the delta-pitch basins
    auto res = solve(built.datum, view, 1.0, grid, opt);

    Box omega = Box::cube(2, ell);
    CounterexampleMeasurement m;
    m.delta = delta;
    m.ell = ell;
    m.h = grid.max_h();
    m.tv_b = total_variation(res.b, omega).tv;
    m.tv_du = total_variation(res.grad_u, omega).tv;

    VectorField drift_free(grid, 2);
    for (std::int64_t f = 0; f < grid.total(); ++f) {
        Vec x = grid.point(f);
        Vec b = res.b.vec_at(f);
        drift_free.set(f, b - x); // t = 1
    }
    m.tv_b_drift_free = total_variation(drift_free, omega).tv;

    // Cell identity: away from construction-cell boundaries the slope should
    // be x - y_cell.
    ConstructionLagrangian L{spec.variant};
    Lattice lat{delta, py};
    std::int64_t core = 0, matched = 0;
    double min_jump = std::numeric_limits<double>::infinity();
    for (std::int64_t f = 0; f < grid.total(); ++f) {
        Vec x = grid.point(f);
        if (!omega.contains_open(x)) continue;
        auto own = cell_owner(L, lat, x[0], x[1]);
        if (own.boundary_distance < 2 * m.h) continue;
        ++core;
        Vec predicted{x[0] - own.y1, x[1] - own.y2};
        if (norm(res.b.vec_at(f) - predicted) <= 5 * m.h) ++matched;
    }
    m.cell_identity_fraction = core > 0 ? double(matched) / double(core) : 0.0;

    // Smallest per-pair jump across a sampled set of vertical neighbors: walk
    // rows and record |b| jumps across cell transitions.
    for (std::int64_t f = 0; f < grid.total(); ++f) {
        auto idx = grid.multi_index(f);
        if (idx[1] + 1 >= grid.n[1]) continue;
        Vec x = grid.point(f);
        if (!omega.contains_open(x, 2 * m.h)) continue;
        auto here = cell_owner(L, lat, x[0], x[1]);
        auto next = cell_owner(L, lat, x[0], x[1] + grid.h(1));
        if (here.y1 == next.y1 && here.y2 == next.y2) continue;
        double jump = std::hypot(here.y1 - next.y1, here.y2 - next.y2);
        min_jump = std::min(min_jump, jump);
    }
    m.min_pair_jump = std::isfinite(min_jump) ? min_jump : 0.0;

    // Support audit: the datum must vanish outside [-2l, 2l]^2.
    Rng rng(99);
    for (int trial = 0; trial < 200; ++trial) {
        Vec y{rng.uniform(-4 * ell, 4 * ell), rng.uniform(-4 * ell, 4 * ell)};
        if (std::fabs(y[0]) < 2 * ell && std::fabs(y[1]) < 2 * ell) continue;
        m.max_support_violation =
            std::max(m.max_support_violation, std::fabs(built.datum(y)));
    }
    return m;
}

BlowupResult blowup_exponent(double ell, const std::vector<double>& deltas,
                             ConstructionL variant, double h_factor, int threads) {
    if (deltas.size() < 4) throw input_error("blowup_exponent: need >= 4 deltas");
    for (std::size_t i = 1; i < deltas.size(); ++i)
        if (!(deltas[i] < deltas[i - 1]))
            throw input_error("blowup_exponent: deltas must decrease");

    BlowupResult out;
    std::vector<double> inv_delta, tvs, tvs_drift;
    for (double delta : deltas) {
        LatticeDatumSpec spec;
        spec.delta = delta;
        spec.ell = ell;
        spec.variant = variant;
        auto m = solve_and_measure(spec, h_factor, threads);
        out.runs.push_back(m);
        inv_delta.push_back(delta);
        tvs.push_back(m.tv_b);
        tvs_drift.push_back(m.tv_b_drift_free);
    }
    out.tv_monotone = true;
    for (std::size_t i = 1; i < tvs.size(); ++i)
        if (!(tvs[i] > tvs[i - 1])) out.tv_monotone = false;
    out.grid_flagged = !out.tv_monotone;

    LineFit fit = fit_log_slope(inv_delta, tvs);
    out.exponent = fit.slope;
    out.residual = fit.residual_rms;
    out.drift_free_exponent = fit_log_slope(inv_delta, tvs_drift).slope;
    return out;
}

} // namespace hjlab
