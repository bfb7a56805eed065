#include "hjlab/hopflax.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <mutex>

#include "hjlab/util.hpp"

namespace hjlab {

namespace {

// Inline Lagrangian evaluator for the scan loops; avoids per-candidate
// indirection through LagrangianView for the built-in kinds.
struct FastL {
    HamiltonianKind kind;
    int k = 1;
    double ck = 0.25;
    double expo = 2.0;
    const LagrangianView* view = nullptr;

    explicit FastL(const LagrangianView& v) : kind(v.model().kind), view(&v) {
        if (kind == HamiltonianKind::PowerNorm) {
            k = v.model().k;
            ck = std::pow(2.0 * k, -1.0 / (2.0 * k - 1.0)) * (1.0 - 1.0 / (2.0 * k));
            expo = 2.0 * k / (2.0 * k - 1.0);
        }
    }

    double operator()(const Vec& q) const {
        switch (kind) {
            case HamiltonianKind::PowerNorm: {
                if (k == 1) return 0.25 * norm2(q);
                double nq = norm(q);
                return nq == 0 ? 0.0 : ck * std::pow(nq, expo);
            }
            case HamiltonianKind::Quartic2D: {
                double q1 = q[0];
                return std::cbrt(q1 * q1 * q1 * q1) + 0.25 * q[1] * q[1];
            }
            case HamiltonianKind::Custom:
                return view->legendre(q);
        }
        return 0;
    }
};

struct Engine {
    const InitialDatum* datum;
    const LagrangianView* view;
    double t;
    SolveOptions opt;
    int d;
    double lambda = 0;     // Lambda_M
    double radius = 0;     // t * Lambda_M * (1 + margin)
    double step = 0;       // coarse candidate spacing
    double refine_tol = 0;
    double sep = 0;        // separation threshold for the second-basin gap
    FastL L;
    double tL0 = 0; // t * L(0)
    bool prune = false;

    Vec origin;
    std::array<int, kMaxDim> counts{};
    std::vector<double> u0_cache;

    Engine(const InitialDatum& dat, const LagrangianView& v, double time, const Box& cover,
           double grid_h, const SolveOptions& o)
        : datum(&dat), view(&v), t(time), opt(o), d(dat.dim), L(v) {
        if (time <= 0) throw input_error("hopf_lax: t must be > 0");
        if (dat.dim != v.dim()) throw input_error("hopf_lax: datum/model dimension mismatch");
        double M = std::max(dat.lipschitz, 1e-12);
        lambda = lambda_cap(v, M);
        radius = t * lambda * (1 + opt.ball_margin);
        step = std::max(grid_h, t * lambda / opt.coarse_divisions);
        if (opt.coarse_step_override) step = *opt.coarse_step_override;
        step = std::max(step, 1e-300);
        refine_tol = opt.refine_tol > 0 ? opt.refine_tol : 1e-6 * step;
        sep = 2 * (grid_h > 0 ? grid_h : step);
        tL0 = t * view->legendre(Vec::zero(d));
        prune = std::isfinite(dat.lower_bound) && view->sublevel_halfwidths(1.0).has_value();

        origin = Vec(d);
        std::int64_t total = 1;
        for (int i = 0; i < d; ++i) {
            double lo = cover.lo[i] - radius - 2 * step;
            double hi = cover.hi[i] + radius + 2 * step;
            origin[i] = lo;
            counts[i] = static_cast<int>(std::floor((hi - lo) / step)) + 2;
            total *= counts[i];
            if (total > GridSpec::budget)
                throw input_error("hopf_lax: candidate lattice exceeds the grid budget");
        }
        u0_cache.resize(static_cast<std::size_t>(total));
        parallel_for(
            total,
            [&](std::int64_t f) {
                Vec y(d);
                std::int64_t rem = f;
                for (int i = d - 1; i >= 0; --i) {
                    y[i] = origin[i] + step * (rem % counts[i]);
                    rem /= counts[i];
                }
                u0_cache[static_cast<std::size_t>(f)] = (*datum)(y);
            },
            opt.threads);
    }

    double objective(const Vec& x, const Vec& y) const {
        Vec q = x - y;
        q *= (1.0 / t);
        return (*datum)(y) + t * L(q);
    }

    PointValue eval(const Vec& x) const {
        // Per-point window: the full search ball, shrunk by the value bound
        // when a datum floor is available.
        std::array<double, kMaxDim> window{};
        for (int i = 0; i < d; ++i) window[i] = radius;
        double v_at_x = (*datum)(x) + tL0;
        if (prune) {
            double c = std::max(0.0, (v_at_x - datum->lower_bound) / t) * (1 + 1e-9);
            auto w = view->sublevel_halfwidths(c);
            for (int i = 0; i < d; ++i)
                window[i] = std::min(window[i], t * (*w)[i] + 2 * step);
        }

        std::array<int, kMaxDim> lo{}, hi{};
        for (int i = 0; i < d; ++i) {
            lo[i] = std::max(0, static_cast<int>(std::ceil((x[i] - window[i] - origin[i]) / step)));
            hi[i] = std::min(counts[i] - 1,
                             static_cast<int>(std::floor((x[i] + window[i] - origin[i]) / step)));
            if (lo[i] > hi[i]) {
                // window thinner than the lattice pitch; keep the nearest slab
                int c = std::clamp(static_cast<int>(std::lround((x[i] - origin[i]) / step)), 0,
                                   counts[i] - 1);
                lo[i] = hi[i] = c;
            }
        }

        double best = std::numeric_limits<double>::infinity();
        Vec ybest(d);
        std::array<int, kMaxDim> idx{};
        for (int i = 0; i < d; ++i) idx[i] = lo[i];
        const int last = d - 1;
        // Rows iterate the outer axes; the innermost axis runs linearly with
        // the row-constant part of L hoisted out for the built-in kinds.
        const bool fast_pn1 = L.kind == HamiltonianKind::PowerNorm && L.k == 1;
        const bool fast_q2 = L.kind == HamiltonianKind::Quartic2D;
        for (;;) {
            Vec y(d);
            std::int64_t base = 0;
            for (int i = 0; i < last; ++i) {
                y[i] = origin[i] + step * idx[i];
                base = base * counts[i] + idx[i];
            }
            base *= counts[last];
            double row_const = 0; // sum of the fixed-axis L contributions
            if (fast_pn1) {
                for (int i = 0; i < last; ++i) {
                    double qi = (x[i] - y[i]) / t;
                    row_const += 0.25 * qi * qi;
                }
            } else if (fast_q2) {
                double q1 = (x[0] - y[0]) / t;
                row_const = std::cbrt(q1 * q1 * q1 * q1);
            }
            const double* row = u0_cache.data() + base;
            int kbest = -1;
            double row_best = best;
            if (fast_pn1 || fast_q2) {
                for (int k = lo[last]; k <= hi[last]; ++k) {
                    double ql = (x[last] - (origin[last] + step * k)) / t;
                    double f = row[k] + t * (row_const + 0.25 * ql * ql);
                    if (f < row_best) {
                        row_best = f;
                        kbest = k;
                    }
                }
            } else {
                Vec q(d);
                for (int i = 0; i < last; ++i) q[i] = (x[i] - y[i]) / t;
                for (int k = lo[last]; k <= hi[last]; ++k) {
                    q[last] = (x[last] - (origin[last] + step * k)) / t;
                    double f = row[k] + t * L(q);
                    if (f < row_best) {
                        row_best = f;
                        kbest = k;
                    }
                }
            }
            if (kbest >= 0) {
                best = row_best;
                for (int i = 0; i < last; ++i) ybest[i] = y[i];
                ybest[last] = origin[last] + step * kbest;
            }
            int ax = last - 1;
            while (ax >= 0) {
                if (++idx[ax] <= hi[ax]) break;
                idx[ax] = lo[ax];
                --ax;
            }
            if (ax < 0) break;
        }

        // Value gap to the best coarse local minimum separated from the
        // winner; +inf when the scan sees a single basin (unique minimizer).
        double gap = std::numeric_limits<double>::infinity();
        if (opt.diagnostics) {
            auto value_at = [&](const std::array<int, kMaxDim>& ii) {
                Vec y(d);
                std::int64_t flat = 0;
                for (int i = 0; i < d; ++i) {
                    y[i] = origin[i] + step * ii[i];
                    flat = flat * counts[i] + ii[i];
                }
                Vec q = x - y;
                q *= (1.0 / t);
                return u0_cache[static_cast<std::size_t>(flat)] + t * L(q);
            };
            double second = std::numeric_limits<double>::infinity();
            for (int i = 0; i < d; ++i) idx[i] = lo[i];
            for (;;) {
                bool separated = false;
                for (int i = 0; i < d; ++i) {
                    double y = origin[i] + step * idx[i];
                    if (std::fabs(y - ybest[i]) > sep) separated = true;
                }
                if (separated) {
                    double f = value_at(idx);
                    if (f < second) {
                        bool is_local_min = true;
                        for (int i = 0; i < d && is_local_min; ++i) {
                            auto nb = idx;
                            if (idx[i] > lo[i]) {
                                nb[i] = idx[i] - 1;
                                if (value_at(nb) < f) is_local_min = false;
                            }
                            if (is_local_min && idx[i] < hi[i]) {
                                nb[i] = idx[i] + 1;
                                if (value_at(nb) < f) is_local_min = false;
                            }
                        }
                        if (is_local_min) second = f;
                    }
                }
                int ax = d - 1;
                while (ax >= 0) {
                    if (++idx[ax] <= hi[ax]) break;
                    idx[ax] = lo[ax];
                    --ax;
                }
                if (ax < 0) break;
            }
            gap = second - best;
        }

        auto refine = [&](Vec y, double fy) {
            double r = step;
            int evals = 0;
            while (r > refine_tol && evals < 400) {
                bool moved = false;
                for (int i = 0; i < d; ++i) {
                    for (double sgn : {-1.0, 1.0}) {
                        Vec yy = y;
                        yy[i] += sgn * r;
                        double f = objective(x, yy);
                        ++evals;
                        if (f < fy) {
                            fy = f;
                            y = yy;
                            moved = true;
                        }
                    }
                }
                if (!moved) r *= 0.5;
            }
            return std::pair<Vec, double>(y, fy);
        };

        auto [yr, fr] = refine(ybest, best);
        // direct candidate at y = x covers windows thinner than the lattice
        if (v_at_x < fr) {
            auto [y2, f2] = refine(x, v_at_x);
            if (f2 < fr) {
                yr = y2;
                fr = f2;
            }
        }

        // The refined minimizer must sit strictly inside the outer speed ball
        // (inner pruned-window faces are fine; balls thinner than one step
        // cannot rail).
        if (radius > 2 * step) {
            for (int i = 0; i < d; ++i) {
                if (window[i] >= radius - 1e-12 && std::fabs(yr[i] - x[i]) >= radius - step)
                    throw search_radius_error("hopf_lax: minimizer on the search-ball boundary");
            }
        }

        PointValue out;
        out.value = fr;
        out.minimizer = yr;
        out.second_gap = gap;
        return out;
    }
};

} // namespace

// ---------------------------------------------------------------------------
// Datum factories
// ---------------------------------------------------------------------------

InitialDatum datum_constant(int dim, double c) {
    InitialDatum d;
    d.dim = dim;
    d.eval = [c](const Vec&) { return c; };
    d.lipschitz = 1e-9;
    d.bound_at_origin = std::fabs(c);
    d.lower_bound = c;
    d.name = "constant";
    return d;
}

InitialDatum datum_linear(const Vec& a, double offset) {
    InitialDatum d;
    d.dim = a.dim();
    d.eval = [a, offset](const Vec& x) { return dot(a, x) + offset; };
    d.lipschitz = std::max(norm(a), 1e-9);
    d.bound_at_origin = std::fabs(offset);
    d.name = "linear";
    return d;
}

InitialDatum datum_abs(int dim) {
    InitialDatum d;
    d.dim = dim;
    d.eval = [](const Vec& x) { return norm(x); };
    d.lipschitz = 1.0;
    d.bound_at_origin = 0.0;
    d.lower_bound = 0.0;
    d.name = "abs";
    return d;
}

InitialDatum datum_random_pl(int dim, double M, double m, std::uint64_t seed, int pieces) {
    if (M <= 0 || pieces < 1) throw input_error("datum_random_pl: bad parameters");
    Rng rng(seed);
    std::vector<Vec> centers(pieces, Vec(dim));
    std::vector<Vec> slopes(pieces, Vec(dim));
    std::vector<double> offsets(pieces);
    double slope_cap = 0.95 * M;
    for (int j = 0; j < pieces; ++j) {
        for (int i = 0; i < dim; ++i) {
            centers[j][i] = rng.uniform(-2, 2);
            slopes[j][i] = rng.uniform(-1, 1);
        }
        double ns = norm(slopes[j]);
        double scale = rng.uniform(0.3, 1.0) * slope_cap / std::max(ns, 1e-9);
        slopes[j] *= scale;
        offsets[j] = rng.uniform(-0.3, 0.3);
    }
    double floor0 = *std::min_element(offsets.begin(), offsets.end()) - 3.0 * M;
    auto raw = [=](const Vec& x) {
        double v = std::numeric_limits<double>::infinity();
        for (int j = 0; j < pieces; ++j)
            v = std::min(v, offsets[j] + dot(slopes[j], x - centers[j]));
        return std::max(v, floor0);
    };
    double at0 = raw(Vec::zero(dim));
    double shift = rng.uniform(-0.5, 0.5) * m - at0;

    InitialDatum d;
    d.dim = dim;
    d.eval = [raw, shift](const Vec& x) { return raw(x) + shift; };
    d.lipschitz = M;
    d.bound_at_origin = std::max(m, 1e-12);
    d.lower_bound = floor0 + shift;
    d.name = "random_pl(seed=" + std::to_string(seed) + ")";
    return d;
}

InitialDatum datum_from_grid(const GridFunction& u, double lipschitz, std::string name) {
    auto shared = std::make_shared<GridFunction>(u);
    InitialDatum d;
    d.dim = u.spec.dim();
    d.eval = [shared](const Vec& x) { return shared->interpolate(x); };
    d.lipschitz = lipschitz;
    d.bound_at_origin = std::fabs(shared->interpolate(Vec::zero(d.dim))) + 1e-12;
    d.lower_bound = *std::min_element(shared->values.begin(), shared->values.end());
    d.name = std::move(name);
    return d;
}

MembershipReport check_membership(const InitialDatum& datum, const Box& box,
                                  int samples_per_axis) {
    MembershipReport rep;
    GridSpec spec = GridSpec::uniform(box, samples_per_axis);
    GridFunction u(spec);
    for (std::int64_t f = 0; f < spec.total(); ++f) u.at(f) = datum(spec.point(f));
    double q = u.lipschitz_estimate();
    Rng rng(1234);
    for (int trial = 0; trial < 500; ++trial) {
        Vec a(box.dim()), b(box.dim());
        for (int i = 0; i < box.dim(); ++i) {
            a[i] = rng.uniform(box.lo[i], box.hi[i]);
            b[i] = rng.uniform(box.lo[i], box.hi[i]);
        }
        double dist = norm(a - b);
        if (dist < 1e-9) continue;
        q = std::max(q, std::fabs(datum(a) - datum(b)) / dist);
    }
    rep.sampled_lipschitz = q;
    rep.value_at_origin = datum(Vec::zero(box.dim()));
    rep.lipschitz_ok = q <= datum.lipschitz * (1 + 1e-6) + 1e-12;
    rep.origin_ok = std::fabs(rep.value_at_origin) <= datum.bound_at_origin + 1e-12;
    return rep;
}

// ---------------------------------------------------------------------------
// Hopf-Lax operations
// ---------------------------------------------------------------------------

PointValue hopf_lax_value(const InitialDatum& datum, const LagrangianView& view, double t,
                          const Vec& x, const SolveOptions& opt) {
    Vec eps(x.dim());
    for (int i = 0; i < x.dim(); ++i) eps[i] = 1e-9;
    Box cover(x - eps, x + eps);
    SolveOptions o = opt;
    o.diagnostics = true;
    Engine eng(datum, view, t, cover, 0.0, o);
    return eng.eval(x);
}

SolveResult solve(const InitialDatum& datum, const LagrangianView& view, double t,
                  const GridSpec& spec, const SolveOptions& opt) {
    Engine eng(datum, view, t, spec.box, spec.max_h(), opt);
    SolveResult res;
    res.t = t;
    res.lipschitz = datum.lipschitz;
    res.lambda_cap = eng.lambda;
    res.u = GridFunction(spec);
    res.b = VectorField(spec, spec.dim());
    res.minimizers = VectorField(spec, spec.dim());
    res.has_diagnostics = opt.diagnostics;
    if (opt.diagnostics) res.second_gap = GridFunction(spec);

    std::atomic<bool> failed{false};
    std::string error_msg;
    std::mutex err_mutex;
    parallel_for(
        spec.total(),
        [&](std::int64_t f) {
            if (failed.load(std::memory_order_relaxed)) return;
            try {
                Vec x = spec.point(f);
                PointValue pv = eng.eval(x);
                res.u.at(f) = pv.value;
                res.minimizers.set(f, pv.minimizer);
                Vec b = x - pv.minimizer;
                b *= (1.0 / t);
                res.b.set(f, b);
                if (opt.diagnostics) res.second_gap.at(f) = pv.second_gap;
            } catch (const std::exception& e) {
                std::lock_guard<std::mutex> lk(err_mutex);
                failed.store(true);
                error_msg = e.what();
            }
        },
        opt.threads);
    if (failed.load()) throw search_radius_error("solve: " + error_msg);

    res.grad_u = gradient_field(res.u);
    return res;
}

double functional_identity_check(const InitialDatum& datum, const LagrangianView& view,
                                 double s, double t, const GridSpec& spec,
                                 const SolveOptions& opt) {
    if (s < 0 || s >= t) throw input_error("functional_identity_check: need 0 <= s < t");
    auto direct = solve(datum, view, t, spec, opt);
    const InitialDatum* inner = &datum;
    InitialDatum interp;
    if (s > 0) {
        double M = datum.lipschitz;
        double lam = lambda_cap(view, std::max(M, 1e-12));
        double pad = (t - s) * lam * (1 + opt.ball_margin) + 2 * spec.max_h();
        GridSpec inner_spec = GridSpec::with_spacing(spec.box.expanded(pad), spec.max_h());
        auto us = solve(datum, view, s, inner_spec, opt);
        interp = datum_from_grid(us.u, M, datum.name + "@s");
        inner = &interp;
    }
    auto composed = solve(*inner, view, t - s, spec, opt);
    double defect = 0;
    for (std::int64_t f = 0; f < spec.total(); ++f)
        defect = std::max(defect, std::fabs(direct.u.at(f) - composed.u.at(f)));
    return defect;
}

double semigroup_check(const InitialDatum& datum, const LagrangianView& view, double t,
                       double s, const GridSpec& spec, const SolveOptions& opt) {
    if (t <= 0 || s <= 0) throw input_error("semigroup_check: need t, s > 0");
    return functional_identity_check(datum, view, s, t + s, spec, opt);
}

bool dynamic_programming_check(const InitialDatum& datum, const LagrangianView& view,
                               double s, double t, const Vec& x, double tol,
                               const SolveOptions& opt) {
    if (!(0 < s && s < t)) throw input_error("dynamic_programming_check: need 0 < s < t");
    auto at_t = hopf_lax_value(datum, view, t, x, opt);
    Vec y = at_t.minimizer;
    Vec z = (s / t) * x + (1 - s / t) * y;
    auto at_s = hopf_lax_value(datum, view, s, z, opt);
    return norm(at_s.minimizer - y) <= tol;
}

double epsilon_n(int n, double t, double M, const LagrangianView& view) {
    if (n < 1 || t <= 0 || M <= 0) throw input_error("epsilon_n: bad arguments");
    double r = std::pow(2.0, -n) / t;
    double mx = 0;
    const int dirs = view.dim() == 1 ? 2 : 128;
    for (int i = 0; i < dirs; ++i) {
        Vec dir(view.dim());
        if (view.dim() == 1) {
            dir[0] = i == 0 ? 1.0 : -1.0;
        } else if (view.dim() == 2) {
            double th = 2 * M_PI * i / dirs;
            dir[0] = std::cos(th);
            dir[1] = std::sin(th);
        } else {
            Rng rng(100 + i);
            double nn = 0;
            while (nn < 1e-9) {
                for (int j = 0; j < view.dim(); ++j) dir[j] = rng.uniform(-1, 1);
                nn = norm(dir);
            }
            dir *= 1.0 / nn;
        }
        mx = std::max(mx, M * r + view.legendre(dir * r));
    }
    double lam = lambda_cap(view, M);
    return mx / (M * lam);
}

LatticeApproximant lattice_approximant(const InitialDatum& datum, const LagrangianView& view,
                                       double t, int n, const GridSpec& spec,
                                       const SolveOptions& opt) {
    if (n < 1) throw input_error("lattice_approximant: n >= 1 required");
    if (t <= 0) throw input_error("lattice_approximant: t > 0 required");
    const int d = spec.dim();
    if (datum.dim != d || view.dim() != d)
        throw input_error("lattice_approximant: dimension mismatch");

    const double pitch = std::pow(2.0, -n + 1) / std::sqrt(double(d));
    const double M = std::max(datum.lipschitz, 1e-12);
    const double eps = epsilon_n(n, t, M, view);
    const double lam = lambda_cap(view, M);
    const double radius = t * lam * (1 + opt.ball_margin) + 2 * std::pow(2.0, -n);
    FastL L(view);

    // Global lattice index bounds over the grid box expanded by the radius.
    std::array<std::int64_t, kMaxDim> klo{}, khi{}, kcount{};
    std::int64_t total = 1;
    for (int i = 0; i < d; ++i) {
        klo[i] = static_cast<std::int64_t>(std::ceil((spec.box.lo[i] - radius) / pitch));
        khi[i] = static_cast<std::int64_t>(std::floor((spec.box.hi[i] + radius) / pitch));
        if (klo[i] > khi[i]) throw config_error("lattice_approximant: empty lattice window");
        kcount[i] = khi[i] - klo[i] + 1;
        total *= kcount[i];
        if (total > GridSpec::budget)
            throw input_error("lattice_approximant: lattice exceeds the grid budget");
    }
    std::vector<double> u0_lattice(static_cast<std::size_t>(total));
    parallel_for(
        total,
        [&](std::int64_t f) {
            Vec y(d);
            std::int64_t rem = f;
            for (int i = d - 1; i >= 0; --i) {
                y[i] = pitch * (klo[i] + rem % kcount[i]);
                rem /= kcount[i];
            }
            u0_lattice[static_cast<std::size_t>(f)] = datum(y);
        },
        opt.threads);

    const bool prune =
        std::isfinite(datum.lower_bound) && view.sublevel_halfwidths(1.0).has_value();

    LatticeApproximant out;
    out.eps_n = eps;
    out.pitch = pitch;
    out.u_n = GridFunction(spec);
    out.b_n = VectorField(spec, d);

    std::atomic<bool> bad{false};
    parallel_for(
        spec.total(),
        [&](std::int64_t f) {
            Vec x = spec.point(f);
            // upper bound from the nearest lattice point
            std::array<std::int64_t, kMaxDim> nearest{};
            Vec y0(d);
            for (int i = 0; i < d; ++i) {
                nearest[i] = std::clamp(static_cast<std::int64_t>(std::llround(x[i] / pitch)),
                                        klo[i], khi[i]);
                y0[i] = pitch * nearest[i];
            }
            Vec q0 = (x - y0) * (1.0 / t);
            std::int64_t flat0 = 0;
            for (int i = 0; i < d; ++i) flat0 = flat0 * kcount[i] + (nearest[i] - klo[i]);
            double best = (1 - eps) * u0_lattice[static_cast<std::size_t>(flat0)] + t * L(q0);
            Vec ybest = y0;

            std::array<double, kMaxDim> window{};
            for (int i = 0; i < d; ++i) window[i] = radius;
            if (prune) {
                double c =
                    std::max(0.0, (best - (1 - eps) * datum.lower_bound) / t) * (1 + 1e-9);
                auto w = view.sublevel_halfwidths(c);
                for (int i = 0; i < d; ++i)
                    window[i] = std::min(window[i], t * (*w)[i] + 2 * pitch);
            }

            std::array<std::int64_t, kMaxDim> lo{}, hi{}, idx{};
            for (int i = 0; i < d; ++i) {
                lo[i] = std::max(klo[i],
                                 static_cast<std::int64_t>(std::ceil((x[i] - window[i]) / pitch)));
                hi[i] = std::min(khi[i],
                                 static_cast<std::int64_t>(std::floor((x[i] + window[i]) / pitch)));
                if (lo[i] > hi[i]) lo[i] = hi[i] = nearest[i];
                idx[i] = lo[i];
            }
            for (;;) {
                Vec y(d);
                std::int64_t flat = 0;
                for (int i = 0; i < d; ++i) {
                    y[i] = pitch * idx[i];
                    flat = flat * kcount[i] + (idx[i] - klo[i]);
                }
                Vec q = (x - y) * (1.0 / t);
                double v = (1 - eps) * u0_lattice[static_cast<std::size_t>(flat)] + t * L(q);
                if (v < best) {
                    best = v;
                    ybest = y;
                }
                int ax = d - 1;
                while (ax >= 0) {
                    if (++idx[ax] <= hi[ax]) break;
                    idx[ax] = lo[ax];
                    --ax;
                }
                if (ax < 0) break;
            }
            out.u_n.at(f) = best;
            Vec b = (x - ybest) * (1.0 / t);
            out.b_n.set(f, b);
            if (norm(b) > lam * (1 + 1e-6) + 1e-9) bad.store(true);
        },
        opt.threads);
    if (bad.load())
        throw numeric_error("lattice_approximant: |b_n| exceeded Lambda_M beyond slack");
    return out;
}

double lattice_convergence_bound(const InitialDatum& datum, const LagrangianView& view,
                                 double t, int n, double x_max) {
    const double M = std::max(datum.lipschitz, 1e-12);
    const double lam = lambda_cap(view, M);
    const double eps = epsilon_n(n, t, M, view);
    const double two_n = std::pow(2.0, -n);
    double sup_dl = view.sup_grad_L(lam + two_n / t);
    double u00 = std::fabs(datum(Vec::zero(datum.dim)));
    return (M + sup_dl) * two_n + (u00 + M * x_max + M * lam * t) * eps;
}

} // namespace hjlab
