#include "hjlab/bv.hpp"

#include <algorithm>
#include <cmath>

namespace hjlab {

namespace {

void check_domain(const GridSpec& spec, const Box& omega) {
    if (spec.dim() != omega.dim()) throw input_error("bv: dimension mismatch");
    for (int i = 0; i < spec.dim(); ++i)
        if (omega.lo[i] < spec.box.lo[i] - 1e-12 || omega.hi[i] > spec.box.hi[i] + 1e-12)
            throw input_error("bv: omega not contained in the field's grid box");
}

// cell-face area orthogonal to axis `ax`
double face_area(const GridSpec& spec, int ax) {
    double a = 1;
    for (int j = 0; j < spec.dim(); ++j)
        if (j != ax) a *= spec.h(j);
    return a;
}

} // namespace

TVReport total_variation(const VectorField& field, const Box& omega) {
    check_domain(field.spec, omega);
    const auto& spec = field.spec;
    const int d = spec.dim();
    TVReport rep;
    rep.domain = omega;
    for (int i = 0; i < d; ++i) rep.spacing[i] = spec.h(i);
    const double tol = 1e-12;
    for (std::int64_t f = 0; f < spec.total(); ++f) {
        Vec x = spec.point(f);
        if (!omega.contains_open(x, tol)) continue;
        auto idx = spec.multi_index(f);
        for (int ax = 0; ax < d; ++ax) {
            if (idx[ax] + 1 >= spec.n[ax]) continue;
            auto nb = idx;
            nb[ax] += 1;
            Vec xn = x;
            xn[ax] += spec.h(ax);
            if (!omega.contains_open(xn, tol)) continue;
            std::int64_t fn = spec.flat_index(nb);
            double s = 0;
            for (int c = 0; c < field.components; ++c) {
                double dv = field.at(fn, c) - field.at(f, c);
                s += dv * dv;
            }
            rep.per_axis[ax] += std::sqrt(s) * face_area(spec, ax);
        }
    }
    for (int ax = 0; ax < d; ++ax) rep.tv += rep.per_axis[ax];
    return rep;
}

TVReport total_variation(const GridFunction& u, const Box& omega) {
    VectorField f(u.spec, 1);
    f.values = u.values;
    return total_variation(f, omega);
}

double divergence_measure(const VectorField& field, const Box& omega, double t) {
    check_domain(field.spec, omega);
    if (field.components != field.spec.dim())
        throw input_error("divergence_measure: need a d-component field");
    const auto& spec = field.spec;
    const int d = spec.dim();
    double cell = 1;
    for (int i = 0; i < d; ++i) cell *= spec.h(i);
    double acc = 0;
    for (std::int64_t f = 0; f < spec.total(); ++f) {
        Vec x = spec.point(f);
        if (!omega.contains_open(x, 1e-12)) continue;
        auto idx = spec.multi_index(f);
        bool interior = true;
        double div = 0;
        for (int ax = 0; ax < d; ++ax) {
            if (idx[ax] == 0 || idx[ax] + 1 >= spec.n[ax]) {
                interior = false;
                break;
            }
            auto up = idx, dn = idx;
            up[ax] += 1;
            dn[ax] -= 1;
            div += (field.at(spec.flat_index(up), ax) - field.at(spec.flat_index(dn), ax)) /
                   (2 * spec.h(ax));
        }
        if (!interior) continue;
        acc += std::fabs(div - d / t) * cell;
    }
    return acc;
}

double semiconcavity_constant(const GridFunction& u, const Box& omega) {
    check_domain(u.spec, omega);
    const auto& spec = u.spec;
    const int d = spec.dim();
    double worst = -std::numeric_limits<double>::infinity();
    for (std::int64_t f = 0; f < spec.total(); ++f) {
        Vec x = spec.point(f);
        if (!omega.contains_closed(x, 1e-12)) continue;
        auto idx = spec.multi_index(f);
        for (int ax = 0; ax < d; ++ax) {
            for (int k = 1; k <= 2; ++k) {
                if (idx[ax] < k || idx[ax] + k >= spec.n[ax]) continue;
                auto up = idx, dn = idx;
                up[ax] += k;
                dn[ax] -= k;
                double hh = k * spec.h(ax);
                double second =
                    u.at(spec.flat_index(up)) + u.at(spec.flat_index(dn)) - 2 * u.at(f);
                worst = std::max(worst, second / (hh * hh));
            }
        }
    }
    if (!std::isfinite(worst)) throw input_error("semiconcavity_constant: no interior samples");
    return worst;
}

PoincareReport poincare_check(const GridFunction& u, const Box& omega, double slack) {
    check_domain(u.spec, omega);
    const auto& spec = u.spec;
    double cell = 1;
    for (int i = 0; i < spec.dim(); ++i) cell *= spec.h(i);
    double sum = 0;
    std::int64_t count = 0;
    for (std::int64_t f = 0; f < spec.total(); ++f) {
        if (!omega.contains_open(spec.point(f), 1e-12)) continue;
        sum += u.at(f);
        ++count;
    }
    PoincareReport rep;
    if (count == 0) return rep;
    double mean = sum / count;
    for (std::int64_t f = 0; f < spec.total(); ++f) {
        if (!omega.contains_open(spec.point(f), 1e-12)) continue;
        rep.lhs += std::fabs(u.at(f) - mean) * cell;
    }
    rep.rhs = 0.5 * omega.diameter() * total_variation(u, omega).tv;
    rep.holds = rep.lhs <= rep.rhs * (1 + slack) + 1e-12;
    return rep;
}

namespace {

// Midpoint-quadrature accumulation over grid cells fully inside omega.
template <typename F>
double cell_quadrature(const GridSpec& spec, const Box& omega, F&& cell_value) {
    const int d = spec.dim();
    double cell = 1;
    for (int i = 0; i < d; ++i) cell *= spec.h(i);
    double acc = 0;
    for (std::int64_t f = 0; f < spec.total(); ++f) {
        auto idx = spec.multi_index(f);
        bool ok = true;
        for (int i = 0; i < d; ++i)
            if (idx[i] + 1 >= spec.n[i]) {
                ok = false;
                break;
            }
        if (!ok) continue;
        Vec lo = spec.point(f);
        Vec hi = lo;
        for (int i = 0; i < d; ++i) hi[i] += spec.h(i);
        if (!omega.contains_closed(lo, 1e-12) || !omega.contains_closed(hi, 1e-12)) continue;
        acc += cell_value(f, idx) * cell;
    }
    return acc;
}

} // namespace

double l1_distance(const GridFunction& u1, const GridFunction& u2, const Box& omega) {
    if (u1.spec.total() != u2.spec.total() || u1.spec.dim() != u2.spec.dim())
        throw input_error("l1_distance: grid mismatch");
    check_domain(u1.spec, omega);
    const auto& spec = u1.spec;
    const int d = spec.dim();
    return cell_quadrature(spec, omega, [&](std::int64_t, const std::array<int, kMaxDim>& idx) {
        // midpoint value = average of the 2^d corners
        double s = 0;
        int corners = 1 << d;
        for (int mask = 0; mask < corners; ++mask) {
            auto c = idx;
            for (int i = 0; i < d; ++i)
                if ((mask >> i) & 1) c[i] += 1;
            std::int64_t fc = spec.flat_index(c);
            s += u1.at(fc) - u2.at(fc);
        }
        return std::fabs(s / corners);
    });
}

double l1_distance(const VectorField& f1, const VectorField& f2, const Box& omega) {
    if (f1.spec.total() != f2.spec.total() || f1.components != f2.components)
        throw input_error("l1_distance: grid mismatch");
    check_domain(f1.spec, omega);
    const auto& spec = f1.spec;
    const int d = spec.dim();
    return cell_quadrature(spec, omega, [&](std::int64_t, const std::array<int, kMaxDim>& idx) {
        double s2 = 0;
        int corners = 1 << d;
        for (int c = 0; c < f1.components; ++c) {
            double s = 0;
            for (int mask = 0; mask < corners; ++mask) {
                auto cc = idx;
                for (int i = 0; i < d; ++i)
                    if ((mask >> i) & 1) cc[i] += 1;
                std::int64_t fc = spec.flat_index(cc);
                s += f1.at(fc, c) - f2.at(fc, c);
            }
            s /= corners;
            s2 += s * s;
        }
        return std::sqrt(s2);
    });
}

double w11_distance(const GridFunction& u1, const GridFunction& u2, const Box& omega) {
    if (u1.spec.total() != u2.spec.total()) throw input_error("w11_distance: grid mismatch");
    check_domain(u1.spec, omega);
    const auto& spec = u1.spec;
    const int d = spec.dim();
    double value_part = l1_distance(u1, u2, omega);
    // gradient at cell centers from corner differences (exact for multilinear)
    double grad_part =
        cell_quadrature(spec, omega, [&](std::int64_t, const std::array<int, kMaxDim>& idx) {
            double s2 = 0;
            int corners = 1 << d;
            for (int ax = 0; ax < d; ++ax) {
                double s = 0;
                for (int mask = 0; mask < corners; ++mask) {
                    if ((mask >> ax) & 1) continue; // pair each low corner with its +ax partner
                    auto clo = idx, chi = idx;
                    for (int i = 0; i < d; ++i)
                        if (i != ax && ((mask >> i) & 1)) {
                            clo[i] += 1;
                            chi[i] += 1;
                        }
                    chi[ax] += 1;
                    double d1 = (u1.at(spec.flat_index(chi)) - u1.at(spec.flat_index(clo))) /
                                spec.h(ax);
                    double d2 = (u2.at(spec.flat_index(chi)) - u2.at(spec.flat_index(clo))) /
                                spec.h(ax);
                    s += d1 - d2;
                }
                s /= (corners / 2);
                s2 += s * s;
            }
            return std::sqrt(s2);
        });
    return value_part + grad_part;
}

double verdict_slack(double h, double h_ref) { return 1.0 + 10.0 * (h / h_ref); }

BVBoundVerdict bv_bound_check(const SolveResult& result, const ConvexityModuli& moduli,
                              const Box& omega, double h_ref) {
    BVBoundVerdict v;
    v.t = result.t;
    v.gamma = moduli.gamma();
    v.lambda_cap = moduli.Lambda_M();
    v.diam = omega.diameter();
    v.surface = omega.surface();
    v.volume = omega.volume();
    v.lhs = total_variation(result.b, omega).tv;
    const int d = omega.dim();
    v.applicable = moduli.gamma_applicable();
    if (!v.applicable) {
        v.rhs = std::numeric_limits<double>::infinity();
        v.holds = false;
        return v;
    }
    v.rhs = (1.0 / v.gamma) * (v.lambda_cap + v.diam / v.t) * v.surface +
            std::sqrt(double(d)) / v.t * v.volume;
    v.slack = verdict_slack(result.u.spec.max_h(), h_ref);
    v.holds = v.lhs <= v.rhs * v.slack;
    return v;
}

SlopeDistanceReport slope_distance_check(const SolveResult& r1, const SolveResult& r2,
                                         const ConvexityModuli& moduli, double R,
                                         double slack_factor) {
    SlopeDistanceReport rep;
    const int d = r1.u.spec.dim();
    Box cube = Box::cube(d, R);
    rep.lhs = l1_distance(r1.grad_u, r2.grad_u, cube);
    // b := DH(Du) as in the statement
    const auto& model = moduli.view().model();
    VectorField b1(r1.u.spec, d), b2(r2.u.spec, d);
    for (std::int64_t f = 0; f < r1.u.spec.total(); ++f) {
        b1.set(f, grad_H(model, r1.grad_u.vec_at(f)));
        b2.set(f, grad_H(model, r2.grad_u.vec_at(f)));
    }
    rep.b_distance = l1_distance(b1, b2, cube);
    double inv = moduli.psi_inverse_saturated(rep.b_distance);
    rep.rhs = (std::pow(2.0, d) * std::pow(R, d) + 1.0) * inv;
    rep.holds = rep.lhs <= rep.rhs * slack_factor;
    return rep;
}

} // namespace hjlab
