#include "hjlab/grid.hpp"

#include <algorithm>
#include <cmath>

namespace hjlab {

GridSpec::GridSpec(const Box& b, const std::array<int, kMaxDim>& counts) : box(b), n(counts) {
    std::int64_t tot = 1;
    for (int i = 0; i < b.dim(); ++i) {
        if (n[i] < 2) throw input_error("GridSpec: need at least 2 points per axis");
        tot *= n[i];
        if (tot > budget) throw input_error("GridSpec: point count exceeds budget");
    }
}

GridSpec GridSpec::uniform(const Box& b, int points_per_axis) {
    std::array<int, kMaxDim> c{};
    for (int i = 0; i < b.dim(); ++i) c[i] = points_per_axis;
    return GridSpec(b, c);
}

GridSpec GridSpec::with_spacing(const Box& b, double target_h) {
    if (target_h <= 0) throw input_error("GridSpec: spacing must be > 0");
    std::array<int, kMaxDim> c{};
    for (int i = 0; i < b.dim(); ++i)
        c[i] = std::max(2, static_cast<int>(std::ceil(b.side(i) / target_h)) + 1);
    return GridSpec(b, c);
}

double GridSpec::max_h() const {
    double m = 0;
    for (int i = 0; i < dim(); ++i) m = std::max(m, h(i));
    return m;
}

std::int64_t GridSpec::total() const {
    std::int64_t t = 1;
    for (int i = 0; i < dim(); ++i) t *= n[i];
    return t;
}

Vec GridSpec::point(std::int64_t flat) const {
    Vec x(dim());
    std::int64_t rem = flat;
    for (int i = dim() - 1; i >= 0; --i) {
        int idx = static_cast<int>(rem % n[i]);
        rem /= n[i];
        x[i] = box.lo[i] + h(i) * idx;
    }
    return x;
}

std::int64_t GridSpec::flat_index(const std::array<int, kMaxDim>& idx) const {
    std::int64_t f = 0;
    for (int i = 0; i < dim(); ++i) f = f * n[i] + idx[i];
    return f;
}

std::array<int, kMaxDim> GridSpec::multi_index(std::int64_t flat) const {
    std::array<int, kMaxDim> idx{};
    std::int64_t rem = flat;
    for (int i = dim() - 1; i >= 0; --i) {
        idx[i] = static_cast<int>(rem % n[i]);
        rem /= n[i];
    }
    return idx;
}

double GridFunction::interpolate(const Vec& x) const {
    const int d = spec.dim();
    std::array<int, kMaxDim> base{};
    std::array<double, kMaxDim> frac{};
    for (int i = 0; i < d; ++i) {
        double t = (x[i] - spec.box.lo[i]) / spec.h(i);
        t = std::clamp(t, 0.0, double(spec.n[i] - 1));
        int b = static_cast<int>(std::floor(t));
        b = std::min(b, spec.n[i] - 2);
        base[i] = b;
        frac[i] = t - b;
    }
    double acc = 0;
    int corners = 1 << d;
    for (int mask = 0; mask < corners; ++mask) {
        double w = 1;
        std::array<int, kMaxDim> idx = base;
        for (int i = 0; i < d; ++i) {
            if ((mask >> i) & 1) {
                idx[i] += 1;
                w *= frac[i];
            } else {
                w *= 1 - frac[i];
            }
        }
        if (w != 0) acc += w * at(spec.flat_index(idx));
    }
    return acc;
}

double GridFunction::max_abs() const {
    double m = 0;
    for (double v : values) m = std::max(m, std::fabs(v));
    return m;
}

double GridFunction::lipschitz_estimate() const {
    const int d = spec.dim();
    double m = 0;
    for (std::int64_t f = 0; f < spec.total(); ++f) {
        auto idx = spec.multi_index(f);
        for (int i = 0; i < d; ++i) {
            if (idx[i] + 1 >= spec.n[i]) continue;
            auto nb = idx;
            nb[i] += 1;
            double q = std::fabs(at(spec.flat_index(nb)) - at(f)) / spec.h(i);
            m = std::max(m, q);
        }
    }
    return m;
}

VectorField gradient_field(const GridFunction& u) {
    const auto& spec = u.spec;
    const int d = spec.dim();
    VectorField g(spec, d);
    for (std::int64_t f = 0; f < spec.total(); ++f) {
        auto idx = spec.multi_index(f);
        for (int i = 0; i < d; ++i) {
            auto up = idx, dn = idx;
            double denom;
            if (idx[i] == 0) {
                up[i] = 1;
                dn[i] = 0;
                denom = spec.h(i);
            } else if (idx[i] == spec.n[i] - 1) {
                up[i] = idx[i];
                dn[i] = idx[i] - 1;
                denom = spec.h(i);
            } else {
                up[i] = idx[i] + 1;
                dn[i] = idx[i] - 1;
                denom = 2 * spec.h(i);
            }
            g.at(f, i) = (u.at(spec.flat_index(up)) - u.at(spec.flat_index(dn))) / denom;
        }
    }
    return g;
}

} // namespace hjlab
