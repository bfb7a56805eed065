#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <string>

#include "hjlab/errors.hpp"

namespace hjlab {

// Points live in R^d with small d; fixed capacity avoids heap traffic in the
// inner minimization loops.
inline constexpr int kMaxDim = 4;

struct Vec {
    std::array<double, kMaxDim> c{};
    int n = 0;

    Vec() = default;
    explicit Vec(int dim) : n(dim) {
        if (dim < 1 || dim > kMaxDim) throw input_error("Vec: dim out of range [1," + std::to_string(kMaxDim) + "]");
    }
    Vec(std::initializer_list<double> xs) {
        if (xs.size() < 1 || xs.size() > kMaxDim) throw input_error("Vec: bad initializer size");
        n = static_cast<int>(xs.size());
        int i = 0;
        for (double x : xs) c[i++] = x;
    }
    static Vec zero(int dim) { return Vec(dim); }

    int dim() const { return n; }
    double& operator[](int i) { return c[i]; }
    double operator[](int i) const { return c[i]; }

    Vec& operator+=(const Vec& o) {
        for (int i = 0; i < n; ++i) c[i] += o.c[i];
        return *this;
    }
    Vec& operator-=(const Vec& o) {
        for (int i = 0; i < n; ++i) c[i] -= o.c[i];
        return *this;
    }
    Vec& operator*=(double s) {
        for (int i = 0; i < n; ++i) c[i] *= s;
        return *this;
    }
};

inline Vec operator+(Vec a, const Vec& b) { return a += b; }
inline Vec operator-(Vec a, const Vec& b) { return a -= b; }
inline Vec operator*(Vec a, double s) { return a *= s; }
inline Vec operator*(double s, Vec a) { return a *= s; }

inline double dot(const Vec& a, const Vec& b) {
    double s = 0;
    for (int i = 0; i < a.n; ++i) s += a.c[i] * b.c[i];
    return s;
}
inline double norm2(const Vec& a) { return dot(a, a); }
inline double norm(const Vec& a) { return std::sqrt(norm2(a)); }

inline bool lex_less(const Vec& a, const Vec& b) {
    for (int i = 0; i < a.n; ++i) {
        if (a.c[i] < b.c[i]) return true;
        if (a.c[i] > b.c[i]) return false;
    }
    return false;
}

// Axis-aligned box, the only measurement domain shape we need: perimeter and
// diameter are analytic.
struct Box {
    Vec lo, hi;

    Box() = default;
    Box(const Vec& l, const Vec& h) : lo(l), hi(h) {
        if (l.dim() != h.dim()) throw input_error("Box: dimension mismatch");
        for (int i = 0; i < l.dim(); ++i)
            if (!(l[i] < h[i])) throw input_error("Box: lo must be < hi per axis");
    }
    static Box cube(int dim, double half) {
        Vec l(dim), h(dim);
        for (int i = 0; i < dim; ++i) { l[i] = -half; h[i] = half; }
        return Box(l, h);
    }

    int dim() const { return lo.dim(); }
    double side(int i) const { return hi[i] - lo[i]; }

    double volume() const {
        double v = 1;
        for (int i = 0; i < dim(); ++i) v *= side(i);
        return v;
    }
    double diameter() const {
        double s = 0;
        for (int i = 0; i < dim(); ++i) s += side(i) * side(i);
        return std::sqrt(s);
    }
    // H^{d-1} of the boundary; equals 2 (two endpoints) when d = 1.
    double surface() const {
        if (dim() == 1) return 2.0;
        double s = 0;
        for (int i = 0; i < dim(); ++i) {
            double face = 1;
            for (int j = 0; j < dim(); ++j)
                if (j != i) face *= side(j);
            s += 2 * face;
        }
        return s;
    }
    bool contains_open(const Vec& x, double tol = 0.0) const {
        for (int i = 0; i < dim(); ++i)
            if (!(x[i] > lo[i] + tol && x[i] < hi[i] - tol)) return false;
        return true;
    }
    bool contains_closed(const Vec& x, double tol = 0.0) const {
        for (int i = 0; i < dim(); ++i)
            if (!(x[i] >= lo[i] - tol && x[i] <= hi[i] + tol)) return false;
        return true;
    }
    Box expanded(double pad) const {
        Vec l = lo, h = hi;
        for (int i = 0; i < dim(); ++i) { l[i] -= pad; h[i] += pad; }
        return Box(l, h);
    }
};

// Volume of the unit ball in R^d, used by the entropy constants.
inline double unit_ball_volume(int d) {
    switch (d) {
        case 1: return 2.0;
        case 2: return M_PI;
        case 3: return 4.0 * M_PI / 3.0;
        case 4: return M_PI * M_PI / 2.0;
        default: throw input_error("unit_ball_volume: dim out of range");
    }
}

} // namespace hjlab
