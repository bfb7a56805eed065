#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "hjlab/errors.hpp"
#include "hjlab/vec.hpp"

namespace hjlab {

// ---------------------------------------------------------------------------
// Uniform axis-aligned grids. Flat indices run in row-major order (last axis
// fastest), which doubles as the lexicographic order used for deterministic
// tie-breaking.
// ---------------------------------------------------------------------------

struct GridSpec {
    Box box;
    std::array<int, kMaxDim> n{}; // points per axis, >= 2

    GridSpec() = default;
    GridSpec(const Box& b, const std::array<int, kMaxDim>& counts);
    static GridSpec uniform(const Box& b, int points_per_axis);
    // Spacing-driven constructor: chooses counts so h <= target_h.
    static GridSpec with_spacing(const Box& b, double target_h);

    int dim() const { return box.dim(); }
    double h(int i) const { return box.side(i) / (n[i] - 1); }
    double max_h() const;
    std::int64_t total() const;

    Vec point(std::int64_t flat) const;
    std::int64_t flat_index(const std::array<int, kMaxDim>& idx) const;
    std::array<int, kMaxDim> multi_index(std::int64_t flat) const;

    static inline std::int64_t budget = 20'000'000; // grid-point ceiling
};

struct GridFunction {
    GridSpec spec;
    std::vector<double> values;

    GridFunction() = default;
    explicit GridFunction(const GridSpec& s) : spec(s), values(s.total(), 0.0) {}

    double& at(std::int64_t flat) { return values[static_cast<std::size_t>(flat)]; }
    double at(std::int64_t flat) const { return values[static_cast<std::size_t>(flat)]; }

    // Multilinear interpolation; clamps to the box outside (Lipschitz-safe).
    double interpolate(const Vec& x) const;

    double max_abs() const;
    // max |adjacent difference| / h over all axes: a discrete Lipschitz bound.
    double lipschitz_estimate() const;
};

struct VectorField {
    GridSpec spec;
    int components = 0;
    std::vector<double> values; // components-major per point

    VectorField() = default;
    VectorField(const GridSpec& s, int comps)
        : spec(s), components(comps),
          values(static_cast<std::size_t>(s.total()) * comps, 0.0) {}

    double& at(std::int64_t flat, int c) {
        return values[static_cast<std::size_t>(flat) * components + c];
    }
    double at(std::int64_t flat, int c) const {
        return values[static_cast<std::size_t>(flat) * components + c];
    }
    Vec vec_at(std::int64_t flat) const {
        Vec v(components);
        for (int c = 0; c < components; ++c) v[c] = at(flat, c);
        return v;
    }
    void set(std::int64_t flat, const Vec& v) {
        for (int c = 0; c < components; ++c) at(flat, c) = v[c];
    }
};

// Central differences in the interior, one-sided at the box faces.
VectorField gradient_field(const GridFunction& u);

} // namespace hjlab
