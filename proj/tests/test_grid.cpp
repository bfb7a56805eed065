#include "doctest.h"

#include <cmath>

#include "hjlab/grid.hpp"
#include "hjlab/util.hpp"

using namespace hjlab;

TEST_CASE("grid index round trip and spacing") {
    auto spec = GridSpec::uniform(Box::cube(2, 1.0), 11);
    CHECK(spec.total() == 121);
    CHECK(spec.h(0) == doctest::Approx(0.2));
    for (std::int64_t f : {0l, 7l, 60l, 120l}) {
        auto idx = spec.multi_index(f);
        CHECK(spec.flat_index(idx) == f);
    }
    CHECK(spec.point(0)[0] == doctest::Approx(-1.0));
    CHECK(spec.point(spec.total() - 1)[1] == doctest::Approx(1.0));
    CHECK_THROWS_AS(GridSpec::uniform(Box::cube(2, 1.0), 1), input_error);
    CHECK_THROWS_AS(GridSpec::uniform(Box::cube(2, 1.0), 5001), input_error); // budget
}

TEST_CASE("multilinear interpolation reproduces linear functions") {
    auto spec = GridSpec::uniform(Box::cube(2, 1.0), 21);
    GridFunction u(spec);
    Vec a{0.7, -1.3};
    for (std::int64_t f = 0; f < spec.total(); ++f) u.at(f) = dot(a, spec.point(f)) + 0.25;
    Rng rng(9);
    for (int t = 0; t < 50; ++t) {
        Vec x{rng.uniform(-1, 1), rng.uniform(-1, 1)};
        CHECK(u.interpolate(x) == doctest::Approx(dot(a, x) + 0.25).epsilon(1e-12));
    }
    // clamped (constant) extension outside the box
    CHECK(u.interpolate(Vec{2.0, 0.0}) == doctest::Approx(u.interpolate(Vec{1.0, 0.0})));
}

TEST_CASE("gradient_field central differences") {
    auto spec = GridSpec::uniform(Box::cube(2, 1.0), 41);
    GridFunction u(spec);
    for (std::int64_t f = 0; f < spec.total(); ++f) {
        Vec x = spec.point(f);
        u.at(f) = x[0] * x[0] - 2.0 * x[1];
    }
    auto g = gradient_field(u);
    for (std::int64_t f = 0; f < spec.total(); ++f) {
        auto idx = spec.multi_index(f);
        Vec x = spec.point(f);
        bool interior = idx[0] > 0 && idx[0] < spec.n[0] - 1;
        if (interior) CHECK(g.at(f, 0) == doctest::Approx(2 * x[0]).epsilon(1e-9));
        CHECK(g.at(f, 1) == doctest::Approx(-2.0).epsilon(1e-9));
    }
    CHECK(u.lipschitz_estimate() <= 2.0 + spec.h(0) + 1e-9);
}
