#include "doctest.h"

#include <cmath>

#include "hjlab/bv.hpp"
#include "hjlab/util.hpp"

using namespace hjlab;

namespace {

double fan_b(double t, double x) {
    if (x < -2 * t) return -2.0;
    if (x > 2 * t) return 2.0;
    return x / t;
}

VectorField fan_field(const GridSpec& spec, double t) {
    VectorField f(spec, 1);
    for (std::int64_t i = 0; i < spec.total(); ++i) f.at(i, 0) = fan_b(t, spec.point(i)[0]);
    return f;
}

} // namespace

TEST_CASE("total_variation basic fields") {
    auto spec = GridSpec::uniform(Box(Vec{-1.0}, Vec{1.0}), 201);
    Box omega(Vec{-1.0}, Vec{1.0});

    VectorField constant(spec, 1);
    for (std::int64_t i = 0; i < spec.total(); ++i) constant.at(i, 0) = 3.0;
    CHECK(total_variation(constant, omega).tv == doctest::Approx(0.0));

    VectorField sign(spec, 1);
    for (std::int64_t i = 0; i < spec.total(); ++i)
        sign.at(i, 0) = spec.point(i)[0] >= 0 ? 1.0 : -1.0;
    CHECK(total_variation(sign, omega).tv == doctest::Approx(2.0));

    auto spec3 = GridSpec::uniform(Box(Vec{-3.0}, Vec{3.0}), 601);
    double h = spec3.h(0);
    auto fan = fan_field(spec3, 1.0);
    CHECK(std::fabs(total_variation(fan, Box(Vec{-3.0}, Vec{3.0})).tv - 4.0) <= 2 * h);

    CHECK_THROWS_AS(total_variation(constant, Box(Vec{-2.0}, Vec{2.0})), input_error);
}

TEST_CASE("total_variation stabilizes under refinement") {
    for (int n : {101, 201, 401}) {
        auto spec = GridSpec::uniform(Box(Vec{-1.0}, Vec{1.0}), n);
        GridFunction lip(spec);
        for (std::int64_t i = 0; i < spec.total(); ++i) {
            double x = spec.point(i)[0];
            lip.at(i) = std::sin(3 * x);
        }
        double tv = total_variation(lip, Box(Vec{-1.0}, Vec{1.0})).tv;
        // |3 cos(3x)| integrates to 4 - 2 sin(3) over (-1,1)
        double exact = 4.0 - 2.0 * std::sin(3.0);
        CHECK(tv <= exact + 1e-6);
        CHECK(tv >= exact - 12.0 / n - 0.02);
    }
}

TEST_CASE("divergence_measure") {
    auto spec = GridSpec::uniform(Box::cube(2, 1.0), 81);
    Box omega = Box::cube(2, 1.0);
    double t = 0.5;

    VectorField radial(spec, 2);
    for (std::int64_t i = 0; i < spec.total(); ++i) {
        Vec x = spec.point(i);
        radial.set(i, x * (1.0 / t));
    }
    CHECK(divergence_measure(radial, omega, t) <= 1e-10);

    VectorField constant(spec, 2);
    for (std::int64_t i = 0; i < spec.total(); ++i) constant.set(i, Vec{0.3, -0.4});
    // |0 - d/t| * |omega|, up to the one-cell boundary rim
    double expect = (2.0 / t) * omega.volume();
    CHECK(divergence_measure(constant, omega, t) == doctest::Approx(expect).epsilon(0.06));

    auto spec1 = GridSpec::uniform(Box(Vec{-3.0}, Vec{3.0}), 601);
    auto fan = fan_field(spec1, 1.0);
    CHECK(divergence_measure(fan, Box(Vec{-3.0}, Vec{3.0}), 1.0) ==
          doctest::Approx(2.0).epsilon(0.05));
}

TEST_CASE("semiconcavity_constant") {
    auto spec = GridSpec::uniform(Box(Vec{-2.0}, Vec{2.0}), 401);
    Box omega(Vec{-1.5}, Vec{1.5});

    GridFunction quad(spec), lin(spec);
    for (std::int64_t i = 0; i < spec.total(); ++i) {
        double x = spec.point(i)[0];
        quad.at(i) = -x * x;
        lin.at(i) = 0.8 * x;
    }
    CHECK(semiconcavity_constant(quad, omega) == doctest::Approx(-2.0).epsilon(1e-9));
    CHECK(semiconcavity_constant(lin, omega) == doctest::Approx(0.0));

    // u(1,.) for the fan: x^2/4 inside |x|<2, |x|-1 outside; K = 1/2
    auto spec3 = GridSpec::uniform(Box(Vec{-4.0}, Vec{4.0}), 801);
    GridFunction fanu(spec3);
    for (std::int64_t i = 0; i < spec3.total(); ++i) {
        double x = spec3.point(i)[0];
        fanu.at(i) = std::fabs(x) <= 2 ? x * x / 4 : std::fabs(x) - 1;
    }
    double K = semiconcavity_constant(fanu, Box(Vec{-3.0}, Vec{3.0}));
    CHECK(K == doctest::Approx(0.5).epsilon(1e-6));
}

TEST_CASE("poincare_check") {
    auto spec = GridSpec::uniform(Box(Vec{0.0}, Vec{1.0}), 401);
    Box omega(Vec{0.0}, Vec{1.0});

    GridFunction constant(spec);
    for (std::int64_t i = 0; i < spec.total(); ++i) constant.at(i) = 2.5;
    auto pc = poincare_check(constant, omega);
    CHECK(pc.lhs == doctest::Approx(0.0));
    CHECK(pc.holds);

    GridFunction ident(spec);
    for (std::int64_t i = 0; i < spec.total(); ++i) ident.at(i) = spec.point(i)[0];
    auto pi = poincare_check(ident, omega);
    CHECK(pi.lhs == doctest::Approx(0.25).epsilon(0.02));
    CHECK(pi.rhs == doctest::Approx(0.5).epsilon(0.02));
    CHECK(pi.holds);

    // random Lipschitz samples
    Rng rng(41);
    for (int seed = 0; seed < 100; ++seed) {
        GridFunction u(spec);
        double a = rng.uniform(-2, 2), b = rng.uniform(-1, 1), c = rng.uniform(-1, 1);
        for (std::int64_t i = 0; i < spec.total(); ++i) {
            double x = spec.point(i)[0];
            u.at(i) = a * std::fabs(x - 0.3) + b * x + c * std::sin(4 * x);
        }
        CHECK(poincare_check(u, omega, 1e-6).holds);
    }
}

TEST_CASE("w11 and l1 distances") {
    auto spec = GridSpec::uniform(Box::cube(2, 1.0), 101);
    Box omega = Box::cube(2, 1.0);

    GridFunction u1(spec), u2(spec);
    for (std::int64_t i = 0; i < spec.total(); ++i) {
        u1.at(i) = 0.0;
        u2.at(i) = 0.0;
    }
    CHECK(w11_distance(u1, u2, omega) == doctest::Approx(0.0));

    for (std::int64_t i = 0; i < spec.total(); ++i) u2.at(i) = 0.7;
    CHECK(l1_distance(u1, u2, omega) == doctest::Approx(0.7 * 4.0).epsilon(1e-3));

    Vec a{0.5, -0.25};
    for (std::int64_t i = 0; i < spec.total(); ++i) u2.at(i) = dot(a, spec.point(i));
    // quadrature oracle for the value part on (-1,1)^2
    double quad = 0;
    int nq = 400;
    for (int i = 0; i < nq; ++i)
        for (int j = 0; j < nq; ++j) {
            Vec x{-1 + 2.0 * (i + 0.5) / nq, -1 + 2.0 * (j + 0.5) / nq};
            quad += std::fabs(dot(a, x)) * (2.0 / nq) * (2.0 / nq);
        }
    CHECK(w11_distance(u1, u2, omega) == doctest::Approx(quad + norm(a) * 4.0).epsilon(1e-2));
    CHECK_THROWS_AS(w11_distance(u1, GridFunction(GridSpec::uniform(omega, 11)), omega),
                    input_error);
}

TEST_CASE("bv_bound_check constants and verdict") {
    auto pn = HamiltonianModel::power_norm(1, 2);
    LagrangianView view(pn);
    ConvexityModuli moduli(view, 1.0);

    Box omega = Box::cube(2, 1.0);
    // rhs = (4 + 2 sqrt2) * 8 + sqrt2 * 4 at gamma=1, t=1
    double expect_rhs = (4.0 + 2.0 * std::sqrt(2.0)) * 8.0 + std::sqrt(2.0) * 4.0;

    auto zero = datum_constant(2, 0.0);
    auto spec = GridSpec::uniform(Box::cube(2, 1.2), 61);
    auto res = solve(zero, view, 1.0, spec);
    auto verdict = bv_bound_check(res, moduli, omega, 0.1);
    CHECK(verdict.applicable);
    CHECK(verdict.rhs == doctest::Approx(expect_rhs).epsilon(1e-9));
    CHECK(verdict.lhs <= 1e-6);
    CHECK(verdict.holds);

    // Lipschitz-1 random data satisfy the bound
    for (std::uint64_t seed : {4ull, 9ull}) {
        auto datum = datum_random_pl(2, 1.0, 1.0, seed);
        auto r = solve(datum, view, 1.0, spec);
        auto v = bv_bound_check(r, moduli, omega, 0.1);
        CHECK(v.applicable);
        CHECK(v.holds);
    }
}

TEST_CASE("bv_bound_check with p^4 in one dimension") {
    auto pn = HamiltonianModel::power_norm(2, 1);
    LagrangianView view(pn);
    ConvexityModuli moduli(view, 1.0);
    CHECK(moduli.gamma_applicable());
    CHECK(moduli.gamma() == doctest::Approx(1.0).epsilon(1e-6)); // cosine is 1 in d=1

    auto spec = GridSpec::uniform(Box(Vec{-1.5}, Vec{1.5}), 601);
    Box omega(Vec{-1.0}, Vec{1.0});
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        auto datum = datum_random_pl(1, 1.0, 1.0, seed);
        auto res = solve(datum, view, 1.0, spec);
        auto v = bv_bound_check(res, moduli, omega, 0.1);
        CHECK(v.applicable);
        CHECK(v.holds);
    }
}

TEST_CASE("quartic model yields a not-applicable verdict") {
    auto q2 = HamiltonianModel::quartic2d();
    LagrangianView view(q2);
    ConvexityModuli moduli(view, 0.5);
    auto datum = datum_random_pl(2, 0.5, 0.5, 3);
    auto spec = GridSpec::uniform(Box::cube(2, 0.6), 41);
    auto res = solve(datum, view, 1.0, spec);
    auto v = bv_bound_check(res, moduli, Box::cube(2, 0.5), 0.1);
    CHECK_FALSE(v.applicable); // (udc) fails: gamma_M is degenerate
    CHECK_FALSE(v.holds);
}

TEST_CASE("jump-field TV stabilizes across grid levels") {
    double prev = -1;
    for (int n : {101, 201, 401}) {
        auto spec = GridSpec::uniform(Box(Vec{-1.0}, Vec{1.0}), n);
        VectorField sign(spec, 1);
        for (std::int64_t i = 0; i < spec.total(); ++i)
            sign.at(i, 0) = spec.point(i)[0] >= 0.1234 ? 1.0 : -1.0;
        double tv = total_variation(sign, Box(Vec{-1.0}, Vec{1.0})).tv;
        CHECK(tv == doctest::Approx(2.0));
        if (prev >= 0) CHECK(std::fabs(tv - prev) <= 1e-12);
        prev = tv;
    }
}

TEST_CASE("est1 chain: lattice slope variation vs divergence defect") {
    auto pn = HamiltonianModel::power_norm(1, 1);
    LagrangianView view(pn);
    ConvexityModuli moduli(view, 1.0);
    auto fan = datum_abs(1);
    auto spec = GridSpec::uniform(Box(Vec{-3.0}, Vec{3.0}), 1201);
    auto lat = lattice_approximant(fan, view, 1.0, 5, spec);
    Box omega(Vec{-2.5}, Vec{2.5});
    // d=1: |D(b_n - x/t)|(omega) equals |div b_n - 1/t|(omega) up to smear
    VectorField drift_free(spec, 1);
    for (std::int64_t i = 0; i < spec.total(); ++i)
        drift_free.at(i, 0) = lat.b_n.at(i, 0) - spec.point(i)[0] / 1.0;
    double lhs = total_variation(drift_free, omega).tv;
    double rhs = divergence_measure(lat.b_n, omega, 1.0) / moduli.gamma();
    CHECK(lhs <= rhs * 1.2 + 0.05);
}

TEST_CASE("slope distance check on solution pairs") {
    auto pn = HamiltonianModel::power_norm(1, 1);
    LagrangianView view(pn);
    ConvexityModuli moduli(view, 1.0);
    auto spec = GridSpec::uniform(Box(Vec{-1.5}, Vec{1.5}), 301);
    double R = 1.0;
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        auto d1 = datum_random_pl(1, 1.0, 1.0, 2 * seed + 1);
        auto d2 = datum_random_pl(1, 1.0, 1.0, 2 * seed + 2);
        auto r1 = solve(d1, view, 1.0, spec);
        auto r2 = solve(d2, view, 1.0, spec);
        auto rep = slope_distance_check(r1, r2, moduli, R, 1.0 + 10 * spec.max_h());
        CHECK(rep.holds);
    }
}
