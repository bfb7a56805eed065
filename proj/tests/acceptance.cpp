// Acceptance suite: one pass/fail line per criterion. Exit code equals the
// number of failed criteria.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "hjlab/bv.hpp"
#include "hjlab/counterexample.hpp"
#include "hjlab/entropy.hpp"
#include "hjlab/hopflax.hpp"
#include "hjlab/util.hpp"

using namespace hjlab;

namespace {

struct Harness {
    int failures = 0;
    int index = 0;

    void run(const std::string& name, const std::function<bool(std::string&)>& body) {
        ++index;
        std::string detail;
        bool ok = false;
        auto start = std::chrono::steady_clock::now();
        try {
            ok = body(detail);
        } catch (const std::exception& e) {
            detail = std::string("exception: ") + e.what();
            ok = false;
        }
        double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
                          .count();
        std::printf("[%s] criterion %d: %s (%.1fs)%s%s\n", ok ? "PASS" : "FAIL", index,
                    name.c_str(), secs, detail.empty() ? "" : " -- ", detail.c_str());
        std::fflush(stdout);
        if (!ok) ++failures;
    }
};

double fan_u(double t, double x) {
    if (std::fabs(x) <= 2 * t) return x * x / (4 * t);
    return std::fabs(x) - t;
}

bool criterion1_hopf_lax_exactness(std::string& detail) {
    auto start = std::chrono::steady_clock::now();
    double worst_u = 0, worst_b = 0;
    for (int d : {1, 2}) {
        auto model = HamiltonianModel::power_norm(1, d);
        LagrangianView view(model);
        Vec a(d);
        a[0] = 0.3;
        if (d == 2) a[1] = -0.2;
        auto lin = datum_linear(a);
        auto spec = GridSpec::uniform(Box::cube(d, 1.0), 201);
        double t = 0.7;
        auto res = solve(lin, view, t, spec);
        double exact_shift = t * norm2(a);
        for (std::int64_t f = 0; f < spec.total(); ++f) {
            Vec x = spec.point(f);
            worst_u = std::max(worst_u, std::fabs(res.u.at(f) - (dot(a, x) - exact_shift)));
            worst_b = std::max(worst_b, norm(res.b.vec_at(f) - 2.0 * a));
        }
    }
    double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    detail = "max|u-exact|=" + format_full(worst_u) + " max|b-2a|=" + format_full(worst_b) +
             " runtime=" + std::to_string(secs) + "s";
    return worst_u <= 1e-6 && worst_b <= 1e-6 && secs < 10.0;
}

bool criterion2_fan_closed_form(std::string& detail) {
    auto model = HamiltonianModel::power_norm(1, 1);
    LagrangianView view(model);
    auto fan = datum_abs(1);
    auto spec = GridSpec::with_spacing(Box(Vec{-3.5}, Vec{3.5}), 0.01);
    double h = spec.max_h();
    auto res = solve(fan, view, 1.0, spec);
    double sup = 0;
    for (std::int64_t f = 0; f < spec.total(); ++f)
        sup = std::max(sup, std::fabs(res.u.at(f) - fan_u(1.0, spec.point(f)[0])));
    double tv = total_variation(res.b, Box(Vec{-3.0}, Vec{3.0})).tv;
    detail = "sup|u-closed|=" + format_full(sup) + " tv_b=" + format_full(tv) +
             " (h=" + format_full(h) + ")";
    return sup <= 2 * h && std::fabs(tv - 4.0) <= 4 * h;
}

bool criterion3_semigroup(std::string& detail) {
    auto model1 = HamiltonianModel::power_norm(1, 1);
    LagrangianView v1(model1);
    auto fan = datum_abs(1);
    auto spec = GridSpec::with_spacing(Box(Vec{-3.0}, Vec{3.0}), 0.01);
    double h = spec.max_h();
    double fan_defect = semigroup_check(fan, v1, 0.5, 0.5, spec);
    double fan_fi = functional_identity_check(fan, v1, 0.5, 1.0, spec);

    auto model2 = HamiltonianModel::power_norm(1, 2);
    LagrangianView v2(model2);
    auto lin = datum_linear(Vec{0.3, -0.2});
    auto spec2 = GridSpec::uniform(Box::cube(2, 1.0), 41);
    double lin_defect = semigroup_check(lin, v2, 0.5, 0.5, spec2);

    detail = "fan semigroup=" + format_full(fan_defect) + " fan identity=" +
             format_full(fan_fi) + " linear=" + format_full(lin_defect);
    return fan_defect <= 5 * h && fan_fi <= 5 * h && lin_defect <= 1e-8;
}

bool criterion4_bv_bound(std::string& detail) {
    auto start = std::chrono::steady_clock::now();
    int checked = 0, held = 0;
    double h_ref = 0.1;

    // H = |p|^2 in d = 1 and d = 2
    for (int d : {1, 2}) {
        auto model = HamiltonianModel::power_norm(1, d);
        LagrangianView view(model);
        ConvexityModuli moduli(view, 1.0);
        Box omega = Box::cube(d, 1.0);
        auto spec = d == 1 ? GridSpec::uniform(Box::cube(1, 1.2), 241)
                           : GridSpec::uniform(Box::cube(2, 1.2), 81);
        for (int i = 0; i < 50; ++i) {
            auto datum = datum_random_pl(d, 1.0, 1.0, 1000 + i);
            auto res = solve(datum, view, 1.0, spec);
            auto v = bv_bound_check(res, moduli, omega, h_ref);
            ++checked;
            if (v.applicable && v.holds) ++held;
        }
    }
    // H = p^4 in d = 1 with sampled gamma_M
    {
        auto model = HamiltonianModel::power_norm(2, 1);
        LagrangianView view(model);
        ConvexityModuli moduli(view, 1.0);
        Box omega = Box::cube(1, 1.0);
        auto spec = GridSpec::uniform(Box::cube(1, 1.2), 241);
        for (int i = 0; i < 50; ++i) {
            auto datum = datum_random_pl(1, 1.0, 1.0, 2000 + i);
            auto res = solve(datum, view, 1.0, spec);
            auto v = bv_bound_check(res, moduli, omega, h_ref);
            ++checked;
            if (v.applicable && v.holds) ++held;
        }
    }
    double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    detail = std::to_string(held) + "/" + std::to_string(checked) + " verdicts hold, " +
             std::to_string(secs) + "s";
    return held == checked && secs < 300.0;
}

bool criterion5_lattice_convergence(std::string& detail) {
    auto model = HamiltonianModel::power_norm(1, 1);
    LagrangianView view(model);
    auto fan = datum_abs(1);
    auto spec = GridSpec::uniform(Box(Vec{-3.0}, Vec{3.0}), 601);
    double worst_ratio = 0;
    for (int n = 4; n <= 10; ++n) {
        auto lat = lattice_approximant(fan, view, 1.0, n, spec);
        double sup = 0;
        for (std::int64_t f = 0; f < spec.total(); ++f)
            sup = std::max(sup, std::fabs(lat.u_n.at(f) - fan_u(1.0, spec.point(f)[0])));
        double bound = lattice_convergence_bound(fan, view, 1.0, n, 3.0);
        worst_ratio = std::max(worst_ratio, sup / bound);
    }
    detail = "max measured/bound ratio = " + format_full(worst_ratio);
    return worst_ratio <= 1.0;
}

bool criterion6_entropy_exponents(std::string& detail) {
    std::string parts;
    bool ok = true;
    for (int k : {1, 2}) {
        for (int d : {1, 2}) {
            auto model = HamiltonianModel::power_norm(k, d);
            LagrangianView view(model);
            ConvexityModuli moduli(view, 1.0);
            auto probe = theoretical_bounds(moduli, 1.0, 1.0, 1.0, 1.0, 1e-9);
            double eps_hi = probe.eps_admissible_max * 1e-4;
            std::vector<double> eps_grid, lows, ups;
            bool ordered = true;
            for (int i = 0; i < 9; ++i) {
                double eps = eps_hi * std::pow(0.01, i / 8.0);
                auto tb = theoretical_bounds(moduli, 1.0, 1.0, 1.0, 1.0, eps);
                if (!tb.admissible || tb.lower > tb.upper) ordered = false;
                eps_grid.push_back(eps);
                lows.push_back(tb.lower);
                ups.push_back(tb.upper);
            }
            // lower <= upper across the whole admissible window as well
            for (int i = 1; i <= 24; ++i) {
                double eps = probe.eps_admissible_max * i / 25.0;
                auto tb = theoretical_bounds(moduli, 1.0, 1.0, 1.0, 1.0, eps);
                if (tb.lower > tb.upper) ordered = false;
            }
            double expect = (2.0 * k - 1.0) * d;
            auto fl = empirical_exponent(eps_grid, lows);
            auto fu = empirical_exponent(eps_grid, ups);
            bool pass = ordered && std::fabs(fl.slope - expect) <= 0.02 * expect &&
                        std::fabs(fu.slope - expect) <= 0.02 * expect;
            ok = ok && pass;
            parts += " k" + std::to_string(k) + "d" + std::to_string(d) + ":" +
                     format_full(fl.slope) + "/" + format_full(fu.slope);
        }
    }
    detail = "slopes (lower/upper):" + parts;
    return ok;
}

bool criterion7_packing_certificate(std::string& detail) {
    double r = 1.0, K = 1.0, R = 1.0, eps = 3e-4;
    auto fam = semiconcave_packing_family(r, K, R, eps, 1, 256, 2024);
    Box omega = Box::cube(1, R);
    bool members_ok = true;
    for (const auto& u : fam.sample.members) {
        if (semiconcavity_constant(u, omega) > K * (1 + 1e-6)) members_ok = false;
        if (u.lipschitz_estimate() > r * (1 + 1e-6)) members_ok = false;
    }
    double min_sep = gradient_separation_audit(fam.sample, R);
    int packed = packing_count(fam.sample, eps, EntropyMetric::W11, R);
    detail = "min separation=" + format_full(min_sep) + " (2eps=" + format_full(2 * eps) +
             "), packing_count=" + std::to_string(packed) +
             ", members_ok=" + (members_ok ? std::string("yes") : std::string("no"));
    return members_ok && min_sep >= 2 * eps && packed == 256;
}

bool criterion8_sandwich(std::string& detail) {
    int violations = 0, checks = 0;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        Rng rng(seed);
        FunctionClassSample s;
        s.grid = GridSpec::uniform(Box::cube(1, 1.0), 160);
        int n = 20;
        for (int k = 0; k < n; ++k) {
            GridFunction u(s.grid);
            double a = rng.uniform(-1, 1), b = rng.uniform(-1, 1), c = rng.uniform(-0.8, 0.8);
            for (std::int64_t f = 0; f < s.grid.total(); ++f) {
                double x = s.grid.point(f)[0];
                u.at(f) = a * x + b * std::fabs(x - c);
            }
            s.members.push_back(std::move(u));
        }
        auto dist = compute_distances(s, EntropyMetric::L1, 1.0);
        for (double eps : {0.05, 0.15, 0.4}) {
            ++checks;
            int cov = covering_count(dist, eps);
            if (!(packing_count(dist, 2 * eps) <= cov && cov <= packing_count(dist, eps)))
                ++violations;
        }
    }
    detail = std::to_string(checks) + " checks, " + std::to_string(violations) + " violations";
    return violations == 0;
}

bool criterion9_counterexample_scaling(std::string& detail) {
    auto start = std::chrono::steady_clock::now();
    // four halvings of delta at ell = 0.25; the fit needs the asymptotic
    // regime, which at desk scale starts one dyadic step below 0.04
    auto result =
        blowup_exponent(0.25, {0.02, 0.01, 0.005, 0.0025}, ConstructionL::Analytic);
    // ell-doubling at a fixed coarse delta
    LatticeDatumSpec small;
    small.delta = 0.04;
    small.ell = 0.25;
    auto big = small;
    big.ell = 0.5;
    auto m_small = solve_and_measure(small);
    auto m_big = solve_and_measure(big);
    double ratio = m_big.tv_b / m_small.tv_b;
    double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    detail = "exponent=" + format_full(result.exponent) + " (drift-free " +
             format_full(result.drift_free_exponent) + ") monotone=" +
             (result.tv_monotone ? std::string("yes") : std::string("no")) +
             " ell-ratio=" + format_full(ratio) + " " + std::to_string(secs) + "s";
    bool exponent_ok = std::fabs(result.exponent - 1.0 / 3.0) <= 0.15;
    bool ratio_ok = ratio >= 4.0 * 0.7 && ratio <= 4.0 * 1.3;
    return exponent_ok && result.tv_monotone && ratio_ok && secs < 1800.0;
}

bool criterion10_slope_distance(std::string& detail) {
    int held = 0, checked = 0;
    for (int k : {1, 2}) {
        auto model = HamiltonianModel::power_norm(k, 1);
        LagrangianView view(model);
        ConvexityModuli moduli(view, 1.0);
        auto spec = GridSpec::uniform(Box::cube(1, 1.5), 301);
        double slack = 1.0 + 10 * spec.max_h();
        for (int pair = 0; pair < 10; ++pair) {
            auto d1 = datum_random_pl(1, 1.0, 1.0, 3000 + 2 * pair + k);
            auto d2 = datum_random_pl(1, 1.0, 1.0, 4000 + 2 * pair + k);
            auto r1 = solve(d1, view, 1.0, spec);
            auto r2 = solve(d2, view, 1.0, spec);
            auto rep = slope_distance_check(r1, r2, moduli, 1.0, slack);
            ++checked;
            if (rep.holds) ++held;
        }
    }
    detail = std::to_string(held) + "/" + std::to_string(checked) + " pairs hold";
    return held == checked;
}

} // namespace

int main() {
    Harness h;
    h.run("Hopf-Lax exactness on linear data", criterion1_hopf_lax_exactness);
    h.run("closed-form rarefaction fan", criterion2_fan_closed_form);
    h.run("semigroup and functional identity", criterion3_semigroup);
    h.run("BV-bound verdicts over random data", criterion4_bv_bound);
    h.run("lattice approximant convergence bound", criterion5_lattice_convergence);
    h.run("entropy formula exponents", criterion6_entropy_exponents);
    h.run("semiconcave packing certificate", criterion7_packing_certificate);
    h.run("covering/packing sandwich", criterion8_sandwich);
    h.run("counterexample TV scaling", criterion9_counterexample_scaling);
    h.run("slope-distance inequality", criterion10_slope_distance);
    std::printf("%d/%d criteria passed\n", 10 - h.failures, 10);
    return h.failures;
}
