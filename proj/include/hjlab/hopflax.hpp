#pragma once

#include <functional>
#include <limits>
#include <optional>
#include <string>

#include "hjlab/grid.hpp"
#include "hjlab/hamiltonian.hpp"

namespace hjlab {

// ---------------------------------------------------------------------------
// Initial data. Membership in the class U_[m,M] is exactly the two declared
// bounds: |u0(0)| <= m and Lip[u0] <= M. lower_bound, when finite, is a global
// floor used to shrink the minimization window (the minimum value search never
// discards a candidate that could still win).
// ---------------------------------------------------------------------------

struct InitialDatum {
    std::function<double(const Vec&)> eval;
    int dim = 1;
    double lipschitz = 1.0;        // declared M
    double bound_at_origin = 0.0;  // declared m >= |u0(0)|
    double lower_bound = -std::numeric_limits<double>::infinity();
    std::string name = "datum";

    double operator()(const Vec& x) const { return eval(x); }
};

InitialDatum datum_constant(int dim, double c);
InitialDatum datum_linear(const Vec& a, double offset = 0.0);
InitialDatum datum_abs(int dim);
// Piecewise-linear random datum: max(floor, min of random affine pieces),
// Lipschitz-M clamped, floor chosen so the function flattens outside ~|x|<4.
InitialDatum datum_random_pl(int dim, double M, double m, std::uint64_t seed,
                             int pieces = 6);
// Interpolated grid function as a datum.
InitialDatum datum_from_grid(const GridFunction& u, double lipschitz, std::string name);

struct MembershipReport {
    double sampled_lipschitz = 0;
    double value_at_origin = 0;
    bool lipschitz_ok = false;
    bool origin_ok = false;
    bool ok() const { return lipschitz_ok && origin_ok; }
};
MembershipReport check_membership(const InitialDatum& datum, const Box& box,
                                  int samples_per_axis = 33);

// ---------------------------------------------------------------------------
// Hopf-Lax evaluation: u(t,x) = min_y { u0(y) + t L((x-y)/t) }.
//
// The minimizer search is a two-level scan: a coarse pass over a shared
// candidate lattice (step max(h, t*Lambda_M/64)) restricted to the ball
// |y-x| <= t*Lambda_M*(1+margin), then compass-descent refinement. When the
// datum carries a finite lower bound the per-point window shrinks further to
// { q : t L(q) <= u0(x) + t L(0) - lower_bound }, which cannot exclude a
// minimizer. Ties break to the lexicographically smallest candidate.
// ---------------------------------------------------------------------------

struct SolveOptions {
    double ball_margin = 0.10;
    int coarse_divisions = 64;
    std::optional<double> coarse_step_override;
    double refine_tol = 0.0; // 0 -> 1e-5 * coarse step
    bool diagnostics = false; // track the second-best separated basin
    int threads = 0;
};

struct SolveResult {
    GridFunction u;
    VectorField grad_u;     // central differences of u
    VectorField b;          // (x - y_x) / t
    VectorField minimizers; // y_x per grid point
    GridFunction second_gap; // value gap to the best 2h-separated basin (if diagnostics)
    double t = 0;
    double lipschitz = 0; // datum M
    double lambda_cap = 0; // Lambda_M used for the search ball
    bool has_diagnostics = false;
};

struct PointValue {
    double value = 0;
    Vec minimizer;
    double second_gap = std::numeric_limits<double>::infinity();
};

PointValue hopf_lax_value(const InitialDatum& datum, const LagrangianView& view, double t,
                          const Vec& x, const SolveOptions& opt = {});

SolveResult solve(const InitialDatum& datum, const LagrangianView& view, double t,
                  const GridSpec& spec, const SolveOptions& opt = {});

// max-norm defect of S_{t+s} u0 against S_t applied to the grid-interpolated
// S_s u0.
double semigroup_check(const InitialDatum& datum, const LagrangianView& view, double t,
                       double s, const GridSpec& spec, const SolveOptions& opt = {});

// max-norm defect of u(t,.) = min_y { u(s,y) + (t-s) L((x-y)/(t-s)) }, 0 <= s < t.
double functional_identity_check(const InitialDatum& datum, const LagrangianView& view,
                                 double s, double t, const GridSpec& spec,
                                 const SolveOptions& opt = {});

// Verifies the dynamic programming principle at a single point: the minimizer
// y for (t,x) also minimizes w -> s L((z-w)/s) + u0(w) from z on the ray.
bool dynamic_programming_check(const InitialDatum& datum, const LagrangianView& view,
                               double s, double t, const Vec& x, double tol,
                               const SolveOptions& opt = {});

// eps_n = (1 / (M Lambda_M)) * max_{|q| <= 2^-n / t} [ M|q| + L(q) ].
double epsilon_n(int n, double t, double M, const LagrangianView& view);

struct LatticeApproximant {
    GridFunction u_n;
    VectorField b_n;
    double eps_n = 0;
    double pitch = 0;
};

// u_n(t,x) = min over the lattice (2^{-n+1}/sqrt(d)) Z^d of
// (1 - eps_n) u0(y) + t L((x-y)/t); b_n the winning slope, lexicographic ties.
LatticeApproximant lattice_approximant(const InitialDatum& datum, const LagrangianView& view,
                                       double t, int n, const GridSpec& spec,
                                       const SolveOptions& opt = {});

// Explicit uniform-convergence bound for |u_n - u| on a compact window whose
// points satisfy |x| <= x_max (the sup-of-DL and eps_n terms made explicit).
double lattice_convergence_bound(const InitialDatum& datum, const LagrangianView& view,
                                 double t, int n, double x_max);

} // namespace hjlab
