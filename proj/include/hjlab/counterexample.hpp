#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hjlab/bv.hpp"
#include "hjlab/grid.hpp"
#include "hjlab/hopflax.hpp"
#include "hjlab/util.hpp"

namespace hjlab {

// ---------------------------------------------------------------------------
// The quartic Hamiltonian H(p) = (27/256) p1^4 + p2^2 is strictly convex and
// coercive but not uniformly directionally convex; a lattice initial datum
// built from the dual construction makes |Db(1,.)| blow up like 1/delta^{1/3}.
//
// The Lagrangian used to build the datum comes in two variants: the true
// Legendre transform |q1|^{4/3} + q2^2/4, and |q1|^{4/3} + q2^2, whose level
// geometry matches the transition-curve formulas exactly. The forward solve
// always uses the quartic model itself.
// ---------------------------------------------------------------------------

enum class ConstructionL { Analytic, CurveMatched };

struct LatticeDatumSpec {
    double delta = 0.01; // lattice pitch in x; y-pitch is delta^{2/3}
    double ell = 0.25;   // measurement half-width, delta < ell < 1
    ConstructionL variant = ConstructionL::Analytic;
};

// gamma_curve(qbar, s) = (|s - qbar1|^{4/3} - |s|^{4/3}) / (2 qbar2) + qbar2 / 2.
double gamma_curve(const Vec& qbar, double s);

// Numeric arclength of the curve s -> (s, gamma_curve(qbar, s)) over [0, qbar1].
double gamma_curve_arclength(const Vec& qbar, int quad_points = 4096);

struct LatticeDatum {
    InitialDatum datum;
    double M_delta = 0;          // sup |DL| over the fundamental cell (formula)
    double sampled_lipschitz = 0; // measured on the tabulation grid
    bool m_delta_condition = false; // M_delta <= ell / 2
    double table_spacing = 0;
    LatticeDatumSpec spec;
};

// Builds the clamped dual datum: u = g0 on [-3l/2, 3l/2]^2, cut off by a
// linear profile to vanish outside [-2l, 2l]^2. With enforce_precondition the
// sufficient condition M_delta <= ell/2 is fatal instead of reported.
LatticeDatum build_datum(const LatticeDatumSpec& spec, bool enforce_precondition = false);

struct CounterexampleMeasurement {
    double delta = 0;
    double ell = 0;
    double h = 0;
    double tv_b = 0;
    double tv_du = 0;
    double tv_b_drift_free = 0; // TV of b - x/t: the pure jump mass
    double cell_identity_fraction = 0; // core points with |b - (x - y_cell)| <= 5h
    double max_support_violation = 0;  // |u0| sampled outside [-2l, 2l]^2
    double min_pair_jump = 0;          // smallest measured neighbor jump mass
};

CounterexampleMeasurement solve_and_measure(const LatticeDatumSpec& spec,
                                            double h_factor = 12.0, int threads = 0);

struct BlowupResult {
    std::vector<CounterexampleMeasurement> runs;
    double exponent = 0;  // slope of log tv_b against log(1/delta)
    double residual = 0;
    double drift_free_exponent = 0;
    bool tv_monotone = false; // tv_b strictly increasing as delta decreases
    bool grid_flagged = false;
};

BlowupResult blowup_exponent(double ell, const std::vector<double>& deltas,
                             ConstructionL variant, double h_factor = 12.0,
                             int threads = 0);

} // namespace hjlab
