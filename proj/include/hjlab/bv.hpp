#pragma once

#include <array>
#include <string>

#include "hjlab/grid.hpp"
#include "hjlab/hamiltonian.hpp"
#include "hjlab/hopflax.hpp"

namespace hjlab {

// ---------------------------------------------------------------------------
// Discrete total variation and friends. TV is anisotropic (axis-summed, with
// the Euclidean norm on vector increments per face), summed over faces whose
// endpoints both lie strictly inside the open box.
// ---------------------------------------------------------------------------

struct TVReport {
    Box domain;
    double tv = 0;
    std::array<double, kMaxDim> per_axis{};
    std::array<double, kMaxDim> spacing{};
};

TVReport total_variation(const VectorField& field, const Box& omega);
// Scalar convenience wrapper: TV of u seen as a 1-component field.
TVReport total_variation(const GridFunction& u, const Box& omega);

// Discrete |div b - d/t|(omega) via central differences integrated over omega.
double divergence_measure(const VectorField& field, const Box& omega, double t);

// Smallest K with u(x+h)+u(x-h)-2u(x) <= K|h|^2 on sampled axis steps (one and
// two grid steps). The semiconvexity constant is -semiconcavity_constant(-u).
double semiconcavity_constant(const GridFunction& u, const Box& omega);

struct PoincareReport {
    double lhs = 0;
    double rhs = 0;
    bool holds = false;
};
PoincareReport poincare_check(const GridFunction& u, const Box& omega,
                              double slack = 1e-9);

// Discrete W^{1,1} and L^1 distances by cell-midpoint quadrature.
double w11_distance(const GridFunction& u1, const GridFunction& u2, const Box& omega);
double l1_distance(const VectorField& f1, const VectorField& f2, const Box& omega);
double l1_distance(const GridFunction& u1, const GridFunction& u2, const Box& omega);

// ---------------------------------------------------------------------------
// The BV-bound verdict: measured |Db(t,.)|(omega) against
// (1/gamma_M)(Lambda_M + diam(omega)/t) H^{d-1}(boundary) + (sqrt(d)/t)|omega|.
// ---------------------------------------------------------------------------

struct BVBoundVerdict {
    double lhs = 0;
    double rhs = 0;
    double gamma = 0;
    double lambda_cap = 0;
    double diam = 0;
    double surface = 0;
    double volume = 0;
    double t = 0;
    double slack = 0;
    bool applicable = true; // false when the sampled gamma is degenerate
    bool holds = false;
};

// Slack factor 1 + 10 (h / h_ref); h_ref is the coarsest spacing in the study.
double verdict_slack(double h, double h_ref);

BVBoundVerdict bv_bound_check(const SolveResult& result, const ConvexityModuli& moduli,
                              const Box& omega, double h_ref = 0.1);

// W11-vs-L1 solution-distance inequality (checked with the saturated inverse):
// ||Du1 - Du2||_L1 <= (2^d R^d + 1) Psi_M^{-1}(||b1 - b2||_L1) + slack.
struct SlopeDistanceReport {
    double lhs = 0;
    double rhs = 0;
    double b_distance = 0;
    bool holds = false;
};
SlopeDistanceReport slope_distance_check(const SolveResult& r1, const SolveResult& r2,
                                         const ConvexityModuli& moduli, double R,
                                         double slack_factor);

} // namespace hjlab
