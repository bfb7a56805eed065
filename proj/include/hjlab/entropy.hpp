#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hjlab/bv.hpp"
#include "hjlab/grid.hpp"
#include "hjlab/hamiltonian.hpp"

namespace hjlab {

// ---------------------------------------------------------------------------
// Samples of function classes on a shared grid over the cube (-R,R)^d.
// ---------------------------------------------------------------------------

enum class SampleTag { SolutionSet, BVClass, Semiconcave };
enum class EntropyMetric { L1, W11 };

struct FunctionClassSample {
    GridSpec grid;
    std::vector<GridFunction> members;
    SampleTag tag = SampleTag::SolutionSet;
    std::uint64_t seed = 0;

    int size() const { return static_cast<int>(members.size()); }
    static inline int member_budget = 4096;
};

// Symmetric pairwise distances, cached once per sweep.
struct DistanceMatrix {
    int n = 0;
    std::vector<double> d; // row-major upper triangle included, symmetric

    double at(int i, int j) const { return d[static_cast<std::size_t>(i) * n + j]; }
};
DistanceMatrix compute_distances(const FunctionClassSample& sample, EntropyMetric metric,
                                 double R);

// Greedy covering count: repeatedly pick the member whose eps-ball covers the
// most uncovered members (ties to the smallest index). Upper-bounds the true
// covering number of the sampled set.
int covering_count(const DistanceMatrix& dist, double eps);
int covering_count(const FunctionClassSample& sample, double eps, EntropyMetric metric,
                   double R);

// Greedy maximal separated subset scanned in index order; two kept members are
// more than eps apart. Sandwiches the covering count:
// packing(2 eps) <= covering(eps) <= packing(eps).
int packing_count(const DistanceMatrix& dist, double eps);
int packing_count(const FunctionClassSample& sample, double eps, EntropyMetric metric,
                  double R);

// ---------------------------------------------------------------------------
// Separated semiconcave family: cos^2 bumps of curvature <= K on an N^d tiling
// of (-R,R)^d, signs drawn from a binary code with pairwise Hamming distance
// >= N^d/4, giving pairwise ||Dv - Dw||_L1 >= 2 eps.
// ---------------------------------------------------------------------------

struct SemiconcaveFamily {
    FunctionClassSample sample;
    double eps = 0;
    double r = 0, K = 0, R = 0;
    int cells_per_axis = 0;
    double bump_amplitude = 0;
    double per_cell_gradient_mass = 0;
    double min_hamming = 0;
};

SemiconcaveFamily semiconcave_packing_family(double r, double K, double R, double eps,
                                             int d = 1, int count = 256,
                                             std::uint64_t seed = 1,
                                             int grid_points_per_cell = 12);

// Full pairwise audit of ||Dv - Dw||_{L1((-R,R)^d)}; returns the minimum.
double gradient_separation_audit(const FunctionClassSample& sample, double R);

// ---------------------------------------------------------------------------
// Two-sided theoretical entropy bounds with the explicit constants.
// ---------------------------------------------------------------------------

struct EntropyConstants {
    double V_T = 0, m_T = 0;
    double beta_minus = 0, beta_plus = 0;
    double R_minus = 0, R_plus = 0;
    double Gamma_minus = 0, Gamma_plus = 0;
    double lambda_M = 0, gamma_M = 0, Lambda_M = 0;
};

struct TheoreticalBounds {
    double lower = 0;
    double upper = 0;
    double eps_admissible_max = 0;
    bool admissible = true;
    bool clamped = false; // an inverse was clamped to the table end
    EntropyConstants constants;
};

TheoreticalBounds theoretical_bounds(const ConvexityModuli& moduli, double T, double R,
                                     double m, double M, double eps);

// Least-squares slope of log H(eps) against log(1/eps), H = log2(count/bound).
struct ExponentFit {
    double slope = 0;
    double residual = 0;
    bool degenerate = false;
};
ExponentFit empirical_exponent(const std::vector<double>& eps_grid,
                               const std::vector<double>& entropies);

// ---------------------------------------------------------------------------
// Constructive cover of a sampled subset of the bounded-variation class
// F_[R,M,V] by piecewise-constant quantization.
// ---------------------------------------------------------------------------

struct BVClassCover {
    int sample_count = 0;
    int cover_count = 0;
    double bound_log2 = 0;       // 48 sqrt(d) (6 d sqrt(d) R V / eps)^d
    double max_quantization_error = 0;
    bool within_bound = false;
};

BVClassCover bv_class_cover(double R, double M, double V, double eps,
                            std::uint64_t seed = 1, int sample_count = 64);

// Random staircase members of F_[R,M,V] in one dimension (exposed for tests).
FunctionClassSample bv_class_sample_1d(double R, double M, double V, std::uint64_t seed,
                                       int count, int grid_points);

// ---------------------------------------------------------------------------
// Report assembled for serialization by the CLI.
// ---------------------------------------------------------------------------

struct EntropyReport {
    std::vector<double> eps_grid;
    std::vector<int> covering;
    std::vector<int> packing;
    std::vector<double> lower_bound;
    std::vector<double> upper_bound;
    ExponentFit empirical_fit;   // of log2(covering)
    ExponentFit lower_fit;       // of the theoretical lower bound
    ExponentFit upper_fit;       // of the theoretical upper bound
    EntropyConstants constants;
    double eps_admissible_max = 0;
    std::string note; // sampled counts are lower evidence only
};

EntropyReport make_entropy_report(const ConvexityModuli& moduli, double T, double R, double m,
                                  double M, const FunctionClassSample& sample,
                                  const std::vector<double>& eps_grid, EntropyMetric metric);

} // namespace hjlab
