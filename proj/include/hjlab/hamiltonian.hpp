#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "hjlab/errors.hpp"
#include "hjlab/util.hpp"
#include "hjlab/vec.hpp"

namespace hjlab {

// ---------------------------------------------------------------------------
// Hamiltonians. Built-in kinds carry analytic gradients, Hessian norms and
// Legendre transforms; Custom models fall back to finite differences and the
// numeric Legendre search. All evaluators are pure, so models can be shared
// freely across worker threads.
// ---------------------------------------------------------------------------

enum class HamiltonianKind { PowerNorm, Quartic2D, Custom };

struct HamiltonianModel {
    HamiltonianKind kind = HamiltonianKind::PowerNorm;
    int k = 1;   // PowerNorm exponent: H(p) = |p|^(2k)
    int dim = 1;
    bool normalized = true;
    std::string name; // for reports

    // Custom evaluators. H is required, DH optional (central differences then).
    std::function<double(const Vec&)> custom_H;
    std::function<Vec(const Vec&)> custom_DH;

    static HamiltonianModel power_norm(int k, int dim);
    static HamiltonianModel quartic2d();
    static HamiltonianModel custom(int dim, std::function<double(const Vec&)> H,
                                   std::function<Vec(const Vec&)> DH = nullptr,
                                   std::string name = "custom");

    double quartic_a() const { return 27.0 / 256.0; }
};

double eval_H(const HamiltonianModel& model, const Vec& p);
Vec grad_H(const HamiltonianModel& model, const Vec& p);

// Operator norm of D^2H(p) (max |D^2H(p) v| over unit v). Analytic for the
// built-in kinds, symmetric second differences otherwise.
double hess_norm(const HamiltonianModel& model, const Vec& p);
bool has_analytic_hess(const HamiltonianModel& model);

// Shift H so that H(0)=0 and DH(0)=0. Built-ins come back unchanged.
HamiltonianModel normalize(const HamiltonianModel& model);

// ---------------------------------------------------------------------------
// Legendre transform L(q) = max_p { <p,q> - H(p) } and its gradient
// DL(q) = argmax. The numeric path does a coarse scan over a coercivity ball
// followed by projected gradient ascent; built-ins also have closed forms and
// the two must agree to tol_L.
// ---------------------------------------------------------------------------

struct LegendreOptions {
    double tol_L = 1e-8;       // absolute tolerance on L values
    int coarse_per_axis = 33;  // coarse scan resolution
    int ascent_iters = 40;     // refinement iterations
    bool prefer_analytic = true;
};

struct LegendreResult {
    double value = 0;
    Vec maximizer;
};

class LagrangianView {
public:
    explicit LagrangianView(const HamiltonianModel& model, LegendreOptions opt = {});

    const HamiltonianModel& model() const { return model_; }
    const LegendreOptions& options() const { return opt_; }
    int dim() const { return model_.dim; }

    double legendre(const Vec& q) const;
    Vec grad_L(const Vec& q) const;
    LegendreResult legendre_full(const Vec& q) const;

    // Numeric path, always available; used to cross-check the analytic one.
    LegendreResult legendre_numeric(const Vec& q) const;

    bool has_analytic() const;
    LegendreResult legendre_analytic(const Vec& q) const;

    // max |DL| over the closed ball of the given radius (direction scan).
    double sup_grad_L(double radius) const;

    // max L over the closed ball of the given radius.
    double sup_L(double radius) const;

    // Per-axis half-widths of a box containing the sublevel set {L <= c};
    // exact for the built-in kinds, nullopt for Custom (no pruning then).
    std::optional<Vec> sublevel_halfwidths(double c) const;

private:
    HamiltonianModel model_;
    LegendreOptions opt_;

    double search_radius(const Vec& q) const;
};

// Maximal backward characteristic speed for Lipschitz constant M:
// Lambda_M = max{ |q| : L(q) <= M |q| }.
double lambda_cap(const LagrangianView& view, double M);

// ---------------------------------------------------------------------------
// Convexity moduli. lambda_R is the directional-convexity constant (sampled
// infimum of cosines); Psi/Phi are the lower and upper moduli of gradient
// variation on the M-ball. Tables are built once at construction, after which
// every accessor is const and thread-safe.
//
// The table domain is (0, 2M]: pairs in the M-ball separate by up to 2M, and
// the W11-vs-L1 solution-distance bound consumes Psi^{-1} on that full range.
// ---------------------------------------------------------------------------

struct ModuliOptions {
    double sample_density = 64.0; // points per unit length per axis
    int pair_point_budget = 20000;
    int psi_nodes = 280;
    int phi_nodes = 64;
    double degeneracy_floor = 1e-10; // skip pairs with |DH(p)-DH(q)| below this
    double gamma_floor = 1e-3;       // below: model treated as violating (udc)
    bool prefer_analytic = true;
    double s_min_factor = 1e-7; // smallest tabulated s, as a fraction of M
};

struct MonotoneTable {
    std::vector<double> s; // strictly positive, increasing
    std::vector<double> y; // nondecreasing after rearrangement

    bool empty() const { return s.empty(); }
    double eval(double sv) const;    // linear interpolation through (0,0)
    double inverse(double yv) const; // throws range_error outside [0, y.back()]
};

class ConvexityModuli {
public:
    ConvexityModuli(const LagrangianView& view, double M, ModuliOptions opt = {});

    double M() const { return M_; }
    double s_max() const { return 2 * M_; }
    const ModuliOptions& options() const { return opt_; }
    const LagrangianView& view() const { return *view_; }

    double lambda_R(double R) const;
    double lambda_M() const { return lambda_M_; } // lambda_R at R = M
    double Lambda_M() const { return Lambda_M_; } // characteristic speed cap
    double gamma() const { return gamma_; }       // lambda at max|DL| over the Lambda_M ball

    // A sampled infimum can stay positive on any finite grid even when the true
    // infimum is zero, so applicability combines a floor with a convergence
    // check: gamma must be stable under doubling the sample density.
    bool gamma_applicable() const { return gamma_applicable_; }
    double gamma_refined() const { return gamma_refined_; }

    double psi(double s) const;
    double phi(double s) const;
    double psi_inverse(double y) const;
    double phi_inverse(double y) const;
    // Saturates at 2M instead of throwing; the solution-distance check uses
    // this since |Du1-Du2| <= 2M holds pointwise regardless.
    double psi_inverse_saturated(double y) const;
    double psi_max() const; // psi(2M)
    double phi_max() const;

    bool analytic() const { return analytic_; }

    // Sampled-path evaluators, kept callable for cross-checking the analytic
    // formulas in tests.
    double psi_sampled(double s) const;
    double phi_sampled(double s) const;

private:
    const LagrangianView* view_;
    double M_;
    ModuliOptions opt_;
    bool analytic_ = false;
    double lambda_M_ = 0, Lambda_M_ = 0, gamma_ = 0, gamma_refined_ = 0;
    bool gamma_applicable_ = false;
    MonotoneTable psi_table_, phi_table_;

    double psi_analytic(double s) const;
    double phi_analytic(double s) const;
    double psi_analytic_inverse(double y) const;
    double phi_analytic_inverse(double y) const;
};

// Sampled pair-scan infimum of <(DH(p)-DH(q))/|..|, (p-q)/|..|> over the
// closed R-ball. Exposed for oracle tests at custom densities.
double lambda_R_sampled(const HamiltonianModel& model, double R, double density,
                        int pair_point_budget, double degeneracy_floor);

} // namespace hjlab
