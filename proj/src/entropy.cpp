#include "hjlab/entropy.hpp"

#include <algorithm>
#include <cmath>

#include "hjlab/util.hpp"

namespace hjlab {

// ---------------------------------------------------------------------------
// Distances and greedy counts
// ---------------------------------------------------------------------------

DistanceMatrix compute_distances(const FunctionClassSample& sample, EntropyMetric metric,
                                 double R) {
    const int n = sample.size();
    if (n == 0) throw input_error("entropy: empty sample");
    if (n > FunctionClassSample::member_budget)
        throw input_error("entropy: sample exceeds the member budget");
    Box omega = Box::cube(sample.grid.dim(), R);
    DistanceMatrix dm;
    dm.n = n;
    dm.d.assign(static_cast<std::size_t>(n) * n, 0.0);
    std::vector<std::pair<int, int>> pairs;
    pairs.reserve(static_cast<std::size_t>(n) * (n - 1) / 2);
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) pairs.emplace_back(i, j);
    parallel_for(static_cast<std::int64_t>(pairs.size()), [&](std::int64_t k) {
        auto [i, j] = pairs[static_cast<std::size_t>(k)];
        double v = metric == EntropyMetric::L1
                       ? l1_distance(sample.members[i], sample.members[j], omega)
                       : w11_distance(sample.members[i], sample.members[j], omega);
        dm.d[static_cast<std::size_t>(i) * n + j] = v;
        dm.d[static_cast<std::size_t>(j) * n + i] = v;
    });
    return dm;
}

int covering_count(const DistanceMatrix& dist, double eps) {
    const int n = dist.n;
    if (n == 0) throw input_error("covering_count: empty sample");
    if (eps <= 0) throw input_error("covering_count: eps must be > 0");
    std::vector<char> covered(n, 0);
    int remaining = n, balls = 0;
    while (remaining > 0) {
        int best = -1, best_gain = -1;
        for (int i = 0; i < n; ++i) {
            int gain = 0;
            for (int j = 0; j < n; ++j)
                if (!covered[j] && dist.at(i, j) <= eps) ++gain;
            if (gain > best_gain) {
                best_gain = gain;
                best = i;
            }
        }
        for (int j = 0; j < n; ++j)
            if (!covered[j] && dist.at(best, j) <= eps) {
                covered[j] = 1;
                --remaining;
            }
        ++balls;
    }
    return balls;
}

int covering_count(const FunctionClassSample& sample, double eps, EntropyMetric metric,
                   double R) {
    return covering_count(compute_distances(sample, metric, R), eps);
}

int packing_count(const DistanceMatrix& dist, double eps) {
    const int n = dist.n;
    if (n == 0) throw input_error("packing_count: empty sample");
    if (eps <= 0) throw input_error("packing_count: eps must be > 0");
    std::vector<int> kept;
    for (int i = 0; i < n; ++i) {
        bool ok = true;
        for (int j : kept)
            if (dist.at(i, j) <= eps) {
                ok = false;
                break;
            }
        if (ok) kept.push_back(i);
    }
    return static_cast<int>(kept.size());
}

int packing_count(const FunctionClassSample& sample, double eps, EntropyMetric metric,
                  double R) {
    return packing_count(compute_distances(sample, metric, R), eps);
}

// ---------------------------------------------------------------------------
// Semiconcave packing family
// ---------------------------------------------------------------------------

namespace {

// cos^2 bump profile on [-1/2, 1/2], extended by zero.
double bump_g(double s) {
    if (std::fabs(s) >= 0.5) return 0.0;
    double c = std::cos(M_PI * s);
    return c * c;
}
double bump_dg(double s) {
    if (std::fabs(s) >= 0.5) return 0.0;
    return -M_PI * std::sin(2 * M_PI * s);
}

// |D bump|_{L1} over one unit cell for the product profile in dimension d.
double unit_gradient_mass(int d) {
    const int n = 400;
    double acc = 0;
    if (d == 1) {
        for (int i = 0; i < n; ++i) {
            double s = -0.5 + (i + 0.5) / n;
            acc += std::fabs(bump_dg(s)) / n;
        }
        return acc;
    }
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            double x = -0.5 + (i + 0.5) / n;
            double y = -0.5 + (j + 0.5) / n;
            double gx = bump_dg(x) * bump_g(y);
            double gy = bump_g(x) * bump_dg(y);
            acc += std::sqrt(gx * gx + gy * gy) / (n * n);
        }
    return acc;
}

int hamming(const std::vector<std::uint8_t>& a, const std::vector<std::uint8_t>& b) {
    int h = 0;
    for (std::size_t i = 0; i < a.size(); ++i) h += a[i] != b[i];
    return h;
}

} // namespace

SemiconcaveFamily semiconcave_packing_family(double r, double K, double R, double eps,
                                             int d, int count, std::uint64_t seed,
                                             int grid_points_per_cell) {
    if (r <= 0 || K <= 0 || R <= 0 || eps <= 0) throw input_error("packing family: bad inputs");
    if (d < 1 || d > 2) throw input_error("packing family: d in {1,2} supported");
    double omega_d = unit_ball_volume(d);
    double eps_max = std::min(r, K) * omega_d * std::pow(R, d) / ((d + 1) * std::pow(2.0, d + 8));
    if (eps > eps_max) throw input_error("packing family: eps above the admissible range");
    if (count < 2 || count > FunctionClassSample::member_budget)
        throw input_error("packing family: bad count");

    // Curvature-limited amplitude: |D^2 bump| <= K with margin (Gershgorin row
    // bound 3 a pi^2 / c^2 in d=2, 2 a pi^2 / c^2 in d=1).
    const double curv_coeff = d == 1 ? 2.0 : 3.0;
    const double mass_unit = unit_gradient_mass(d);

    // Per-cell gradient mass at N cells per axis:
    //   a(N) = 0.9 K c^2/(curv pi^2), mass = a c^{d-1} mass_unit, c = 2R/N.
    auto capacity = [&](int N) {
        double c = 2 * R / N;
        double a = 0.9 * K * c * c / (curv_coeff * M_PI * M_PI);
        double mass = a * std::pow(c, d - 1) * mass_unit;
        // minimum pairwise separation = 2 * mass * (N^d / 4)
        return mass * std::pow(double(N), d) / 4.0;
    };
    // Pick the largest admissible N (finest tiling whose code capacity still
    // clears eps with margin for grid discretization of the audit).
    int N = 0;
    int Nmax = d == 1 ? 4096 : 96;
    for (int cand = Nmax; cand >= 4; --cand) {
        if (std::pow(double(cand), d) < 64) break;
        if (capacity(cand) >= eps * 1.15) {
            N = cand;
            break;
        }
    }
    if (N == 0) throw input_error("packing family: eps too large for the cell budget");

    const double c = 2 * R / N;
    const double amp = 0.9 * K * c * c / (curv_coeff * M_PI * M_PI);
    const double lip_bump = amp * M_PI / c * (d == 1 ? 1.0 : std::sqrt(2.0));
    if (lip_bump > r)
        throw input_error("packing family: bump slope exceeds the Lipschitz budget");

    std::int64_t n_cells64 = 1;
    for (int i = 0; i < d; ++i) n_cells64 *= N;
    const int n_cells = static_cast<int>(n_cells64);
    const int target_ham = n_cells / 4;

    // Greedy binary code with pairwise Hamming distance >= n_cells/4.
    Rng rng(seed);
    std::vector<std::vector<std::uint8_t>> code;
    code.reserve(count);
    int attempts = 0;
    while (static_cast<int>(code.size()) < count) {
        if (++attempts > 200 * count)
            throw numeric_error("packing family: code construction stalled");
        std::vector<std::uint8_t> w(n_cells);
        for (int i = 0; i < n_cells; ++i) w[i] = static_cast<std::uint8_t>(rng.next_u64() & 1);
        bool ok = true;
        for (const auto& prev : code)
            if (hamming(prev, w) < target_ham) {
                ok = false;
                break;
            }
        if (ok) code.push_back(std::move(w));
    }

    // Shared evaluation grid.
    int per_axis = N * grid_points_per_cell + 1;
    GridSpec grid = GridSpec::uniform(Box::cube(d, R), per_axis);

    SemiconcaveFamily fam;
    fam.eps = eps;
    fam.r = r;
    fam.K = K;
    fam.R = R;
    fam.cells_per_axis = N;
    fam.bump_amplitude = amp;
    fam.per_cell_gradient_mass = amp * std::pow(c, d - 1) * mass_unit;
    fam.sample.grid = grid;
    fam.sample.tag = SampleTag::Semiconcave;
    fam.sample.seed = seed;
    fam.sample.members.reserve(count);

    int mh = n_cells;
    for (int i = 0; i < count; ++i)
        for (int j = i + 1; j < count; ++j) mh = std::min(mh, hamming(code[i], code[j]));
    fam.min_hamming = mh;

    for (int mi = 0; mi < count; ++mi) {
        GridFunction u(grid);
        parallel_for(grid.total(), [&](std::int64_t f) {
            Vec x = grid.point(f);
            // locate the cell
            int cell_flat = 0;
            double value = 0;
            bool inside = true;
            Vec local(d);
            for (int i = 0; i < d; ++i) {
                double t = (x[i] + R) / c;
                int ci = std::min(static_cast<int>(std::floor(t)), N - 1);
                if (t < 0) ci = 0;
                cell_flat = cell_flat * N + ci;
                local[i] = t - ci - 0.5; // in [-1/2, 1/2]
                if (std::fabs(local[i]) >= 0.5) inside = false;
            }
            if (inside) {
                double g = 1.0;
                for (int i = 0; i < d; ++i) g *= bump_g(local[i]);
                value = (code[mi][cell_flat] ? 1.0 : -1.0) * amp * g;
            }
            u.at(f) = value;
        });
        fam.sample.members.push_back(std::move(u));
    }
    return fam;
}

double gradient_separation_audit(const FunctionClassSample& sample, double R) {
    const int n = sample.size();
    if (n < 2) throw input_error("separation audit: need at least two members");
    Box omega = Box::cube(sample.grid.dim(), R);
    std::vector<VectorField> grads;
    grads.reserve(n);
    for (const auto& u : sample.members) grads.push_back(gradient_field(u));
    double best = std::numeric_limits<double>::infinity();
    std::vector<std::pair<int, int>> pairs;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) pairs.emplace_back(i, j);
    std::vector<double> vals(pairs.size());
    parallel_for(static_cast<std::int64_t>(pairs.size()), [&](std::int64_t k) {
        auto [i, j] = pairs[static_cast<std::size_t>(k)];
        vals[static_cast<std::size_t>(k)] = l1_distance(grads[i], grads[j], omega);
    });
    for (double v : vals) best = std::min(best, v);
    return best;
}

// ---------------------------------------------------------------------------
// Theoretical bounds
// ---------------------------------------------------------------------------

TheoreticalBounds theoretical_bounds(const ConvexityModuli& moduli, double T, double R,
                                     double m, double M, double eps) {
    if (T <= 0 || R <= 0 || m <= 0 || M <= 0 || eps <= 0)
        throw input_error("theoretical_bounds: bad arguments");
    const int d = moduli.view().dim();
    TheoreticalBounds out;
    auto& c = out.constants;
    c.lambda_M = moduli.lambda_M();
    c.gamma_M = moduli.gamma();
    c.Lambda_M = moduli.Lambda_M();
    const double sqd = std::sqrt(double(d));
    const double p2d = std::pow(2.0, d);
    const double Rd = std::pow(R, d);

    c.V_T = (d * p2d * std::pow(R, d - 1) / c.gamma_M) * (c.Lambda_M + 2 * sqd * R / T) +
            sqd * p2d * Rd / T;
    c.m_T = m + sqd * M * R + T * moduli.view().sup_L(c.Lambda_M);

    c.beta_minus = p2d * Rd * m;
    c.beta_plus = (2 * p2d * Rd + 2) * (3 + sqd * R) * c.m_T;
    c.R_minus = unit_ball_volume(d) * Rd / ((d + 1) * std::pow(2.0, d + 9));
    c.R_plus = (p2d * Rd + 1) * (3 + sqd * R);
    c.Gamma_minus = (1.0 / (8 * std::log(2.0))) * std::pow(8 * R * c.lambda_M / (3 * T), d);
    c.Gamma_plus = 48 * sqd * std::pow(12 * d * sqd * R * c.V_T, d);

    // Admissibility window: eps below both
    //   R+ Psi^{-1}(min{12 R V^2/(3V + 2 Lambda), 4 V (R V / Lambda)^{1/d}})
    //   R- Phi^{-1}(lambda_M / (2T))
    double arg_upper = std::min(12 * R * c.V_T * c.V_T / (3 * c.V_T + 2 * c.Lambda_M),
                                4 * c.V_T * std::pow(R * c.V_T / c.Lambda_M, 1.0 / d));
    double psi_inv_arg;
    if (arg_upper >= moduli.psi_max()) {
        psi_inv_arg = moduli.s_max();
        out.clamped = true;
    } else {
        psi_inv_arg = moduli.psi_inverse(arg_upper);
    }
    double phi_arg = c.lambda_M / (2 * T);
    double phi_inv_arg;
    if (phi_arg >= moduli.phi_max()) {
        phi_inv_arg = moduli.s_max();
        out.clamped = true;
    } else {
        phi_inv_arg = moduli.phi_inverse(phi_arg);
    }
    out.eps_admissible_max = std::min(c.R_plus * psi_inv_arg, c.R_minus * phi_inv_arg);
    out.admissible = eps < out.eps_admissible_max;

    double s_lower = std::min(eps / c.R_minus, moduli.s_max());
    double s_upper = std::min(eps / c.R_plus, moduli.s_max());
    if (eps / c.R_minus > moduli.s_max() || eps / c.R_plus > moduli.s_max())
        out.clamped = true;

    double floor_term = std::floor(c.beta_minus / eps);
    out.lower = (floor_term >= 1 ? std::log2(floor_term) : 0.0) +
                c.Gamma_minus * std::pow(moduli.phi(s_lower), -double(d));
    out.upper = std::log2(c.beta_plus / eps) +
                c.Gamma_plus * std::pow(moduli.psi(s_upper), -double(d));
    return out;
}

ExponentFit empirical_exponent(const std::vector<double>& eps_grid,
                               const std::vector<double>& entropies) {
    if (eps_grid.size() != entropies.size() || eps_grid.size() < 4)
        throw input_error("empirical_exponent: need >= 4 points");
    double lo = *std::min_element(eps_grid.begin(), eps_grid.end());
    double hi = *std::max_element(eps_grid.begin(), eps_grid.end());
    if (!(hi / lo >= 10.0)) throw input_error("empirical_exponent: need a decade of eps");
    LineFit f = fit_log_slope(eps_grid, entropies);
    ExponentFit out;
    out.slope = f.slope;
    out.residual = f.residual_rms;
    out.degenerate = f.degenerate;
    return out;
}

// ---------------------------------------------------------------------------
// BV-class cover
// ---------------------------------------------------------------------------

FunctionClassSample bv_class_sample_1d(double R, double M, double V, std::uint64_t seed,
                                       int count, int grid_points) {
    FunctionClassSample s;
    s.grid = GridSpec::uniform(Box::cube(1, R), grid_points);
    s.tag = SampleTag::BVClass;
    s.seed = seed;
    Rng rng(seed);
    for (int k = 0; k < count; ++k) {
        int jumps = rng.uniform_int(1, 12);
        std::vector<double> pos(jumps), val(jumps + 1);
        for (int j = 0; j < jumps; ++j) pos[j] = rng.uniform(-R, R);
        std::sort(pos.begin(), pos.end());
        double budget = V;
        val[0] = rng.uniform(-M, M);
        for (int j = 1; j <= jumps; ++j) {
            double step = rng.uniform(-budget / (jumps - j + 1), budget / (jumps - j + 1));
            budget -= std::fabs(step);
            val[j] = std::clamp(val[j - 1] + step, -M, M);
        }
        GridFunction u(s.grid);
        for (std::int64_t f = 0; f < s.grid.total(); ++f) {
            double x = s.grid.point(f)[0];
            int seg = 0;
            while (seg < jumps && x > pos[seg]) ++seg;
            u.at(f) = val[seg];
        }
        s.members.push_back(std::move(u));
    }
    return s;
}

BVClassCover bv_class_cover(double R, double M, double V, double eps, std::uint64_t seed,
                            int sample_count) {
    if (R <= 0 || M <= 0 || V <= 0 || eps <= 0) throw input_error("bv_class_cover: bad inputs");
    const int d = 1;
    double hyp = std::min(6 * R * V * V / (3 * V + 2 * M),
                          2 * V * std::pow(R * V / M, 1.0 / d));
    if (!(eps < hyp)) throw input_error("bv_class_cover: eps above the admissible range");

    // quantization: coarse cells of side eps/(sqrt(d) V), values rounded to
    // multiples of eps/(2R)^d; each error contributes at most eps/2.
    double delta = eps / (std::sqrt(double(d)) * V);
    double kappa = eps / std::pow(2 * R, d);
    int cells = std::max(1, static_cast<int>(std::ceil(2 * R / delta)));

    auto sample = bv_class_sample_1d(R, M, V, seed, sample_count, 2048);
    const auto& grid = sample.grid;

    std::vector<std::vector<long>> codes;
    BVClassCover out;
    out.sample_count = sample.size();
    for (const auto& u : sample.members) {
        std::vector<long> code(cells);
        double err = 0;
        for (int cidx = 0; cidx < cells; ++cidx) {
            double lo = -R + 2 * R * cidx / cells;
            double hi = -R + 2 * R * (cidx + 1) / cells;
            double mean = 0;
            int cnt = 0;
            for (std::int64_t f = 0; f < grid.total(); ++f) {
                double x = grid.point(f)[0];
                if (x >= lo && x < hi) {
                    mean += u.at(f);
                    ++cnt;
                }
            }
            if (cnt > 0) mean /= cnt;
            long q = std::lround(mean / kappa);
            code[cidx] = q;
            for (std::int64_t f = 0; f < grid.total(); ++f) {
                double x = grid.point(f)[0];
                if (x >= lo && x < hi)
                    err += std::fabs(u.at(f) - q * kappa) * grid.h(0);
            }
        }
        out.max_quantization_error = std::max(out.max_quantization_error, err);
        codes.push_back(std::move(code));
    }
    std::sort(codes.begin(), codes.end());
    codes.erase(std::unique(codes.begin(), codes.end()), codes.end());
    out.cover_count = static_cast<int>(codes.size());
    out.bound_log2 = 48 * std::sqrt(double(d)) *
                     std::pow(6 * d * std::sqrt(double(d)) * R * V / eps, d);
    out.within_bound = std::log2(std::max(1.0, double(out.cover_count))) <= out.bound_log2;
    return out;
}

// ---------------------------------------------------------------------------
// Report
// ---------------------------------------------------------------------------

EntropyReport make_entropy_report(const ConvexityModuli& moduli, double T, double R, double m,
                                  double M, const FunctionClassSample& sample,
                                  const std::vector<double>& eps_grid, EntropyMetric metric) {
    if (eps_grid.empty()) throw input_error("entropy report: empty eps grid");
    EntropyReport rep;
    rep.eps_grid = eps_grid;
    auto dist = compute_distances(sample, metric, R);
    for (double eps : eps_grid) {
        rep.covering.push_back(covering_count(dist, eps));
        rep.packing.push_back(packing_count(dist, eps));
        auto tb = theoretical_bounds(moduli, T, R, m, M, eps);
        rep.lower_bound.push_back(tb.lower);
        rep.upper_bound.push_back(tb.upper);
        rep.constants = tb.constants;
        rep.eps_admissible_max = tb.eps_admissible_max;
    }
    std::vector<double> hcov;
    for (int c : rep.covering) hcov.push_back(std::log2(std::max(1.0, double(c))));
    if (eps_grid.size() >= 4) {
        double lo = *std::min_element(eps_grid.begin(), eps_grid.end());
        double hi = *std::max_element(eps_grid.begin(), eps_grid.end());
        if (hi / lo >= 10.0) {
            rep.empirical_fit = empirical_exponent(eps_grid, hcov);
            rep.lower_fit = empirical_exponent(eps_grid, rep.lower_bound);
            rep.upper_fit = empirical_exponent(eps_grid, rep.upper_bound);
        }
    }
    rep.note = "sampled covering/packing counts are lower evidence for the infinite class";
    return rep;
}

} // namespace hjlab
