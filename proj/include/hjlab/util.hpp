#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <string>
#include <thread>
#include <vector>

namespace hjlab {

// ---------------------------------------------------------------------------
// Deterministic parallel map over an index range. Each index writes only its
// own output slot, so the result is independent of the thread schedule.
// ---------------------------------------------------------------------------

int default_thread_count();
void set_default_thread_count(int n);

void parallel_for(std::int64_t count, const std::function<void(std::int64_t)>& body,
                  int threads = 0);

// ---------------------------------------------------------------------------
// Seeded RNG. splitmix64-seeded xorshift-style generator so streams are stable
// across platforms and standard-library versions.
// ---------------------------------------------------------------------------

struct Rng {
    std::uint64_t state;

    explicit Rng(std::uint64_t seed) : state(seed + 0x9e3779b97f4a7c15ull) {
        next_u64();
        next_u64();
    }
    std::uint64_t next_u64() {
        std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }
    // Uniform in [0,1).
    double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }
    double uniform(double a, double b) { return a + (b - a) * next_double(); }
    int uniform_int(int lo, int hi) { // inclusive bounds
        return lo + static_cast<int>(next_u64() % static_cast<std::uint64_t>(hi - lo + 1));
    }
};

// ---------------------------------------------------------------------------
// Least squares line fit, used everywhere a scaling exponent is extracted.
// ---------------------------------------------------------------------------

struct LineFit {
    double slope = 0;
    double intercept = 0;
    double residual_rms = 0; // RMS of fit residuals
    bool degenerate = false; // fewer than two distinct abscissae or flat data
};

LineFit fit_line(const std::vector<double>& xs, const std::vector<double>& ys);

// Slope of log(y) against log(1/x); the standard log-log exponent fit.
LineFit fit_log_slope(const std::vector<double>& xs, const std::vector<double>& ys);

// ---------------------------------------------------------------------------
// FNV-1a hash for config fingerprints embedded in outputs.
// ---------------------------------------------------------------------------

inline std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char ch : s) {
        h ^= ch;
        h *= 1099511628211ull;
    }
    return h;
}

std::string format_full(double x); // 17 significant digits

inline constexpr const char* kToolVersion = "hjlab 0.1.0";

} // namespace hjlab
