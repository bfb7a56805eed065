#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "hjlab/counterexample.hpp"
#include "hjlab/entropy.hpp"
#include "hjlab/grid.hpp"
#include "hjlab/hamiltonian.hpp"
#include "hjlab/hopflax.hpp"

namespace hjlab {

// Single strict JSON document: unknown keys are rejected, and every run embeds
// the resolved config (plus its hash) in its outputs.

struct DatumConfig {
    std::string family = "abs"; // linear | abs | constant | random_pl
    std::vector<double> a;      // linear slope
    double offset = 0;
    double value = 0;      // constant
    double M = 1.0;
    double m = 1.0;
    int pieces = 6;
};

struct EntropyConfig {
    double T = 1.0, R = 1.0, m = 1.0, M = 1.0;
    std::string metric = "W11";
    int sample_count = 24;
    int sample_grid = 301;
    std::vector<double> epsilons;
};

struct CounterexampleConfig {
    double ell = 0.25;
    std::vector<double> deltas{0.04, 0.02, 0.01, 0.005};
    std::string variant = "analytic";
    double h_factor = 12.0;
};

struct BVCheckConfig {
    double h_ref = 0.1;
    double t = 1.0;
    int seeds = 50;
    std::uint64_t seed_base = 1;
};

struct RunConfig {
    nlohmann::json raw;
    std::string canonical; // dumped form used for the hash
    std::uint64_t hash = 0;

    std::optional<nlohmann::json> hamiltonian;
    std::optional<DatumConfig> datum;
    std::optional<nlohmann::json> grid;
    double time = 1.0;
    std::optional<Box> omega;
    std::vector<double> epsilons;
    std::vector<std::uint64_t> seeds;
    std::string out_dir = "out";
    int threads = 0;
    EntropyConfig entropy;
    CounterexampleConfig counterexample;
    BVCheckConfig bv_check;
};

RunConfig parse_config(const std::string& json_text);
RunConfig load_config(const std::string& path);

HamiltonianModel make_model(const RunConfig& cfg);
InitialDatum make_datum(const RunConfig& cfg, int dim, std::uint64_t seed);
GridSpec make_grid(const RunConfig& cfg, int dim);

} // namespace hjlab
