#pragma once

#include <string>
#include <vector>

#include "json.hpp"

#include "hjlab/bv.hpp"
#include "hjlab/config.hpp"
#include "hjlab/counterexample.hpp"
#include "hjlab/entropy.hpp"
#include "hjlab/grid.hpp"
#include "hjlab/hopflax.hpp"

namespace hjlab {

// CSV cells use 17 significant digits so downstream regression tests can diff
// outputs byte for byte.

void ensure_directory(const std::string& dir);

// One row per grid point: coordinates, u, b components, minimizer components.
void write_solve_csv(const std::string& path, const SolveResult& result);
// Metadata sidecar: t, M, Lambda_M, grid spec, model, config hash, version.
void write_solve_sidecar(const std::string& path, const SolveResult& result,
                         const std::string& model_name, const RunConfig& cfg);

struct VerdictRow {
    std::uint64_t seed = 0;
    double M = 0, t = 0, lhs = 0, rhs = 0;
    bool applicable = true;
    bool holds = false;
};
void write_verdicts_csv(const std::string& path, const std::vector<VerdictRow>& rows);

void write_entropy_report(const std::string& json_path, const std::string& csv_path,
                          const EntropyReport& report, const RunConfig& cfg);

void write_counterexample_outputs(const std::string& csv_path, const std::string& json_path,
                                  const BlowupResult& result, const RunConfig& cfg);

nlohmann::json run_metadata(const RunConfig& cfg);

} // namespace hjlab
