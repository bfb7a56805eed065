#include "hjlab/io.hpp"

#include <filesystem>
#include <fstream>

#include "hjlab/util.hpp"

namespace hjlab {

namespace {

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw input_error("io: cannot open " + path + " for writing");
    return out;
}

} // namespace

void ensure_directory(const std::string& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw input_error("io: cannot create directory " + dir);
}

nlohmann::json run_metadata(const RunConfig& cfg) {
    nlohmann::json meta;
    meta["tool"] = kToolVersion;
    meta["config_hash"] = cfg.hash;
    meta["config"] = cfg.raw;
    return meta;
}

void write_solve_csv(const std::string& path, const SolveResult& result) {
    auto out = open_out(path);
    const auto& spec = result.u.spec;
    const int d = spec.dim();
    out << "# ";
    for (int i = 0; i < d; ++i) out << "x" << i << ",";
    out << "u";
    for (int i = 0; i < d; ++i) out << ",b" << i;
    for (int i = 0; i < d; ++i) out << ",y" << i;
    out << "\n";
    for (std::int64_t f = 0; f < spec.total(); ++f) {
        Vec x = spec.point(f);
        for (int i = 0; i < d; ++i) out << format_full(x[i]) << ",";
        out << format_full(result.u.at(f));
        for (int i = 0; i < d; ++i) out << "," << format_full(result.b.at(f, i));
        for (int i = 0; i < d; ++i) out << "," << format_full(result.minimizers.at(f, i));
        out << "\n";
    }
}

void write_solve_sidecar(const std::string& path, const SolveResult& result,
                         const std::string& model_name, const RunConfig& cfg) {
    nlohmann::json j = run_metadata(cfg);
    j["t"] = result.t;
    j["lipschitz_M"] = result.lipschitz;
    j["lambda_cap"] = result.lambda_cap;
    j["model"] = model_name;
    const auto& spec = result.u.spec;
    nlohmann::json g;
    for (int i = 0; i < spec.dim(); ++i) {
        g["lo"].push_back(spec.box.lo[i]);
        g["hi"].push_back(spec.box.hi[i]);
        g["n"].push_back(spec.n[i]);
    }
    j["grid"] = g;
    auto out = open_out(path);
    out << j.dump(2) << "\n";
}

void write_verdicts_csv(const std::string& path, const std::vector<VerdictRow>& rows) {
    auto out = open_out(path);
    out << "# seed,M,t,lhs,rhs,applicable,holds\n";
    for (const auto& r : rows) {
        out << r.seed << "," << format_full(r.M) << "," << format_full(r.t) << ","
            << format_full(r.lhs) << "," << format_full(r.rhs) << "," << (r.applicable ? 1 : 0)
            << "," << (r.holds ? 1 : 0) << "\n";
    }
}

void write_entropy_report(const std::string& json_path, const std::string& csv_path,
                          const EntropyReport& report, const RunConfig& cfg) {
    {
        auto out = open_out(csv_path);
        out << "# epsilon,N_cover,P_pack,lower_bound,upper_bound\n";
        for (std::size_t i = 0; i < report.eps_grid.size(); ++i) {
            out << format_full(report.eps_grid[i]) << "," << report.covering[i] << ","
                << report.packing[i] << "," << format_full(report.lower_bound[i]) << ","
                << format_full(report.upper_bound[i]) << "\n";
        }
    }
    nlohmann::json j = run_metadata(cfg);
    j["eps_grid"] = report.eps_grid;
    j["covering"] = report.covering;
    j["packing"] = report.packing;
    j["lower_bound"] = report.lower_bound;
    j["upper_bound"] = report.upper_bound;
    j["empirical_slope"] = report.empirical_fit.slope;
    j["lower_slope"] = report.lower_fit.slope;
    j["upper_slope"] = report.upper_fit.slope;
    j["eps_admissible_max"] = report.eps_admissible_max;
    j["note"] = report.note;
    nlohmann::json c;
    c["V_T"] = report.constants.V_T;
    c["m_T"] = report.constants.m_T;
    c["beta_minus"] = report.constants.beta_minus;
    c["beta_plus"] = report.constants.beta_plus;
    c["R_minus"] = report.constants.R_minus;
    c["R_plus"] = report.constants.R_plus;
    c["Gamma_minus"] = report.constants.Gamma_minus;
    c["Gamma_plus"] = report.constants.Gamma_plus;
    c["lambda_M"] = report.constants.lambda_M;
    c["gamma_M"] = report.constants.gamma_M;
    c["Lambda_M"] = report.constants.Lambda_M;
    j["constants"] = c;
    auto out = open_out(json_path);
    out << j.dump(2) << "\n";
}

void write_counterexample_outputs(const std::string& csv_path, const std::string& json_path,
                                  const BlowupResult& result, const RunConfig& cfg) {
    {
        auto out = open_out(csv_path);
        out << "# delta,h,tv_b,tv_du,tv_b_drift_free,cell_identity_fraction\n";
        for (const auto& r : result.runs) {
            out << format_full(r.delta) << "," << format_full(r.h) << ","
                << format_full(r.tv_b) << "," << format_full(r.tv_du) << ","
                << format_full(r.tv_b_drift_free) << ","
                << format_full(r.cell_identity_fraction) << "\n";
        }
    }
    nlohmann::json j = run_metadata(cfg);
    j["exponent"] = result.exponent;
    j["residual"] = result.residual;
    j["drift_free_exponent"] = result.drift_free_exponent;
    j["tv_monotone"] = result.tv_monotone;
    j["grid_flagged"] = result.grid_flagged;
    auto out = open_out(json_path);
    out << j.dump(2) << "\n";
}

} // namespace hjlab
