#include <cstdio>
#include <string>

#include "CLI11.hpp"

#include "hjlab/config.hpp"
#include "hjlab/io.hpp"
#include "hjlab/util.hpp"

using namespace hjlab;

namespace {

struct CommonArgs {
    std::string config_path;
    std::string out_override;
    std::uint64_t seed = 0;
    bool seed_set = false;
    int threads = 0;
    std::string format = "csv";
};

RunConfig load(const CommonArgs& args) {
    RunConfig cfg = load_config(args.config_path);
    if (!args.out_override.empty()) cfg.out_dir = args.out_override;
    if (args.threads > 0) cfg.threads = args.threads;
    if (cfg.threads > 0) set_default_thread_count(cfg.threads);
    ensure_directory(cfg.out_dir);
    return cfg;
}

int cmd_solve(const CommonArgs& args) {
    RunConfig cfg = load(args);
    auto model = make_model(cfg);
    LagrangianView view(model);
    std::uint64_t seed = args.seed_set ? args.seed : (cfg.seeds.empty() ? 1 : cfg.seeds[0]);
    auto datum = make_datum(cfg, model.dim, seed);
    auto spec = make_grid(cfg, model.dim);
    SolveOptions opt;
    opt.threads = cfg.threads;
    auto res = solve(datum, view, cfg.time, spec, opt);
    write_solve_csv(cfg.out_dir + "/solve.csv", res);
    write_solve_sidecar(cfg.out_dir + "/solve.json", res, model.name, cfg);
    std::printf("solve: %lld grid points, t=%g, out=%s\n",
                static_cast<long long>(spec.total()), cfg.time, cfg.out_dir.c_str());
    return 0;
}

int cmd_bv_check(const CommonArgs& args) {
    RunConfig cfg = load(args);
    auto model = make_model(cfg);
    LagrangianView view(model);
    double M = cfg.datum ? cfg.datum->M : 1.0;
    ConvexityModuli moduli(view, M);
    auto spec = make_grid(cfg, model.dim);
    Box omega = cfg.omega ? *cfg.omega : Box::cube(model.dim, 1.0);

    std::vector<VerdictRow> rows;
    bool any_failed = false;
    for (int i = 0; i < cfg.bv_check.seeds; ++i) {
        std::uint64_t seed = cfg.bv_check.seed_base + i;
        auto datum = make_datum(cfg, model.dim, seed);
        SolveOptions opt;
        opt.threads = cfg.threads;
        auto res = solve(datum, view, cfg.bv_check.t, spec, opt);
        auto v = bv_bound_check(res, moduli, omega, cfg.bv_check.h_ref);
        VerdictRow row;
        row.seed = seed;
        row.M = M;
        row.t = cfg.bv_check.t;
        row.lhs = v.lhs;
        row.rhs = v.rhs;
        row.applicable = v.applicable;
        row.holds = v.holds;
        rows.push_back(row);
        if (v.applicable && !v.holds) any_failed = true;
    }
    write_verdicts_csv(cfg.out_dir + "/bv_verdicts.csv", rows);
    std::printf("bv-check: %zu verdict rows, out=%s\n", rows.size(), cfg.out_dir.c_str());
    if (any_failed) {
        std::fprintf(stderr, "bv-check: a verdict failed beyond slack\n");
        return 4;
    }
    return 0;
}

int cmd_entropy(const CommonArgs& args) {
    RunConfig cfg = load(args);
    auto model = make_model(cfg);
    LagrangianView view(model);
    const auto& ec = cfg.entropy;
    std::vector<double> eps = !ec.epsilons.empty() ? ec.epsilons : cfg.epsilons;
    if (eps.empty()) throw config_error("entropy: empty epsilon grid");
    ConvexityModuli moduli(view, ec.M);

    // sampled solution set
    FunctionClassSample sample;
    sample.grid = GridSpec::uniform(Box::cube(model.dim, ec.R), ec.sample_grid);
    sample.tag = SampleTag::SolutionSet;
    auto solve_spec = GridSpec::uniform(Box::cube(model.dim, ec.R * 1.5),
                                        ec.sample_grid / 2 * 3 | 1);
    for (int i = 0; i < ec.sample_count; ++i) {
        std::uint64_t seed = (cfg.seeds.empty() ? 1 : cfg.seeds[0]) + i;
        auto datum = datum_random_pl(model.dim, ec.M, ec.m, seed);
        SolveOptions opt;
        opt.threads = cfg.threads;
        auto res = solve(datum, view, ec.T, solve_spec, opt);
        GridFunction u(sample.grid);
        for (std::int64_t f = 0; f < sample.grid.total(); ++f)
            u.at(f) = res.u.interpolate(sample.grid.point(f));
        sample.members.push_back(std::move(u));
    }
    auto metric = ec.metric == "L1" ? EntropyMetric::L1 : EntropyMetric::W11;
    auto rep = make_entropy_report(moduli, ec.T, ec.R, ec.m, ec.M, sample, eps, metric);
    write_entropy_report(cfg.out_dir + "/entropy.json", cfg.out_dir + "/entropy.csv", rep, cfg);
    std::printf("entropy: %zu eps values, theoretical slopes lower=%.3f upper=%.3f, out=%s\n",
                eps.size(), rep.lower_fit.slope, rep.upper_fit.slope, cfg.out_dir.c_str());
    return 0;
}

int cmd_counterexample(const CommonArgs& args) {
    RunConfig cfg = load(args);
    const auto& cc = cfg.counterexample;
    auto variant =
        cc.variant == "curve_matched" ? ConstructionL::CurveMatched : ConstructionL::Analytic;
    auto result = blowup_exponent(cc.ell, cc.deltas, variant, cc.h_factor, cfg.threads);
    write_counterexample_outputs(cfg.out_dir + "/counterexample.csv",
                                 cfg.out_dir + "/counterexample.json", result, cfg);
    std::printf("counterexample: exponent=%.4f (drift-free %.4f), monotone=%d, out=%s\n",
                result.exponent, result.drift_free_exponent, result.tv_monotone ? 1 : 0,
                cfg.out_dir.c_str());
    return 0;
}

int cmd_legendre(const CommonArgs& args) {
    RunConfig cfg = load(args);
    auto model = make_model(cfg);
    LagrangianView view(model);
    auto spec = make_grid(cfg, model.dim);
    auto out_path = cfg.out_dir + "/legendre.csv";
    std::FILE* f = std::fopen(out_path.c_str(), "w");
    if (!f) throw input_error("legendre: cannot open " + out_path);
    std::fprintf(f, "# q..., L, DL...\n");
    for (std::int64_t i = 0; i < spec.total(); ++i) {
        Vec q = spec.point(i);
        auto lr = view.legendre_full(q);
        for (int c = 0; c < model.dim; ++c) std::fprintf(f, "%s,", format_full(q[c]).c_str());
        std::fprintf(f, "%s", format_full(lr.value).c_str());
        for (int c = 0; c < model.dim; ++c)
            std::fprintf(f, ",%s", format_full(lr.maximizer[c]).c_str());
        std::fprintf(f, "\n");
    }
    std::fclose(f);
    std::printf("legendre: %lld rows, out=%s\n", static_cast<long long>(spec.total()),
                cfg.out_dir.c_str());
    return 0;
}

int cmd_moduli(const CommonArgs& args) {
    RunConfig cfg = load(args);
    auto model = make_model(cfg);
    LagrangianView view(model);
    double M = cfg.datum ? cfg.datum->M : 1.0;
    ConvexityModuli moduli(view, M);
    nlohmann::json j = run_metadata(cfg);
    j["M"] = M;
    j["lambda_M"] = moduli.lambda_M();
    j["Lambda_M"] = moduli.Lambda_M();
    j["gamma_M"] = moduli.gamma();
    j["gamma_applicable"] = moduli.gamma_applicable();
    nlohmann::json rows = nlohmann::json::array();
    for (int i = 1; i <= 64; ++i) {
        double s = 2 * M * i / 64.0;
        rows.push_back({{"s", s}, {"psi", moduli.psi(s)}, {"phi", moduli.phi(s)}});
    }
    j["tables"] = rows;
    std::ofstream out(cfg.out_dir + "/moduli.json");
    out << j.dump(2) << "\n";
    std::printf("moduli: M=%g Lambda=%g gamma=%g applicable=%d, out=%s\n", M,
                moduli.Lambda_M(), moduli.gamma(), moduli.gamma_applicable() ? 1 : 0,
                cfg.out_dir.c_str());
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Hopf-Lax laboratory: slope-field BV bounds, metric entropy, and the "
                 "quartic counterexample"};
    app.require_subcommand(1);

    CommonArgs args;
    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", args.config_path, "JSON config path")->required();
        sub->add_option("--out", args.out_override, "output directory override");
        sub->add_option("--seed", args.seed, "seed override")->each([&](const std::string&) {
            args.seed_set = true;
        });
        sub->add_option("--threads", args.threads, "worker thread count");
        sub->add_option("--format", args.format, "csv|json (both are always written)");
    };

    auto* solve_cmd = app.add_subcommand("solve", "Hopf-Lax solve on a grid");
    auto* bv_cmd = app.add_subcommand("bv-check", "BV-bound verdicts over seeds");
    auto* entropy_cmd = app.add_subcommand("entropy", "covering/packing counts and bounds");
    auto* ce_cmd = app.add_subcommand("counterexample", "TV blow-up sweep");
    auto* leg_cmd = app.add_subcommand("legendre", "Legendre transform table");
    auto* mod_cmd = app.add_subcommand("moduli", "convexity moduli table");
    for (auto* sub : {solve_cmd, bv_cmd, entropy_cmd, ce_cmd, leg_cmd, mod_cmd})
        add_common(sub);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (solve_cmd->parsed()) return cmd_solve(args);
        if (bv_cmd->parsed()) return cmd_bv_check(args);
        if (entropy_cmd->parsed()) return cmd_entropy(args);
        if (ce_cmd->parsed()) return cmd_counterexample(args);
        if (leg_cmd->parsed()) return cmd_legendre(args);
        if (mod_cmd->parsed()) return cmd_moduli(args);
    } catch (const config_error& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const input_error& e) {
        std::fprintf(stderr, "input error: %s\n", e.what());
        return 2;
    } catch (const numeric_error& e) {
        std::fprintf(stderr, "numeric failure: %s\n", e.what());
        return 3;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 3;
    }
    return 2;
}
