#include "hjlab/config.hpp"

#include <fstream>
#include <set>

#include "hjlab/util.hpp"

namespace hjlab {

namespace {

using nlohmann::json;

void require_keys(const json& j, const std::set<std::string>& allowed,
                  const std::string& where) {
    if (!j.is_object()) throw config_error(where + ": expected an object");
    for (auto it = j.begin(); it != j.end(); ++it)
        if (!allowed.count(it.key()))
            throw config_error(where + ": unknown key '" + it.key() + "'");
}

Box parse_box(const json& j, const std::string& where) {
    if (!j.is_array() || j.empty() || j.size() > kMaxDim)
        throw config_error(where + ": expected [[lo,hi],...]");
    Vec lo(static_cast<int>(j.size())), hi(static_cast<int>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i) {
        if (!j[i].is_array() || j[i].size() != 2)
            throw config_error(where + ": each axis needs [lo, hi]");
        lo[static_cast<int>(i)] = j[i][0].get<double>();
        hi[static_cast<int>(i)] = j[i][1].get<double>();
    }
    return Box(lo, hi);
}

} // namespace

RunConfig parse_config(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const std::exception& e) {
        throw config_error(std::string("config: parse failure: ") + e.what());
    }
    require_keys(j, {"hamiltonian", "datum", "grid", "time", "omega", "epsilons", "seeds",
                     "out", "threads", "entropy", "counterexample", "bv_check"},
                 "config");
    RunConfig cfg;
    cfg.raw = j;
    cfg.canonical = j.dump();
    cfg.hash = fnv1a(cfg.canonical);

    if (j.contains("hamiltonian")) {
        require_keys(j["hamiltonian"], {"kind", "k", "dim", "name"}, "hamiltonian");
        cfg.hamiltonian = j["hamiltonian"];
    }
    if (j.contains("datum")) {
        const auto& d = j["datum"];
        require_keys(d, {"family", "a", "offset", "value", "M", "m", "pieces"}, "datum");
        DatumConfig dc;
        dc.family = d.value("family", "abs");
        if (d.contains("a")) dc.a = d["a"].get<std::vector<double>>();
        dc.offset = d.value("offset", 0.0);
        dc.value = d.value("value", 0.0);
        dc.M = d.value("M", 1.0);
        dc.m = d.value("m", 1.0);
        dc.pieces = d.value("pieces", 6);
        cfg.datum = dc;
    }
    if (j.contains("grid")) {
        require_keys(j["grid"], {"box", "points_per_axis", "spacing"}, "grid");
        cfg.grid = j["grid"];
    }
    if (j.contains("time")) {
        cfg.time = j["time"].get<double>();
        if (!(cfg.time > 0)) throw config_error("config: time must be > 0");
    }
    if (j.contains("omega")) cfg.omega = parse_box(j["omega"], "omega");
    if (j.contains("epsilons")) {
        cfg.epsilons = j["epsilons"].get<std::vector<double>>();
        for (double e : cfg.epsilons)
            if (!(e > 0)) throw config_error("config: epsilons must be > 0");
    }
    if (j.contains("seeds")) {
        if (j["seeds"].is_array()) {
            cfg.seeds = j["seeds"].get<std::vector<std::uint64_t>>();
        } else {
            require_keys(j["seeds"], {"count", "base"}, "seeds");
            int count = j["seeds"].value("count", 1);
            std::uint64_t base = j["seeds"].value("base", 1);
            for (int i = 0; i < count; ++i) cfg.seeds.push_back(base + i);
        }
    }
    if (j.contains("out")) cfg.out_dir = j["out"].get<std::string>();
    if (j.contains("threads")) cfg.threads = j["threads"].get<int>();

    if (j.contains("entropy")) {
        const auto& e = j["entropy"];
        require_keys(e, {"T", "R", "m", "M", "metric", "sample_count", "sample_grid",
                         "epsilons"},
                     "entropy");
        cfg.entropy.T = e.value("T", 1.0);
        cfg.entropy.R = e.value("R", 1.0);
        cfg.entropy.m = e.value("m", 1.0);
        cfg.entropy.M = e.value("M", 1.0);
        cfg.entropy.metric = e.value("metric", "W11");
        cfg.entropy.sample_count = e.value("sample_count", 24);
        cfg.entropy.sample_grid = e.value("sample_grid", 301);
        if (e.contains("epsilons"))
            cfg.entropy.epsilons = e["epsilons"].get<std::vector<double>>();
        if (cfg.entropy.metric != "L1" && cfg.entropy.metric != "W11")
            throw config_error("entropy: metric must be L1 or W11");
    }
    if (j.contains("counterexample")) {
        const auto& c = j["counterexample"];
        require_keys(c, {"ell", "deltas", "variant", "h_factor"}, "counterexample");
        cfg.counterexample.ell = c.value("ell", 0.25);
        if (c.contains("deltas"))
            cfg.counterexample.deltas = c["deltas"].get<std::vector<double>>();
        cfg.counterexample.variant = c.value("variant", "analytic");
        cfg.counterexample.h_factor = c.value("h_factor", 12.0);
        if (cfg.counterexample.variant != "analytic" && cfg.counterexample.variant != "curve_matched")
            throw config_error("counterexample: variant must be analytic or curve_matched");
    }
    if (j.contains("bv_check")) {
        const auto& b = j["bv_check"];
        require_keys(b, {"h_ref", "t", "seeds", "seed_base"}, "bv_check");
        cfg.bv_check.h_ref = b.value("h_ref", 0.1);
        cfg.bv_check.t = b.value("t", 1.0);
        cfg.bv_check.seeds = b.value("seeds", 50);
        cfg.bv_check.seed_base = b.value("seed_base", 1);
    }
    return cfg;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw config_error("config: cannot open " + path);
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return parse_config(text);
}

HamiltonianModel make_model(const RunConfig& cfg) {
    if (!cfg.hamiltonian) throw config_error("config: hamiltonian section required");
    const auto& h = *cfg.hamiltonian;
    std::string kind = h.value("kind", "power_norm");
    if (kind == "power_norm") {
        int k = h.value("k", 1);
        int dim = h.value("dim", 1);
        return HamiltonianModel::power_norm(k, dim);
    }
    if (kind == "quartic2d") return HamiltonianModel::quartic2d();
    if (kind == "custom") {
        // named registry: custom evaluators cannot be serialized
        std::string name = h.value("name", "");
        if (name == "aniso_quartic") {
            auto m = HamiltonianModel::custom(
                2,
                [](const Vec& p) {
                    return (27.0 / 256.0) * p[0] * p[0] * p[0] * p[0] + 0.25 * p[1] * p[1];
                },
                [](const Vec& p) {
                    return Vec{(27.0 / 64.0) * p[0] * p[0] * p[0], 0.5 * p[1]};
                },
                "aniso_quartic");
            m.normalized = true;
            return m;
        }
        if (name == "shifted_quadratic") {
            return HamiltonianModel::custom(
                h.value("dim", 1),
                [](const Vec& p) { return norm2(p) + 3.0; }, nullptr, "shifted_quadratic");
        }
        throw config_error("config: unknown custom model '" + name + "'");
    }
    throw config_error("config: unknown hamiltonian kind '" + kind + "'");
}

InitialDatum make_datum(const RunConfig& cfg, int dim, std::uint64_t seed) {
    if (!cfg.datum) throw config_error("config: datum section required");
    const auto& d = *cfg.datum;
    if (d.family == "linear") {
        Vec a(dim);
        if (static_cast<int>(d.a.size()) != dim)
            throw config_error("datum: slope 'a' must match the model dimension");
        for (int i = 0; i < dim; ++i) a[i] = d.a[i];
        return datum_linear(a, d.offset);
    }
    if (d.family == "abs") return datum_abs(dim);
    if (d.family == "constant") return datum_constant(dim, d.value);
    if (d.family == "random_pl") return datum_random_pl(dim, d.M, d.m, seed, d.pieces);
    throw config_error("datum: unknown family '" + d.family + "'");
}

GridSpec make_grid(const RunConfig& cfg, int dim) {
    if (!cfg.grid) throw config_error("config: grid section required");
    const auto& g = *cfg.grid;
    Box box = g.contains("box") ? parse_box(g["box"], "grid.box") : Box::cube(dim, 1.0);
    if (box.dim() != dim) throw config_error("grid: box dimension mismatch");
    if (g.contains("spacing")) return GridSpec::with_spacing(box, g["spacing"].get<double>());
    int ppa = g.value("points_per_axis", 101);
    return GridSpec::uniform(box, ppa);
}

} // namespace hjlab
