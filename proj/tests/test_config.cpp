#include "doctest.h"

#include "hjlab/config.hpp"
#include "hjlab/io.hpp"

using namespace hjlab;

TEST_CASE("config parsing: strict keys and values") {
    std::string good = R"({
        "hamiltonian": {"kind": "power_norm", "k": 1, "dim": 2},
        "datum": {"family": "linear", "a": [0.3, -0.2]},
        "grid": {"box": [[-1, 1], [-1, 1]], "points_per_axis": 41},
        "time": 1.0,
        "omega": [[-1, 1], [-1, 1]],
        "seeds": [1, 2, 3],
        "out": "out_test"
    })";
    auto cfg = parse_config(good);
    CHECK(cfg.time == 1.0);
    CHECK(cfg.seeds.size() == 3);
    CHECK(cfg.hash != 0);
    auto model = make_model(cfg);
    CHECK(model.dim == 2);
    auto datum = make_datum(cfg, 2, 1);
    CHECK(datum.lipschitz == doctest::Approx(std::sqrt(0.09 + 0.04)));
    auto grid = make_grid(cfg, 2);
    CHECK(grid.total() == 41 * 41);

    CHECK_THROWS_AS(parse_config(R"({"unknown_section": 1})"), config_error);
    CHECK_THROWS_AS(parse_config(R"({"hamiltonian": {"kind": "power_norm", "oops": 2}})"),
                    config_error);
    CHECK_THROWS_AS(parse_config(R"({"time": -1})"), config_error);
    CHECK_THROWS_AS(parse_config("not json"), config_error);
}

TEST_CASE("config: hamiltonian kinds") {
    auto q = parse_config(R"({"hamiltonian": {"kind": "quartic2d"}})");
    CHECK(make_model(q).kind == HamiltonianKind::Quartic2D);

    auto c = parse_config(R"({"hamiltonian": {"kind": "custom", "name": "aniso_quartic"}})");
    auto cm = make_model(c);
    CHECK(cm.kind == HamiltonianKind::Custom);
    CHECK(eval_H(cm, Vec{2.0, 2.0}) == doctest::Approx((27.0 / 256.0) * 16 + 1.0));

    CHECK_THROWS_AS(make_model(parse_config(R"({"hamiltonian": {"kind": "custom"}})")),
                    config_error);
    CHECK_THROWS_AS(make_model(parse_config(R"({"hamiltonian": {"kind": "cubic"}})")),
                    config_error);
}

TEST_CASE("config: seed expansion and datum families") {
    auto cfg = parse_config(R"({
        "datum": {"family": "random_pl", "M": 1.0, "m": 0.5},
        "seeds": {"count": 5, "base": 10}
    })");
    CHECK(cfg.seeds.size() == 5);
    CHECK(cfg.seeds[0] == 10);
    auto d = make_datum(cfg, 1, cfg.seeds[0]);
    CHECK(d.lipschitz == 1.0);

    auto c2 = parse_config(R"({"datum": {"family": "constant", "value": 2.5}})");
    CHECK(make_datum(c2, 2, 1)(Vec{0.4, 0.4}) == 2.5);

    CHECK_THROWS_AS(make_datum(parse_config(R"({"datum": {"family": "wavelet"}})"), 1, 1),
                    config_error);
}

TEST_CASE("config hash is stable and content-sensitive") {
    auto a = parse_config(R"({"time": 1.0})");
    auto b = parse_config(R"({"time": 1.0})");
    auto c = parse_config(R"({"time": 2.0})");
    CHECK(a.hash == b.hash);
    CHECK(a.hash != c.hash);
}
