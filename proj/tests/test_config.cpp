#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include <pricesim/config.hpp>
#include <pricesim/presets.hpp>

using namespace pricesim;

namespace {

nlohmann::json minimal_run_json() {
    return nlohmann::json::parse(R"({
      "runs": [{
        "label": "demo",
        "model": "boltzmann",
        "grid": {"x_min": 0.0, "x_max": 1.0, "n_cells": 100},
        "params": {"k": 10.0, "a": 0.02, "dt": 1e-3, "t_end": 0.1},
        "initial_data": {
          "f": [{"interval": [0.1, 0.4], "coeffs": [0.0, 1.0]}],
          "g": [{"interval": [0.6, 0.9], "coeffs": [1.0]}]
        }
      }]
    })");
}

}  // namespace

TEST_CASE("a minimal config parses with defaults applied") {
    auto cfg = parse_config(minimal_run_json());
    REQUIRE(cfg.runs.size() == 1);
    CHECK(cfg.runs[0].label == "demo");
    CHECK(cfg.runs[0].model == ModelKind::boltzmann);
    CHECK(cfg.runs[0].sigma == Catch::Approx(std::sqrt(2.0)));
    CHECK(cfg.runs[0].observer_stride == 1);
    CHECK(cfg.output.precision == 17);
    CHECK(cfg.comparisons.empty());  // empty observers/comparisons are valid
}

TEST_CASE("schema violations carry field-addressed messages") {
    auto doc = minimal_run_json();
    doc["runs"][0]["params"].erase("dt");
    CHECK_THROWS_WITH(parse_config(doc), Catch::Matchers::ContainsSubstring("runs[0].params"));

    doc = minimal_run_json();
    doc["runs"][0]["params"]["a"] = 0.0213;  // not a multiple of h = 0.01
    CHECK_THROWS_WITH(parse_config(doc), Catch::Matchers::ContainsSubstring("params.a"));

    doc = minimal_run_json();
    doc["runs"][0]["model"] = "spectral";
    CHECK_THROWS_WITH(parse_config(doc), Catch::Matchers::ContainsSubstring("model"));

    doc = minimal_run_json();
    doc["comparisons"] = {{{"a", "demo"}, {"b", "ghost"}}};
    CHECK_THROWS_WITH(parse_config(doc), Catch::Matchers::ContainsSubstring("ghost"));

    doc = minimal_run_json();
    doc["runs"][0]["initial_data"]["f"][0]["coeffs"] = {0.0, -1.0};  // negative on nodes
    CHECK_THROWS(parse_config(doc).runs[0].f_init.to_field(Grid(0, 1, 100)));
}

TEST_CASE("duplicate labels are rejected") {
    auto doc = minimal_run_json();
    doc["runs"].push_back(doc["runs"][0]);
    CHECK_THROWS_WITH(parse_config(doc), Catch::Matchers::ContainsSubstring("duplicate"));
}

TEST_CASE("config round-trips through its JSON form") {
    auto cfg = preset_config("example1", PresetScale::desk);
    auto cfg2 = parse_config(config_to_json(cfg));
    REQUIRE(cfg2.runs.size() == cfg.runs.size());
    for (std::size_t i = 0; i < cfg.runs.size(); ++i) {
        CHECK(cfg2.runs[i].label == cfg.runs[i].label);
        CHECK(cfg2.runs[i].k == cfg.runs[i].k);
        CHECK(cfg2.runs[i].a == cfg.runs[i].a);
        CHECK(cfg2.runs[i].dt == cfg.runs[i].dt);
        CHECK(cfg2.runs[i].t_end == cfg.runs[i].t_end);
    }
    CHECK(cfg2.comparisons.size() == cfg.comparisons.size());
}

TEST_CASE("preset parameter tables match the published experiments") {
    // first experiment: touching-support data on [0,1], h = 0.002, a = 10h
    auto e1 = preset_config("example1", PresetScale::paper);
    REQUIRE(e1.runs.size() == 2);
    const auto& b1 = e1.runs[0];
    CHECK(b1.model == ModelKind::boltzmann);
    CHECK(b1.k == 1e6);
    CHECK(b1.grid.n_cells == 500);
    CHECK((b1.grid.x_max - b1.grid.x_min) / b1.grid.n_cells == Catch::Approx(0.002));
    CHECK(b1.a == Catch::Approx(10 * 0.002));
    CHECK(b1.dt == Catch::Approx(1e-6));  // dt = 1/k
    CHECK(b1.sigma * b1.sigma / 2.0 == Catch::Approx(1.0));  // unit diffusion
    CHECK(e1.runs[1].model == ModelKind::fbp);

    // buyer datum: 1 on [0, 0.5], ramp 6 - 10x on [0.5, 0.6]; vendor ramp
    // 10x - 6 on [0.6, 1]
    CHECK(b1.f_init(0.25) == Catch::Approx(1.0));
    CHECK(b1.f_init(0.55) == Catch::Approx(0.5));
    CHECK(b1.f_init(0.7) == 0.0);
    CHECK(b1.g_init(0.8) == Catch::Approx(2.0));
    CHECK(b1.g_init(0.5) == 0.0);

    // second experiment: h = 1e-3, k in {1e5, 1e6}, parabolic bumps
    auto e2 = preset_config("example2", PresetScale::paper);
    REQUIRE(e2.runs.size() == 2);
    CHECK(e2.runs[0].grid.n_cells == 1000);
    CHECK(e2.runs[0].k == 1e5);
    CHECK(e2.runs[1].k == 1e6);
    CHECK(e2.runs[0].dt == Catch::Approx(1e-5));
    CHECK(e2.runs[1].dt == Catch::Approx(1e-6));
    CHECK(e2.runs[0].a == Catch::Approx(0.01));
    CHECK(e2.runs[0].f_init(0.4) == Catch::Approx(15.0 * 0.1 * 0.1));
    CHECK(e2.runs[0].g_init(0.675) == Catch::Approx(15.0 * 0.125 * 0.125));

    // third experiment: switched supports, k = 500, h = 2e-3, dt = 2e-4,
    // stated here in fast-time units tau = k t
    auto e3 = preset_config("example3", PresetScale::paper);
    REQUIRE(e3.runs.size() == 1);
    const auto& l3 = e3.runs[0];
    CHECK(l3.model == ModelKind::layer);
    CHECK(l3.epsilon == Catch::Approx(1.0 / 500.0));
    CHECK(l3.grid.n_cells == 500);
    CHECK(l3.a == Catch::Approx(10 * 2e-3));
    CHECK(l3.dt == Catch::Approx(500.0 * 2e-4));    // dtau = k dt
    CHECK(l3.t_end == Catch::Approx(500.0 * 1.0));  // tau horizon = k * 1
    CHECK(l3.f_init(0.8) == Catch::Approx(15.0 * 0.15 * 0.15));
    CHECK(l3.g_init(0.375) == Catch::Approx(12.0 * 0.125 * 0.125));

    // fourth experiment: domain [0, 20], a = h = 2e-5, k = 5e4, c = k a = 1
    auto e4 = preset_config("example4", PresetScale::paper);
    REQUIRE(e4.runs.size() == 3);
    CHECK(e4.runs[0].grid.x_max == 20.0);
    CHECK(e4.runs[0].grid.n_cells == 1000000);
    CHECK(e4.runs[0].a == Catch::Approx(2e-5));
    CHECK(e4.runs[0].k == Catch::Approx(5e4));
    CHECK(e4.runs[0].dt == Catch::Approx(2e-5));
    CHECK(e4.runs[0].k * e4.runs[0].a == Catch::Approx(1.0));
    CHECK(e4.runs[1].model == ModelKind::limit);
    CHECK(e4.runs[1].c == Catch::Approx(1.0));
    CHECK(e4.runs[2].model == ModelKind::consecutive);
    CHECK(e4.runs[0].f_init(9.25) == Catch::Approx(1.0));
    CHECK(e4.runs[0].f_init(9.75) == Catch::Approx(0.5));
    CHECK(e4.runs[0].g_init(10.5) == Catch::Approx(1.0));
    CHECK(e4.runs[0].g_init(11.5) == 0.0);

    // desk scales satisfy the collision guard with the initial data
    for (const char* name : {"example1", "example2", "example4"}) {
        auto cfg = preset_config(name, PresetScale::desk);
        for (const auto& run : cfg.runs) {
            if (run.model != ModelKind::boltzmann) continue;
            Grid grid = run.grid.to_grid(run.dt);
            double bound = std::max(max_value(run.f_init.to_field(grid)),
                                    max_value(run.g_init.to_field(grid)));
            CHECK(run.dt * run.k * bound <= 1.0);
            CHECK_FALSE(run.relax_collision_guard);
        }
    }
}

TEST_CASE("unknown presets and scales are rejected") {
    CHECK_THROWS(preset_config("example9", PresetScale::desk));
    CHECK_THROWS(scale_from_string("huge"));
    CHECK(scale_from_string("paper") == PresetScale::paper);
}
