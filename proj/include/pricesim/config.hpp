#pragma once

// Declarative experiment configuration: a single JSON document names the
// model, grid, parameters, initial data, observers and comparisons of each
// run. Built-in presets expand to the four bundled experiments.

#include <cmath>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "grid.hpp"
#include "params.hpp"
#include "piecewise.hpp"

namespace pricesim {

enum class ModelKind { boltzmann, fbp, layer, limit, consecutive };

inline const char* to_string(ModelKind m) {
    switch (m) {
        case ModelKind::boltzmann: return "boltzmann";
        case ModelKind::fbp: return "fbp";
        case ModelKind::layer: return "layer";
        case ModelKind::limit: return "limit";
        default: return "consecutive";
    }
}

inline ModelKind model_from_string(const std::string& s) {
    if (s == "boltzmann") return ModelKind::boltzmann;
    if (s == "fbp") return ModelKind::fbp;
    if (s == "layer") return ModelKind::layer;
    if (s == "limit") return ModelKind::limit;
    if (s == "consecutive") return ModelKind::consecutive;
    throw std::invalid_argument("unknown model '" + s + "'");
}

struct GridSpec {
    double x_min = 0.0;
    double x_max = 1.0;
    int n_cells = 100;

    Grid to_grid(double dt) const { return Grid(x_min, x_max, n_cells, dt); }
};

struct RunSpec {
    std::string label;
    ModelKind model = ModelKind::boltzmann;
    GridSpec grid;
    double k = 0.0;
    double a = 0.0;
    double sigma = 1.4142135623730951;
    double dt = 1e-3;
    double t_end = 1.0;
    double c = 0.0;        // limit / consecutive drift strength
    double epsilon = 0.0;  // layer diffusion scale
    bool relax_collision_guard = false;
    PiecewiseSpec f_init;
    PiecewiseSpec g_init;
    int observer_stride = 1;
    std::vector<double> field_times;  // snapshot times (tau for layer runs)

    ModelParams model_params() const {
        return ModelParams{k, a, sigma, dt, t_end, relax_collision_guard};
    }
    LimitParams limit_params() const { return LimitParams{c, sigma, dt, t_end}; }
};

enum class ComparisonKind { price, fields };

struct ComparisonSpec {
    std::string label_a;
    std::string label_b;
    ComparisonKind kind = ComparisonKind::price;
    double burn_in = 0.1;  // price comparisons only
};

struct OutputSpec {
    std::string directory = "out";
    int precision = 17;
};

struct ExperimentConfig {
    std::vector<RunSpec> runs;
    std::vector<ComparisonSpec> comparisons;
    OutputSpec output;
};

namespace cfgdetail {

using nlohmann::json;

[[noreturn]] inline void fail(const std::string& where, const std::string& what) {
    throw std::invalid_argument(where + ": " + what);
}

inline double need_number(const json& j, const std::string& where, const char* key) {
    if (!j.contains(key)) fail(where, std::string("missing field '") + key + "'");
    if (!j[key].is_number()) fail(where + "." + key, "expected a number");
    return j[key].get<double>();
}

inline double opt_number(const json& j, const char* key, double fallback) {
    if (!j.contains(key)) return fallback;
    return j[key].get<double>();
}

inline PiecewiseSpec parse_piecewise(const json& j, const std::string& where) {
    if (!j.is_array()) fail(where, "expected an array of segments");
    PiecewiseSpec spec;
    int idx = 0;
    for (const auto& seg : j) {
        std::string sw = where + "[" + std::to_string(idx++) + "]";
        if (!seg.contains("interval") || !seg["interval"].is_array() ||
            seg["interval"].size() != 2)
            fail(sw, "segment needs 'interval': [lo, hi]");
        if (!seg.contains("coeffs") || !seg["coeffs"].is_array() ||
            seg["coeffs"].empty() || seg["coeffs"].size() > 3)
            fail(sw, "segment needs 'coeffs': [c0, c1?, c2?]");
        PiecewiseSegment s;
        s.lo = seg["interval"][0].get<double>();
        s.hi = seg["interval"][1].get<double>();
        for (std::size_t i = 0; i < seg["coeffs"].size(); ++i)
            s.coeffs[i] = seg["coeffs"][i].get<double>();
        spec.segments.push_back(s);
    }
    try {
        spec.validate();
    } catch (const std::exception& e) {
        fail(where, e.what());
    }
    return spec;
}

inline json piecewise_to_json(const PiecewiseSpec& spec) {
    json arr = json::array();
    for (const auto& s : spec.segments) {
        json seg;
        seg["interval"] = {s.lo, s.hi};
        seg["coeffs"] = {s.coeffs[0], s.coeffs[1], s.coeffs[2]};
        arr.push_back(seg);
    }
    return arr;
}

}  // namespace cfgdetail

inline ExperimentConfig parse_config(const nlohmann::json& doc) {
    using cfgdetail::fail;
    using cfgdetail::need_number;
    using cfgdetail::opt_number;
    using nlohmann::json;

    ExperimentConfig cfg;
    if (doc.contains("output")) {
        const auto& out = doc["output"];
        if (out.contains("directory")) cfg.output.directory = out["directory"].get<std::string>();
        if (out.contains("precision")) cfg.output.precision = out["precision"].get<int>();
        if (cfg.output.precision < 1 || cfg.output.precision > 17)
            fail("output.precision", "must be between 1 and 17");
    }
    if (!doc.contains("runs") || !doc["runs"].is_array() || doc["runs"].empty())
        fail("runs", "at least one run is required");

    GridSpec default_grid;
    bool have_default_grid = false;
    if (doc.contains("grid")) {
        const auto& g = doc["grid"];
        default_grid.x_min = need_number(g, "grid", "x_min");
        default_grid.x_max = need_number(g, "grid", "x_max");
        default_grid.n_cells = static_cast<int>(need_number(g, "grid", "n_cells"));
        have_default_grid = true;
    }

    int idx = 0;
    for (const auto& r : doc["runs"]) {
        std::string where = "runs[" + std::to_string(idx++) + "]";
        RunSpec run;
        if (!r.contains("label")) fail(where, "missing field 'label'");
        run.label = r["label"].get<std::string>();
        if (!r.contains("model")) fail(where, "missing field 'model'");
        try {
            run.model = model_from_string(r["model"].get<std::string>());
        } catch (const std::exception& e) {
            fail(where + ".model", e.what());
        }

        if (r.contains("grid")) {
            const auto& g = r["grid"];
            run.grid.x_min = need_number(g, where + ".grid", "x_min");
            run.grid.x_max = need_number(g, where + ".grid", "x_max");
            run.grid.n_cells = static_cast<int>(need_number(g, where + ".grid", "n_cells"));
        } else if (have_default_grid) {
            run.grid = default_grid;
        } else {
            fail(where, "missing field 'grid' (and no top-level default)");
        }
        if (run.grid.n_cells < 4) fail(where + ".grid.n_cells", "needs at least 4 cells");
        if (!(run.grid.x_max > run.grid.x_min))
            fail(where + ".grid", "needs x_max > x_min");

        if (!r.contains("params")) fail(where, "missing field 'params'");
        const auto& p = r["params"];
        run.dt = need_number(p, where + ".params", "dt");
        run.t_end = need_number(p, where + ".params", "t_end");
        run.k = opt_number(p, "k", 0.0);
        run.a = opt_number(p, "a", 0.0);
        run.sigma = opt_number(p, "sigma", run.sigma);
        run.c = opt_number(p, "c", 0.0);
        run.epsilon = opt_number(p, "epsilon", 0.0);
        if (p.contains("relax_collision_guard"))
            run.relax_collision_guard = p["relax_collision_guard"].get<bool>();

        if (!(run.dt > 0.0)) fail(where + ".params.dt", "must be positive");
        if (run.t_end < 0.0) fail(where + ".params.t_end", "must be non-negative");
        if (run.k < 0.0) fail(where + ".params.k", "must be non-negative");
        if (!(run.sigma > 0.0)) fail(where + ".params.sigma", "must be positive");
        if (run.epsilon < 0.0) fail(where + ".params.epsilon", "must be non-negative");

        // a/h integrality is enforced at load time
        double h = (run.grid.x_max - run.grid.x_min) / run.grid.n_cells;
        if (run.a > 0.0) {
            double ratio = run.a / h;
            if (std::abs(ratio - std::llround(ratio)) > 1e-9 * std::max(1.0, ratio))
                fail(where + ".params.a",
                     "not an integer multiple of the mesh width h = " + std::to_string(h));
        }
        bool needs_a = run.model == ModelKind::boltzmann || run.model == ModelKind::fbp ||
                       run.model == ModelKind::layer;
        if (needs_a && run.model != ModelKind::boltzmann && !(run.a > 0.0))
            fail(where + ".params.a", "must be positive for this model");

        if (!r.contains("initial_data")) fail(where, "missing field 'initial_data'");
        const auto& init = r["initial_data"];
        if (!init.contains("f") || !init.contains("g"))
            fail(where + ".initial_data", "needs 'f' and 'g'");
        run.f_init = cfgdetail::parse_piecewise(init["f"], where + ".initial_data.f");
        run.g_init = cfgdetail::parse_piecewise(init["g"], where + ".initial_data.g");

        if (r.contains("observers")) {
            const auto& obs = r["observers"];
            if (obs.contains("stride")) {
                run.observer_stride = obs["stride"].get<int>();
                if (run.observer_stride < 1)
                    fail(where + ".observers.stride", "must be >= 1");
            }
            if (obs.contains("field_times"))
                for (const auto& t : obs["field_times"])
                    run.field_times.push_back(t.get<double>());
        }
        cfg.runs.push_back(std::move(run));
    }

    for (std::size_t i = 0; i < cfg.runs.size(); ++i)
        for (std::size_t j = i + 1; j < cfg.runs.size(); ++j)
            if (cfg.runs[i].label == cfg.runs[j].label)
                fail("runs", "duplicate label '" + cfg.runs[i].label + "'");

    if (doc.contains("comparisons")) {
        int cidx = 0;
        for (const auto& c : doc["comparisons"]) {
            std::string where = "comparisons[" + std::to_string(cidx++) + "]";
            ComparisonSpec cmp;
            if (!c.contains("a") || !c.contains("b"))
                fail(where, "needs run labels 'a' and 'b'");
            cmp.label_a = c["a"].get<std::string>();
            cmp.label_b = c["b"].get<std::string>();
            std::string kind = c.contains("kind") ? c["kind"].get<std::string>() : "price";
            if (kind == "price")
                cmp.kind = ComparisonKind::price;
            else if (kind == "fields")
                cmp.kind = ComparisonKind::fields;
            else
                fail(where + ".kind", "expected 'price' or 'fields'");
            cmp.burn_in = cfgdetail::opt_number(c, "burn_in", 0.1);
            auto known = [&](const std::string& label) {
                for (const auto& r : cfg.runs)
                    if (r.label == label) return true;
                return false;
            };
            if (!known(cmp.label_a)) fail(where + ".a", "unknown run label '" + cmp.label_a + "'");
            if (!known(cmp.label_b)) fail(where + ".b", "unknown run label '" + cmp.label_b + "'");
            cfg.comparisons.push_back(std::move(cmp));
        }
    }
    return cfg;
}

inline ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open config file '" + path + "'");
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const std::exception& e) {
        throw std::invalid_argument("config parse error in '" + path + "': " + e.what());
    }
    return parse_config(doc);
}

inline nlohmann::json config_to_json(const ExperimentConfig& cfg) {
    using nlohmann::json;
    json doc;
    doc["output"] = {{"directory", cfg.output.directory}, {"precision", cfg.output.precision}};
    doc["runs"] = json::array();
    for (const auto& r : cfg.runs) {
        json run;
        run["label"] = r.label;
        run["model"] = to_string(r.model);
        run["grid"] = {{"x_min", r.grid.x_min}, {"x_max", r.grid.x_max},
                       {"n_cells", r.grid.n_cells}};
        json params = {{"dt", r.dt}, {"t_end", r.t_end}};
        if (r.k != 0.0) params["k"] = r.k;
        if (r.a != 0.0) params["a"] = r.a;
        params["sigma"] = r.sigma;
        if (r.c != 0.0) params["c"] = r.c;
        if (r.epsilon != 0.0) params["epsilon"] = r.epsilon;
        if (r.relax_collision_guard) params["relax_collision_guard"] = true;
        run["params"] = params;
        run["initial_data"] = {{"f", cfgdetail::piecewise_to_json(r.f_init)},
                               {"g", cfgdetail::piecewise_to_json(r.g_init)}};
        json obs = {{"stride", r.observer_stride}};
        if (!r.field_times.empty()) obs["field_times"] = r.field_times;
        run["observers"] = obs;
        doc["runs"].push_back(run);
    }
    if (!cfg.comparisons.empty()) {
        doc["comparisons"] = json::array();
        for (const auto& c : cfg.comparisons) {
            doc["comparisons"].push_back(
                {{"a", c.label_a},
                 {"b", c.label_b},
                 {"kind", c.kind == ComparisonKind::price ? "price" : "fields"},
                 {"burn_in", c.burn_in}});
        }
    }
    return doc;
}

}  // namespace pricesim
