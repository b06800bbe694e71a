#pragma once

// Experiment execution: run every configured solver, write the CSV
// artifacts, then evaluate the configured comparisons. Identical configs
// produce byte-identical files. Runs execute concurrently (capped by the
// PRICESIM_THREADS environment variable); each run itself is
// single-threaded and deterministic.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "boltzmann.hpp"
#include "config.hpp"
#include "diagnostics.hpp"
#include "fbp.hpp"
#include "layer.hpp"
#include "limit.hpp"

namespace pricesim {

struct FieldSnapshot {
    double t = 0.0;
    Field f;
    Field g;
    Field mu;
};

struct RunArtifacts {
    std::string label;
    PriceSeries prices;
    std::vector<DiagnosticsRecord> records;
    std::vector<FieldSnapshot> snapshots;
    bool failed = false;
    std::string error;
};

namespace expdetail {

inline std::string format_double(double v, int precision) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*g", precision, v);
    return buf;
}

// snapshot step indices for the requested times (always includes 0 and the
// final step)
inline std::vector<std::size_t> snapshot_steps(const RunSpec& run) {
    const std::size_t steps = static_cast<std::size_t>(std::llround(run.t_end / run.dt));
    std::vector<std::size_t> idx{0, steps};
    for (double t : run.field_times) {
        auto i = static_cast<std::size_t>(std::llround(t / run.dt));
        idx.push_back(std::min(i, steps));
    }
    std::sort(idx.begin(), idx.end());
    idx.erase(std::unique(idx.begin(), idx.end()), idx.end());
    return idx;
}

}  // namespace expdetail

inline RunArtifacts execute_run(const RunSpec& run) {
    RunArtifacts art;
    art.label = run.label;
    const Grid grid = run.grid.to_grid(run.dt);
    const Field f_I = run.f_init.to_field(grid);
    const Field g_I = run.g_init.to_field(grid);
    const auto snap_steps = expdetail::snapshot_steps(run);

    auto want_snapshot = [&](std::size_t step) {
        for (auto s : snap_steps)
            if (s == step) return true;
        return false;
    };

    try {
        switch (run.model) {
            case ModelKind::boltzmann: {
                ModelParams p = run.model_params();
                BoltzmannStepper stepper(grid, p);
                BoltzmannState state{f_I, g_I, 0.0};
                const std::size_t steps =
                    static_cast<std::size_t>(std::llround(p.t_end / p.dt));
                double leak = 0.0;
                double last_price = std::numeric_limits<double>::quiet_NaN();
                bool ever = false;
                auto record = [&](const BoltzmannState& s, bool into_series) {
                    DiagnosticsRecord rec;
                    rec.t = s.t;
                    rec.mass_f = integrate(s.f);
                    rec.mass_g = integrate(s.g);
                    if (auto m = mean_price(s.f)) rec.mean_bid = *m;
                    if (auto m = mean_price(s.g)) rec.mean_ask = *m;
                    rec.total_volume = p.k * integrate(multiply(s.f, s.g));
                    rec.boundary_leakage = leak;
                    if (auto e = try_price_estimate(s.f, s.g, PriceEstimator::argmax)) {
                        rec.price_estimate = *e;
                        rec.price_defined = true;
                        last_price = *e;
                        ever = true;
                    } else {
                        rec.price_estimate = last_price;
                    }
                    if (into_series && ever) art.prices.append(s.t, rec.price_estimate);
                    art.records.push_back(rec);
                };
                auto snapshot = [&](const BoltzmannState& s) {
                    art.snapshots.push_back(
                        {s.t, s.f, s.g, transaction_volume(s, p)});
                };
                record(state, false);
                if (want_snapshot(0)) snapshot(state);
                for (std::size_t n = 0; n < steps; ++n) {
                    auto [lf, lg] = collision_leakage(state, p);
                    leak += p.dt * (lf + lg);
                    state = stepper.step(state);
                    state.t = (n + 1) * p.dt;
                    if ((n + 1) % static_cast<std::size_t>(run.observer_stride) == 0 ||
                        n + 1 == steps)
                        record(state, true);
                    if (want_snapshot(n + 1)) snapshot(state);
                }
                break;
            }
            case ModelKind::fbp: {
                ModelParams p = run.model_params();
                ObserverOptions opts;
                opts.stride = run.observer_stride;
                // run and then rebuild snapshots from the stored V states
                ShiftSteps s = ShiftSteps::from_cost(p.a, grid);
                FBPStepper stepper(grid, p);
                FBPState state{transform_initial(f_I, g_I, s), 0.0, 0.0, 0.0};
                auto wp = check_well_prepared(f_I, g_I);
                if (!wp.satisfied)
                    warn(run.label + ": initial data not well prepared");
                {
                    PriceExtraction px = extract_price(state.V);
                    state.price = px.price();
                    state.lambda = px.lambda();
                }
                const std::size_t steps =
                    static_cast<std::size_t>(std::llround(p.t_end / p.dt));
                auto record = [&](const FBPState& st, bool into_series) {
                    auto [f, g] = reconstruct_densities(st.V, s);
                    DiagnosticsRecord rec;
                    rec.t = st.t;
                    rec.mass_f = integrate(f);
                    rec.mass_g = integrate(g);
                    if (auto m = mean_price(f)) rec.mean_bid = *m;
                    if (auto m = mean_price(g)) rec.mean_ask = *m;
                    rec.total_volume = st.lambda;
                    rec.price_estimate = st.price;
                    rec.price_defined = true;
                    if (into_series || st.t == 0.0) art.prices.append(st.t, st.price);
                    art.records.push_back(rec);
                };
                auto snapshot = [&](const FBPState& st) {
                    auto [f, g] = reconstruct_densities(st.V, s);
                    art.snapshots.push_back({st.t, f, g, Field(grid)});
                };
                record(state, false);
                if (want_snapshot(0)) snapshot(state);
                for (std::size_t n = 0; n < steps; ++n) {
                    state = stepper.step(state);
                    state.t = (n + 1) * p.dt;
                    if ((n + 1) % static_cast<std::size_t>(run.observer_stride) == 0 ||
                        n + 1 == steps)
                        record(state, true);
                    if (want_snapshot(n + 1)) snapshot(state);
                }
                break;
            }
            case ModelKind::layer: {
                LayerStepper stepper(grid, run.a, run.dt, run.epsilon);
                LayerState state{f_I, g_I, 0.0, run.epsilon};
                const std::size_t steps =
                    static_cast<std::size_t>(std::llround(run.t_end / run.dt));
                double last_price = std::numeric_limits<double>::quiet_NaN();
                bool ever = false;
                auto record = [&](const LayerState& s, bool into_series) {
                    DiagnosticsRecord rec;
                    rec.t = s.tau;
                    rec.mass_f = integrate(s.alpha);
                    rec.mass_g = integrate(s.beta);
                    if (auto m = mean_price(s.alpha)) rec.mean_bid = *m;
                    if (auto m = mean_price(s.beta)) rec.mean_ask = *m;
                    rec.total_volume = integrate(multiply(s.alpha, s.beta));
                    if (auto e =
                            try_price_estimate(s.alpha, s.beta, PriceEstimator::argmax)) {
                        rec.price_estimate = *e;
                        rec.price_defined = true;
                        last_price = *e;
                        ever = true;
                    } else {
                        rec.price_estimate = last_price;
                    }
                    if (into_series && ever) art.prices.append(s.tau, rec.price_estimate);
                    art.records.push_back(rec);
                };
                auto snapshot = [&](const LayerState& s) {
                    art.snapshots.push_back(
                        {s.tau, s.alpha, s.beta, multiply(s.alpha, s.beta)});
                };
                record(state, false);
                if (want_snapshot(0)) snapshot(state);
                for (std::size_t n = 0; n < steps; ++n) {
                    state = stepper.step(state);
                    state.tau = (n + 1) * run.dt;
                    if ((n + 1) % static_cast<std::size_t>(run.observer_stride) == 0 ||
                        n + 1 == steps)
                        record(state, true);
                    if (want_snapshot(n + 1)) snapshot(state);
                }
                break;
            }
            case ModelKind::limit: {
                LimitParams p = run.limit_params();
                LimitStepper stepper(grid, p);
                Field f = f_I, g = g_I;
                const std::size_t steps =
                    static_cast<std::size_t>(std::llround(p.t_end / p.dt));
                double last_price = std::numeric_limits<double>::quiet_NaN();
                bool ever = false;
                auto record = [&](double t, bool into_series) {
                    DiagnosticsRecord rec;
                    rec.t = t;
                    rec.mass_f = integrate(f);
                    rec.mass_g = integrate(g);
                    if (auto m = mean_price(f)) rec.mean_bid = *m;
                    if (auto m = mean_price(g)) rec.mean_ask = *m;
                    rec.total_volume = p.c * integrate(multiply(f, g));
                    if (auto e = try_price_estimate(f, g, PriceEstimator::argmax)) {
                        rec.price_estimate = *e;
                        rec.price_defined = true;
                        last_price = *e;
                        ever = true;
                    } else {
                        rec.price_estimate = last_price;
                    }
                    if (into_series && ever) art.prices.append(t, rec.price_estimate);
                    art.records.push_back(rec);
                };
                auto snapshot = [&](double t) {
                    Field mu = multiply(f, g);
                    for (double& v : mu.values) v *= p.c;
                    art.snapshots.push_back({t, f, g, mu});
                };
                record(0.0, false);
                if (want_snapshot(0)) snapshot(0.0);
                for (std::size_t n = 0; n < steps; ++n) {
                    auto [fn, gn] = stepper.step(f, g);
                    f = std::move(fn);
                    g = std::move(gn);
                    if ((n + 1) % static_cast<std::size_t>(run.observer_stride) == 0 ||
                        n + 1 == steps)
                        record((n + 1) * p.dt, true);
                    if (want_snapshot(n + 1)) snapshot((n + 1) * p.dt);
                }
                break;
            }
            case ModelKind::consecutive: {
                LimitParams p = run.limit_params();
                auto cf = detail::cumulative_trapezoid(f_I);
                auto cg = detail::cumulative_trapezoid(g_I);
                Field F(grid);
                for (int j = 0; j < F.size(); ++j)
                    F[j] = (cf.back() - cf[j]) - cg[j];
                NeumannHeatStepper heat(grid, p.dt, p.diffusion());
                const std::size_t steps =
                    static_cast<std::size_t>(std::llround(p.t_end / p.dt));
                auto densities = [&]() {
                    Field dFp = detail::central_derivative(positive_part(F));
                    Field dFm = detail::central_derivative(negative_part(F));
                    Field f0(grid), g0(grid);
                    for (int j = 0; j < F.size(); ++j) {
                        f0[j] = -dFp[j];
                        g0[j] = dFm[j];
                    }
                    return std::make_pair(f0, g0);
                };
                auto record = [&](double t, bool into_series) {
                    auto [f0, g0] = densities();
                    DiagnosticsRecord rec;
                    rec.t = t;
                    rec.mass_f = integrate(f0);
                    rec.mass_g = integrate(g0);
                    if (auto m = mean_price(f0)) rec.mean_bid = *m;
                    if (auto m = mean_price(g0)) rec.mean_ask = *m;
                    rec.total_volume = 0.0;
                    if (auto px = try_extract_price(F)) {
                        rec.price_estimate = px->price();
                        rec.price_defined = true;
                        if (into_series || t == 0.0)
                            art.prices.append(t, rec.price_estimate);
                    }
                    art.records.push_back(rec);
                };
                auto snapshot = [&](double t) {
                    auto [f0, g0] = densities();
                    art.snapshots.push_back({t, f0, g0, Field(grid)});
                };
                record(0.0, false);
                if (want_snapshot(0)) snapshot(0.0);
                for (std::size_t n = 0; n < steps; ++n) {
                    F = heat.step(F);
                    if ((n + 1) % static_cast<std::size_t>(run.observer_stride) == 0 ||
                        n + 1 == steps)
                        record((n + 1) * p.dt, true);
                    if (want_snapshot(n + 1)) snapshot((n + 1) * p.dt);
                }
                break;
            }
        }
    } catch (const std::exception& e) {
        art.failed = true;
        art.error = e.what();
    }
    return art;
}

namespace expdetail {

inline void write_series_csv(const std::string& path, const RunArtifacts& art,
                             int precision) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write '" + path + "'");
    out << "t,price,mass_f,mass_g,mean_bid,mean_ask,total_volume,leakage\n";
    for (const auto& r : art.records) {
        out << format_double(r.t, precision) << ','
            << format_double(r.price_estimate, precision) << ','
            << format_double(r.mass_f, precision) << ','
            << format_double(r.mass_g, precision) << ','
            << format_double(r.mean_bid, precision) << ','
            << format_double(r.mean_ask, precision) << ','
            << format_double(r.total_volume, precision) << ','
            << format_double(r.boundary_leakage, precision) << '\n';
    }
}

inline void write_fields_csv(const std::string& path, const FieldSnapshot& snap,
                             int precision) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write '" + path + "'");
    out << "x,f,g,mu\n";
    for (int j = 0; j < snap.f.size(); ++j) {
        out << format_double(snap.f.x(j), precision) << ','
            << format_double(snap.f[j], precision) << ','
            << format_double(snap.g[j], precision) << ','
            << format_double(snap.mu[j], precision) << '\n';
    }
}

inline const RunArtifacts* find_run(const std::vector<RunArtifacts>& arts,
                                    const std::string& label) {
    for (const auto& a : arts)
        if (a.label == label) return &a;
    return nullptr;
}

inline const FieldSnapshot* final_snapshot(const RunArtifacts& art) {
    return art.snapshots.empty() ? nullptr : &art.snapshots.back();
}

inline unsigned thread_cap(std::size_t n_runs) {
    unsigned cap = std::thread::hardware_concurrency();
    if (cap == 0) cap = 1;
    if (const char* env = std::getenv("PRICESIM_THREADS")) {
        long v = std::strtol(env, nullptr, 10);
        if (v >= 1) cap = static_cast<unsigned>(v);
    }
    return static_cast<unsigned>(std::min<std::size_t>(cap, n_runs));
}

}  // namespace expdetail

struct ExperimentResult {
    std::vector<RunArtifacts> runs;
    bool ok = true;
};

inline ExperimentResult run_experiment(const ExperimentConfig& cfg,
                                       const std::string& out_dir_override = "") {
    namespace fs = std::filesystem;
    const std::string out_dir =
        out_dir_override.empty() ? cfg.output.directory : out_dir_override;
    fs::create_directories(out_dir);
    const int prec = cfg.output.precision;

    ExperimentResult result;
    result.runs.resize(cfg.runs.size());

    // runs execute concurrently; artifact writes happen afterwards in
    // config order so output is deterministic
    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
        while (true) {
            std::size_t i = next.fetch_add(1);
            if (i >= cfg.runs.size()) return;
            result.runs[i] = execute_run(cfg.runs[i]);
        }
    };
    unsigned n_threads = expdetail::thread_cap(cfg.runs.size());
    if (n_threads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (unsigned t = 0; t < n_threads; ++t) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }

    for (const auto& art : result.runs) {
        expdetail::write_series_csv(out_dir + "/series_" + art.label + ".csv", art, prec);
        for (const auto& snap : art.snapshots) {
            std::string t_tag = expdetail::format_double(snap.t, 12);
            expdetail::write_fields_csv(
                out_dir + "/fields_" + art.label + "_" + t_tag + ".csv", snap, prec);
        }
        if (art.failed) {
            std::ofstream err(out_dir + "/error.txt", std::ios::binary);
            err << art.label << ": " << art.error << '\n';
            result.ok = false;
        }
    }

    std::ofstream cmp(out_dir + "/comparisons.csv", std::ios::binary);
    cmp << "a,b,kind,l1,l2,linf\n";
    for (const auto& c : cfg.comparisons) {
        const RunArtifacts* ra = expdetail::find_run(result.runs, c.label_a);
        const RunArtifacts* rb = expdetail::find_run(result.runs, c.label_b);
        if (!ra || !rb || ra->failed || rb->failed) continue;
        Metrics m;
        std::string kind;
        if (c.kind == ComparisonKind::price) {
            kind = "price";
            m = compare_price_series(ra->prices, rb->prices, c.burn_in);
        } else {
            kind = "fields";
            const FieldSnapshot* sa = expdetail::final_snapshot(*ra);
            const FieldSnapshot* sb = expdetail::final_snapshot(*rb);
            if (!sa || !sb) continue;
            Metrics mf = compare_fields(sa->f, sb->f);
            Metrics mg = compare_fields(sa->g, sb->g);
            m.l1 = mf.l1 + mg.l1;
            m.l2 = std::sqrt(mf.l2 * mf.l2 + mg.l2 * mg.l2);
            m.linf = std::max(mf.linf, mg.linf);
        }
        cmp << c.label_a << ',' << c.label_b << ',' << kind << ','
            << expdetail::format_double(m.l1, prec) << ','
            << expdetail::format_double(m.l2, prec) << ','
            << expdetail::format_double(m.linf, prec) << '\n';
    }
    return result;
}

}  // namespace pricesim
