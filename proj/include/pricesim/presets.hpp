#pragma once

// The four bundled experiments, each at two scales:
//
//   paper - the published resolutions and step sizes, bit-for-bit. The
//           first and fourth are long-running at this scale.
//   desk  - the same data and assertions at parameters a laptop handles in
//           seconds. Time steps are dyadic (exact powers of two) chosen to
//           satisfy the collision guard dt * k * max(f_I, g_I) <= 1, so the
//           explicit collision stage provably preserves positivity.
//
// experiment1: kinetic model vs free-boundary model, touching-support data.
// experiment2: kinetic model at two trading rates; trade support shrinks.
// experiment3: badly ordered data relaxing on the fast time scale.
// experiment4: simultaneous scaling limit vs consecutive limits.

#include <stdexcept>
#include <string>

#include "config.hpp"

namespace pricesim {

enum class PresetScale { desk, paper };

inline PresetScale scale_from_string(const std::string& s) {
    if (s == "desk") return PresetScale::desk;
    if (s == "paper") return PresetScale::paper;
    throw std::invalid_argument("unknown scale '" + s + "' (expected desk or paper)");
}

namespace presets_detail {

inline PiecewiseSpec example1_f() {
    PiecewiseSpec f;
    f.segments = {const_segment(0.0, 0.5, 1.0), linear_segment(0.5, 0.6, 6.0, -10.0)};
    return f;
}
inline PiecewiseSpec example1_g() {
    PiecewiseSpec g;
    g.segments = {linear_segment(0.6, 1.0, -6.0, 10.0)};
    return g;
}
inline PiecewiseSpec example2_f() {
    PiecewiseSpec f;
    f.segments = {bump_segment(0.3, 0.5, 15.0)};
    return f;
}
inline PiecewiseSpec example2_g() {
    PiecewiseSpec g;
    g.segments = {bump_segment(0.55, 0.8, 15.0)};
    return g;
}
inline PiecewiseSpec example3_f() {
    PiecewiseSpec f;
    f.segments = {bump_segment(0.65, 0.95, 15.0)};
    return f;
}
inline PiecewiseSpec example3_g() {
    PiecewiseSpec g;
    g.segments = {bump_segment(0.25, 0.5, 12.0)};
    return g;
}
inline PiecewiseSpec example4_f() {
    PiecewiseSpec f;
    f.segments = {const_segment(9.0, 9.5, 1.0), linear_segment(9.5, 10.0, 20.0, -2.0)};
    return f;
}
inline PiecewiseSpec example4_g() {
    PiecewiseSpec g;
    g.segments = {linear_segment(10.0, 11.0, -20.0, 2.0)};
    return g;
}

constexpr double sigma_unit_diffusion = 1.4142135623730951;  // D = sigma^2/2 = 1

}  // namespace presets_detail

inline ExperimentConfig preset_config(const std::string& name, PresetScale scale) {
    using namespace presets_detail;
    ExperimentConfig cfg;
    cfg.output.directory = "out";

    auto make_run = [&](const std::string& label, ModelKind model, GridSpec grid, double k,
                        double a, double dt, double t_end) {
        RunSpec r;
        r.label = label;
        r.model = model;
        r.grid = grid;
        r.k = k;
        r.a = a;
        r.sigma = sigma_unit_diffusion;
        r.dt = dt;
        r.t_end = t_end;
        return r;
    };

    if (name == "example1") {
        GridSpec grid{0.0, 1.0, 500};  // h = 0.002
        const double a = 0.02;         // 10 h
        const bool paper = scale == PresetScale::paper;
        const double k = paper ? 1e6 : 1e3;
        const double dt = paper ? 1e-6 : 0x1p-12;  // paper: dt = 1/k
        const double t_end = paper ? 1.0 : 0.5;

        RunSpec boltz = make_run("boltzmann", ModelKind::boltzmann, grid, k, a, dt, t_end);
        boltz.relax_collision_guard = paper;  // dt*k*max g_I = 4 at the printed step
        boltz.f_init = example1_f();
        boltz.g_init = example1_g();
        boltz.observer_stride = paper ? 4000 : 8;
        boltz.field_times = {0.0, t_end};

        RunSpec fbp = make_run("fbp", ModelKind::fbp, grid, k, a, dt, t_end);
        fbp.f_init = example1_f();
        fbp.g_init = example1_g();
        fbp.observer_stride = boltz.observer_stride;
        fbp.field_times = {0.0, t_end};

        cfg.runs = {boltz, fbp};
        cfg.comparisons = {{"boltzmann", "fbp", ComparisonKind::price, 0.1}};
        return cfg;
    }

    if (name == "example2") {
        GridSpec grid{0.0, 1.0, 1000};  // h = 1e-3
        const double a = 0.01;          // 10 h
        const bool paper = scale == PresetScale::paper;
        // paper uses dt = 1/k; the guard allows larger dyadic steps
        const double dt_lo = paper ? 1e-5 : 0x1p-18;
        const double dt_hi = paper ? 1e-6 : 0x1p-18;
        const double t_end = 0.5;

        RunSpec lo = make_run("k1e5", ModelKind::boltzmann, grid, 1e5, a, dt_lo, t_end);
        lo.f_init = example2_f();
        lo.g_init = example2_g();
        lo.observer_stride = paper ? 500 : 1024;
        lo.field_times = {0.0, t_end};

        RunSpec hi = make_run("k1e6", ModelKind::boltzmann, grid, 1e6, a, dt_hi, t_end);
        hi.f_init = example2_f();
        hi.g_init = example2_g();
        hi.observer_stride = paper ? 5000 : 1024;
        hi.field_times = {0.0, t_end};

        cfg.runs = {lo, hi};
        cfg.comparisons = {{"k1e5", "k1e6", ComparisonKind::fields, 0.1}};
        return cfg;
    }

    if (name == "example3") {
        // fast-scale run of the eps-diffusion layer system; identical at
        // both scales (already desk sized). tau = k t, dtau = k dt.
        GridSpec grid{0.0, 1.0, 500};  // h = 2e-3
        const double a = 0.02;         // 10 h
        const double k = 5e2;
        RunSpec layer = make_run("layer", ModelKind::layer, grid, k, a,
                                 /*dt=*/0.1, /*t_end=*/500.0);
        layer.epsilon = 1.0 / k;  // dt, t_end are in fast time units
        layer.f_init = example3_f();
        layer.g_init = example3_g();
        layer.observer_stride = 50;
        layer.field_times = {0.0, 500.0};
        cfg.runs = {layer};
        return cfg;
    }

    if (name == "example4") {
        const bool paper = scale == PresetScale::paper;
        GridSpec grid = paper ? GridSpec{0.0, 20.0, 1000000}   // h = 2e-5
                              : GridSpec{0.0, 20.0, 10000};    // h = 2e-3
        const double a = paper ? 2e-5 : 2e-3;  // a = h
        const double k = paper ? 5e4 : 500.0;  // c = k a = 1 at both scales
        const double dt = paper ? 2e-5 : 0x1p-10;
        const double t_end = 1.0;

        RunSpec boltz = make_run("boltzmann", ModelKind::boltzmann, grid, k, a, dt, t_end);
        boltz.relax_collision_guard = paper;  // dt*k*max g_I = 2 at the printed step
        boltz.f_init = example4_f();
        boltz.g_init = example4_g();
        boltz.observer_stride = paper ? 5000 : 16;
        boltz.field_times = {0.0, t_end};

        RunSpec lim = make_run("limit", ModelKind::limit, grid, 0.0, 0.0, dt, t_end);
        lim.c = 1.0;
        lim.f_init = example4_f();
        lim.g_init = example4_g();
        lim.observer_stride = boltz.observer_stride;
        lim.field_times = {0.0, t_end};

        RunSpec consec = make_run("consecutive", ModelKind::consecutive, grid, 0.0, 0.0,
                                  dt, t_end);
        consec.c = 1.0;
        consec.f_init = example4_f();
        consec.g_init = example4_g();
        consec.observer_stride = boltz.observer_stride;
        consec.field_times = {0.0, t_end};

        cfg.runs = {boltz, lim, consec};
        cfg.comparisons = {{"boltzmann", "limit", ComparisonKind::fields, 0.1},
                           {"boltzmann", "consecutive", ComparisonKind::fields, 0.1},
                           {"boltzmann", "limit", ComparisonKind::price, 0.1},
                           {"boltzmann", "consecutive", ComparisonKind::price, 0.1}};
        return cfg;
    }

    throw std::invalid_argument("unknown preset '" + name +
                                "' (expected example1..example4)");
}

}  // namespace pricesim
