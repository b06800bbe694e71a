#pragma once

// Fast-time initial-layer dynamics. On the fast scale tau = k t the
// densities alpha(x, tau), beta(x, tau) satisfy
//
//   alpha_tau = -alpha beta + (alpha beta)(x + a)  + eps alpha_xx
//   beta_tau  = -alpha beta + (alpha beta)(x - a)  + eps beta_xx
//
// with eps = 1/k (eps = 0 gives the pure lattice ODE system). The stepper
// reuses the kinetic stepper with unit rate and diffusivity eps, so one
// code path covers both scalings. As tau -> infinity with eps = 0 the
// limits have the closed form
//
//   alpha_inf = Phi_I^+(x) - Phi_I^+(x + a)
//   beta_inf  = Phi_I^-(x) - Phi_I^-(x - a)
//
// valid when the initial mass profile h_I(x) = f_I(x) + g_I(x + a), walked
// along the a-lattice away from any positive point, never revives after
// vanishing. check_hypothesis verifies exactly that.

#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "boltzmann.hpp"
#include "fbp.hpp"
#include "grid.hpp"

namespace pricesim {

struct LayerState {
    Field alpha;
    Field beta;
    double tau = 0.0;
    double epsilon = 0.0;  // 1/k, or 0 for the pure ODE system
};

class LayerStepper {
public:
    LayerStepper(const Grid& grid, double a, double dt_tau, double epsilon)
        : dt_tau_(dt_tau), shift_(ShiftSteps::from_cost(a, grid)),
          heat_(grid, dt_tau, epsilon) {
        if (epsilon < 0.0) throw std::invalid_argument("epsilon must be non-negative");
        if (!(dt_tau > 0.0)) throw std::invalid_argument("dt_tau must be positive");
    }

    LayerState step(const LayerState& state) {
        double worst = 0.0;
        for (int j = 0; j < state.alpha.size(); ++j)
            worst = std::max(worst, state.alpha[j] + state.beta[j]);
        if (dt_tau_ * worst > 1.0 + 1e-12)
            throw std::runtime_error("fast-time step too large");

        long before = clamped_total_;
        auto [an, bn] = detail::collision_diffusion_step(state.alpha, state.beta, dt_tau_,
                                                         shift_, heat_, clamped_total_);
        if (clamped_total_ > before && !clamp_warned_) {
            warn("clamping round-off negative density values (reported once per run)");
            clamp_warned_ = true;
        }
        return {std::move(an), std::move(bn), state.tau + dt_tau_, state.epsilon};
    }

    long clamped_total() const { return clamped_total_; }

private:
    double dt_tau_;
    ShiftSteps shift_;
    NeumannHeatStepper heat_;  // diffusivity eps; identity solve when eps = 0
    bool clamp_warned_ = false;
    long clamped_total_ = 0;
};

inline LayerState step_layer(const LayerState& state, double a, double dt_tau) {
    LayerStepper stepper(state.alpha.grid, a, dt_tau, state.epsilon);
    return stepper.step(state);
}

// alpha + beta(x + a); constant in tau for eps = 0, equal to h_I.
inline Field layer_conserved_sum(const LayerState& state, ShiftSteps s) {
    if (state.epsilon != 0.0)
        throw std::logic_error("conserved sum requires zero diffusion");
    Field shifted = shift_field(state.beta, s, ShiftDir::plus, 0.0);
    Field out(state.alpha.grid);
    for (int j = 0; j < out.size(); ++j) out[j] = state.alpha[j] + shifted[j];
    return out;
}

inline Field initial_mass_profile(const Field& f_I, const Field& g_I, ShiftSteps s) {
    Field shifted = shift_field(g_I, s, ShiftDir::plus, 0.0);
    Field h(f_I.grid);
    for (int j = 0; j < h.size(); ++j) h[j] = f_I[j] + shifted[j];
    return h;
}

struct LayerHypothesis {
    bool condition_i = true;   // downward lattice walks never revive
    bool condition_ii = true;  // upward lattice walks never revive
    Field h_I;
    std::optional<double> witness_x;  // first violating lattice point

    bool satisfied() const { return condition_i && condition_ii; }
};

// For every node with h_I above the support threshold, walk the +/- a
// lattice and verify that once h_I vanishes it stays vanished.
inline LayerHypothesis check_hypothesis(const Field& f_I, const Field& g_I, ShiftSteps s) {
    LayerHypothesis out{true, true, initial_mass_profile(f_I, g_I, s), std::nullopt};
    const Field& h = out.h_I;
    const double thresh = eps_supp_rel * std::max(max_value(h), 0.0);
    const int n = h.size();
    const int step = s.steps;
    if (step <= 0) return out;

    for (int j = 0; j < n; ++j) {
        if (!(h[j] > thresh)) continue;
        bool seen_zero = false;
        for (int i = j - step; i >= 0; i -= step) {
            if (!(h[i] > thresh)) {
                seen_zero = true;
            } else if (seen_zero) {
                if (out.condition_i) out.witness_x = h.x(i);
                out.condition_i = false;
                break;
            }
        }
        seen_zero = false;
        for (int i = j + step; i < n; i += step) {
            if (!(h[i] > thresh)) {
                seen_zero = true;
            } else if (seen_zero) {
                if (out.condition_ii && !out.witness_x) out.witness_x = h.x(i);
                out.condition_ii = false;
                break;
            }
        }
        if (!out.condition_i && !out.condition_ii) break;
    }
    return out;
}

// Closed-form tau -> infinity limit. Requires the lattice hypothesis; the
// error carries the witnessing lattice point.
inline std::pair<Field, Field> closed_form_limit(const Field& f_I, const Field& g_I,
                                                 ShiftSteps s) {
    LayerHypothesis hyp = check_hypothesis(f_I, g_I, s);
    if (!hyp.satisfied()) {
        std::string where =
            hyp.witness_x ? " at x = " + std::to_string(*hyp.witness_x) : "";
        throw std::runtime_error("fast-time limit hypotheses violated" + where);
    }
    Field phi = transform_initial(f_I, g_I, s);
    Field pp = positive_part(phi);
    Field pm = negative_part(phi);
    Field pp_up = shift_field(pp, s, ShiftDir::plus, 0.0);
    Field pm_down = shift_field(pm, s, ShiftDir::minus, 0.0);
    Field alpha(phi.grid), beta(phi.grid);
    for (int j = 0; j < phi.size(); ++j) {
        alpha[j] = pp[j] - pp_up[j];
        beta[j] = pm[j] - pm_down[j];
    }
    return {std::move(alpha), std::move(beta)};
}

// Lattice sums A(x) = sum_l alpha(x + a l), B(x) = sum_l beta(x - a l);
// their integrals decay monotonically along the fast-time flow.
inline Field lattice_sum_up(const Field& u, ShiftSteps s) {
    Field out(u.grid);
    for (int j = 0; j < u.size(); ++j) {
        double acc = 0.0;
        for (int i = j; i < u.size(); i += s.steps) acc += u[i];
        out[j] = acc;
    }
    return out;
}

inline Field lattice_sum_down(const Field& u, ShiftSteps s) {
    Field out(u.grid);
    for (int j = 0; j < u.size(); ++j) {
        double acc = 0.0;
        for (int i = j; i >= 0; i -= s.steps) acc += u[i];
        out[j] = acc;
    }
    return out;
}

struct LayerRun {
    LayerState final_state;
    PriceSeries prices;
    std::vector<DiagnosticsRecord> records;
};

inline LayerRun run_layer(const LayerState& initial, double a, double dt_tau,
                          double tau_end, const ObserverOptions& opts = {}) {
    LayerStepper stepper(initial.alpha.grid, a, dt_tau, initial.epsilon);
    const std::size_t steps = static_cast<std::size_t>(std::llround(tau_end / dt_tau));

    LayerRun run{initial, PriceSeries{{}, {}, opts.estimator}, {}};
    double last_price = std::numeric_limits<double>::quiet_NaN();
    bool ever_defined = false;

    auto record_now = [&](const LayerState& s, bool into_series) {
        DiagnosticsRecord rec;
        rec.t = s.tau;
        rec.mass_f = integrate(s.alpha);
        rec.mass_g = integrate(s.beta);
        if (auto m = mean_price(s.alpha)) rec.mean_bid = *m;
        if (auto m = mean_price(s.beta)) rec.mean_ask = *m;
        rec.total_volume = integrate(multiply(s.alpha, s.beta));
        rec.estimator = opts.estimator;
        if (auto est = try_price_estimate(s.alpha, s.beta, opts.estimator)) {
            rec.price_estimate = *est;
            rec.price_defined = true;
            last_price = *est;
            ever_defined = true;
        } else {
            rec.price_estimate = last_price;
            rec.price_defined = false;
        }
        if (into_series && ever_defined) run.prices.append(s.tau, rec.price_estimate);
        run.records.push_back(rec);
    };

    record_now(run.final_state, false);
    for (std::size_t n = 0; n < steps; ++n) {
        try {
            run.final_state = stepper.step(run.final_state);
        } catch (const std::exception& e) {
            throw SolverError(n + 1, e.what());
        }
        run.final_state.tau = (n + 1) * dt_tau;
        if ((n + 1) % static_cast<std::size_t>(std::max(1, opts.stride)) == 0 ||
            n + 1 == steps)
            record_now(run.final_state, true);
    }
    return run;
}

}  // namespace pricesim
