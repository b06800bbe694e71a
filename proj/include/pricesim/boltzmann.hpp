#pragma once

// Semi-implicit time stepper for the kinetic price formation system
//
//   f_t = D f_xx - k f g + k f(x+a) g(x+a)
//   g_t = D g_xx - k f g + k f(x-a) g(x-a),      D = sigma^2 / 2,
//
// on a bounded interval with homogeneous Neumann boundary conditions. The
// bilinear collision terms are taken explicitly from the previous step, the
// diffusion implicitly, so each step is two independent tridiagonal solves.
// With dt * k * max(f, g) <= 1 the explicit stage keeps both densities
// non-negative and the implicit stage preserves that.

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "diagnostics.hpp"
#include "grid.hpp"
#include "heat.hpp"
#include "params.hpp"

namespace pricesim {

struct BoltzmannState {
    Field f;
    Field g;
    double t = 0.0;
};

// mu = k f g, trades per unit price and time.
inline Field transaction_volume(const BoltzmannState& state, const ModelParams& p) {
    Field mu = multiply(state.f, state.g);
    for (double& v : mu.values) v *= p.k;
    return mu;
}

// Mass-loss rates of the collision gain terms through the boundary fill:
// gains shifted past an edge are dropped, so per unit time f loses
// k * (int(fg) - int(fg shifted by +a)) and g the mirrored amount. Both are
// exactly zero while the trade density vanishes within a of the edges.
inline std::pair<double, double> collision_leakage(const BoltzmannState& state,
                                                   const ModelParams& p) {
    ShiftSteps s = ShiftSteps::from_cost(p.a, state.f.grid);
    Field w = multiply(state.f, state.g);
    double base = integrate(w);
    double lf = p.k * (base - integrate(shift_field(w, s, ShiftDir::plus, 0.0)));
    double lg = p.k * (base - integrate(shift_field(w, s, ShiftDir::minus, 0.0)));
    return {lf, lg};
}

namespace detail {
// Shared core of the kinetic and initial-layer steppers: explicit bilinear
// collision stage followed by the implicit diffusion solves. Returns the
// number of round-off negatives clamped so callers can aggregate.
inline std::pair<Field, Field> collision_diffusion_step(const Field& f, const Field& g,
                                                        double dt_times_rate,
                                                        ShiftSteps shift,
                                                        const NeumannHeatStepper& heat,
                                                        long& clamped) {
    Field w = multiply(f, g);
    Field gain_f = shift_field(w, shift, ShiftDir::plus, 0.0);
    Field gain_g = shift_field(w, shift, ShiftDir::minus, 0.0);

    Field rf(f.grid), rg(g.grid);
    for (int j = 0; j < rf.size(); ++j) {
        rf[j] = f[j] + dt_times_rate * (gain_f[j] - w[j]);
        rg[j] = g[j] + dt_times_rate * (gain_g[j] - w[j]);
    }

    Field fn = heat.step(rf);
    Field gn = heat.step(rg);
    clamped += clamp_roundoff_negatives(fn, "buyer density");
    clamped += clamp_roundoff_negatives(gn, "vendor density");
    return {std::move(fn), std::move(gn)};
}
}  // namespace detail

class BoltzmannStepper {
public:
    BoltzmannStepper(const Grid& grid, const ModelParams& params)
        : params_(params), shift_(ShiftSteps::from_cost(params.a, grid)),
          heat_(grid, params.dt, params.diffusion()) {
        params_.validate();
    }

    const ShiftSteps& shift() const { return shift_; }
    const ModelParams& params() const { return params_; }

    BoltzmannState step(const BoltzmannState& state) {
        const ModelParams& p = params_;
        const double bound = std::max(max_value(state.f), max_value(state.g));
        if (p.dt * p.k * bound > 1.0 + 1e-12) {
            if (!p.relax_collision_guard)
                throw std::runtime_error("time step too large for collision term");
            if (!guard_warned_) {
                warn("collision guard dt*k*max(f,g) = " +
                     std::to_string(p.dt * p.k * bound) + " exceeds 1; continuing");
                guard_warned_ = true;
            }
        }
        long before = clamped_total_;
        auto [fn, gn] = detail::collision_diffusion_step(state.f, state.g, p.dt * p.k,
                                                         shift_, heat_, clamped_total_);
        if (clamped_total_ > before && !clamp_warned_) {
            warn("clamping round-off negative density values (reported once per run)");
            clamp_warned_ = true;
        }
        return {std::move(fn), std::move(gn), state.t + p.dt};
    }

    // cumulative count of round-off negatives clamped to zero
    long clamped_total() const { return clamped_total_; }

private:
    ModelParams params_;
    ShiftSteps shift_;
    NeumannHeatStepper heat_;
    bool guard_warned_ = false;
    bool clamp_warned_ = false;
    long clamped_total_ = 0;
};

inline BoltzmannState step_boltzmann(const BoltzmannState& state, const ModelParams& p) {
    BoltzmannStepper stepper(state.f.grid, p);
    return stepper.step(state);
}

// Error from inside a time loop, tagged with the failing step.
struct SolverError : std::runtime_error {
    SolverError(std::size_t step_, const std::string& msg)
        : std::runtime_error("step " + std::to_string(step_) + ": " + msg), step(step_) {}
    std::size_t step;
};

struct ObserverOptions {
    int stride = 1;  // record every stride-th step (step 0 and the final step always)
    PriceEstimator estimator = PriceEstimator::argmax;
};

using BoltzmannObserver =
    std::function<void(const BoltzmannState&, const DiagnosticsRecord&)>;

struct BoltzmannRun {
    BoltzmannState final_state;
    PriceSeries prices;
    std::vector<DiagnosticsRecord> records;
};

inline BoltzmannRun run_boltzmann(const BoltzmannState& initial, const ModelParams& p,
                                  const ObserverOptions& opts = {},
                                  const std::vector<BoltzmannObserver>& observers = {}) {
    p.validate();
    BoltzmannStepper stepper(initial.f.grid, p);
    const std::size_t steps = static_cast<std::size_t>(std::llround(p.t_end / p.dt));

    BoltzmannRun run{initial, PriceSeries{{}, {}, opts.estimator}, {}};
    double leak_cum = 0.0;
    double last_price = std::numeric_limits<double>::quiet_NaN();
    bool ever_defined = false;

    auto record_now = [&](const BoltzmannState& s, bool into_series) {
        DiagnosticsRecord rec;
        rec.t = s.t;
        rec.mass_f = integrate(s.f);
        rec.mass_g = integrate(s.g);
        if (auto m = mean_price(s.f)) rec.mean_bid = *m;
        if (auto m = mean_price(s.g)) rec.mean_ask = *m;
        rec.total_volume = p.k * integrate(multiply(s.f, s.g));
        rec.boundary_leakage = leak_cum;
        rec.estimator = opts.estimator;
        if (auto est = try_price_estimate(s.f, s.g, opts.estimator)) {
            rec.price_estimate = *est;
            rec.price_defined = true;
            last_price = *est;
            ever_defined = true;
        } else {
            rec.price_estimate = last_price;  // carried forward, flagged
            rec.price_defined = false;
        }
        if (into_series && ever_defined) run.prices.append(s.t, rec.price_estimate);
        run.records.push_back(rec);
        for (const auto& obs : observers) obs(s, rec);
    };

    record_now(run.final_state, false);
    for (std::size_t n = 0; n < steps; ++n) {
        try {
            auto [lf, lg] = collision_leakage(run.final_state, p);
            leak_cum += p.dt * (lf + lg);
            run.final_state = stepper.step(run.final_state);
        } catch (const std::exception& e) {
            throw SolverError(n + 1, e.what());
        }
        // keep recorded times exact multiples of dt
        run.final_state.t = (n + 1) * p.dt;
        if ((n + 1) % static_cast<std::size_t>(std::max(1, opts.stride)) == 0 ||
            n + 1 == steps)
            record_now(run.final_state, true);
    }
    return run;
}

}  // namespace pricesim
