#pragma once

// High-frequency scaling limit (k -> infinity, a -> 0 with k a = c fixed):
//
//   f_t =  c (f g)_x + D f_xx
//   g_t = -c (f g)_x + D g_xx.
//
// The drift is discretized with central differences on the product and
// taken explicitly; diffusion is implicit with Neumann reflection. Because
// the same drift increment is added to f and subtracted from g, the sum
// f + g performs an exact discrete heat step.
//
// consecutive_limit_reference builds the a -> 0 limit of the free-boundary
// model instead: the antiderivative profile
//
//   F0(x, 0) = int_x^inf f_I - int_-inf^x g_I
//
// evolves by the pure heat equation, and the densities are the one-sided
// derivative parts f0 = -d/dx (F0)^+, g0 = d/dx (F0)^-. Their difference
// has a jump at the root of F0, which the simultaneous limit does not.

#include <cmath>
#include <stdexcept>
#include <utility>
#include <vector>

#include "diagnostics.hpp"
#include "fbp.hpp"
#include "grid.hpp"
#include "heat.hpp"
#include "params.hpp"

namespace pricesim {

namespace detail {
// Central difference with Neumann ghost reflection (derivative 0 at ends).
inline Field central_derivative(const Field& u) {
    Field d(u.grid);
    const double inv2h = 1.0 / (2.0 * u.grid.h);
    for (int j = 1; j + 1 < u.size(); ++j) d[j] = (u[j + 1] - u[j - 1]) * inv2h;
    d[0] = 0.0;
    d[u.size() - 1] = 0.0;
    return d;
}

// Cumulative trapezoid from the left edge.
inline std::vector<double> cumulative_trapezoid(const Field& u) {
    std::vector<double> c(u.size(), 0.0);
    for (int j = 1; j < u.size(); ++j)
        c[j] = c[j - 1] + 0.5 * u.grid.h * (u[j] + u[j - 1]);
    return c;
}
}  // namespace detail

class LimitStepper {
public:
    LimitStepper(const Grid& grid, const LimitParams& params)
        : params_(params), heat_(grid, params.dt, params.diffusion()) {
        params_.validate();
    }

    // dt * c * max|(fg)_x| / max(f, g) of the latest step; monitored
    // stability indicator for the explicit drift stage.
    double last_drift_cfl() const { return last_cfl_; }

    std::pair<Field, Field> step(const Field& f, const Field& g) {
        Field w = multiply(f, g);
        Field dw = detail::central_derivative(w);

        double scale = std::max({max_value(f), max_value(g), 1e-30});
        double worst = 0.0;
        for (int j = 0; j < dw.size(); ++j) worst = std::max(worst, std::abs(dw[j]));
        last_cfl_ = params_.dt * params_.c * worst / scale;
        if (last_cfl_ > 1.0) throw std::runtime_error("drift step too large");

        Field rf(f.grid), rg(g.grid);
        const double dc = params_.dt * params_.c;
        for (int j = 0; j < rf.size(); ++j) {
            rf[j] = f[j] + dc * dw[j];
            rg[j] = g[j] - dc * dw[j];
        }
        // no positivity clamp: the explicit central drift carries no
        // monotonicity guarantee, and clamping would break the exact sum
        // and mass invariants
        return {heat_.step(rf), heat_.step(rg)};
    }

private:
    LimitParams params_;
    NeumannHeatStepper heat_;
    double last_cfl_ = 0.0;
};

inline std::pair<Field, Field> step_limit(const Field& f, const Field& g,
                                          const LimitParams& p) {
    LimitStepper stepper(f.grid, p);
    return stepper.step(f, g);
}

struct LimitRun {
    Field f;
    Field g;
    PriceSeries prices;
    std::vector<DiagnosticsRecord> records;
};

inline LimitRun run_limit(const Field& f_I, const Field& g_I, const LimitParams& p,
                          const ObserverOptions& opts = {}) {
    p.validate();
    LimitStepper stepper(f_I.grid, p);
    const std::size_t steps = static_cast<std::size_t>(std::llround(p.t_end / p.dt));

    LimitRun run{f_I, g_I, PriceSeries{{}, {}, opts.estimator}, {}};
    double last_price = std::numeric_limits<double>::quiet_NaN();
    bool ever_defined = false;

    auto record_now = [&](double t, bool into_series) {
        DiagnosticsRecord rec;
        rec.t = t;
        rec.mass_f = integrate(run.f);
        rec.mass_g = integrate(run.g);
        if (auto m = mean_price(run.f)) rec.mean_bid = *m;
        if (auto m = mean_price(run.g)) rec.mean_ask = *m;
        rec.total_volume = p.c * integrate(multiply(run.f, run.g));
        rec.estimator = opts.estimator;
        if (auto est = try_price_estimate(run.f, run.g, opts.estimator)) {
            rec.price_estimate = *est;
            rec.price_defined = true;
            last_price = *est;
            ever_defined = true;
        } else {
            rec.price_estimate = last_price;
            rec.price_defined = false;
        }
        if (into_series && ever_defined) run.prices.append(t, rec.price_estimate);
        run.records.push_back(rec);
    };

    record_now(0.0, false);
    for (std::size_t n = 0; n < steps; ++n) {
        try {
            auto [fn, gn] = stepper.step(run.f, run.g);
            run.f = std::move(fn);
            run.g = std::move(gn);
        } catch (const std::exception& e) {
            throw SolverError(n + 1, e.what());
        }
        if ((n + 1) % static_cast<std::size_t>(std::max(1, opts.stride)) == 0 ||
            n + 1 == steps)
            record_now((n + 1) * p.dt, true);
    }
    return run;
}

struct ConsecutiveReference {
    Field f0;
    Field g0;
    Field F_final;  // evolved antiderivative profile
    PriceSeries prices;
};

inline ConsecutiveReference consecutive_limit_reference(const Field& f_I, const Field& g_I,
                                                        const LimitParams& p,
                                                        int stride = 1) {
    p.validate();
    if (!f_I.grid.same_mesh(g_I.grid)) throw std::invalid_argument("incompatible domains");

    auto cf = detail::cumulative_trapezoid(f_I);
    auto cg = detail::cumulative_trapezoid(g_I);
    const double total_f = cf.back();
    Field F(f_I.grid);
    for (int j = 0; j < F.size(); ++j) F[j] = (total_f - cf[j]) - cg[j];

    NeumannHeatStepper heat(f_I.grid, p.dt, p.diffusion());
    const std::size_t steps = static_cast<std::size_t>(std::llround(p.t_end / p.dt));
    ConsecutiveReference out{Field(f_I.grid), Field(f_I.grid), F,
                             PriceSeries{{}, {}, PriceEstimator::argmax}};
    if (auto px = try_extract_price(F)) out.prices.append(0.0, px->price());
    for (std::size_t n = 0; n < steps; ++n) {
        try {
            F = heat.step(F);
        } catch (const std::exception& e) {
            throw SolverError(n + 1, e.what());
        }
        if ((n + 1) % static_cast<std::size_t>(std::max(1, stride)) == 0 || n + 1 == steps)
            if (auto px = try_extract_price(F)) out.prices.append((n + 1) * p.dt, px->price());
    }
    Field Fp = positive_part(F);
    Field Fm = negative_part(F);
    Field dFp = detail::central_derivative(Fp);
    Field dFm = detail::central_derivative(Fm);
    for (int j = 0; j < F.size(); ++j) {
        out.f0[j] = -dFp[j];
        out.g0[j] = dFm[j];
    }
    out.F_final = std::move(F);
    return out;
}

}  // namespace pricesim
