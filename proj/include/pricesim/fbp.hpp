#pragma once

// Free-boundary price formation model solved through its transformed
// formulation. The lattice sums
//
//   F(x) = sum_{l>=0} f(x + a l),   G(x) = sum_{l>=0} g(x - a l)
//
// combine both densities into V = F - G, which satisfies the plain heat
// equation V_t = D V_xx with the nonlocal boundary conditions
// V_x(x_min) = V_x(x_min + a) and V_x(x_max) = V_x(x_max - a). On a bounded
// grid the sums are finite (terms beyond the domain vanish) and telescope
// exactly, so the densities reconstruct from
//
//   v = V - V^+(x + a) + V^-(x - a),   f = v^+,  g = v^-,
//
// and the price p(t) is the zero level set of V, with flux
// lambda(t) = -V_x(p).
//
// The boundary rows make the implicit matrix tridiagonal-plus-two-rows; the
// bordered solver keeps each step O(N).

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "diagnostics.hpp"
#include "grid.hpp"
#include "params.hpp"
#include "tridiag.hpp"
#include "boltzmann.hpp"

namespace pricesim {

// Phi(x_j) = sum_l f(x_j + a l) - sum_l g(x_j - a l), finite sums with
// zero fill outside the domain.
inline Field transform_initial(const Field& f_I, const Field& g_I, ShiftSteps s) {
    if (s.steps == 0)
        throw std::invalid_argument("transform undefined for zero transaction cost");
    if (!f_I.grid.same_mesh(g_I.grid)) throw std::invalid_argument("incompatible domains");
    const int n = f_I.size();
    Field phi(f_I.grid);
    for (int j = 0; j < n; ++j) {
        double acc = 0.0;
        for (int i = j; i < n; i += s.steps) acc += f_I[i];
        for (int i = j; i >= 0; i -= s.steps) acc -= g_I[i];
        phi[j] = acc;
    }
    return phi;
}

// v = V - V^+(x+a) + V^-(x-a); f = v^+, g = v^-.
inline std::pair<Field, Field> reconstruct_densities(const Field& V, ShiftSteps s) {
    Field vp = positive_part(V);
    Field vm = negative_part(V);
    Field vp_up = shift_field(vp, s, ShiftDir::plus, 0.0);
    Field vm_down = shift_field(vm, s, ShiftDir::minus, 0.0);
    Field v(V.grid);
    for (int j = 0; j < V.size(); ++j) v[j] = V[j] - vp_up[j] + vm_down[j];
    return {positive_part(v), negative_part(v)};
}

struct WellPreparedness {
    double sup_support_f = 0.0;
    double inf_support_g = 0.0;
    bool satisfied = false;
};

inline WellPreparedness check_well_prepared(const Field& f, const Field& g) {
    WellPreparedness wp;
    auto bf = support_bounds(f, eps_supp_rel * std::max(max_value(f), 0.0));
    auto bg = support_bounds(g, eps_supp_rel * std::max(max_value(g), 0.0));
    if (!bf || !bg) {
        // an empty side cannot violate the ordering
        wp.sup_support_f = bf ? bf->second : f.grid.x_min;
        wp.inf_support_g = bg ? bg->first : g.grid.x_max;
        wp.satisfied = true;
        return wp;
    }
    wp.sup_support_f = bf->second;
    wp.inf_support_g = bg->first;
    wp.satisfied = wp.sup_support_f <= wp.inf_support_g;
    return wp;
}

struct PriceCrossing {
    double price = 0.0;
    double lambda = 0.0;
};

struct PriceExtraction {
    std::vector<PriceCrossing> crossings;  // all +/- sign changes, left to right

    double price() const { return scalar().price; }
    double lambda() const { return scalar().lambda; }

    const PriceCrossing& scalar() const {
        if (crossings.empty()) throw std::runtime_error("price undefined");
        if (crossings.size() > 1)
            warn("multiple price crossings; using the leftmost");
        return crossings.front();
    }
};

// Finds every +to- sign change of V; the price interpolates linearly on the
// bracketing cell and lambda is minus the central-difference slope of V
// interpolated to the crossing.
inline std::optional<PriceExtraction> try_extract_price(const Field& V) {
    PriceExtraction out;
    const int n = V.size();
    const double h = V.grid.h;
    for (int j = 0; j + 1 < n; ++j) {
        if (!(V[j] > 0.0 && V[j + 1] <= 0.0)) continue;
        double p = (V[j + 1] == 0.0) ? V.x(j + 1)
                                     : V.x(j) + h * V[j] / (V[j] - V[j + 1]);
        auto slope_at = [&](int i) {
            if (i >= 1 && i + 1 < n) return (V[i + 1] - V[i - 1]) / (2.0 * h);
            return (i + 1 < n) ? (V[i + 1] - V[i]) / h : (V[i] - V[i - 1]) / h;
        };
        double w = (p - V.x(j)) / h;
        double slope = (1.0 - w) * slope_at(j) + w * slope_at(j + 1);
        out.crossings.push_back({p, -slope});
    }
    if (out.crossings.empty()) return std::nullopt;
    return out;
}

inline PriceExtraction extract_price(const Field& V) {
    auto px = try_extract_price(V);
    if (!px) throw std::runtime_error("price undefined");
    return *px;
}

struct FBPState {
    Field V;
    double t = 0.0;
    double price = 0.0;
    double lambda = 0.0;
};

class FBPStepper {
public:
    FBPStepper(const Grid& grid, const ModelParams& params)
        : shift_(ShiftSteps::from_cost(params.a, grid)), dt_(params.dt),
          solver_(build(grid, params, shift_)) {}

    ShiftSteps shift() const { return shift_; }

    FBPState step(const FBPState& state) const {
        std::vector<double> rhs = state.V.values;
        rhs.front() = 0.0;  // boundary rows impose the flux conditions
        rhs.back() = 0.0;
        Field V(state.V.grid, solver_.solve(rhs));
        FBPState next{std::move(V), state.t + dt_, 0.0, 0.0};
        PriceExtraction px;
        try {
            px = extract_price(next.V);
        } catch (const std::runtime_error&) {
            throw std::runtime_error("price undefined: V has no root");
        }
        next.price = px.price();
        next.lambda = px.lambda();
        return next;
    }

private:
    static BorderedTridiagonal build(const Grid& grid, const ModelParams& params,
                                     ShiftSteps shift) {
        params.validate();
        const int s = shift.steps;
        const int n = grid.n_nodes();
        if (s < 1) throw std::invalid_argument("boundary conditions need a >= h");
        if (s + 2 >= n) throw std::invalid_argument("shift exceeds domain");
        const double r = params.dt * params.diffusion() / (grid.h * grid.h);

        std::vector<double> lower(n, -r), diag(n, 1.0 + 2.0 * r), upper(n, -r);
        lower[0] = 0.0;
        upper[n - 1] = 0.0;

        // V_x(x_min) = V_x(x_min + a): one-sided second-order differences,
        // forward at both points (coefficients scaled by 2h).
        SparseRow row0;
        row0.entries = {{0, -3.0}, {1, 4.0}, {2, -1.0}};
        add(row0, s, 3.0);
        add(row0, s + 1, -4.0);
        add(row0, s + 2, 1.0);

        // V_x(x_max) = V_x(x_max - a): backward at both points.
        SparseRow rowN;
        rowN.entries = {{n - 1, 3.0}, {n - 2, -4.0}, {n - 3, 1.0}};
        add(rowN, n - 1 - s, -3.0);
        add(rowN, n - 2 - s, 4.0);
        add(rowN, n - 3 - s, -1.0);

        return BorderedTridiagonal(std::move(lower), std::move(diag), std::move(upper),
                                   std::move(row0), std::move(rowN));
    }

    static void add(SparseRow& row, int col, double coeff) {
        for (auto& [j, c] : row.entries) {
            if (j == col) {
                c += coeff;
                return;
            }
        }
        row.entries.emplace_back(col, coeff);
    }

    ShiftSteps shift_;
    double dt_;
    BorderedTridiagonal solver_;
};

inline FBPState step_fbp(const FBPState& state, const ModelParams& p) {
    FBPStepper stepper(state.V.grid, p);
    return stepper.step(state);
}

struct FBPRun {
    FBPState final_state;
    PriceSeries prices;
    std::vector<DiagnosticsRecord> records;
};

// Time loop for the transformed formulation. Records are computed from the
// reconstructed densities; total_volume reports the boundary flux lambda.
inline FBPRun run_fbp(const Field& f_I, const Field& g_I, const ModelParams& p,
                      const ObserverOptions& opts = {}) {
    p.validate();
    ShiftSteps s = ShiftSteps::from_cost(p.a, f_I.grid);
    auto wp = check_well_prepared(f_I, g_I);
    if (!wp.satisfied)
        warn("initial data not well prepared: sup supp f = " +
             std::to_string(wp.sup_support_f) + " > inf supp g = " +
             std::to_string(wp.inf_support_g));

    FBPStepper stepper(f_I.grid, p);
    FBPState state{transform_initial(f_I, g_I, s), 0.0, 0.0, 0.0};
    {
        PriceExtraction px = extract_price(state.V);
        state.price = px.price();
        state.lambda = px.lambda();
    }

    FBPRun run{state, PriceSeries{{}, {}, opts.estimator}, {}};
    const std::size_t steps = static_cast<std::size_t>(std::llround(p.t_end / p.dt));

    auto record_now = [&](const FBPState& st, bool into_series) {
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
        rec.estimator = opts.estimator;
        if (into_series || st.t == 0.0) run.prices.append(st.t, st.price);
        run.records.push_back(rec);
    };

    record_now(run.final_state, false);
    for (std::size_t n = 0; n < steps; ++n) {
        try {
            run.final_state = stepper.step(run.final_state);
        } catch (const std::exception& e) {
            throw SolverError(n + 1, e.what());
        }
        run.final_state.t = (n + 1) * p.dt;
        if ((n + 1) % static_cast<std::size_t>(std::max(1, opts.stride)) == 0 ||
            n + 1 == steps)
            record_now(run.final_state, true);
    }
    return run;
}

}  // namespace pricesim
