#pragma once

// Monitored quantities shared by all models: masses, mean bid/ask, the
// traded-price density rho = f g / int(f g) with its three price
// estimators, support geometry, and error metrics between runs.

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "grid.hpp"

namespace pricesim {

enum class PriceEstimator { mean, median, argmax };

inline const char* to_string(PriceEstimator e) {
    switch (e) {
        case PriceEstimator::mean: return "mean";
        case PriceEstimator::median: return "median";
        default: return "argmax";
    }
}

namespace detail {
// Below this, int(f g) is treated as no trading activity at all; products
// of diffusion-tail underflow must not be normalized into a density.
inline constexpr double trade_activity_floor = 1e-250;
}  // namespace detail

inline std::optional<double> try_price_estimate(const Field& f, const Field& g,
                                                PriceEstimator est) {
    if (!f.grid.same_mesh(g.grid)) throw std::invalid_argument("incompatible domains");
    Field w = multiply(f, g);
    const double total = integrate(w);
    if (!(total > detail::trade_activity_floor)) return std::nullopt;

    switch (est) {
        case PriceEstimator::mean:
            return moment(w) / total;
        case PriceEstimator::median: {
            // interpolated 0.5-quantile of the cumulative trapezoid
            const double h = w.grid.h;
            const double target = 0.5 * total;
            double cum = 0.0;
            for (int j = 0; j + 1 < w.size(); ++j) {
                double cell = 0.5 * h * (w[j] + w[j + 1]);
                if (cum + cell >= target && cell > 0.0) {
                    double frac = (target - cum) / cell;
                    return w.x(j) + frac * h;
                }
                cum += cell;
            }
            return w.x(w.size() - 1);
        }
        case PriceEstimator::argmax: {
            int jmax = 0;
            for (int j = 1; j < w.size(); ++j)
                if (w[j] > w[jmax]) jmax = j;  // ties keep the leftmost
            if (jmax > 0 && jmax + 1 < w.size()) {
                double denom = w[jmax - 1] - 2.0 * w[jmax] + w[jmax + 1];
                if (denom < 0.0)
                    return w.x(jmax) +
                           0.5 * w.grid.h * (w[jmax - 1] - w[jmax + 1]) / denom;
            }
            return w.x(jmax);
        }
    }
    return std::nullopt;
}

inline double price_estimate_boltzmann(const Field& f, const Field& g, PriceEstimator est) {
    auto p = try_price_estimate(f, g, est);
    if (!p) throw std::runtime_error("price estimate undefined: no trading activity");
    return *p;
}

// Length of the smallest interval containing all nodes with
// u > threshold_fraction * max(u).
inline double support_width(const Field& u, double threshold_fraction = 1e-3) {
    const double m = max_value(u);
    if (!(m > 0.0)) return 0.0;
    const double thresh = threshold_fraction * m;
    int lo = -1, hi = -1;
    for (int j = 0; j < u.size(); ++j) {
        if (u[j] > thresh) {
            if (lo < 0) lo = j;
            hi = j;
        }
    }
    return (lo < 0) ? 0.0 : u.x(hi) - u.x(lo);
}

// [inf, sup] of the numerical support {u > threshold}; nullopt if empty.
inline std::optional<std::pair<double, double>> support_bounds(const Field& u,
                                                               double threshold) {
    int lo = -1, hi = -1;
    for (int j = 0; j < u.size(); ++j) {
        if (u[j] > threshold) {
            if (lo < 0) lo = j;
            hi = j;
        }
    }
    if (lo < 0) return std::nullopt;
    return std::make_pair(u.x(lo), u.x(hi));
}

inline std::optional<double> mean_price(const Field& u) {
    const double mass = integrate(u);
    if (!(mass > eps_supp_rel * std::max(1.0, max_value(u)))) return std::nullopt;
    return moment(u) / mass;
}

// Per-step monitored quantities of a run.
struct DiagnosticsRecord {
    double t = 0.0;
    double mass_f = 0.0;
    double mass_g = 0.0;
    double mean_bid = std::numeric_limits<double>::quiet_NaN();
    double mean_ask = std::numeric_limits<double>::quiet_NaN();
    double total_volume = 0.0;
    double boundary_leakage = 0.0;  // cumulative mass lost to boundary fill
    double price_estimate = std::numeric_limits<double>::quiet_NaN();
    bool price_defined = false;  // false when carried forward or never defined
    PriceEstimator estimator = PriceEstimator::argmax;
};

struct PriceSeries {
    std::vector<double> times;
    std::vector<double> prices;
    PriceEstimator estimator = PriceEstimator::argmax;

    void append(double t, double p) {
        if (!times.empty() && !(t > times.back()))
            throw std::invalid_argument("price series times must be strictly increasing");
        times.push_back(t);
        prices.push_back(p);
    }
    bool empty() const { return times.empty(); }
};

struct Metrics {
    double l1 = 0.0;
    double l2 = 0.0;
    double linf = 0.0;
};

inline Metrics compare_fields(const Field& a, const Field& b) {
    if (!a.grid.same_mesh(b.grid)) throw std::invalid_argument("incompatible domains");
    Metrics m;
    double sum1 = 0.0, sum2 = 0.0;
    const int n = a.size();
    for (int j = 0; j < n; ++j) {
        double d = std::abs(a[j] - b[j]);
        double w = (j == 0 || j == n - 1) ? 0.5 : 1.0;
        sum1 += w * d;
        sum2 += w * d * d;
        m.linf = std::max(m.linf, d);
    }
    m.l1 = a.grid.h * sum1;
    m.l2 = std::sqrt(a.grid.h * sum2);
    return m;
}

inline double interpolate_series(const PriceSeries& s, double t) {
    const auto& ts = s.times;
    if (ts.empty()) throw std::invalid_argument("empty price series");
    if (t <= ts.front()) return s.prices.front();
    if (t >= ts.back()) return s.prices.back();
    auto it = std::upper_bound(ts.begin(), ts.end(), t);
    int i = static_cast<int>(it - ts.begin());
    double w = (t - ts[i - 1]) / (ts[i] - ts[i - 1]);
    return (1.0 - w) * s.prices[i - 1] + w * s.prices[i];
}

// Distances between two price trajectories over the overlap of their time
// ranges, excluding an initial burn-in window. B is resampled onto A's
// sample times by linear interpolation; L1/L2 use trapezoidal quadrature in
// time and linf is the sup over the window.
inline Metrics compare_price_series(const PriceSeries& a, const PriceSeries& b,
                                    double burn_in = 0.1) {
    if (a.empty() || b.empty()) throw std::invalid_argument("empty price series");
    const double t_lo = std::max({a.times.front(), b.times.front(), burn_in});
    const double t_hi = std::min(a.times.back(), b.times.back());
    if (!(t_hi > t_lo)) throw std::invalid_argument("price series windows do not overlap");

    Metrics m;
    double sum1 = 0.0, sum2 = 0.0, prev_t = 0.0, prev_d = 0.0;
    bool first = true;
    for (std::size_t i = 0; i < a.times.size(); ++i) {
        double t = a.times[i];
        if (t < t_lo || t > t_hi) continue;
        double d = std::abs(a.prices[i] - interpolate_series(b, t));
        m.linf = std::max(m.linf, d);
        if (!first) {
            double w = 0.5 * (t - prev_t);
            sum1 += w * (d + prev_d);
            sum2 += w * (d * d + prev_d * prev_d);
        }
        prev_t = t;
        prev_d = d;
        first = false;
    }
    m.l1 = sum1;
    m.l2 = std::sqrt(sum2);
    return m;
}

}  // namespace pricesim
