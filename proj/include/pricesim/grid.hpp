#pragma once

// Uniform vertex-centred 1-D grid and the nodal field type shared by all
// solvers, together with the lattice primitives they are built from:
// shifts by the transaction cost, trapezoidal integrals, positive/negative
// parts and density sanitation.

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "warnings.hpp"

namespace pricesim {

// Negative values above -eps_pos are round-off and get clamped to zero;
// anything below is treated as a genuine loss of positivity.
inline constexpr double eps_pos = 1e-12;

// Numerical support of a field: nodes where the value exceeds
// eps_supp_rel * max(field).
inline constexpr double eps_supp_rel = 1e-8;

struct Grid {
    double x_min = 0.0;
    double x_max = 1.0;
    int n_cells = 0;
    double h = 0.0;
    double dt = 1.0;  // time-step metadata; solvers read their own params

    Grid(double x_min_, double x_max_, int n_cells_, double dt_ = 1.0)
        : x_min(x_min_), x_max(x_max_), n_cells(n_cells_),
          h((x_max_ - x_min_) / n_cells_), dt(dt_) {
        if (n_cells < 4) throw std::invalid_argument("grid needs at least 4 cells");
        if (!(h > 0.0)) throw std::invalid_argument("grid needs x_max > x_min");
        if (!(dt > 0.0)) throw std::invalid_argument("grid needs dt > 0");
    }

    int n_nodes() const { return n_cells + 1; }
    double node(int j) const { return x_min + j * h; }

    bool same_mesh(const Grid& o) const {
        return x_min == o.x_min && x_max == o.x_max && n_cells == o.n_cells;
    }
};

// Nodal samples on a grid, one value per node. Fields are plain values:
// operations return new fields and never alias their inputs.
struct Field {
    Grid grid;
    std::vector<double> values;

    explicit Field(const Grid& g) : grid(g), values(g.n_nodes(), 0.0) {}
    Field(const Grid& g, std::vector<double> v) : grid(g), values(std::move(v)) {
        if (static_cast<int>(values.size()) != g.n_nodes())
            throw std::invalid_argument("field size does not match grid");
    }

    int size() const { return static_cast<int>(values.size()); }
    double operator[](int j) const { return values[j]; }
    double& operator[](int j) { return values[j]; }
    double x(int j) const { return grid.node(j); }
};

template <typename F>
Field make_field(const Grid& g, F&& fn) {
    Field u(g);
    for (int j = 0; j < u.size(); ++j) u[j] = fn(g.node(j));
    return u;
}

// Number of grid cells spanned by the transaction cost. Construction
// rejects costs that are not integer multiples of the mesh width, since the
// collision stencil indexes f_{j +- steps} directly.
struct ShiftSteps {
    int steps = 0;

    static ShiftSteps from_cost(double a, const Grid& g) {
        if (a < 0.0) throw std::invalid_argument("transaction cost must be non-negative");
        double ratio = a / g.h;
        int steps = static_cast<int>(std::llround(ratio));
        if (std::abs(ratio - steps) > 1e-9 * std::max(1.0, ratio))
            throw std::invalid_argument(
                "transaction cost is not an integer multiple of the mesh width");
        return ShiftSteps{steps};
    }
};

enum class ShiftDir { plus, minus };

namespace detail {
// out[j] = u[j + offset], out-of-range positions take `fill`.
inline Field shift_by(const Field& u, int offset, double fill) {
    Field out(u.grid);
    const int n = u.size();
    for (int j = 0; j < n; ++j) {
        int i = j + offset;
        out[j] = (i >= 0 && i < n) ? u[i] : fill;
    }
    return out;
}
}  // namespace detail

inline Field shift_field(const Field& u, ShiftSteps s, ShiftDir dir, double fill) {
    if (std::abs(s.steps) > u.grid.n_cells)
        throw std::invalid_argument("shift exceeds domain");
    return detail::shift_by(u, dir == ShiftDir::plus ? s.steps : -s.steps, fill);
}

// Trapezoidal quadrature; exact for piecewise-linear nodal data.
inline double integrate(const Field& u) {
    double sum = 0.5 * (u[0] + u[u.size() - 1]);
    for (int j = 1; j + 1 < u.size(); ++j) sum += u[j];
    return u.grid.h * sum;
}

// First moment, integral of x * u(x).
inline double moment(const Field& u) {
    double sum = 0.5 * (u.x(0) * u[0] + u.x(u.size() - 1) * u[u.size() - 1]);
    for (int j = 1; j + 1 < u.size(); ++j) sum += u.x(j) * u[j];
    return u.grid.h * sum;
}

inline Field positive_part(const Field& u) {
    Field out(u.grid);
    for (int j = 0; j < u.size(); ++j) out[j] = std::max(u[j], 0.0);
    return out;
}

inline Field negative_part(const Field& u) {
    Field out(u.grid);
    for (int j = 0; j < u.size(); ++j) out[j] = std::max(-u[j], 0.0);
    return out;
}

inline double max_value(const Field& u) {
    return *std::max_element(u.values.begin(), u.values.end());
}

inline double min_value(const Field& u) {
    return *std::min_element(u.values.begin(), u.values.end());
}

inline Field multiply(const Field& a, const Field& b) {
    if (!a.grid.same_mesh(b.grid)) throw std::invalid_argument("incompatible domains");
    Field out(a.grid);
    for (int j = 0; j < a.size(); ++j) out[j] = a[j] * b[j];
    return out;
}

// Clamp round-off negatives to zero; negatives below -eps_pos abort.
// Returns the number of clamped nodes and leaves logging to the caller
// (time loops aggregate instead of warning every step).
inline int clamp_roundoff_negatives(Field& u, const std::string& what) {
    int clamped = 0;
    for (int j = 0; j < u.size(); ++j) {
        if (u[j] < 0.0) {
            if (u[j] < -eps_pos)
                throw std::runtime_error("positivity lost in " + what + " at x = " +
                                         std::to_string(u.x(j)));
            u[j] = 0.0;
            ++clamped;
        }
    }
    return clamped;
}

inline int sanitize_density(Field& u, const std::string& what) {
    int clamped = clamp_roundoff_negatives(u, what);
    if (clamped > 0)
        warn(what + ": clamped " + std::to_string(clamped) + " round-off negative value(s)");
    return clamped;
}

}  // namespace pricesim
