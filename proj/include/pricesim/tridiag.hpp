#pragma once

// Tridiagonal linear algebra behind every implicit diffusion step: the
// Thomas algorithm, a reusable factorization for repeated solves with the
// same matrix, and a bordered variant for matrices that are tridiagonal
// except for two replaced rows (the nonlocal boundary conditions of the
// free-boundary solver).

#include <array>
#include <cmath>
#include <stdexcept>
#include <utility>
#include <vector>

#include "grid.hpp"

namespace pricesim {

inline constexpr double solver_residual_tol = 1e-12;

namespace detail {
inline double tridiag_residual(const std::vector<double>& lower,
                               const std::vector<double>& diag,
                               const std::vector<double>& upper,
                               const std::vector<double>& x,
                               const std::vector<double>& rhs) {
    const int n = static_cast<int>(diag.size());
    double worst = 0.0;
    for (int i = 0; i < n; ++i) {
        double ax = diag[i] * x[i];
        if (i > 0) ax += lower[i] * x[i - 1];
        if (i + 1 < n) ax += upper[i] * x[i + 1];
        worst = std::max(worst, std::abs(ax - rhs[i]));
    }
    return worst;
}

inline double max_abs(const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}
}  // namespace detail

/**
 * Solves a tridiagonal system A x = rhs with the Thomas algorithm.
 *
 * lower[i], diag[i], upper[i] hold A(i, i-1), A(i, i), A(i, i+1);
 * lower[0] and upper[n-1] are ignored. No pivoting is performed, so the
 * matrix must be diagonally dominant (every matrix assembled by the
 * implicit diffusion stencils is). Each solve verifies its own residual:
 * max-norm residual above solver_residual_tol (relative to the right-hand
 * side) is an error rather than a silently degraded solution.
 */
inline std::vector<double> solve_tridiagonal(const std::vector<double>& lower,
                                             const std::vector<double>& diag,
                                             const std::vector<double>& upper,
                                             const std::vector<double>& rhs) {
    const int n = static_cast<int>(diag.size());
    if (n == 0) return {};
    if (static_cast<int>(lower.size()) != n || static_cast<int>(upper.size()) != n ||
        static_cast<int>(rhs.size()) != n)
        throw std::invalid_argument("tridiagonal bands and rhs must have equal length");

    std::vector<double> cp(n, 0.0), x(n, 0.0);
    double piv = diag[0];
    if (piv == 0.0) throw std::runtime_error("singular system");
    cp[0] = upper[0] / piv;
    x[0] = rhs[0] / piv;
    for (int i = 1; i < n; ++i) {
        piv = diag[i] - lower[i] * cp[i - 1];
        if (piv == 0.0) throw std::runtime_error("singular system");
        cp[i] = upper[i] / piv;
        x[i] = (rhs[i] - lower[i] * x[i - 1]) / piv;
    }
    for (int i = n - 2; i >= 0; --i) x[i] -= cp[i] * x[i + 1];

    double res = detail::tridiag_residual(lower, diag, upper, x, rhs);
    if (res > solver_residual_tol * std::max(1.0, detail::max_abs(rhs)))
        throw std::runtime_error("solver residual too large");
    return x;
}

inline Field solve_tridiagonal(const std::vector<double>& lower,
                               const std::vector<double>& diag,
                               const std::vector<double>& upper, const Field& rhs) {
    return Field(rhs.grid, solve_tridiagonal(lower, diag, upper, rhs.values));
}

// Pre-eliminated Thomas factorization for repeated solves against a fixed
// matrix. Keeps the modified upper band and pivot reciprocals so each solve
// is two sweeps with no divisions beyond the stored ones.
class FactoredTridiagonal {
public:
    FactoredTridiagonal() = default;
    FactoredTridiagonal(std::vector<double> lower, std::vector<double> diag,
                        std::vector<double> upper)
        : lower_(std::move(lower)), diag_(std::move(diag)), upper_(std::move(upper)) {
        const int n = static_cast<int>(diag_.size());
        cp_.resize(n);
        inv_piv_.resize(n);
        double piv = diag_[0];
        if (piv == 0.0) throw std::runtime_error("singular system");
        inv_piv_[0] = 1.0 / piv;
        cp_[0] = upper_[0] * inv_piv_[0];
        for (int i = 1; i < n; ++i) {
            piv = diag_[i] - lower_[i] * cp_[i - 1];
            if (piv == 0.0) throw std::runtime_error("singular system");
            inv_piv_[i] = 1.0 / piv;
            cp_[i] = upper_[i] * inv_piv_[i];
        }
    }

    int size() const { return static_cast<int>(diag_.size()); }

    std::vector<double> solve(const std::vector<double>& rhs) const {
        const int n = size();
        std::vector<double> x(n);
        x[0] = rhs[0] * inv_piv_[0];
        for (int i = 1; i < n; ++i) x[i] = (rhs[i] - lower_[i] * x[i - 1]) * inv_piv_[i];
        for (int i = n - 2; i >= 0; --i) x[i] -= cp_[i] * x[i + 1];

        double res = detail::tridiag_residual(lower_, diag_, upper_, x, rhs);
        if (res > solver_residual_tol * std::max(1.0, detail::max_abs(rhs)))
            throw std::runtime_error("solver residual too large");
        return x;
    }

private:
    std::vector<double> lower_, diag_, upper_;
    std::vector<double> cp_, inv_piv_;
};

// Sparse row used to replace a row of a tridiagonal matrix.
struct SparseRow {
    std::vector<std::pair<int, double>> entries;

    double dot(const std::vector<double>& v) const {
        double sum = 0.0;
        for (auto [j, c] : entries) sum += c * v[j];
        return sum;
    }
};

/**
 * Solver for a matrix that is tridiagonal in rows 1..n-2 with rows 0 and
 * n-1 replaced by arbitrary sparse rows (a bordered system). Implemented as
 * a Woodbury update of a core tridiagonal solve: the core matrix carries
 * identity first/last rows, and the two replacements are rank-one
 * corrections whose solves are cached at construction. Cost per solve stays
 * O(n).
 */
class BorderedTridiagonal {
public:
    BorderedTridiagonal(std::vector<double> lower, std::vector<double> diag,
                        std::vector<double> upper, SparseRow row_first, SparseRow row_last)
        : row_first_(std::move(row_first)), row_last_(std::move(row_last)) {
        const int n = static_cast<int>(diag.size());
        if (n < 3) throw std::invalid_argument("bordered system needs at least 3 rows");
        // identity rows at the borders keep the core strictly tridiagonal
        diag.front() = 1.0;
        upper.front() = 0.0;
        diag.back() = 1.0;
        lower.back() = 0.0;
        core_ = FactoredTridiagonal(std::move(lower), std::move(diag), std::move(upper));

        // w_r = (replacement row r) - e_r
        w_first_ = row_first_;
        add_entry(w_first_, 0, -1.0);
        w_last_ = row_last_;
        add_entry(w_last_, n - 1, -1.0);

        std::vector<double> e(n, 0.0);
        e[0] = 1.0;
        z_first_ = core_.solve(e);
        e[0] = 0.0;
        e[n - 1] = 1.0;
        z_last_ = core_.solve(e);

        // S = I + [w^T z] (2x2), stored as its inverse
        double s00 = 1.0 + w_first_.dot(z_first_);
        double s01 = w_first_.dot(z_last_);
        double s10 = w_last_.dot(z_first_);
        double s11 = 1.0 + w_last_.dot(z_last_);
        double det = s00 * s11 - s01 * s10;
        if (det == 0.0 || !std::isfinite(det))
            throw std::runtime_error("singular system");
        si_ = {s11 / det, -s01 / det, -s10 / det, s00 / det};
    }

    std::vector<double> solve(const std::vector<double>& rhs) const {
        std::vector<double> x = core_.solve(rhs);
        double d0 = w_first_.dot(x);
        double d1 = w_last_.dot(x);
        double c0 = si_[0] * d0 + si_[1] * d1;
        double c1 = si_[2] * d0 + si_[3] * d1;
        const int n = static_cast<int>(x.size());
        for (int i = 0; i < n; ++i) x[i] -= z_first_[i] * c0 + z_last_[i] * c1;

        double scale = std::max(1.0, detail::max_abs(rhs));
        if (std::abs(row_first_.dot(x) - rhs[0]) > 1e-9 * scale ||
            std::abs(row_last_.dot(x) - rhs[n - 1]) > 1e-9 * scale)
            throw std::runtime_error("solver residual too large");
        return x;
    }

private:
    static void add_entry(SparseRow& row, int col, double coeff) {
        for (auto& [j, c] : row.entries) {
            if (j == col) {
                c += coeff;
                return;
            }
        }
        row.entries.emplace_back(col, coeff);
    }

    FactoredTridiagonal core_;
    SparseRow row_first_, row_last_;
    SparseRow w_first_, w_last_;
    std::vector<double> z_first_, z_last_;
    std::array<double, 4> si_{};
};

}  // namespace pricesim
