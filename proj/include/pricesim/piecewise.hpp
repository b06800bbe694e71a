#pragma once

// Piecewise-polynomial (degree <= 2) initial data, the format every bundled
// experiment uses to state its densities.

#include <algorithm>
#include <array>
#include <stdexcept>
#include <string>
#include <vector>

#include "grid.hpp"

namespace pricesim {

struct PiecewiseSegment {
    double lo = 0.0;
    double hi = 0.0;
    std::array<double, 3> coeffs{};  // c0 + c1 x + c2 x^2 on [lo, hi]
};

struct PiecewiseSpec {
    std::vector<PiecewiseSegment> segments;

    double operator()(double x) const {
        for (const auto& s : segments) {
            if (x >= s.lo && x <= s.hi)
                return s.coeffs[0] + x * (s.coeffs[1] + x * s.coeffs[2]);
        }
        return 0.0;
    }

    void validate() const {
        for (const auto& s : segments)
            if (!(s.hi >= s.lo))
                throw std::invalid_argument("piecewise segment has hi < lo");
        auto sorted = segments;
        std::sort(sorted.begin(), sorted.end(),
                  [](const auto& a, const auto& b) { return a.lo < b.lo; });
        for (std::size_t i = 1; i < sorted.size(); ++i) {
            // shared endpoints are fine, genuine overlap is not
            if (sorted[i].lo < sorted[i - 1].hi - 1e-12)
                throw std::invalid_argument("piecewise segments overlap");
        }
    }

    // Sample onto grid nodes; rejects negative nodal values. Negatives at
    // round-off scale (expanded polynomial evaluation cancels near segment
    // edges) clamp to zero.
    Field to_field(const Grid& g) const {
        validate();
        const double X = std::max(std::abs(g.x_min), std::abs(g.x_max));
        double scale = 1.0;
        for (const auto& s : segments)
            scale = std::max(scale, std::abs(s.coeffs[0]) + std::abs(s.coeffs[1]) * X +
                                        std::abs(s.coeffs[2]) * X * X);
        Field u(g);
        for (int j = 0; j < u.size(); ++j) {
            double v = (*this)(g.node(j));
            if (v < 0.0) {
                if (v < -1e-12 * scale)
                    throw std::invalid_argument("initial datum negative at x = " +
                                                std::to_string(g.node(j)));
                v = 0.0;
            }
            u[j] = v;
        }
        return u;
    }
};

// Constant c on [lo, hi].
inline PiecewiseSegment const_segment(double lo, double hi, double c) {
    return {lo, hi, {c, 0.0, 0.0}};
}

// Linear c0 + c1 x on [lo, hi].
inline PiecewiseSegment linear_segment(double lo, double hi, double c0, double c1) {
    return {lo, hi, {c0, c1, 0.0}};
}

// scale * (x - lo) * (hi - x): a downward parabola vanishing at both ends.
inline PiecewiseSegment bump_segment(double lo, double hi, double scale) {
    return {lo, hi, {-scale * lo * hi, scale * (lo + hi), -scale}};
}

}  // namespace pricesim
