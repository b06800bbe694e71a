#pragma once

// Backward-Euler step for u_t = D u_xx with homogeneous Neumann boundary
// conditions. The boundary rows use ghost-node reflection
// (u_{-1} = u_1, u_{N+1} = u_{N-1}), which keeps the matrix tridiagonal and
// the scheme second order in space. The matrix (I - dt D L) is factored
// once and reused for every step.

#include <vector>

#include "grid.hpp"
#include "tridiag.hpp"

namespace pricesim {

class NeumannHeatStepper {
public:
    NeumannHeatStepper(const Grid& grid, double dt, double diffusivity)
        : grid_(grid), r_(dt * diffusivity / (grid.h * grid.h)) {
        const int n = grid.n_nodes();
        std::vector<double> lower(n, -r_), diag(n, 1.0 + 2.0 * r_), upper(n, -r_);
        upper[0] = -2.0 * r_;
        lower[n - 1] = -2.0 * r_;
        lower[0] = 0.0;
        upper[n - 1] = 0.0;
        factored_ = FactoredTridiagonal(std::move(lower), std::move(diag), std::move(upper));
    }

    const Grid& grid() const { return grid_; }
    double r() const { return r_; }

    std::vector<double> step(const std::vector<double>& u) const { return factored_.solve(u); }

    Field step(const Field& u) const { return Field(u.grid, factored_.solve(u.values)); }

private:
    Grid grid_;
    double r_;
    FactoredTridiagonal factored_;
};

}  // namespace pricesim
