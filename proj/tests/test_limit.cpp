#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include <pricesim/heat.hpp>
#include <pricesim/limit.hpp>

#include "oracles.hpp"

using namespace pricesim;

namespace {

Field bump(const Grid& g, double lo, double hi, double scale) {
    return make_field(g, [=](double x) {
        return (x >= lo && x <= hi) ? scale * (x - lo) * (hi - x) : 0.0;
    });
}

Field scaling_buyers(const Grid& g) {
    return make_field(g, [](double x) {
        if (x >= 9.0 && x <= 9.5) return 1.0;
        if (x > 9.5 && x < 10.0) return -2.0 * x + 20.0;
        return 0.0;
    });
}

Field scaling_vendors(const Grid& g) {
    return make_field(g, [](double x) {
        return (x >= 10.0 && x <= 11.0) ? 2.0 * x - 20.0 : 0.0;
    });
}

}  // namespace

TEST_CASE("zero drift decouples the system into two heat flows") {
    Grid g(0.0, 1.0, 100);
    LimitParams p{0.0, std::sqrt(2.0), 1e-4, 0.0};
    Field f0 = bump(g, 0.2, 0.5, 10.0);
    Field g0 = bump(g, 0.4, 0.8, 10.0);
    LimitStepper stepper(g, p);
    NeumannHeatStepper heat(g, p.dt, p.diffusion());
    Field f = f0, gg = g0, fh = f0, gh = g0;
    for (int n = 0; n < 50; ++n) {
        auto [fn, gn] = stepper.step(f, gg);
        f = fn;
        gg = gn;
        fh = heat.step(fh);
        gh = heat.step(gh);
    }
    for (int j = 0; j < f.size(); ++j) {
        CHECK(f[j] == fh[j]);
        CHECK(gg[j] == gh[j]);
    }
}

TEST_CASE("the sum field performs an exact discrete heat step") {
    Grid g(0.0, 1.0, 200);
    LimitParams p{1.0, std::sqrt(2.0), 1e-4, 0.0};
    Field f = bump(g, 0.2, 0.55, 12.0);
    Field gg = bump(g, 0.45, 0.8, 12.0);
    Field sum(g);
    for (int j = 0; j < sum.size(); ++j) sum[j] = f[j] + gg[j];

    LimitStepper stepper(g, p);
    NeumannHeatStepper heat(g, p.dt, p.diffusion());
    for (int n = 0; n < 100; ++n) {
        auto [fn, gn] = stepper.step(f, gg);
        f = fn;
        gg = gn;
        sum = heat.step(sum);
    }
    for (int j = 0; j < sum.size(); ++j)
        CHECK(f[j] + gg[j] == Catch::Approx(sum[j]).margin(1e-12));
}

TEST_CASE("masses are conserved while supports stay interior") {
    Grid g(0.0, 4.0, 400);
    LimitParams p{1.0, std::sqrt(2.0), 1e-4, 0.0};
    Field f = bump(g, 1.5, 2.1, 8.0);
    Field gg = bump(g, 1.9, 2.5, 8.0);
    double mf0 = integrate(f), mg0 = integrate(gg);
    LimitStepper stepper(g, p);
    for (int n = 0; n < 200; ++n) {
        auto [fn, gn] = stepper.step(f, gg);
        f = fn;
        gg = gn;
    }
    CHECK(integrate(f) == Catch::Approx(mf0).margin(1e-11));
    CHECK(integrate(gg) == Catch::Approx(mg0).margin(1e-11));
}

TEST_CASE("half step size confirms the central flux discretization") {
    Grid g(0.0, 4.0, 400);
    Field f0 = bump(g, 1.5, 2.1, 8.0);
    Field g0 = bump(g, 1.9, 2.5, 8.0);
    Field coarse_f(g), fine_f(g);
    {
        LimitParams p{1.0, std::sqrt(2.0), 2e-4, 0.1};
        auto run = run_limit(f0, g0, p);
        coarse_f = run.f;
    }
    {
        LimitParams p{1.0, std::sqrt(2.0), 1e-4, 0.1};
        auto run = run_limit(f0, g0, p);
        fine_f = run.f;
    }
    // first order in time: halving dt should keep the states close
    CHECK(compare_fields(coarse_f, fine_f).linf <= 2e-3 * max_value(fine_f));
}

TEST_CASE("consecutive reference of zero data is zero") {
    Grid g(0.0, 1.0, 64);
    LimitParams p{1.0, std::sqrt(2.0), 1e-3, 0.05};
    auto ref = consecutive_limit_reference(Field(g), Field(g), p);
    CHECK(max_value(ref.f0) == 0.0);
    CHECK(max_value(ref.g0) == 0.0);
    CHECK(ref.prices.empty());
}

TEST_CASE("consecutive reference roots and jump structure") {
    Grid g(0.0, 20.0, 2000);  // h = 0.01
    LimitParams p{1.0, std::sqrt(2.0), 1e-3, 1.0};
    Field f0 = scaling_buyers(g);
    Field g0 = scaling_vendors(g);
    auto ref = consecutive_limit_reference(f0, g0, p, 100);

    // initial root sits where the tail masses balance: x = 10 for this datum
    CHECK(ref.prices.times.front() == 0.0);
    CHECK(ref.prices.prices.front() == Catch::Approx(10.0).margin(2e-2));

    // v0 = f0 - g0 changes sign across one cell with an antisymmetric jump
    Field v(g);
    for (int j = 0; j < v.size(); ++j) v[j] = ref.f0[j] - ref.g0[j];
    auto cells = oracles::sign_change_cells(v);
    REQUIRE_FALSE(cells.empty());
    int j = cells.front();
    REQUIRE(j >= 3);
    REQUIRE(j + 4 < v.size());
    double vl = v[j - 1], vr = v[j + 2];
    CHECK(vl + vr == Catch::Approx(0.0).margin(0.05 * std::abs(vl)));
    double jump = std::abs(vr - vl);
    double outer_slope = std::max(std::abs(v[j - 1] - v[j - 3]) / (2 * g.h),
                                  std::abs(v[j + 4] - v[j + 2]) / (2 * g.h));
    CHECK(jump > 10.0 * g.h * outer_slope);
}

TEST_CASE("drift guard flags runaway explicit steps") {
    Grid g(0.0, 1.0, 100);
    LimitParams p{1e6, std::sqrt(2.0), 0.5, 0.0};  // absurd drift strength
    Field f = bump(g, 0.2, 0.6, 10.0);
    Field gg = bump(g, 0.4, 0.8, 10.0);
    LimitStepper stepper(g, p);
    CHECK_THROWS_WITH(stepper.step(f, gg), "drift step too large");
}
