#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "cryoflow/types.hpp"

using namespace cryoflow;

TEST_CASE("material params: density ordering is enforced for every bad pair") {
    for (double rho1 : {0.5, 0.9, 1.0, 2.0}) {
        for (double delta : {0.0, 0.1, 1.0}) {
            MaterialParams p;
            p.rho1 = rho1;
            p.rho2 = rho1 + delta;  // rho1 - rho2 <= 0
            CHECK_THROWS_AS(p.validate(), ParameterError);
        }
    }
    MaterialParams ok;
    CHECK_NOTHROW(ok.validate());
    ok.nu = -0.1;
    CHECK_THROWS_AS(ok.validate(), ParameterError);
    ok.nu = 0.0;
    ok.k = 0.0;
    CHECK_THROWS_AS(ok.validate(), ParameterError);
}

TEST_CASE("mixture compressibility") {
    CHECK(mixture_compressibility(2.0, 1.0, 1.0, 0.0) == doctest::Approx(0.5));
    CHECK(mixture_compressibility(1.0, 1.0, 0.5, 0.5) == doctest::Approx(1.0));
    CHECK(mixture_compressibility(4.0, 2.0, 0.4, 0.6) == doctest::Approx(0.4));
    CHECK_THROWS_AS(mixture_compressibility(0.0, 1.0, 0.5, 0.5), ParameterError);
    CHECK_THROWS_AS(mixture_compressibility(1.0, 1.0, 0.7, 0.7), ParameterError);
}

TEST_CASE("grid invariants") {
    CHECK_THROWS_AS(Grid::make_1d(1, 1.0), ParameterError);
    CHECK_THROWS_AS(Grid::make_1d(8, 0.0), ParameterError);
    const Grid g = Grid::make_2d(4, 8, 2.0, 1.0);
    CHECK(g.size() == 32);
    CHECK(g.hx == doctest::Approx(0.5));
    CHECK(g.hy == doctest::Approx(0.125));
    CHECK(g.cell_volume() == doctest::Approx(0.0625));
}

TEST_CASE("darcy velocity: constants and linear fields are exact") {
    const Grid g = Grid::make_1d(16, 1.0);
    State s = State::uniform(g, 3.0, 0.0, 1.0, 0.0);
    MaterialParams params;
    auto flux = darcy_velocity(s, params, g);
    for (double v : flux[0]) CHECK(v == 0.0);

    for (int i = 0; i < g.nx; ++i) s.p[i] = g.x_center(i);  // p(x) = x
    flux = darcy_velocity(s, params, g);
    for (double v : flux[0]) CHECK(v == doctest::Approx(-1.0).epsilon(1e-13));
}

TEST_CASE("darcy velocity: second-order against an analytic gradient") {
    // p(x, y) = sin(2x) cos(y); flux = -m grad p evaluated analytically.
    MaterialParams params;
    params.m = 1.7;
    double prev_err = 0.0;
    std::vector<double> errs;
    for (int n : {16, 32, 64}) {
        const Grid g = Grid::make_2d(n, n, 1.0, 1.0);
        State s = State::uniform(g, 0.0, 0.0, 1.0, 0.0);
        for (int j = 0; j < g.ny; ++j)
            for (int i = 0; i < g.nx; ++i)
                s.p[g.idx(i, j)] =
                    std::sin(2.0 * g.x_center(i)) * std::cos(g.y_center(j));
        const auto flux = darcy_velocity(s, params, g);
        double err = 0.0;
        for (int j = 0; j < g.ny; ++j)
            for (int i = 0; i < g.nx; ++i) {
                const double x = g.x_center(i), y = g.y_center(j);
                const double fx = -params.m * 2.0 * std::cos(2.0 * x) * std::cos(y);
                const double fy = params.m * std::sin(2.0 * x) * std::sin(y);
                err = std::max(err, std::abs(flux[0][g.idx(i, j)] - fx));
                err = std::max(err, std::abs(flux[1][g.idx(i, j)] - fy));
            }
        errs.push_back(err);
        prev_err = err;
    }
    (void)prev_err;
    const double order1 = std::log2(errs[0] / errs[1]);
    const double order2 = std::log2(errs[1] / errs[2]);
    CHECK(order1 >= 1.9);
    CHECK(order2 >= 1.9);
}

TEST_CASE("snapshot round-trips bit-exactly") {
    const Grid g = Grid::make_2d(5, 3, 1.25, 0.75);
    State s = State::uniform(g, 0.0, 0.0, 0.0, 0.0);
    std::mt19937 rng(123);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int c = 0; c < g.size(); ++c) {
        s.p[c] = u(rng) * 1e3;
        s.w[c] = u(rng);
        s.beta1[c] = std::abs(u(rng)) * 0.5;
        s.beta2[c] = std::abs(u(rng)) * 0.5;
    }
    s.t = 0.1 + u(rng);

    std::stringstream buf;
    write_snapshot(buf, s, g);
    const Snapshot back = read_snapshot(buf);
    CHECK(back.grid.nx == g.nx);
    CHECK(back.grid.ny == g.ny);
    CHECK(back.state.t == s.t);
    for (int c = 0; c < g.size(); ++c) {
        CHECK(back.state.p[c] == s.p[c]);
        CHECK(back.state.w[c] == s.w[c]);
        CHECK(back.state.beta1[c] == s.beta1[c]);
        CHECK(back.state.beta2[c] == s.beta2[c]);
    }
}
