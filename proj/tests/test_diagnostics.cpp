#include <doctest.h>

#include <cmath>
#include <random>

#include "cryoflow/constraint.hpp"
#include "cryoflow/diagnostics.hpp"

using namespace cryoflow;

namespace {

// Brute-force distance to the normal cone at the (1,0) vertex: sample the
// cone {a*(0,-1) + b*(1,1) : a,b >= 0} densely and take the closest point.
double brute_force_vertex_cone_distance(Vec2 g) {
    double best = g.norm();  // the origin is in the cone
    for (int i = 0; i <= 400; ++i)
        for (int j = 0; j <= 400; ++j) {
            const double a = i * 0.02, b = j * 0.02;
            const Vec2 pt{b, b - a};
            best = std::min(best, (g - pt).norm());
        }
    return best;
}

}  // namespace

TEST_CASE("total mass: uniform examples and linearity") {
    const Grid g = Grid::make_1d(10, 1.0);
    MaterialParams params;  // rho1 = 1, k = 1

    const State all_liquid = State::uniform(g, 0.0, 0.0, 1.0, 0.0);
    CHECK(total_mass(all_liquid, params, g) == doctest::Approx(1.0).epsilon(1e-14));

    const State pressurized = State::uniform(g, 2.0, 0.0, 0.0, 0.0);
    CHECK(total_mass(pressurized, params, g) == doctest::Approx(2.0).epsilon(1e-14));

    // Superposition in each field.
    std::mt19937 rng(4);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    State a = State::uniform(g, 0.0, 0.0, 0.0, 0.0);
    State b = a, sum = a;
    for (int c = 0; c < g.size(); ++c) {
        a.p[c] = u(rng);
        b.beta1[c] = 0.5 * (1.0 + u(rng));
        b.beta2[c] = 0.25 * (1.0 + u(rng));
        sum.p[c] = a.p[c];
        sum.beta1[c] = b.beta1[c];
        sum.beta2[c] = b.beta2[c];
    }
    CHECK(total_mass(sum, params, g) ==
          doctest::Approx(total_mass(a, params, g) + total_mass(b, params, g))
              .epsilon(1e-12));
}

TEST_CASE("lyapunov energy: closed-form values") {
    const Grid g = Grid::make_1d(8, 1.0);
    MaterialParams params;
    const ExpTemperature temp(30.0);

    // p = 0, w = 0, beta = (0,0): only the thermal potential survives and
    // potential(0) = 1, so E = c0 |Omega|.
    const State base = State::uniform(g, 0.0, 0.0, 0.0, 0.0);
    CHECK(lyapunov_energy(base, params, g, temp, 0.0) ==
          doctest::Approx(params.c0 * 1.0).epsilon(1e-14));

    // Adding uniform pressure p0 raises E by k p0^2 / 2 * |Omega|.
    const double p0 = 0.7;
    const State pressed = State::uniform(g, p0, 0.0, 0.0, 0.0);
    CHECK(lyapunov_energy(pressed, params, g, temp, 0.0) -
              lyapunov_energy(base, params, g, temp, 0.0) ==
          doctest::Approx(0.5 * params.k * p0 * p0).epsilon(1e-12));

    // Bounded below on admissible states (and the fraction term is +ell b1).
    std::mt19937 rng(8);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 200; ++trial) {
        State s = State::uniform(g, u(rng) - 0.5, u(rng) - 0.5, 0.0, 0.0);
        for (int c = 0; c < g.size(); ++c) {
            const double b1 = u(rng), b2 = u(rng) * (1.0 - b1);
            s.beta1[c] = b1;
            s.beta2[c] = b2;
        }
        CHECK(lyapunov_energy(s, params, g, temp, 0.0) >= 0.0);
    }
}

TEST_CASE("vi residual: interior point with zero residual forcing") {
    const Grid g = Grid::make_1d(4, 1.0);
    MaterialParams params;
    const State s = State::uniform(g, 0.0, 0.0, 0.3, 0.2);
    const Field zero(static_cast<std::size_t>(g.size()), 0.0);
    CHECK(vi_residual(s, s, 1e-2, zero, zero, params, g) == 0.0);

    // Interior point with nonzero forcing: the cone is {0}, residual = |f|.
    const Field f1(static_cast<std::size_t>(g.size()), 0.3);
    const Field f2(static_cast<std::size_t>(g.size()), -0.4);
    CHECK(vi_residual(s, s, 1e-2, f1, f2, params, g) == doctest::Approx(0.5));
}

TEST_CASE("vi residual: admissible multipliers at the (1,0) vertex") {
    // The stationary inclusion at (1,0) admits exactly the forcings (P, Q)
    // with P >= 0 and Q <= P.
    const Grid g = Grid::make_1d(4, 1.0);
    MaterialParams params;
    const State s = State::uniform(g, 0.0, 0.0, 1.0, 0.0);
    auto residual_for = [&](double fx, double fy) {
        const Field f1(static_cast<std::size_t>(g.size()), fx);
        const Field f2(static_cast<std::size_t>(g.size()), fy);
        return vi_residual(s, s, 1e-2, f1, f2, params, g);
    };
    CHECK(residual_for(0.5, 0.3) <= 1e-14);
    CHECK(residual_for(0.5, 0.5) <= 1e-14);
    CHECK(residual_for(0.2, -1.0) <= 1e-14);
    CHECK(residual_for(0.0, 0.0) <= 1e-14);

    // Outward-pointing forcing (-a, 0): residual a, cross-checked against the
    // brute-force cone scan.
    for (double a : {0.1, 0.5, 1.5}) {
        const double r = residual_for(-a, 0.0);
        CHECK(r == doctest::Approx(a).epsilon(1e-12));
        CHECK(r == doctest::Approx(brute_force_vertex_cone_distance({-a, 0.0}))
                       .epsilon(0.05));
    }
    // Violating Q <= P: residual is the distance into the cone complement.
    const double r_bad = residual_for(0.1, 0.4);
    CHECK(r_bad > 0.0);
    CHECK(r_bad ==
          doctest::Approx(brute_force_vertex_cone_distance({0.1, 0.4})).epsilon(0.05));
}

TEST_CASE("vi residual: glacier-type stationary state on the hypotenuse") {
    // beta on the hypotenuse interior; forcing (rho2 p, rho2 p) lies on the
    // cone ray, so the residual vanishes; the time-derivative term shifts it
    // off the ray.
    const Grid g = Grid::make_1d(4, 1.0);
    MaterialParams params;
    const double p = 0.4;
    const State s = State::uniform(g, p, 0.0, 0.5, 0.5);
    const Field f1(static_cast<std::size_t>(g.size()), params.rho2 * p);
    const Field f2(static_cast<std::size_t>(g.size()), params.rho2 * p);
    CHECK(vi_residual(s, s, 1e-2, f1, f2, params, g) <= 1e-14);

    State moved = s;
    for (int c = 0; c < g.size(); ++c) moved.beta1[c] += 1e-3;
    CHECK(vi_residual(moved, s, 1e-2, f1, f2, params, g) > 1e-3);
}

TEST_CASE("boundary intake: watertight zero, robin signs") {
    const Grid g = Grid::make_1d(8, 1.0);
    MaterialParams params;
    BoundaryConfig bc;
    const State s = State::uniform(g, 2.0, 0.0, 0.5, 0.2);
    CHECK(boundary_intake(s.p, params, bc, g) == 0.0);

    bc.pressure_kind = PressureBCKind::Robin;
    bc.alpha_p = 1.0;
    bc.p_ext = 0.0;
    // Interior pressure above the exterior: outflow, positive integral of
    // -m dp/dn.
    CHECK(boundary_intake(s.p, params, bc, g) > 0.0);
    bc.p_ext = 4.0;
    CHECK(boundary_intake(s.p, params, bc, g) < 0.0);

    bc.pressure_kind = PressureBCKind::SemiPermeable;
    CHECK(boundary_intake(s.p, params, bc, g) < 0.0);  // inflow only
    bc.p_ext = 1.0;
    CHECK(boundary_intake(s.p, params, bc, g) == 0.0);  // p > p_ext: shut
}

TEST_CASE("diagnostics CSV header and row format") {
    CHECK(std::string(DiagnosticsRecord::csv_header()) ==
          "t,mass,energy,dissipation,min_theta,vi_residual,picard_iters,boundary_intake");
    DiagnosticsRecord rec;
    rec.t = 0.5;
    rec.mass = 1.25;
    rec.energy = 2.0;
    rec.dissipation = 0.0;
    rec.min_theta = 0.9;
    rec.vi_residual = 0.0;
    rec.picard_iters = 3;
    rec.boundary_intake = 0.0;
    CHECK(rec.csv_row() == "0.5,1.25,2,0,0.9,0,3,0");
}
