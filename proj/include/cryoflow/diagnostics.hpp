#pragma once

#include <string>

#include "cryoflow/operators.hpp"
#include "cryoflow/temperature.hpp"
#include "cryoflow/types.hpp"

namespace cryoflow {

/// Per-step scalar monitors. Serialized as one CSV row per step under the
/// fixed header below.
struct DiagnosticsRecord {
    double t = 0.0;
    double mass = 0.0;             ///< integral of k p + rho1 beta1 + rho2 beta2
    double energy = 0.0;           ///< Lyapunov functional (non-increasing, zero sources)
    double dissipation = 0.0;      ///< m|grad p|^2 + lambda grad(w).grad(theta) + mu |d beta/dt|^2
    double min_theta = 0.0;
    double vi_residual = 0.0;      ///< max cellwise complementarity violation
    int picard_iters = 0;
    double boundary_intake = 0.0;  ///< integral over the boundary of -m dp/dn

    static const char* csv_header();  // "t,mass,energy,..."
    std::string csv_row() const;
};

/// Cell-volume-weighted sum of k p + rho1 beta1 + rho2 beta2; conserved
/// exactly by watertight steps.
double total_mass(const State& state, const MaterialParams& params, const Grid& grid);

/// Discrete Lyapunov functional
///   1/2 k |p|^2 + c0 sum potential(w) + nu/2 |grad beta|^2
///   + sum phi(beta) + ell sum beta1,
/// with phi the Moreau envelope when yosida_sigma > 0 and the indicator
/// (identically zero on admissible states) otherwise.
double lyapunov_energy(const State& state, const MaterialParams& params, const Grid& grid,
                       const ExpTemperature& temp, double yosida_sigma);

/// Nonnegative dissipation rate of the accepted step; the time derivative of
/// beta uses the backward difference of the step.
double dissipation_rate(const State& state_new, const State& state_old, double dt,
                        const MaterialParams& params, const Grid& grid,
                        const ExpTemperature& temp);

double min_theta(const State& state, const ExpTemperature& temp);

/// Max over cells of the distance from (forcing - mu d beta/dt - nu B beta)
/// to the normal cone of K at beta. Zero exactly at stationary points of the
/// phase inclusion.
double vi_residual(const State& state_new, const State& state_old, double dt,
                   const Field& forcing1, const Field& forcing2,
                   const MaterialParams& params, const Grid& grid);

/// Boundary integral of -m dp/dn under the configured pressure law, i.e. the
/// net Darcy mass outflux (zero for watertight walls).
double boundary_intake(const Field& p, const MaterialParams& params,
                       const BoundaryConfig& bc, const Grid& grid);

}  // namespace cryoflow
