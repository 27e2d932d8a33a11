#pragma once

#include <string>
#include <vector>

#include "cryoflow/integrator.hpp"
#include "cryoflow/types.hpp"

namespace cryoflow {

/// Closed-form equilibrium pressure of freezing in a watertight full
/// container: p = (ell/theta_c)(theta_c - theta)/(rho1 - rho2).
/// Requires theta_final <= theta_c (above the critical temperature no
/// freezing pressure exists).
double bottle_freeze_oracle(const MaterialParams& params, double theta_final);

struct EmulsionTarget {
    double beta1 = 0.0;
    double beta2 = 0.0;
    bool void_branch = false;  ///< true: ends as ice plus voids (beta1 = 0)
};

/// End state of freezing an emulsion (water plus voids) in a watertight
/// container, in the incompressible limit. For beta1_0 >= rho2/rho1 the
/// container fills (beta1 + beta2 = 1); below the threshold all water
/// freezes and voids remain, with beta2 = rho1 beta1_0 / rho2 by mass
/// conservation.
EmulsionTarget emulsion_oracle(const MaterialParams& params, double beta1_0);

/// Pressure-dependent phase-change temperature of a void-free mixture:
/// theta_pc(p) = theta_c - p (rho1 - rho2) theta_c / ell, decreasing in p.
/// Requires p >= 0.
double glacier_relation(const MaterialParams& params, double p);

/// A fully assembled preset: parameters, mesh, boundary laws, cooling
/// schedule, initial data, and the oracle targets the run is checked against.
struct ScenarioSetup {
    std::string name;
    MaterialParams params;
    Grid grid;
    BoundaryConfig bc;
    StepConfig step;
    SourceConfig sources;
    State initial;
    double t_end = 1.0;

    double target_p = 0.0;
    double target_beta1 = 0.0;
    double target_beta2 = 0.0;
    double target_theta = 0.0;
    double oracle_tol = 0.02;
};

/// Freezing a full watertight container: pressure climbs to the oracle value
/// while the fractions stay near (1, 0). theta_gap = theta_c - theta_final.
ScenarioSetup make_bottle_freeze(double rho1 = 1.0, double rho2 = 0.9,
                                 double theta_gap = 0.05, double k = 1e-3);

/// Freezing an emulsion of water and voids; both end-state branches.
ScenarioSetup make_emulsion_freeze(double beta1_0 = 0.95, double rho1 = 1.0,
                                   double rho2 = 0.9, double theta_gap = 0.05,
                                   double k = 1e-3);

/// Void-free ice/water mixture prepared on the phase-change curve; the state
/// is stationary and the complementarity residual vanishes.
ScenarioSetup make_glacier(double p_target = 0.2);

/// Preset lookup by CLI name ("bottle_freeze", "emulsion_freeze",
/// "glacier_equilibrium"); throws ParameterError for unknown names.
ScenarioSetup make_scenario(const std::string& name);
std::vector<std::string> scenario_names();

struct OracleCheck {
    std::string quantity;
    double expected = 0.0;
    double measured = 0.0;
    double error = 0.0;  ///< |measured - expected| / max(1, |expected|)
    double tol = 0.0;
    bool pass = false;
};

struct ScenarioReport {
    std::string scenario;
    std::vector<OracleCheck> checks;
    bool pass = false;
    std::string to_string() const;
};

struct ScenarioOutcome {
    RunResult run;
    ScenarioReport report;
};

/// Runs the preset to t_end and evaluates its oracle checks on the final
/// (volume-averaged) state.
ScenarioOutcome run_scenario(const ScenarioSetup& setup, const Observer& observer = {});

}  // namespace cryoflow
