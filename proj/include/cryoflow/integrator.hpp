#pragma once

#include <functional>
#include <utility>
#include <vector>

#include "cryoflow/diagnostics.hpp"
#include "cryoflow/operators.hpp"
#include "cryoflow/temperature.hpp"
#include "cryoflow/types.hpp"

namespace cryoflow {

/// How the phase constraint is imposed in the phase sub-step.
enum class ConstraintMode {
    Yosida,           ///< Lipschitz regularization (beta - proj beta)/sigma
    ExactProjection,  ///< cellwise projection; the sigma -> 0 limit
};

struct StepConfig {
    double dt = 1e-2;
    double picard_tol = 1e-10;  ///< outer-iteration tolerance on field increments
    int picard_max = 200;
    ConstraintMode mode = ConstraintMode::ExactProjection;
    double sigma = 1e-2;           ///< Yosida scale (Yosida mode only)
    double lin_tol = 1e-10;        ///< relative tolerance of the inner linear solves
    double log_theta_cap = 30.0;   ///< truncation level of the exponential map
    bool double_well = false;      ///< enable the smooth non-convex term
    double double_well_strength = 1.0;
    int max_dt_halvings = 10;      ///< adaptive halving on coupling failure
    int inner_max = 2000;          ///< cap for the nu > 0 Yosida inner loop

    void validate() const;
};

/// Coupled-step failure: the contraction iteration did not close (the
/// contraction constant scales with dt, so the driver halves dt and retries).
struct StepError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Pressure sub-step: solves
///   k (p - p_old)/dt + rho1 (b1 - b1_old)/dt + rho2 (b2 - b2_old)/dt + m B p = 0
/// with the configured pressure boundary law. p_lag feeds the lagged
/// semi-permeable flux; warm is the CG starting guess.
Field step_pressure(const State& state_old, const Field& beta1_new,
                    const Field& beta2_new, const StepConfig& cfg,
                    const MaterialParams& params, const BoundaryConfig& bc,
                    const Grid& grid, const Field* p_lag = nullptr,
                    const Field* warm = nullptr);

/// Entropy sub-step: solves
///   c0 (w - w_old)/dt + (ell/theta_c) (b1 - b1_old)/dt + lambda B w = R + boundary
/// at t_new. w_lag feeds the lagged RobinTheta flux when that law is active.
Field step_entropy(const State& state_old, const Field& beta1_new, const StepConfig& cfg,
                   const MaterialParams& params, const BoundaryConfig& bc,
                   const SourceConfig& sources, const Grid& grid, double t_new,
                   const Field* w_lag = nullptr, const Field* warm = nullptr);

/// Right-hand side of the phase inclusion:
///   f = (rho1 p + (ell/theta_c)(theta - theta_c), rho2 p),
/// minus the double-well gradient at beta_ref when that term is enabled.
std::pair<Field, Field> assemble_phase_forcing(const Field& p, const Field& theta,
                                               const Field& beta1_ref,
                                               const Field& beta2_ref,
                                               const StepConfig& cfg,
                                               const MaterialParams& params);

struct PhaseResult {
    Field beta1, beta2;
    Field xi1, xi2;  ///< multiplier estimate (Yosida force or projection residual)
};

/// Phase sub-step: solves mu (b - b_old)/dt + nu B b + dphi(b) = f. In Yosida
/// mode with nu = 0 the cellwise resolvent is evaluated in closed form; with
/// nu > 0 the regularized term is lagged and iterated (the shifted iteration
/// contracts with factor 1/(1 + mu sigma/dt)). In projection mode the step is
/// a cellwise projection (nu = 0) or an implicit diffusion solve followed by
/// projection (nu > 0).
PhaseResult step_phase(const State& state_old, const Field& p_new, const Field& theta_new,
                       const StepConfig& cfg, const MaterialParams& params,
                       const Grid& grid, const Field* beta1_ref = nullptr,
                       const Field* beta2_ref = nullptr);

struct StepResult {
    State state;
    int picard_iters = 0;
    Field xi1, xi2;
};

/// One coupled backward-Euler step by the contraction iteration: freeze beta,
/// solve entropy and pressure, solve phase, repeat until the largest field
/// increment drops below picard_tol; then refresh entropy and pressure once
/// with the converged beta so the accepted state satisfies the discrete mass
/// identity exactly. Throws StepError when the iteration fails to close.
StepResult picard_step(const State& state_old, const StepConfig& cfg,
                       const MaterialParams& params, const BoundaryConfig& bc,
                       const SourceConfig& sources, const Grid& grid,
                       const Field* seed_beta1 = nullptr,
                       const Field* seed_beta2 = nullptr);

/// Called after each accepted step.
using Observer =
    std::function<void(int step, double t, const State& state, const DiagnosticsRecord&)>;

struct RunResult {
    State state;
    std::vector<DiagnosticsRecord> series;
    double final_dt = 0.0;  ///< dt after any adaptive halvings
};

/// Advances the state to t_end with fixed dt, halving (at most
/// max_dt_halvings times, permanently) whenever the coupling iteration fails.
/// Deterministic for a fixed configuration. Structural invariants
/// (temperature positivity, constraint satisfaction in the configured mode)
/// are asserted on every accepted step.
RunResult run(const State& initial, const StepConfig& cfg, const MaterialParams& params,
              const BoundaryConfig& bc, const SourceConfig& sources, const Grid& grid,
              double t_end, const Observer& observer = {});

/// Boundary law carried by the pressure operator under the given config.
BoundaryLaw pressure_law(const BoundaryConfig& bc);

}  // namespace cryoflow
