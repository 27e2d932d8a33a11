#include "cryoflow/integrator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "cryoflow/constraint.hpp"

namespace cryoflow {

void StepConfig::validate() const {
    if (!(dt > 0.0)) throw ParameterError("stepping: dt must be positive");
    if (!(picard_tol > 0.0)) throw ParameterError("stepping: picard_tol must be positive");
    if (picard_max < 1) throw ParameterError("stepping: picard_max must be at least 1");
    if (mode == ConstraintMode::Yosida && !(sigma > 0.0))
        throw ParameterError("stepping: sigma must be positive in yosida mode");
    if (!(lin_tol > 0.0)) throw ParameterError("stepping: lin_tol must be positive");
    if (!(log_theta_cap > 0.0))
        throw ParameterError("stepping: log_theta_cap must be positive");
    if (max_dt_halvings < 0) throw ParameterError("stepping: max_dt_halvings must be >= 0");
}

BoundaryLaw pressure_law(const BoundaryConfig& bc) {
    switch (bc.pressure_kind) {
        case PressureBCKind::Watertight:
            return BoundaryLaw::insulated();
        case PressureBCKind::Robin:
            return BoundaryLaw::robin(bc.alpha_p, bc.p_ext);
        case PressureBCKind::Dirichlet:
            return BoundaryLaw::dirichlet(bc.p_ext);
        case PressureBCKind::SemiPermeable:
            return BoundaryLaw::semi_permeable(bc.alpha_p, bc.p_ext);
    }
    return BoundaryLaw::insulated();
}

Field step_pressure(const State& state_old, const Field& beta1_new,
                    const Field& beta2_new, const StepConfig& cfg,
                    const MaterialParams& params, const BoundaryConfig& bc,
                    const Grid& grid, const Field* p_lag, const Field* warm) {
    const double a = params.k / cfg.dt;
    OperatorSpec spec{params.m, pressure_law(bc), &grid};
    Field rhs(state_old.p.size());
    for (std::size_t c = 0; c < rhs.size(); ++c)
        rhs[c] = a * state_old.p[c] -
                 (params.rho1 * (beta1_new[c] - state_old.beta1[c]) +
                  params.rho2 * (beta2_new[c] - state_old.beta2[c])) /
                     cfg.dt;
    add_boundary_rhs(spec, rhs);
    if (bc.pressure_kind == PressureBCKind::SemiPermeable)
        add_semipermeable_rhs(spec, p_lag ? *p_lag : state_old.p, rhs);
    SolveOptions opts;
    opts.tol = cfg.lin_tol;
    opts.initial_guess = warm ? warm : &state_old.p;
    return solve_implicit(spec, a, rhs, opts);
}

Field step_entropy(const State& state_old, const Field& beta1_new, const StepConfig& cfg,
                   const MaterialParams& params, const BoundaryConfig& bc,
                   const SourceConfig& sources, const Grid& grid, double t_new,
                   const Field* w_lag, const Field* warm) {
    const double a = params.c0 / cfg.dt;
    const double slope = params.latent_slope();
    OperatorSpec spec{params.lambda, BoundaryLaw::insulated(), &grid};

    Field rhs(state_old.w.size());
    for (int j = 0; j < grid.ny; ++j)
        for (int i = 0; i < grid.nx; ++i) {
            const int c = grid.idx(i, j);
            rhs[c] = a * state_old.w[c] -
                     slope * (beta1_new[c] - state_old.beta1[c]) / cfg.dt +
                     sources.eval_R(grid.x_center(i), grid.y_center(j), t_new);
        }

    if (bc.temperature_kind == TemperatureBCKind::RobinW) {
        spec.bc = BoundaryLaw{BCKind::FluxRobin, bc.alpha_theta, 0.0};
        add_boundary_rhs(spec, rhs,
                         [&](double x, double y) { return sources.eval_Pi(x, y, t_new); });
    } else {
        // Lagged flux of the robin_theta law: lambda dw/dn = -alpha (theta -
        // theta_ext)/theta at the previous iterate; exact once the coupling
        // iteration has converged.
        const ExpTemperature temp(cfg.log_theta_cap);
        const Field& wl = w_lag ? *w_lag : state_old.w;
        for_each_boundary_face(grid, [&](int cell, int axis, int, double, double) {
            const double h = axis == 0 ? grid.hx : grid.hy;
            const double theta = temp.value(wl[cell]);
            rhs[cell] += -bc.alpha_theta * (theta - bc.theta_ext) / theta / h;
        });
    }

    SolveOptions opts;
    opts.tol = cfg.lin_tol;
    opts.initial_guess = warm ? warm : &state_old.w;
    return solve_implicit(spec, a, rhs, opts);
}

std::pair<Field, Field> assemble_phase_forcing(const Field& p, const Field& theta,
                                               const Field& beta1_ref,
                                               const Field& beta2_ref,
                                               const StepConfig& cfg,
                                               const MaterialParams& params) {
    const double slope = params.latent_slope();
    Field f1(p.size()), f2(p.size());
    for (std::size_t c = 0; c < p.size(); ++c) {
        f1[c] = params.rho1 * p[c] + slope * (theta[c] - params.theta_c);
        f2[c] = params.rho2 * p[c];
        if (cfg.double_well) {
            const Vec2 dw = double_well_grad({beta1_ref[c], beta2_ref[c]},
                                             cfg.double_well_strength);
            f1[c] -= dw.x;
            f2[c] -= dw.y;
        }
    }
    return {std::move(f1), std::move(f2)};
}

namespace {

PhaseResult phase_cellwise(const State& old, const Field& f1, const Field& f2,
                           const StepConfig& cfg, const MaterialParams& params) {
    const double r = cfg.dt / params.mu;
    PhaseResult res;
    const std::size_t n = f1.size();
    res.beta1.resize(n);
    res.beta2.resize(n);
    res.xi1.resize(n);
    res.xi2.resize(n);
    for (std::size_t c = 0; c < n; ++c) {
        const Vec2 g{old.beta1[c] + r * f1[c], old.beta2[c] + r * f2[c]};
        if (cfg.mode == ConstraintMode::ExactProjection) {
            const Vec2 b = project_triangle(g);
            res.beta1[c] = b.x;
            res.beta2[c] = b.y;
            res.xi1[c] = (g.x - b.x) / r;
            res.xi2[c] = (g.y - b.y) / r;
        } else {
            // Exact resolvent of the regularized force: with t = dt/(mu sigma),
            // the solution of mu(b - b_old)/dt + (b - proj b)/sigma = f is
            // b = (g + t proj(g)) / (1 + t), and proj(b) = proj(g).
            const double t = r / cfg.sigma;
            const Vec2 q = project_triangle(g);
            const Vec2 b = (g + q * t) * (1.0 / (1.0 + t));
            res.beta1[c] = b.x;
            res.beta2[c] = b.y;
            res.xi1[c] = (b.x - q.x) / cfg.sigma;
            res.xi2[c] = (b.y - q.y) / cfg.sigma;
        }
    }
    return res;
}

PhaseResult phase_with_diffusion(const State& old, const Field& f1, const Field& f2,
                                 const StepConfig& cfg, const MaterialParams& params,
                                 const Grid& grid) {
    const double a_time = params.mu / cfg.dt;
    OperatorSpec spec{params.nu, BoundaryLaw::insulated(), &grid};
    SolveOptions opts;
    opts.tol = cfg.lin_tol;
    const std::size_t n = f1.size();
    PhaseResult res;

    auto base_rhs = [&](const Field& beta_old, const Field& f) {
        Field rhs(n);
        for (std::size_t c = 0; c < n; ++c) rhs[c] = a_time * beta_old[c] + f[c];
        return rhs;
    };

    if (cfg.mode == ConstraintMode::ExactProjection) {
        // Lie splitting: implicit diffusion, then cellwise projection.
        Field rhs1 = base_rhs(old.beta1, f1), rhs2 = base_rhs(old.beta2, f2);
        opts.initial_guess = &old.beta1;
        Field t1 = solve_implicit(spec, a_time, rhs1, opts);
        opts.initial_guess = &old.beta2;
        Field t2 = solve_implicit(spec, a_time, rhs2, opts);
        res.beta1.resize(n);
        res.beta2.resize(n);
        res.xi1.resize(n);
        res.xi2.resize(n);
        for (std::size_t c = 0; c < n; ++c) {
            const Vec2 b = project_triangle({t1[c], t2[c]});
            res.beta1[c] = b.x;
            res.beta2[c] = b.y;
            res.xi1[c] = (t1[c] - b.x) * a_time;
            res.xi2[c] = (t2[c] - b.y) * a_time;
        }
        return res;
    }

    // Yosida with diffusion: move the Lipschitz part proj(beta)/sigma to the
    // right-hand side and iterate; the shifted system
    // (mu/dt + 1/sigma) I + nu B stays fixed, so the map contracts with
    // factor (1/sigma) / (mu/dt + 1/sigma) < 1 regardless of dt.
    const double a_shift = a_time + 1.0 / cfg.sigma;
    Field b1 = old.beta1, b2 = old.beta2;
    Field rhs1(n), rhs2(n);
    bool converged = false;
    for (int it = 0; it < cfg.inner_max; ++it) {
        for (std::size_t c = 0; c < n; ++c) {
            const Vec2 q = project_triangle({b1[c], b2[c]});
            rhs1[c] = a_time * old.beta1[c] + f1[c] + q.x / cfg.sigma;
            rhs2[c] = a_time * old.beta2[c] + f2[c] + q.y / cfg.sigma;
        }
        opts.initial_guess = &b1;
        Field n1 = solve_implicit(spec, a_shift, rhs1, opts);
        opts.initial_guess = &b2;
        Field n2 = solve_implicit(spec, a_shift, rhs2, opts);
        double incr = 0.0;
        for (std::size_t c = 0; c < n; ++c) {
            incr = std::max(incr, std::abs(n1[c] - b1[c]));
            incr = std::max(incr, std::abs(n2[c] - b2[c]));
        }
        b1 = std::move(n1);
        b2 = std::move(n2);
        if (incr <= cfg.picard_tol) {
            converged = true;
            break;
        }
    }
    if (!converged)
        throw StepError(
            "step_phase: regularized inner loop did not converge; decrease dt or "
            "increase sigma");
    res.beta1 = std::move(b1);
    res.beta2 = std::move(b2);
    res.xi1.resize(n);
    res.xi2.resize(n);
    for (std::size_t c = 0; c < n; ++c) {
        const Vec2 xi = yosida_force({res.beta1[c], res.beta2[c]}, cfg.sigma);
        res.xi1[c] = xi.x;
        res.xi2[c] = xi.y;
    }
    return res;
}

}  // namespace

PhaseResult step_phase(const State& state_old, const Field& p_new, const Field& theta_new,
                       const StepConfig& cfg, const MaterialParams& params,
                       const Grid& grid, const Field* beta1_ref, const Field* beta2_ref) {
    auto [f1, f2] = assemble_phase_forcing(p_new, theta_new,
                                           beta1_ref ? *beta1_ref : state_old.beta1,
                                           beta2_ref ? *beta2_ref : state_old.beta2,
                                           cfg, params);
    if (params.nu == 0.0) return phase_cellwise(state_old, f1, f2, cfg, params);
    return phase_with_diffusion(state_old, f1, f2, cfg, params, grid);
}

namespace {

double linf_diff(const Field& a, const Field& b) {
    double m = 0.0;
    for (std::size_t c = 0; c < a.size(); ++c) m = std::max(m, std::abs(a[c] - b[c]));
    return m;
}

Field theta_of(const Field& w, const ExpTemperature& temp) {
    Field theta(w.size());
    for (std::size_t c = 0; c < w.size(); ++c) theta[c] = temp.value(w[c]);
    return theta;
}

}  // namespace

StepResult picard_step(const State& state_old, const StepConfig& cfg,
                       const MaterialParams& params, const BoundaryConfig& bc,
                       const SourceConfig& sources, const Grid& grid,
                       const Field* seed_beta1, const Field* seed_beta2) {
    const double t_new = state_old.t + cfg.dt;
    const ExpTemperature temp(cfg.log_theta_cap);

    Field b1_bar = seed_beta1 ? *seed_beta1 : state_old.beta1;
    Field b2_bar = seed_beta2 ? *seed_beta2 : state_old.beta2;
    Field p_prev = state_old.p;
    Field w_prev = state_old.w;

    PhaseResult phase;
    Field p_new, w_new;
    int iters = 0;
    bool converged = false;
    for (int it = 1; it <= cfg.picard_max; ++it) {
        w_new = step_entropy(state_old, b1_bar, cfg, params, bc, sources, grid, t_new,
                             &w_prev, &w_prev);
        p_new = step_pressure(state_old, b1_bar, b2_bar, cfg, params, bc, grid, &p_prev,
                              &p_prev);
        const Field theta = theta_of(w_new, temp);
        phase = step_phase(state_old, p_new, theta, cfg, params, grid, &b1_bar, &b2_bar);

        double incr = std::max(linf_diff(p_new, p_prev), linf_diff(w_new, w_prev));
        incr = std::max(incr, linf_diff(phase.beta1, b1_bar));
        incr = std::max(incr, linf_diff(phase.beta2, b2_bar));
        if (!std::isfinite(incr))
            throw StepError("picard_step: iteration diverged; decrease dt");

        b1_bar = phase.beta1;
        b2_bar = phase.beta2;
        p_prev = std::move(p_new);
        w_prev = std::move(w_new);
        iters = it;
        if (incr <= cfg.picard_tol) {
            converged = true;
            break;
        }
    }
    if (!converged)
        throw StepError("picard_step: no convergence in " +
                        std::to_string(cfg.picard_max) + " iterations; decrease dt");

    // Refresh the linear sub-steps with the converged fractions so the
    // accepted state closes the discrete mass balance exactly.
    Field w_final = step_entropy(state_old, b1_bar, cfg, params, bc, sources, grid, t_new,
                                 &w_prev, &w_prev);
    Field p_final = step_pressure(state_old, b1_bar, b2_bar, cfg, params, bc, grid,
                                  &p_prev, &p_prev);

    StepResult result;
    result.state.p = std::move(p_final);
    result.state.w = std::move(w_final);
    result.state.beta1 = std::move(b1_bar);
    result.state.beta2 = std::move(b2_bar);
    result.state.t = t_new;
    result.picard_iters = iters;
    result.xi1 = std::move(phase.xi1);
    result.xi2 = std::move(phase.xi2);
    return result;
}

namespace {

void check_step_invariants(const StepResult& step, const StepConfig& cfg,
                           const ExpTemperature& temp) {
    double min_t = std::numeric_limits<double>::infinity();
    for (double w : step.state.w) min_t = std::min(min_t, temp.value(w));
    if (!(min_t > 0.0))
        throw StepError("invariant violated: temperature must stay positive");

    double max_dist = 0.0, max_xi = 0.0;
    for (std::size_t c = 0; c < step.state.beta1.size(); ++c) {
        max_dist = std::max(
            max_dist, triangle_distance({step.state.beta1[c], step.state.beta2[c]}));
        max_xi = std::max(max_xi, Vec2{step.xi1[c], step.xi2[c]}.norm());
    }
    if (cfg.mode == ConstraintMode::ExactProjection) {
        if (max_dist > 1e-12)
            throw StepError("invariant violated: fractions left the admissible set");
    } else {
        if (max_dist > cfg.sigma * max_xi * (1.0 + 1e-9) + 1e-14)
            throw StepError(
                "invariant violated: constraint violation exceeds sigma * |xi|");
    }
}

}  // namespace

RunResult run(const State& initial, const StepConfig& cfg, const MaterialParams& params,
              const BoundaryConfig& bc, const SourceConfig& sources, const Grid& grid,
              double t_end, const Observer& observer) {
    cfg.validate();
    params.validate();
    bc.validate();
    if (t_end < initial.t) throw ParameterError("run: t_end precedes the initial time");
    if (static_cast<int>(initial.p.size()) != grid.size())
        throw ParameterError("run: state shape does not match grid");
    const double admissible_slack = cfg.mode == ConstraintMode::Yosida ? 1e-9 : 1e-12;
    for (std::size_t c = 0; c < initial.beta1.size(); ++c) {
        if (!in_triangle({initial.beta1[c], initial.beta2[c]}, admissible_slack))
            throw ParameterError(
                "run: initial fractions must lie in the admissible set K "
                "(beta1 >= 0, beta2 >= 0, beta1 + beta2 <= 1)");
        if (!std::isfinite(initial.w[c]))
            throw ParameterError("run: initial log-temperature must be finite");
    }

    const ExpTemperature temp(cfg.log_theta_cap);
    StepConfig step_cfg = cfg;
    RunResult result;
    result.state = initial;
    int halvings = 0;
    int step_index = 0;

    const double eps = 1e-12 * std::max(1.0, std::abs(t_end));
    while (result.state.t < t_end - eps) {
        StepConfig attempt = step_cfg;
        attempt.dt = std::min(step_cfg.dt, t_end - result.state.t);
        StepResult step;
        try {
            step = picard_step(result.state, attempt, params, bc, sources, grid);
        } catch (const StepError&) {
            if (halvings >= cfg.max_dt_halvings) throw;
            ++halvings;
            step_cfg.dt *= 0.5;  // kept for the rest of the run; no re-increase
            continue;
        } catch (const SolveError&) {
            if (halvings >= cfg.max_dt_halvings) throw;
            ++halvings;
            step_cfg.dt *= 0.5;
            continue;
        }
        check_step_invariants(step, attempt, temp);

        DiagnosticsRecord rec;
        rec.t = step.state.t;
        rec.mass = total_mass(step.state, params, grid);
        rec.energy = lyapunov_energy(step.state, params, grid, temp,
                                     cfg.mode == ConstraintMode::Yosida ? cfg.sigma : 0.0);
        rec.dissipation = dissipation_rate(step.state, result.state, attempt.dt, params,
                                           grid, temp);
        rec.min_theta = min_theta(step.state, temp);
        const Field theta = theta_of(step.state.w, temp);
        auto [f1, f2] = assemble_phase_forcing(step.state.p, theta, step.state.beta1,
                                               step.state.beta2, attempt, params);
        rec.vi_residual =
            vi_residual(step.state, result.state, attempt.dt, f1, f2, params, grid);
        rec.picard_iters = step.picard_iters;
        rec.boundary_intake = boundary_intake(step.state.p, params, bc, grid);

        result.state = std::move(step.state);
        result.series.push_back(rec);
        ++step_index;
        if (observer) observer(step_index, result.state.t, result.state, rec);
    }
    result.final_dt = step_cfg.dt;
    return result;
}

}  // namespace cryoflow
