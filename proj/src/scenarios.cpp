#include "cryoflow/scenarios.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace cryoflow {

double bottle_freeze_oracle(const MaterialParams& params, double theta_final) {
    if (theta_final > params.theta_c)
        throw std::domain_error(
            "bottle_freeze_oracle: no freezing pressure above the critical temperature");
    return params.latent_slope() * (params.theta_c - theta_final) /
           (params.rho1 - params.rho2);
}

EmulsionTarget emulsion_oracle(const MaterialParams& params, double beta1_0) {
    if (!(beta1_0 > 0.0) || !(beta1_0 < 1.0))
        throw ParameterError("emulsion_oracle: beta1_0 must lie in (0, 1)");
    const double threshold = params.rho2 / params.rho1;
    EmulsionTarget t;
    if (beta1_0 >= threshold) {
        t.beta1 = (params.rho1 * beta1_0 - params.rho2) / (params.rho1 - params.rho2);
        t.beta2 = (params.rho1 - params.rho1 * beta1_0) / (params.rho1 - params.rho2);
        t.void_branch = false;
    } else {
        t.beta1 = 0.0;
        t.beta2 = params.rho1 * beta1_0 / params.rho2;
        t.void_branch = true;
    }
    return t;
}

double glacier_relation(const MaterialParams& params, double p) {
    if (p < 0.0) throw std::domain_error("glacier_relation: pressure must be nonnegative");
    return params.theta_c - p * (params.rho1 - params.rho2) * params.theta_c / params.ell;
}

namespace {

// Cooling schedule: a constant entropy sink over [0, t_ramp] whose time
// integral equals the entropy difference between the initial state and the
// predicted end state, c0 log(theta_f/theta_0) + (ell/theta_c)(beta1_f -
// beta1_0). Using the k-corrected beta1_f keeps the realized final
// temperature on target despite the latent heat of the O(k) fraction shift.
SourceConfig cooling_pulse(double budget, double t_ramp) {
    SourceConfig src;
    const double rate = budget / t_ramp;
    src.R = [rate, t_ramp](double, double, double t) { return t < t_ramp ? rate : 0.0; };
    return src;
}

ScenarioSetup freezing_base(double rho1, double rho2, double k) {
    ScenarioSetup s;
    s.params.rho1 = rho1;
    s.params.rho2 = rho2;
    s.params.k = k;
    s.params.validate();
    s.grid = Grid::make_1d(8, 1.0);
    s.bc = BoundaryConfig{};  // watertight, insulated
    s.step.mode = ConstraintMode::ExactProjection;
    s.step.picard_tol = 1e-10;
    // The coupling gain of the frozen-fraction iteration is
    // dt (rho1^2 + rho2^2) / (mu k); keep it near 1/2.
    s.step.dt = 0.5 * s.params.mu * k / (rho1 * rho1 + rho2 * rho2);
    return s;
}

double mean(const Field& f) {
    return std::accumulate(f.begin(), f.end(), 0.0) / static_cast<double>(f.size());
}

OracleCheck check(const std::string& what, double expected, double measured, double tol) {
    OracleCheck c;
    c.quantity = what;
    c.expected = expected;
    c.measured = measured;
    c.error = std::abs(measured - expected) / std::max(1.0, std::abs(expected));
    c.tol = tol;
    c.pass = c.error <= tol;
    return c;
}

}  // namespace

ScenarioSetup make_bottle_freeze(double rho1, double rho2, double theta_gap, double k) {
    ScenarioSetup s = freezing_base(rho1, rho2, k);
    s.name = "bottle_freeze";
    const double theta0 = s.params.theta_c;
    const double theta_f = s.params.theta_c - theta_gap;
    const double p_star = bottle_freeze_oracle(s.params, theta_f);
    const double beta1_f = 1.0 - k * p_star / (rho1 - rho2);

    s.initial = State::uniform(s.grid, 0.0, std::log(theta0), 1.0, 0.0);
    const double budget = s.params.c0 * std::log(theta_f / theta0) +
                          s.params.latent_slope() * (beta1_f - 1.0);
    const double t_ramp = 4.0;
    s.sources = cooling_pulse(budget, t_ramp);
    s.t_end = t_ramp + 4.0;

    s.target_p = p_star;
    s.target_beta1 = beta1_f;
    s.target_beta2 = 1.0 - beta1_f;
    s.target_theta = theta_f;
    return s;
}

ScenarioSetup make_emulsion_freeze(double beta1_0, double rho1, double rho2,
                                   double theta_gap, double k) {
    ScenarioSetup s = freezing_base(rho1, rho2, k);
    s.name = "emulsion_freeze";
    const double theta0 = s.params.theta_c;
    const double theta_f = s.params.theta_c - theta_gap;
    const EmulsionTarget t = emulsion_oracle(s.params, beta1_0);

    double beta1_f = t.beta1;
    double p_f = 0.0;
    if (!t.void_branch) {
        // On the full-container branch the end state carries the freezing
        // pressure; mass balance shifts beta1 by k p*/(rho1 - rho2).
        p_f = bottle_freeze_oracle(s.params, theta_f);
        beta1_f = std::max(0.0, t.beta1 - k * p_f / (rho1 - rho2));
        if (beta1_f == 0.0) p_f = 0.0;  // corner case ends at the vertex (0,1)
    }

    s.initial = State::uniform(s.grid, 0.0, std::log(theta0), beta1_0, 0.0);
    const double budget = s.params.c0 * std::log(theta_f / theta0) +
                          s.params.latent_slope() * (beta1_f - beta1_0);
    const double t_ramp = 8.0;
    s.sources = cooling_pulse(budget, t_ramp);

    // Freezing speed in the open (void) regime; used only to size t_end.
    const double rate = s.params.latent_slope() * theta_gap * rho2 * rho2 /
                        ((rho1 * rho1 + rho2 * rho2) * s.params.mu);
    const double travel = std::abs(beta1_0 - beta1_f);
    s.t_end = t_ramp + 1.8 * travel / rate + 6.0;

    s.target_p = p_f;
    s.target_beta1 = beta1_f;
    s.target_beta2 = t.void_branch ? t.beta2 : 1.0 - beta1_f;
    s.target_theta = theta_f;
    return s;
}

ScenarioSetup make_glacier(double p_target) {
    ScenarioSetup s;
    s.name = "glacier_equilibrium";
    s.params = MaterialParams{};
    s.params.k = 1e-3;
    s.params.validate();
    s.grid = Grid::make_1d(8, 1.0);
    s.bc = BoundaryConfig{};
    s.step.mode = ConstraintMode::ExactProjection;
    s.step.dt = 1e-2;
    s.t_end = 0.5;

    const double theta_pc = glacier_relation(s.params, p_target);
    s.initial = State::uniform(s.grid, p_target, std::log(theta_pc), 0.5, 0.5);
    s.target_p = p_target;
    s.target_beta1 = 0.5;
    s.target_beta2 = 0.5;
    s.target_theta = theta_pc;
    s.oracle_tol = 1e-8;
    return s;
}

ScenarioSetup make_scenario(const std::string& name) {
    if (name == "bottle_freeze") return make_bottle_freeze();
    if (name == "emulsion_freeze") return make_emulsion_freeze();
    if (name == "glacier_equilibrium") return make_glacier();
    throw ParameterError("unknown scenario '" + name +
                         "'; available: bottle_freeze, emulsion_freeze, "
                         "glacier_equilibrium");
}

std::vector<std::string> scenario_names() {
    return {"bottle_freeze", "emulsion_freeze", "glacier_equilibrium"};
}

std::string ScenarioReport::to_string() const {
    std::ostringstream os;
    os << "scenario " << scenario << (pass ? ": PASS" : ": FAIL") << '\n';
    for (const OracleCheck& c : checks) {
        os << "  " << (c.pass ? "pass" : "FAIL") << "  " << c.quantity
           << "  expected=" << format_double(c.expected)
           << " measured=" << format_double(c.measured)
           << " rel_err=" << format_double(c.error) << " tol=" << format_double(c.tol)
           << '\n';
    }
    return os.str();
}

ScenarioOutcome run_scenario(const ScenarioSetup& setup, const Observer& observer) {
    ScenarioOutcome out;
    out.run = run(setup.initial, setup.step, setup.params, setup.bc, setup.sources,
                  setup.grid, setup.t_end, observer);
    const State& fin = out.run.state;
    const ExpTemperature temp(setup.step.log_theta_cap);
    Field theta(fin.w.size());
    for (std::size_t c = 0; c < theta.size(); ++c) theta[c] = temp.value(fin.w[c]);

    ScenarioReport& rep = out.report;
    rep.scenario = setup.name;
    const double tol = setup.oracle_tol;
    if (setup.name == "glacier_equilibrium") {
        rep.checks.push_back(check("pressure", setup.target_p, mean(fin.p), tol));
        rep.checks.push_back(check("beta1", setup.target_beta1, mean(fin.beta1), tol));
        rep.checks.push_back(check("beta2", setup.target_beta2, mean(fin.beta2), tol));
        rep.checks.push_back(check("theta", setup.target_theta, mean(theta), tol));
        const double vi = out.run.series.empty() ? 0.0
                                                 : out.run.series.back().vi_residual;
        rep.checks.push_back(check("vi_residual", 0.0, vi, 1e-8));
    } else {
        // Evaluate the pressure oracle at the realized final temperature: the
        // scenario verifies the pressure/temperature relation, and the
        // schedule is budgeted to land that temperature on target.
        if (setup.name == "bottle_freeze") {
            const double oracle_at_final = bottle_freeze_oracle(
                setup.params, std::min(mean(theta), setup.params.theta_c));
            rep.checks.push_back(check("pressure", oracle_at_final, mean(fin.p), tol));
            rep.checks.push_back(
                check("pressure_nominal", setup.target_p, mean(fin.p), tol));
        }
        rep.checks.push_back(check("beta1", setup.target_beta1, mean(fin.beta1), tol));
        rep.checks.push_back(check("beta2", setup.target_beta2, mean(fin.beta2), tol));
        rep.checks.push_back(check("theta", setup.target_theta, mean(theta), tol));
        if (setup.name == "emulsion_freeze")
            rep.checks.push_back(check("pressure", setup.target_p, mean(fin.p), tol));
    }
    rep.pass = std::all_of(rep.checks.begin(), rep.checks.end(),
                           [](const OracleCheck& c) { return c.pass; });
    return out;
}

}  // namespace cryoflow
