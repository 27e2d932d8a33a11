#include "cryoflow/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "cryoflow/constraint.hpp"

namespace cryoflow {

const char* DiagnosticsRecord::csv_header() {
    return "t,mass,energy,dissipation,min_theta,vi_residual,picard_iters,boundary_intake";
}

std::string DiagnosticsRecord::csv_row() const {
    std::ostringstream os;
    os << format_double(t) << ',' << format_double(mass) << ',' << format_double(energy)
       << ',' << format_double(dissipation) << ',' << format_double(min_theta) << ','
       << format_double(vi_residual) << ',' << picard_iters << ','
       << format_double(boundary_intake);
    return os.str();
}

double total_mass(const State& state, const MaterialParams& params, const Grid& grid) {
    const double vol = grid.cell_volume();
    double acc = 0.0;
    for (int c = 0; c < grid.size(); ++c)
        acc += params.k * state.p[c] + params.rho1 * state.beta1[c] +
               params.rho2 * state.beta2[c];
    return acc * vol;
}

double lyapunov_energy(const State& state, const MaterialParams& params, const Grid& grid,
                       const ExpTemperature& temp, double yosida_sigma) {
    const double vol = grid.cell_volume();
    double cellwise = 0.0;
    for (int c = 0; c < grid.size(); ++c) {
        cellwise += 0.5 * params.k * state.p[c] * state.p[c];
        cellwise += params.c0 * temp.potential(state.w[c]);
        cellwise += params.ell * state.beta1[c];
        if (yosida_sigma > 0.0)
            cellwise += yosida_potential({state.beta1[c], state.beta2[c]}, yosida_sigma);
    }
    double grad = 0.0;
    if (params.nu > 0.0)
        grad = 0.5 * params.nu *
               (dirichlet_form(grid, state.beta1, state.beta1) +
                dirichlet_form(grid, state.beta2, state.beta2));
    return cellwise * vol + grad;
}

double dissipation_rate(const State& state_new, const State& state_old, double dt,
                        const MaterialParams& params, const Grid& grid,
                        const ExpTemperature& temp) {
    const double vol = grid.cell_volume();
    Field theta(state_new.w.size());
    for (std::size_t c = 0; c < theta.size(); ++c) theta[c] = temp.value(state_new.w[c]);

    double acc = params.m * dirichlet_form(grid, state_new.p, state_new.p);
    // grad(w).grad(theta) with theta = value(w) is a nonnegative form because
    // the map is increasing; this is the exact term of the discrete energy
    // identity.
    acc += params.lambda * dirichlet_form(grid, state_new.w, theta);
    double rate = 0.0;
    for (int c = 0; c < grid.size(); ++c) {
        const double r1 = (state_new.beta1[c] - state_old.beta1[c]) / dt;
        const double r2 = (state_new.beta2[c] - state_old.beta2[c]) / dt;
        rate += r1 * r1 + r2 * r2;
    }
    return acc + params.mu * rate * vol;
}

double min_theta(const State& state, const ExpTemperature& temp) {
    double m = std::numeric_limits<double>::infinity();
    for (double w : state.w) m = std::min(m, temp.value(w));
    return m;
}

double vi_residual(const State& state_new, const State& state_old, double dt,
                   const Field& forcing1, const Field& forcing2,
                   const MaterialParams& params, const Grid& grid) {
    OperatorSpec diffusion{params.nu, BoundaryLaw::insulated(), &grid};
    Field lap1, lap2;
    if (params.nu > 0.0) {
        apply_operator(diffusion, state_new.beta1, lap1);
        apply_operator(diffusion, state_new.beta2, lap2);
    }
    double worst = 0.0;
    for (int c = 0; c < grid.size(); ++c) {
        Vec2 g{forcing1[c] - params.mu * (state_new.beta1[c] - state_old.beta1[c]) / dt,
               forcing2[c] - params.mu * (state_new.beta2[c] - state_old.beta2[c]) / dt};
        if (params.nu > 0.0) {
            g.x -= lap1[c];
            g.y -= lap2[c];
        }
        worst = std::max(
            worst, normal_cone_distance({state_new.beta1[c], state_new.beta2[c]}, g));
    }
    return worst;
}

double boundary_intake(const Field& p, const MaterialParams& params,
                       const BoundaryConfig& bc, const Grid& grid) {
    double acc = 0.0;
    for_each_boundary_face(grid, [&](int cell, int axis, int, double, double) {
        const double h = axis == 0 ? grid.hx : grid.hy;
        const double area = grid.dim == 1 ? 1.0 : (axis == 0 ? grid.hy : grid.hx);
        double q_out = 0.0;  // -m dp/dn through this face
        switch (bc.pressure_kind) {
            case PressureBCKind::Watertight:
                q_out = 0.0;
                break;
            case PressureBCKind::Robin: {
                const double scale = 1.0 / (1.0 + 0.5 * h * bc.alpha_p / params.m);
                q_out = bc.alpha_p * (p[cell] - bc.p_ext) * scale;
                break;
            }
            case PressureBCKind::Dirichlet:
                q_out = 2.0 * params.m * (p[cell] - bc.p_ext) / h;
                break;
            case PressureBCKind::SemiPermeable:
                q_out = -bc.alpha_p * std::max(0.0, -(p[cell] - bc.p_ext));
                break;
        }
        acc += q_out * area;
    });
    return acc;
}

}  // namespace cryoflow
