#include "cryoflow/operators.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace cryoflow {

namespace {

void check_shape(const OperatorSpec& spec, const Field& u) {
    if (!spec.grid) throw ParameterError("operator: missing grid");
    if (static_cast<int>(u.size()) != spec.grid->size())
        throw ParameterError("operator: field shape does not match grid");
    if (!(spec.coefficient >= 0.0))
        throw ParameterError("operator: coefficient must be nonnegative");
}

// Robin elimination factor: outward flux through a boundary face is
// (alpha u_c - datum) / (1 + h alpha / (2c)); the denominator is the
// second-order midface correction.
double robin_scale(double alpha, double h, double c) {
    return 1.0 / (1.0 + 0.5 * h * alpha / c);
}

// Per-cell diagonal term of the eliminated boundary law (linear part).
double boundary_diag(const BoundaryLaw& bc, double h, double c) {
    if (c == 0.0) return 0.0;
    switch (bc.kind) {
        case BCKind::FluxRobin:
            return bc.alpha == 0.0 ? 0.0 : bc.alpha * robin_scale(bc.alpha, h, c) / h;
        case BCKind::Dirichlet:
            return 2.0 * c / (h * h);
        case BCKind::SemiPermeable:
            return 0.0;
    }
    return 0.0;
}

// Affine rhs contribution for a given face datum (FluxRobin) or value
// (Dirichlet).
double boundary_rhs_term(const BoundaryLaw& bc, double datum, double h, double c) {
    if (c == 0.0) return 0.0;
    switch (bc.kind) {
        case BCKind::FluxRobin:
            return bc.alpha == 0.0 ? datum / h
                                   : datum * robin_scale(bc.alpha, h, c) / h;
        case BCKind::Dirichlet:
            return 2.0 * c / (h * h) * datum;
        case BCKind::SemiPermeable:
            return 0.0;  // handled by add_semipermeable_rhs
    }
    return 0.0;
}

}  // namespace

void for_each_boundary_face(
    const Grid& grid,
    const std::function<void(int cell, int axis, int side, double x, double y)>& fn) {
    for (int j = 0; j < grid.ny; ++j) {
        fn(grid.idx(0, j), 0, -1, 0.0, grid.y_center(j));
        fn(grid.idx(grid.nx - 1, j), 0, +1, grid.extent_x, grid.y_center(j));
    }
    if (grid.dim == 2) {
        for (int i = 0; i < grid.nx; ++i) {
            fn(grid.idx(i, 0), 1, -1, grid.x_center(i), 0.0);
            fn(grid.idx(i, grid.ny - 1), 1, +1, grid.x_center(i), grid.extent_y);
        }
    }
}

void apply_operator(const OperatorSpec& spec, const Field& u, Field& out) {
    check_shape(spec, u);
    const Grid& g = *spec.grid;
    const double c = spec.coefficient;
    out.assign(u.size(), 0.0);
    if (c == 0.0) return;

    const double ix2 = c / (g.hx * g.hx);
    const double iy2 = c / (g.hy * g.hy);
    for (int j = 0; j < g.ny; ++j) {
        for (int i = 0; i < g.nx; ++i) {
            const int idx = g.idx(i, j);
            const double uc = u[idx];
            double acc = 0.0;
            if (i > 0) acc += ix2 * (uc - u[idx - 1]);
            if (i < g.nx - 1) acc += ix2 * (uc - u[idx + 1]);
            if (g.dim == 2) {
                if (j > 0) acc += iy2 * (uc - u[idx - g.nx]);
                if (j < g.ny - 1) acc += iy2 * (uc - u[idx + g.nx]);
            }
            out[idx] = acc;
        }
    }
    const double dx_diag = boundary_diag(spec.bc, g.hx, c);
    const double dy_diag = boundary_diag(spec.bc, g.hy, c);
    for_each_boundary_face(g, [&](int cell, int axis, int, double, double) {
        out[cell] += (axis == 0 ? dx_diag : dy_diag) * u[cell];
    });
}

Field apply_operator(const OperatorSpec& spec, const Field& u) {
    Field out;
    apply_operator(spec, u, out);
    return out;
}

void add_boundary_rhs(const OperatorSpec& spec, Field& rhs) {
    add_boundary_rhs(spec, rhs, [&](double, double) { return spec.bc.datum; });
}

void add_boundary_rhs(const OperatorSpec& spec, Field& rhs,
                      const std::function<double(double, double)>& datum) {
    check_shape(spec, rhs);
    const Grid& g = *spec.grid;
    for_each_boundary_face(g, [&](int cell, int axis, int, double x, double y) {
        const double h = axis == 0 ? g.hx : g.hy;
        rhs[cell] += boundary_rhs_term(spec.bc, datum(x, y), h, spec.coefficient);
    });
}

void add_semipermeable_rhs(const OperatorSpec& spec, const Field& u_lag, Field& rhs) {
    check_shape(spec, rhs);
    if (spec.bc.kind != BCKind::SemiPermeable) return;
    const Grid& g = *spec.grid;
    for_each_boundary_face(g, [&](int cell, int axis, int, double, double) {
        const double h = axis == 0 ? g.hx : g.hy;
        const double deficit = std::max(0.0, -(u_lag[cell] - spec.bc.datum));
        rhs[cell] += spec.bc.alpha * deficit / h;
    });
}

double dirichlet_form(const Grid& g, const Field& u, const Field& v) {
    const double vol = g.cell_volume();
    double acc = 0.0;
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i + 1 < g.nx; ++i) {
            const int a = g.idx(i, j), b = g.idx(i + 1, j);
            acc += (u[b] - u[a]) * (v[b] - v[a]) / (g.hx * g.hx) * vol;
        }
    if (g.dim == 2)
        for (int j = 0; j + 1 < g.ny; ++j)
            for (int i = 0; i < g.nx; ++i) {
                const int a = g.idx(i, j), b = g.idx(i, j + 1);
                acc += (u[b] - u[a]) * (v[b] - v[a]) / (g.hy * g.hy) * vol;
            }
    return acc;
}

bool has_constant_nullspace(const OperatorSpec& spec) {
    if (spec.coefficient == 0.0) return true;
    switch (spec.bc.kind) {
        case BCKind::FluxRobin:
            return spec.bc.alpha == 0.0;
        case BCKind::SemiPermeable:
            return true;
        case BCKind::Dirichlet:
            return false;
    }
    return false;
}

namespace {

double dot(const Field& a, const Field& b) {
    return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
}

double norm2(const Field& a) { return std::sqrt(dot(a, a)); }

}  // namespace

Field solve_implicit(const OperatorSpec& spec, double mass_coeff, const Field& rhs,
                     const SolveOptions& opts, SolveStats* stats) {
    check_shape(spec, rhs);
    if (!(mass_coeff > 0.0))
        throw ParameterError("solve_implicit: mass_coeff must be positive");
    if (!(opts.tol > 0.0)) throw ParameterError("solve_implicit: tol must be positive");

    const int n = spec.grid->size();
    const double rhs_norm = norm2(rhs);
    Field u(rhs.size(), 0.0);
    if (opts.initial_guess) {
        if (opts.initial_guess->size() != rhs.size())
            throw ParameterError("solve_implicit: initial guess shape mismatch");
        u = *opts.initial_guess;
    }

    auto operate = [&](const Field& x, Field& out) {
        apply_operator(spec, x, out);
        for (int c = 0; c < n; ++c) out[c] += mass_coeff * x[c];
    };

    std::vector<double> history;
    const double target = opts.tol * rhs_norm;
    const long cap = std::max<long>(50, static_cast<long>(opts.max_iter_factor) * n);
    int iters = 0;
    double rnorm = 0.0;

    if (rhs_norm == 0.0) {
        u.assign(rhs.size(), 0.0);
    } else {
        Field r(rhs.size()), q(rhs.size());
        auto true_residual = [&]() {
            operate(u, q);
            for (int c = 0; c < n; ++c) r[c] = rhs[c] - q[c];
            return dot(r, r);
        };
        double rr = true_residual();
        Field d = r;
        rnorm = std::sqrt(rr);
        history.push_back(rnorm);
        while (rnorm > target) {
            if (iters >= cap)
                throw SolveError("solve_implicit: conjugate gradients did not reach "
                                 "tolerance within the iteration cap",
                                 history);
            operate(d, q);
            const double alpha = rr / dot(d, q);
            for (int c = 0; c < n; ++c) u[c] += alpha * d[c];
            for (int c = 0; c < n; ++c) r[c] -= alpha * q[c];
            const double rr_new = dot(r, r);
            for (int c = 0; c < n; ++c) d[c] = r[c] + (rr_new / rr) * d[c];
            rr = rr_new;
            rnorm = std::sqrt(rr);
            history.push_back(rnorm);
            ++iters;
            // The recursive residual can drift from the true one; accept
            // convergence only when the recomputed residual agrees, restarting
            // from it otherwise.
            if (rnorm <= target) {
                rr = true_residual();
                rnorm = std::sqrt(rr);
                if (rnorm > target) d = r;
            }
        }
    }

    if (has_constant_nullspace(spec)) {
        // The exact solution's mean is sum(rhs)/(mass_coeff N): summing the
        // system over all cells annihilates the operator part. Enforcing it
        // removes the null-space component of the CG error exactly.
        const double mean_target =
            std::accumulate(rhs.begin(), rhs.end(), 0.0) / (mass_coeff * n);
        const double mean_u = std::accumulate(u.begin(), u.end(), 0.0) / n;
        const double shift = mean_target - mean_u;
        for (double& v : u) v += shift;
    }

    if (stats) {
        stats->iterations = iters;
        stats->rel_residual = rhs_norm == 0.0 ? 0.0 : rnorm / rhs_norm;
    }
    return u;
}

}  // namespace cryoflow
