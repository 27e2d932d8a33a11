#pragma once

#include <functional>
#include <stdexcept>
#include <vector>

#include "cryoflow/types.hpp"

namespace cryoflow {

/// One boundary law applied on every boundary face of a field.
///   FluxRobin:     c du/dn + alpha u = datum   (alpha = datum = 0: insulated)
///   Dirichlet:     u = value on the boundary (ghost-cell limit of Robin)
///   SemiPermeable: c du/dn = alpha (u - ext)^-, inflow only; the nonlinear
///                  flux is lagged to a previous iterate and enters the rhs,
///                  so the operator itself stays linear and symmetric.
enum class BCKind { FluxRobin, Dirichlet, SemiPermeable };

struct BoundaryLaw {
    BCKind kind = BCKind::FluxRobin;
    double alpha = 0.0;
    double datum = 0.0;  ///< FluxRobin flux datum / Dirichlet value / SemiPermeable exterior value

    static BoundaryLaw insulated() { return {BCKind::FluxRobin, 0.0, 0.0}; }
    static BoundaryLaw robin(double alpha, double ext) {
        return {BCKind::FluxRobin, alpha, alpha * ext};
    }
    static BoundaryLaw flux(double datum) { return {BCKind::FluxRobin, 0.0, datum}; }
    static BoundaryLaw dirichlet(double value) { return {BCKind::Dirichlet, 0.0, value}; }
    static BoundaryLaw semi_permeable(double alpha, double ext) {
        return {BCKind::SemiPermeable, alpha, ext};
    }
};

/// -c Laplace with the boundary law folded in by second-order ghost-cell
/// elimination. Watertight Robin with alpha = 0 is singular with a constant
/// null space; solve_implicit handles that through its mass term and an exact
/// null-space correction.
struct OperatorSpec {
    double coefficient = 1.0;
    BoundaryLaw bc;
    const Grid* grid = nullptr;
};

/// out = A u (linear part only; affine boundary data enters via the
/// *_rhs helpers). Symmetric for FluxRobin/Dirichlet laws.
void apply_operator(const OperatorSpec& spec, const Field& u, Field& out);
Field apply_operator(const OperatorSpec& spec, const Field& u);

/// Adds the affine boundary contribution of the law to rhs using the uniform
/// datum stored in the law.
void add_boundary_rhs(const OperatorSpec& spec, Field& rhs);

/// Same, with a per-face datum evaluated at the face center (used for the
/// space/time dependent entropy-flux datum).
void add_boundary_rhs(const OperatorSpec& spec, Field& rhs,
                      const std::function<double(double x, double y)>& datum);

/// Lagged semi-permeable inflow: rhs += alpha (u_lag - ext)^- / h per face.
void add_semipermeable_rhs(const OperatorSpec& spec, const Field& u_lag, Field& rhs);

/// Interior Dirichlet form  sum_faces (u_r - u_l)(v_r - v_l)/h^2 * cellvol;
/// the discrete counterpart of integral grad(u).grad(v).
double dirichlet_form(const Grid& grid, const Field& u, const Field& v);

/// True when constants are in the null space of the linear part.
bool has_constant_nullspace(const OperatorSpec& spec);

struct SolveOptions {
    double tol = 1e-10;             ///< relative residual target
    int max_iter_factor = 10;       ///< iteration cap = factor * N
    const Field* initial_guess = nullptr;
};

struct SolveStats {
    int iterations = 0;
    double rel_residual = 0.0;
};

/// Conjugate-gradient failure, with the residual norms seen along the way.
struct SolveError : std::runtime_error {
    std::vector<double> residual_history;
    SolveError(const std::string& msg, std::vector<double> history)
        : std::runtime_error(msg), residual_history(std::move(history)) {}
};

/// Solves (mass_coeff I + A) u = rhs by matrix-free conjugate gradients.
/// Requires mass_coeff > 0 so the system is positive definite even when A is
/// singular. For pure-Neumann laws the constant component of the solution is
/// set exactly from sum(rhs)/mass_coeff, which removes the null-space part of
/// the iteration error and keeps the watertight mass identity exact.
Field solve_implicit(const OperatorSpec& spec, double mass_coeff, const Field& rhs,
                     const SolveOptions& opts = {}, SolveStats* stats = nullptr);

/// Calls fn(cell, axis, side, face_x, face_y) for every boundary face;
/// axis 0/1, side -1/+1.
void for_each_boundary_face(
    const Grid& grid,
    const std::function<void(int cell, int axis, int side, double x, double y)>& fn);

}  // namespace cryoflow
