#pragma once

#include <cmath>

#include "cryoflow/types.hpp"

namespace cryoflow {

/// Plain 2-vector for (beta1, beta2) pairs and phase forcings.
struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    Vec2 operator+(Vec2 o) const { return {x + o.x, y + o.y}; }
    Vec2 operator-(Vec2 o) const { return {x - o.x, y - o.y}; }
    Vec2 operator*(double s) const { return {x * s, y * s}; }
    double dot(Vec2 o) const { return x * o.x + y * o.y; }
    double norm() const { return std::hypot(x, y); }
};

// The admissible set K is the triangle {b1 >= 0, b2 >= 0, b1 + b2 <= 1}
// with vertices (0,0), (1,0), (0,1). All operations below are exact case
// analyses over its vertices, edges and interior; no iteration.

/// True when v lies in K, within an absolute slack on each inequality.
bool in_triangle(Vec2 v, double slack = 0.0);

/// Euclidean projection onto K. Idempotent and nonexpansive; throws
/// ParameterError on non-finite input.
Vec2 project_triangle(Vec2 v);

/// Euclidean distance to K.
double triangle_distance(Vec2 v);

/// Yosida approximation of the subdifferential of the indicator of K:
/// (v - project(v)) / sigma. Lipschitz with constant 1/sigma, zero on K,
/// monotone. Requires sigma > 0.
Vec2 yosida_force(Vec2 v, double sigma);

/// Moreau envelope of the indicator: dist(v, K)^2 / (2 sigma). Nonnegative,
/// zero exactly on K, gradient equal to yosida_force.
double yosida_potential(Vec2 v, double sigma);

/// Gradient of the optional smooth double-well term
/// W(b1) + W(b2), W(s) = strength * s^2 (1-s)^2, applied componentwise.
Vec2 double_well_grad(Vec2 v, double strength = 1.0);

/// Distance from g to the normal cone of K at the point b (b is classified
/// against vertices/edges/interior with the given geometric tolerance; points
/// outside K are classified through their projection). Zero iff g is an
/// admissible multiplier at b.
double normal_cone_distance(Vec2 b, Vec2 g, double geom_tol = 1e-9);

}  // namespace cryoflow
