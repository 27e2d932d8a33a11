#include "cryoflow/constraint.hpp"

#include <algorithm>
#include <cmath>

namespace cryoflow {

bool in_triangle(Vec2 v, double slack) {
    return v.x >= -slack && v.y >= -slack && v.x + v.y <= 1.0 + slack;
}

Vec2 project_triangle(Vec2 v) {
    if (!std::isfinite(v.x) || !std::isfinite(v.y))
        throw ParameterError("project_triangle: non-finite input");
    if (in_triangle(v)) return v;

    // Candidate feet on the three edges, endpoints clamped so the vertices
    // are covered as well.
    const Vec2 on_b2_axis{0.0, std::clamp(v.y, 0.0, 1.0)};
    const Vec2 on_b1_axis{std::clamp(v.x, 0.0, 1.0), 0.0};
    // Hypotenuse b1 + b2 = 1 parametrized (1-t, t), t in [0,1].
    const double t = std::clamp((v.y - v.x + 1.0) * 0.5, 0.0, 1.0);
    Vec2 on_hyp{1.0 - t, t};

    Vec2 best = on_b1_axis;
    double best_d2 = (v - best).dot(v - best);
    for (Vec2 cand : {on_b2_axis, on_hyp}) {
        const double d2 = (v - cand).dot(v - cand);
        if (d2 < best_d2) {
            best_d2 = d2;
            best = cand;
        }
    }
    return best;
}

double triangle_distance(Vec2 v) { return (v - project_triangle(v)).norm(); }

Vec2 yosida_force(Vec2 v, double sigma) {
    if (!(sigma > 0.0)) throw ParameterError("yosida_force: sigma must be positive");
    return (v - project_triangle(v)) * (1.0 / sigma);
}

double yosida_potential(Vec2 v, double sigma) {
    if (!(sigma > 0.0)) throw ParameterError("yosida_potential: sigma must be positive");
    const double d = triangle_distance(v);
    return d * d / (2.0 * sigma);
}

Vec2 double_well_grad(Vec2 v, double strength) {
    auto dW = [strength](double s) { return strength * 2.0 * s * (1.0 - s) * (1.0 - 2.0 * s); };
    return {dW(v.x), dW(v.y)};
}

namespace {

// Distance from g to the ray {t*d : t >= 0}, |d| arbitrary nonzero.
double ray_distance(Vec2 g, Vec2 d) {
    const double t = std::max(0.0, g.dot(d) / d.dot(d));
    return (g - d * t).norm();
}

// Distance from g to the cone spanned by d1, d2 (angle < pi).
double cone_distance(Vec2 g, Vec2 d1, Vec2 d2) {
    // Inside test via the two edge normals.
    const double c1 = g.x * d1.y - g.y * d1.x;
    const double c2 = g.x * d2.y - g.y * d2.x;
    const double s = d1.x * d2.y - d1.y * d2.x;  // orientation of (d1, d2)
    if ((s > 0 && c1 <= 0 && c2 >= 0) || (s < 0 && c1 >= 0 && c2 <= 0)) return 0.0;
    return std::min(ray_distance(g, d1), ray_distance(g, d2));
}

}  // namespace

double normal_cone_distance(Vec2 b, Vec2 g, double geom_tol) {
    const Vec2 q = project_triangle(b);
    const bool on_b1_zero = q.x <= geom_tol;           // edge beta1 = 0
    const bool on_b2_zero = q.y <= geom_tol;           // edge beta2 = 0
    const bool on_hyp = q.x + q.y >= 1.0 - geom_tol;   // edge beta1 + beta2 = 1

    const Vec2 n1{-1.0, 0.0};  // outward normal of beta1 >= 0
    const Vec2 n2{0.0, -1.0};  // outward normal of beta2 >= 0
    const Vec2 nh{1.0, 1.0};   // outward normal of beta1 + beta2 <= 1

    if (on_b1_zero && on_b2_zero) return cone_distance(g, n1, n2);  // vertex (0,0)
    if (on_b2_zero && on_hyp) return cone_distance(g, n2, nh);      // vertex (1,0)
    if (on_b1_zero && on_hyp) return cone_distance(g, n1, nh);      // vertex (0,1)
    if (on_b1_zero) return ray_distance(g, n1);
    if (on_b2_zero) return ray_distance(g, n2);
    if (on_hyp) return ray_distance(g, nh);
    return g.norm();  // interior: normal cone is {0}
}

}  // namespace cryoflow
