#pragma once

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

namespace cryoflow {

/// Cell-centered scalar field, row-major (i fastest).
using Field = std::vector<double>;

/// Thrown on invalid physical parameters or inadmissible data.
struct ParameterError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// Uniform rectilinear mesh, 1-D or 2-D, cell-centered unknowns.
struct Grid {
    int dim = 1;
    int nx = 2, ny = 1;
    double hx = 0.5, hy = 1.0;
    double extent_x = 1.0, extent_y = 1.0;

    static Grid make_1d(int n, double extent);
    static Grid make_2d(int nx, int ny, double extent_x, double extent_y);

    int size() const { return nx * ny; }
    int idx(int i, int j) const { return i + nx * j; }
    double cell_volume() const { return dim == 1 ? hx : hx * hy; }
    double x_center(int i) const { return (i + 0.5) * hx; }
    double y_center(int j) const { return dim == 1 ? 0.0 : (j + 0.5) * hy; }
};

/// Material constants. Defaults follow the normalized unit system
/// k = m = c0 = lambda = mu = ell/theta_c = 1 used throughout the tests;
/// everything stays configurable.
struct MaterialParams {
    double rho1 = 1.0;     ///< liquid density (must exceed rho2)
    double rho2 = 0.9;     ///< solid density
    double k = 1.0;        ///< mixture compressibility
    double m = 1.0;        ///< Darcy mobility
    double c0 = 1.0;       ///< specific heat
    double lambda = 1.0;   ///< heat conductivity
    double ell = 1.0;      ///< latent heat
    double theta_c = 1.0;  ///< critical temperature (absolute)
    double mu = 1.0;       ///< phase-change viscosity
    double nu = 0.0;       ///< interfacial-energy coefficient (>= 0)

    /// Latent-heat coefficient ell/theta_c multiplying the beta1 rate.
    double latent_slope() const { return ell / theta_c; }

    /// Throws ParameterError unless rho1 > rho2 > 0, all positive
    /// coefficients are positive and nu >= 0.
    void validate() const;
};

/// Mixture compressibility k = beta1_0/k1 + beta2_0/k2 from the phase
/// compressibilities and the reference fractions.
double mixture_compressibility(double k1, double k2, double beta1_0, double beta2_0);

/// Unknowns at one time level. w is the log-temperature variable; the
/// temperature theta = exp-map(w) is derived, never stored, so positivity is
/// structural.
struct State {
    Field p;
    Field w;
    Field beta1;
    Field beta2;
    double t = 0.0;

    static State uniform(const Grid& grid, double p0, double w0, double beta1_0,
                         double beta2_0);
};

/// Pressure boundary laws. The phase fields always carry homogeneous Neumann
/// conditions; the temperature law acts on w (see TemperatureBC).
enum class PressureBCKind {
    Watertight,     ///< m dp/dn = 0 (conserves total water mass)
    Robin,          ///< m dp/dn + alpha_p (p - p_ext) = 0
    Dirichlet,      ///< p = p_ext
    SemiPermeable,  ///< m dp/dn = alpha_p (p - p_ext)^-  (inflow only)
};

enum class TemperatureBCKind {
    RobinW,      ///< lambda dw/dn + alpha_theta w = Pi (weak-form law on w)
    RobinTheta,  ///< lambda dtheta/dn + alpha_theta (theta - theta_ext) = 0
};

struct BoundaryConfig {
    PressureBCKind pressure_kind = PressureBCKind::Watertight;
    double alpha_p = 0.0;
    double p_ext = 0.0;

    TemperatureBCKind temperature_kind = TemperatureBCKind::RobinW;
    double alpha_theta = 0.0;
    double theta_ext = 1.0;  ///< used by RobinTheta only

    void validate() const;  ///< alpha_p >= 0, alpha_theta >= 0, theta_ext > 0
};

/// Entropy source R(x, t) and boundary entropy-flux datum Pi(x, t).
/// Either function may be empty, meaning identically zero.
struct SourceConfig {
    std::function<double(double x, double y, double t)> R;
    std::function<double(double x, double y, double t)> Pi;

    double eval_R(double x, double y, double t) const { return R ? R(x, y, t) : 0.0; }
    double eval_Pi(double x, double y, double t) const { return Pi ? Pi(x, y, t) : 0.0; }
};

/// Darcy mass flux -m grad(p), one component field per axis. Centered
/// differences in the interior, second-order one-sided at the boundary.
/// Dividing by rho1*beta1 where beta1 is bounded away from zero gives the
/// liquid velocity; that division is left to the caller.
std::vector<Field> darcy_velocity(const State& state, const MaterialParams& params,
                                  const Grid& grid);

/// Snapshot format: one header line (dim, n, h, t, field order) followed by
/// CSV rows "index,p,w,beta1,beta2". Doubles are printed in their shortest
/// round-trip form so a write/read cycle is bit-exact.
void write_snapshot(std::ostream& os, const State& state, const Grid& grid);
struct Snapshot {
    Grid grid;
    State state;
};
Snapshot read_snapshot(std::istream& is);

/// Shortest decimal representation that round-trips IEEE doubles.
std::string format_double(double v);

}  // namespace cryoflow
