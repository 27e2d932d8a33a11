#include "cryoflow/types.hpp"

#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

namespace cryoflow {

Grid Grid::make_1d(int n, double extent) {
    if (n < 2) throw ParameterError("grid: need at least 2 cells per axis");
    if (!(extent > 0.0)) throw ParameterError("grid: extent must be positive");
    Grid g;
    g.dim = 1;
    g.nx = n;
    g.ny = 1;
    g.extent_x = extent;
    g.hx = extent / n;
    g.hy = 1.0;
    g.extent_y = 1.0;
    return g;
}

Grid Grid::make_2d(int nx, int ny, double extent_x, double extent_y) {
    if (nx < 2 || ny < 2) throw ParameterError("grid: need at least 2 cells per axis");
    if (!(extent_x > 0.0) || !(extent_y > 0.0))
        throw ParameterError("grid: extents must be positive");
    Grid g;
    g.dim = 2;
    g.nx = nx;
    g.ny = ny;
    g.extent_x = extent_x;
    g.extent_y = extent_y;
    g.hx = extent_x / nx;
    g.hy = extent_y / ny;
    return g;
}

void MaterialParams::validate() const {
    if (!(rho2 > 0.0) || !(rho1 > rho2))
        throw ParameterError("material: densities must satisfy rho1 > rho2 > 0");
    auto positive = [](double v, const char* name) {
        if (!(v > 0.0))
            throw ParameterError(std::string("material: ") + name + " must be positive");
    };
    positive(k, "k");
    positive(m, "m");
    positive(c0, "c0");
    positive(lambda, "lambda");
    positive(ell, "ell");
    positive(theta_c, "theta_c");
    positive(mu, "mu");
    if (!(nu >= 0.0)) throw ParameterError("material: nu must be nonnegative");
}

double mixture_compressibility(double k1, double k2, double beta1_0, double beta2_0) {
    if (!(k1 > 0.0) || !(k2 > 0.0))
        throw ParameterError("mixture_compressibility: phase compressibilities must be positive");
    if (beta1_0 < 0.0 || beta2_0 < 0.0 || beta1_0 + beta2_0 > 1.0)
        throw ParameterError(
            "mixture_compressibility: reference fractions must lie in the admissible set K");
    return beta1_0 / k1 + beta2_0 / k2;
}

void BoundaryConfig::validate() const {
    if (!(alpha_p >= 0.0)) throw ParameterError("bc: alpha_p must be nonnegative");
    if (!(alpha_theta >= 0.0)) throw ParameterError("bc: alpha_theta must be nonnegative");
    if (temperature_kind == TemperatureBCKind::RobinTheta && !(theta_ext > 0.0))
        throw ParameterError("bc: theta_ext must be positive");
}

State State::uniform(const Grid& grid, double p0, double w0, double beta1_0,
                     double beta2_0) {
    State s;
    const std::size_t n = static_cast<std::size_t>(grid.size());
    s.p.assign(n, p0);
    s.w.assign(n, w0);
    s.beta1.assign(n, beta1_0);
    s.beta2.assign(n, beta2_0);
    s.t = 0.0;
    return s;
}

namespace {

// d/dx with centered interior stencil and 3-point one-sided ends, so the
// boundary rows stay second order.
void gradient_axis(const Grid& g, const Field& u, int axis, Field& out) {
    const int nx = g.nx, ny = g.ny;
    const double h = axis == 0 ? g.hx : g.hy;
    for (int j = 0; j < ny; ++j) {
        for (int i = 0; i < nx; ++i) {
            const int c = g.idx(i, j);
            const int n_axis = axis == 0 ? nx : ny;
            const int q = axis == 0 ? i : j;
            auto at = [&](int qq) {
                return axis == 0 ? u[g.idx(qq, j)] : u[g.idx(i, qq)];
            };
            double d;
            if (n_axis == 2)
                d = (at(1) - at(0)) / h;
            else if (q == 0)
                d = (-3.0 * at(0) + 4.0 * at(1) - at(2)) / (2.0 * h);
            else if (q == n_axis - 1)
                d = (3.0 * at(n_axis - 1) - 4.0 * at(n_axis - 2) + at(n_axis - 3)) / (2.0 * h);
            else
                d = (at(q + 1) - at(q - 1)) / (2.0 * h);
            out[c] = d;
        }
    }
}

}  // namespace

std::vector<Field> darcy_velocity(const State& state, const MaterialParams& params,
                                  const Grid& grid) {
    std::vector<Field> flux(static_cast<std::size_t>(grid.dim),
                            Field(static_cast<std::size_t>(grid.size())));
    for (int axis = 0; axis < grid.dim; ++axis) {
        gradient_axis(grid, state.p, axis, flux[static_cast<std::size_t>(axis)]);
        for (double& v : flux[static_cast<std::size_t>(axis)]) v *= -params.m;
    }
    return flux;
}

std::string format_double(double v) {
    char buf[40];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

void write_snapshot(std::ostream& os, const State& state, const Grid& grid) {
    os << "dim=" << grid.dim << " nx=" << grid.nx << " ny=" << grid.ny
       << " hx=" << format_double(grid.hx) << " hy=" << format_double(grid.hy)
       << " extent_x=" << format_double(grid.extent_x)
       << " extent_y=" << format_double(grid.extent_y)
       << " t=" << format_double(state.t) << " fields=index,p,w,beta1,beta2\n";
    const int n = grid.size();
    for (int c = 0; c < n; ++c) {
        os << c << ',' << format_double(state.p[c]) << ',' << format_double(state.w[c])
           << ',' << format_double(state.beta1[c]) << ','
           << format_double(state.beta2[c]) << '\n';
    }
}

Snapshot read_snapshot(std::istream& is) {
    std::string header;
    if (!std::getline(is, header)) throw std::runtime_error("snapshot: missing header");
    auto get = [&header](const std::string& key) {
        const std::string tag = key + "=";
        auto pos = header.find(tag);
        if (pos == std::string::npos)
            throw std::runtime_error("snapshot: header missing " + key);
        auto end = header.find(' ', pos);
        return header.substr(pos + tag.size(), end == std::string::npos
                                                   ? std::string::npos
                                                   : end - pos - tag.size());
    };
    const int dim = std::stoi(get("dim"));
    const int nx = std::stoi(get("nx"));
    const int ny = std::stoi(get("ny"));
    Grid grid = dim == 1 ? Grid::make_1d(nx, std::stod(get("extent_x")))
                         : Grid::make_2d(nx, ny, std::stod(get("extent_x")),
                                         std::stod(get("extent_y")));
    Snapshot snap;
    snap.grid = grid;
    snap.state = State::uniform(grid, 0.0, 0.0, 0.0, 0.0);
    snap.state.t = std::stod(get("t"));
    std::string line;
    int count = 0;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::istringstream row(line);
        std::string cell;
        auto next = [&row, &cell]() {
            if (!std::getline(row, cell, ','))
                throw std::runtime_error("snapshot: short row");
            return std::stod(cell);
        };
        const int c = static_cast<int>(next());
        if (c < 0 || c >= grid.size()) throw std::runtime_error("snapshot: bad cell index");
        snap.state.p[c] = next();
        snap.state.w[c] = next();
        snap.state.beta1[c] = next();
        snap.state.beta2[c] = next();
        ++count;
    }
    if (count != grid.size()) throw std::runtime_error("snapshot: wrong row count");
    return snap;
}

}  // namespace cryoflow
