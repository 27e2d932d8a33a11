#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "cryoflow/integrator.hpp"
#include "cryoflow/types.hpp"

namespace cryoflow {

/// Invalid or inconsistent configuration input (CLI exit code 2).
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Spatially uniform time series for the entropy source R and the boundary
/// entropy-flux datum Pi.
struct TimeSeries {
    enum class Kind { Constant, Pulse, Table };
    Kind kind = Kind::Constant;
    double value = 0.0;
    double t_off = 0.0;                 ///< Pulse: value until t_off, zero after
    std::vector<double> times, values;  ///< Table: piecewise-linear samples

    double eval(double t) const;
};

struct InitialSpec {
    double p = 0.0;
    double w = 0.0;
    double beta1 = 0.5;
    double beta2 = 0.0;

    /// Optional smooth Neumann-compatible modulation
    /// amplitude * cos(pi kx x / Lx) * cos(pi ky y / Ly) added to a field.
    struct Perturb {
        std::string field;  // p | w | beta1 | beta2
        double amplitude = 0.0;
        int kx = 1;
        int ky = 0;
    };
    std::vector<Perturb> perturbs;
};

struct OutputSpec {
    std::string dir = "out";
    int snapshot_every = 0;  ///< 0: final snapshot only
};

/// Parsed, validated run configuration. Either a full problem description or
/// a scenario preset name with optional stepping/output overlays.
struct RunConfig {
    std::optional<std::string> scenario;
    nlohmann::json stepping_overlay;  // raw overlay kept for faithful echo

    MaterialParams material;
    int grid_dim = 1;
    std::vector<int> grid_n = {64};
    std::vector<double> grid_extent = {1.0};
    BoundaryConfig bc;
    TimeSeries source_R, source_Pi;
    InitialSpec initial;
    StepConfig step;
    double t_end = 1.0;
    OutputSpec output;
};

/// Parses and validates; throws ConfigError with a message naming the
/// offending section/key. Unknown keys are rejected everywhere.
RunConfig parse_config(const nlohmann::json& j);
RunConfig load_config(const std::string& path);

/// Canonical echo; parse_config(normalized_json(c)) reproduces c.
nlohmann::json normalized_json(const RunConfig& c);

/// Everything needed to call run(): preset expansion and overlays applied.
struct Problem {
    MaterialParams params;
    Grid grid;
    BoundaryConfig bc;
    SourceConfig sources;
    StepConfig step;
    State initial;
    double t_end = 0.0;
    OutputSpec output;
    std::string scenario_name;  // empty when not a preset
};

Problem build_problem(const RunConfig& c);

}  // namespace cryoflow
