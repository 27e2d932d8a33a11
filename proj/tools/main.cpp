// Command-line front end: configuration-driven runs, parameter sweeps,
// config validation, and the scenario presets. Outputs are CSV: a
// diagnostics row per accepted step plus field snapshots at the configured
// cadence. Single-threaded and deterministic: identical configs produce
// byte-identical outputs.

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "cryoflow/config.hpp"
#include "cryoflow/constraint.hpp"
#include "cryoflow/scenarios.hpp"

namespace fs = std::filesystem;
using namespace cryoflow;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitStep = 3;

void print_error(const std::string& code, const std::string& message) {
    nlohmann::json line{{"error", code}, {"message", message}};
    std::cerr << line.dump() << "\n";
}

struct CommonOpts {
    std::string config_path;
    std::string out_dir;
    int snapshot_every = -1;  // -1: keep config value
    int seed = 0;             // reserved; the system is deterministic
};

void apply_overrides(Problem& pb, const CommonOpts& opts) {
    if (!opts.out_dir.empty()) pb.output.dir = opts.out_dir;
    if (opts.snapshot_every >= 0) pb.output.snapshot_every = opts.snapshot_every;
}

void write_state(const fs::path& path, const State& state, const Grid& grid) {
    std::ofstream os(path);
    write_snapshot(os, state, grid);
}

double l2_diff(const Field& a, const Field& b, double vol) {
    double acc = 0.0;
    for (std::size_t c = 0; c < a.size(); ++c) acc += (a[c] - b[c]) * (a[c] - b[c]);
    return std::sqrt(acc * vol);
}

int do_run(const CommonOpts& opts) {
    const RunConfig config = load_config(opts.config_path);
    Problem pb = build_problem(config);
    apply_overrides(pb, opts);
    fs::create_directories(pb.output.dir);
    const fs::path out(pb.output.dir);
    std::ofstream(out / "config_echo.json") << normalized_json(config).dump(2) << "\n";

    std::ofstream diag(out / "diagnostics.csv");
    diag << DiagnosticsRecord::csv_header() << "\n";
    const int cadence = pb.output.snapshot_every;
    DiagnosticsRecord last;
    Observer obs = [&](int step, double, const State& s, const DiagnosticsRecord& rec) {
        diag << rec.csv_row() << "\n";
        last = rec;
        if (cadence > 0 && step % cadence == 0) {
            char name[40];
            std::snprintf(name, sizeof(name), "state_%08d.csv", step);
            write_state(out / name, s, pb.grid);
        }
    };

    if (!pb.scenario_name.empty()) {
        ScenarioSetup setup = make_scenario(pb.scenario_name);
        setup.step = pb.step;
        setup.t_end = pb.t_end;
        ScenarioOutcome outcome = run_scenario(setup, obs);
        write_state(out / "state_final.csv", outcome.run.state, pb.grid);
        std::ofstream rep(out / "report.txt");
        rep << "config: " << normalized_json(config).dump() << "\n"
            << outcome.report.to_string();
        std::cout << outcome.report.to_string();
        if (!outcome.run.series.empty())
            std::cout << "final: " << DiagnosticsRecord::csv_header() << "\n"
                      << outcome.run.series.back().csv_row() << "\n";
        if (!outcome.report.pass) {
            print_error("oracle", "scenario oracle check failed");
            return kExitStep;
        }
        return 0;
    }

    RunResult res =
        run(pb.initial, pb.step, pb.params, pb.bc, pb.sources, pb.grid, pb.t_end, obs);
    write_state(out / "state_final.csv", res.state, pb.grid);
    std::cout << "final: " << DiagnosticsRecord::csv_header() << "\n";
    if (!res.series.empty())
        std::cout << res.series.back().csv_row() << "\n";
    else
        std::cout << "(no steps taken; t_end equals the initial time)\n";
    return 0;
}

int do_validate(const CommonOpts& opts) {
    RunConfig c = load_config(opts.config_path);
    build_problem(c);  // full validation including preset expansion
    std::cout << normalized_json(c).dump(2) << "\n";
    return 0;
}

int do_scenarios() {
    std::cout << "bottle_freeze        freezing a full watertight container; the "
                 "pressure climbs to the closed-form equilibrium value\n"
              << "emulsion_freeze      freezing a water/void emulsion; ends as either "
                 "ice+water (sorbet) or ice+voids depending on the initial fraction\n"
              << "glacier_equilibrium  void-free ice/water mixture prepared on the "
                 "pressure-dependent phase-change curve; stationary\n";
    return 0;
}

struct SweepRow {
    double value = 0.0;
    bool ok = false;
    std::string error;
    double err_p = 0.0, err_w = 0.0, err_b1 = 0.0, err_b2 = 0.0;
    double cauchy = 0.0;  // sigma axis only
    double order = 0.0;
};

int do_sweep(const CommonOpts& opts, const std::string& axis,
             std::vector<double> values) {
    if (values.size() < 2) {
        print_error("config", "sweep needs at least 2 values");
        return kExitConfig;
    }
    RunConfig base = load_config(opts.config_path);
    fs::path out(opts.out_dir.empty() ? base.output.dir : opts.out_dir);
    fs::create_directories(out);

    std::vector<SweepRow> rows(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) rows[i].value = values[i];

    if (axis == "mesh") {
        // Manufactured steady solve (I + B)u = rhs with u* a cosine mode;
        // the error against the analytic solution measures the spatial order.
        for (std::size_t i = 0; i < values.size(); ++i) {
            const int n = static_cast<int>(values[i]);
            if (n < 2) {
                rows[i].error = "mesh value must be >= 2";
                continue;
            }
            Grid grid = base.grid_dim == 1
                            ? Grid::make_1d(n, base.grid_extent[0])
                            : Grid::make_2d(n, n, base.grid_extent[0],
                                            base.grid_extent[1]);
            OperatorSpec spec{1.0, BoundaryLaw::insulated(), &grid};
            const double kx = M_PI / grid.extent_x;
            const double ky = grid.dim == 2 ? M_PI / grid.extent_y : 0.0;
            const double lam = kx * kx + ky * ky;
            Field exact(grid.size()), rhs(grid.size());
            for (int jj = 0; jj < grid.ny; ++jj)
                for (int ii = 0; ii < grid.nx; ++ii) {
                    const int c = grid.idx(ii, jj);
                    double u = std::cos(kx * grid.x_center(ii));
                    if (grid.dim == 2) u *= std::cos(ky * grid.y_center(jj));
                    exact[c] = u;
                    rhs[c] = (1.0 + lam) * u;
                }
            SolveOptions so;
            so.tol = 1e-12;
            Field u = solve_implicit(spec, 1.0, rhs, so);
            rows[i].ok = true;
            rows[i].err_p = l2_diff(u, exact, grid.cell_volume());
        }
        for (std::size_t i = 0; i + 1 < values.size(); ++i)
            if (rows[i].ok && rows[i + 1].ok)
                rows[i].order = std::log(rows[i].err_p / rows[i + 1].err_p) /
                                std::log(values[i + 1] / values[i]);
    } else if (axis == "sigma" || axis == "dt") {
        std::vector<State> finals(values.size());
        // Per-leg beta trajectories for the regularization Cauchy norm.
        std::vector<std::vector<Field>> traj1(values.size()), traj2(values.size());
        for (std::size_t i = 0; i < values.size(); ++i) {
            try {
                RunConfig leg = base;
                nlohmann::json overlay =
                    leg.stepping_overlay.is_null() ? nlohmann::json::object()
                                                   : leg.stepping_overlay;
                if (axis == "sigma") {
                    overlay["mode"] = "yosida";
                    overlay["sigma"] = values[i];
                } else {
                    overlay["dt"] = values[i];
                }
                leg.stepping_overlay = overlay;
                Problem pb = build_problem(leg);
                if (!leg.scenario) {
                    if (axis == "sigma") {
                        pb.step.mode = ConstraintMode::Yosida;
                        pb.step.sigma = values[i];
                    } else {
                        pb.step.dt = values[i];
                    }
                }
                fs::path legdir = out / (axis + "_" + format_double(values[i]));
                fs::create_directories(legdir);
                std::ofstream diag(legdir / "diagnostics.csv");
                diag << DiagnosticsRecord::csv_header() << "\n";
                Observer obs = [&](int, double, const State& s,
                                   const DiagnosticsRecord& rec) {
                    diag << rec.csv_row() << "\n";
                    if (axis == "sigma") {
                        traj1[i].push_back(s.beta1);
                        traj2[i].push_back(s.beta2);
                    }
                };
                RunResult res = run(pb.initial, pb.step, pb.params, pb.bc, pb.sources,
                                    pb.grid, pb.t_end, obs);
                finals[i] = res.state;
                rows[i].ok = true;
            } catch (const std::exception& e) {
                rows[i].error = e.what();
            }
        }
        const double vol = build_problem(base).grid.cell_volume();
        const State& ref = finals.back();
        for (std::size_t i = 0; i < values.size(); ++i) {
            if (!rows[i].ok || !rows.back().ok) continue;
            rows[i].err_p = l2_diff(finals[i].p, ref.p, vol);
            rows[i].err_w = l2_diff(finals[i].w, ref.w, vol);
            rows[i].err_b1 = l2_diff(finals[i].beta1, ref.beta1, vol);
            rows[i].err_b2 = l2_diff(finals[i].beta2, ref.beta2, vol);
        }
        if (axis == "sigma") {
            for (std::size_t i = 0; i + 1 < values.size(); ++i) {
                if (!rows[i].ok || !rows[i + 1].ok) continue;
                const std::size_t steps =
                    std::min(traj1[i].size(), traj1[i + 1].size());
                double worst = 0.0;
                for (std::size_t s = 0; s < steps; ++s) {
                    const double d =
                        std::hypot(l2_diff(traj1[i][s], traj1[i + 1][s], vol),
                                   l2_diff(traj2[i][s], traj2[i + 1][s], vol));
                    worst = std::max(worst, d);
                }
                rows[i].cauchy = worst;
            }
            for (std::size_t i = 0; i + 2 < values.size(); ++i)
                if (rows[i].cauchy > 0 && rows[i + 1].cauchy > 0)
                    rows[i].order = std::log(rows[i].cauchy / rows[i + 1].cauchy) /
                                    std::log(values[i] / values[i + 1]);
        } else {
            // Observed order by Richardson on consecutive-leg differences
            // (unbiased by the finite reference).
            std::vector<double> diff(values.size(), 0.0);
            for (std::size_t i = 0; i + 1 < values.size(); ++i) {
                if (!rows[i].ok || !rows[i + 1].ok) continue;
                diff[i] = std::sqrt(
                    std::pow(l2_diff(finals[i].p, finals[i + 1].p, vol), 2) +
                    std::pow(l2_diff(finals[i].w, finals[i + 1].w, vol), 2) +
                    std::pow(l2_diff(finals[i].beta1, finals[i + 1].beta1, vol), 2) +
                    std::pow(l2_diff(finals[i].beta2, finals[i + 1].beta2, vol), 2));
            }
            for (std::size_t i = 0; i + 2 < values.size(); ++i)
                if (diff[i] > 0.0 && diff[i + 1] > 0.0)
                    rows[i].order = std::log(diff[i] / diff[i + 1]) /
                                    std::log(values[i] / values[i + 1]);
        }
    } else {
        print_error("config", "sweep axis must be sigma, dt, or mesh");
        return kExitConfig;
    }

    std::ofstream table(out / "sweep.csv");
    const char* header = axis == "mesh"
                             ? "value,error,order"
                             : (axis == "sigma" ? "value,err_p,err_w,err_beta1,err_beta2,"
                                                  "cauchy,order"
                                                : "value,err_p,err_w,err_beta1,err_beta2,"
                                                  "order");
    table << header << "\n";
    std::cout << header << "\n";
    bool any_failed = false;
    for (const SweepRow& r : rows) {
        std::string line;
        if (!r.ok && !r.error.empty()) {
            line = format_double(r.value) + ",failed: " + r.error;
            any_failed = true;
        } else if (axis == "mesh") {
            line = format_double(r.value) + "," + format_double(r.err_p) + "," +
                   format_double(r.order);
        } else if (axis == "sigma") {
            line = format_double(r.value) + "," + format_double(r.err_p) + "," +
                   format_double(r.err_w) + "," + format_double(r.err_b1) + "," +
                   format_double(r.err_b2) + "," + format_double(r.cauchy) + "," +
                   format_double(r.order);
        } else {
            line = format_double(r.value) + "," + format_double(r.err_p) + "," +
                   format_double(r.err_w) + "," + format_double(r.err_b1) + "," +
                   format_double(r.err_b2) + "," + format_double(r.order);
        }
        table << line << "\n";
        std::cout << line << "\n";
    }
    return any_failed ? kExitStep : 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"phase-change simulator with distinct phase densities and voids"};
    app.require_subcommand(1);

    CommonOpts opts;
    std::string axis;
    std::vector<double> values;

    auto add_common = [&](CLI::App* cmd, bool needs_config) {
        auto* c = cmd->add_option("--config", opts.config_path, "configuration file");
        if (needs_config) c->required();
        cmd->add_option("--out", opts.out_dir, "output directory (overrides config)");
        cmd->add_option("--snapshot-every", opts.snapshot_every,
                        "snapshot cadence in steps (overrides config)");
        cmd->add_option("--seed", opts.seed,
                        "reserved; runs are deterministic and ignore it");
    };

    CLI::App* cmd_run = app.add_subcommand("run", "execute a configured simulation");
    add_common(cmd_run, true);
    CLI::App* cmd_sweep =
        app.add_subcommand("sweep", "run a config across sigma/dt/mesh values");
    add_common(cmd_sweep, true);
    cmd_sweep->add_option("--axis", axis, "sigma | dt | mesh")->required();
    cmd_sweep->add_option("--values", values, "sweep values")->required()->delimiter(',');
    CLI::App* cmd_validate =
        app.add_subcommand("validate", "parse, validate, and echo a config");
    add_common(cmd_validate, true);
    app.add_subcommand("scenarios", "list scenario presets");

    CLI11_PARSE(app, argc, argv);

    try {
        if (app.got_subcommand("run")) return do_run(opts);
        if (app.got_subcommand("sweep")) return do_sweep(opts, axis, values);
        if (app.got_subcommand("validate")) return do_validate(opts);
        if (app.got_subcommand("scenarios")) return do_scenarios();
    } catch (const ConfigError& e) {
        print_error("config", e.what());
        return kExitConfig;
    } catch (const ParameterError& e) {
        print_error("config", e.what());
        return kExitConfig;
    } catch (const StepError& e) {
        print_error("step", e.what());
        return kExitStep;
    } catch (const SolveError& e) {
        print_error("solver", e.what());
        return kExitStep;
    } catch (const std::exception& e) {
        print_error("internal", e.what());
        return kExitStep;
    }
    return 0;
}
