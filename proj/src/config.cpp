#include "cryoflow/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "cryoflow/constraint.hpp"
#include "cryoflow/scenarios.hpp"

namespace cryoflow {

using nlohmann::json;

double TimeSeries::eval(double t) const {
    switch (kind) {
        case Kind::Constant:
            return value;
        case Kind::Pulse:
            return t < t_off ? value : 0.0;
        case Kind::Table: {
            if (times.empty()) return 0.0;
            if (t <= times.front()) return values.front();
            if (t >= times.back()) return values.back();
            auto it = std::upper_bound(times.begin(), times.end(), t);
            const std::size_t i = static_cast<std::size_t>(it - times.begin());
            const double s = (t - times[i - 1]) / (times[i] - times[i - 1]);
            return values[i - 1] + s * (values[i] - values[i - 1]);
        }
    }
    return 0.0;
}

namespace {

void reject_unknown(const json& obj, const std::string& section,
                    std::initializer_list<const char*> allowed) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        if (std::find_if(allowed.begin(), allowed.end(), [&](const char* k) {
                return it.key() == k;
            }) == allowed.end())
            throw ConfigError("config: unknown key '" + it.key() + "' in " + section);
    }
}

const json& require_section(const json& j, const char* name) {
    if (!j.contains(name))
        throw ConfigError(std::string("config: missing required section '") + name + "'");
    if (!j.at(name).is_object())
        throw ConfigError(std::string("config: section '") + name + "' must be an object");
    return j.at(name);
}

double get_number(const json& obj, const std::string& section, const char* key,
                  double fallback) {
    if (!obj.contains(key)) return fallback;
    if (!obj.at(key).is_number())
        throw ConfigError("config: '" + section + "." + key + "' must be a number");
    return obj.at(key).get<double>();
}

int get_int(const json& obj, const std::string& section, const char* key, int fallback) {
    if (!obj.contains(key)) return fallback;
    if (!obj.at(key).is_number_integer())
        throw ConfigError("config: '" + section + "." + key + "' must be an integer");
    return obj.at(key).get<int>();
}

bool get_bool(const json& obj, const std::string& section, const char* key,
              bool fallback) {
    if (!obj.contains(key)) return fallback;
    if (!obj.at(key).is_boolean())
        throw ConfigError("config: '" + section + "." + key + "' must be a boolean");
    return obj.at(key).get<bool>();
}

std::string get_string(const json& obj, const std::string& section, const char* key,
                       const std::string& fallback) {
    if (!obj.contains(key)) return fallback;
    if (!obj.at(key).is_string())
        throw ConfigError("config: '" + section + "." + key + "' must be a string");
    return obj.at(key).get<std::string>();
}

MaterialParams parse_material(const json& m, double beta1_0, double beta2_0) {
    reject_unknown(m, "section 'material'",
                   {"rho1", "rho2", "k", "k1", "k2", "m", "c0", "lambda", "ell",
                    "theta_c", "mu", "nu"});
    MaterialParams p;
    p.rho1 = get_number(m, "material", "rho1", p.rho1);
    p.rho2 = get_number(m, "material", "rho2", p.rho2);
    p.m = get_number(m, "material", "m", p.m);
    p.c0 = get_number(m, "material", "c0", p.c0);
    p.lambda = get_number(m, "material", "lambda", p.lambda);
    p.ell = get_number(m, "material", "ell", p.ell);
    p.theta_c = get_number(m, "material", "theta_c", p.theta_c);
    p.mu = get_number(m, "material", "mu", p.mu);
    p.nu = get_number(m, "material", "nu", p.nu);
    const bool has_k = m.contains("k");
    const bool has_phase_k = m.contains("k1") || m.contains("k2");
    if (has_k && has_phase_k)
        throw ConfigError("config: give either 'material.k' or 'material.k1'/'k2', not both");
    if (has_phase_k) {
        if (!m.contains("k1") || !m.contains("k2"))
            throw ConfigError("config: 'material.k1' and 'material.k2' must come together");
        p.k = mixture_compressibility(get_number(m, "material", "k1", 1.0),
                                      get_number(m, "material", "k2", 1.0), beta1_0,
                                      beta2_0);
    } else {
        p.k = get_number(m, "material", "k", p.k);
    }
    try {
        p.validate();
    } catch (const ParameterError& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    return p;
}

void parse_grid(const json& g, RunConfig& c) {
    reject_unknown(g, "section 'grid'", {"dim", "n", "extent"});
    c.grid_dim = get_int(g, "grid", "dim", 1);
    if (c.grid_dim != 1 && c.grid_dim != 2)
        throw ConfigError("config: 'grid.dim' must be 1 or 2");
    auto read_array = [&](const char* key, auto& dst, auto fallback) {
        dst.clear();
        if (!g.contains(key)) {
            dst.assign(static_cast<std::size_t>(c.grid_dim), fallback);
            return;
        }
        if (!g.at(key).is_array())
            throw ConfigError(std::string("config: 'grid.") + key + "' must be an array");
        for (const auto& v : g.at(key)) {
            if (!v.is_number())
                throw ConfigError(std::string("config: 'grid.") + key +
                                  "' entries must be numbers");
            dst.push_back(v.get<typename std::decay_t<decltype(dst)>::value_type>());
        }
        if (static_cast<int>(dst.size()) != c.grid_dim)
            throw ConfigError(std::string("config: 'grid.") + key +
                              "' length must equal grid.dim");
    };
    read_array("n", c.grid_n, 64);
    read_array("extent", c.grid_extent, 1.0);
}

void parse_bc(const json& b, BoundaryConfig& bc) {
    reject_unknown(b, "section 'bc'", {"pressure", "temperature"});
    if (b.contains("pressure")) {
        const json& p = b.at("pressure");
        reject_unknown(p, "section 'bc.pressure'", {"kind", "alpha_p", "p_ext"});
        const std::string kind = get_string(p, "bc.pressure", "kind", "watertight");
        if (kind == "watertight")
            bc.pressure_kind = PressureBCKind::Watertight;
        else if (kind == "robin")
            bc.pressure_kind = PressureBCKind::Robin;
        else if (kind == "dirichlet")
            bc.pressure_kind = PressureBCKind::Dirichlet;
        else if (kind == "semi_permeable")
            bc.pressure_kind = PressureBCKind::SemiPermeable;
        else
            throw ConfigError("config: 'bc.pressure.kind' must be one of watertight, "
                              "robin, dirichlet, semi_permeable");
        bc.alpha_p = get_number(p, "bc.pressure", "alpha_p", 0.0);
        bc.p_ext = get_number(p, "bc.pressure", "p_ext", 0.0);
    }
    if (b.contains("temperature")) {
        const json& t = b.at("temperature");
        reject_unknown(t, "section 'bc.temperature'",
                       {"kind", "alpha_theta", "theta_ext"});
        const std::string kind = get_string(t, "bc.temperature", "kind", "robin_w");
        if (kind == "robin_w")
            bc.temperature_kind = TemperatureBCKind::RobinW;
        else if (kind == "robin_theta")
            bc.temperature_kind = TemperatureBCKind::RobinTheta;
        else
            throw ConfigError(
                "config: 'bc.temperature.kind' must be robin_w or robin_theta");
        bc.alpha_theta = get_number(t, "bc.temperature", "alpha_theta", 0.0);
        bc.theta_ext = get_number(t, "bc.temperature", "theta_ext", 1.0);
    }
    try {
        bc.validate();
    } catch (const ParameterError& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
}

TimeSeries parse_series(const json& s, const std::string& where) {
    reject_unknown(s, "section '" + where + "'",
                   {"kind", "value", "t_end", "times", "values"});
    TimeSeries ts;
    const std::string kind = get_string(s, where, "kind", "constant");
    if (kind == "constant") {
        ts.kind = TimeSeries::Kind::Constant;
        ts.value = get_number(s, where, "value", 0.0);
    } else if (kind == "pulse") {
        ts.kind = TimeSeries::Kind::Pulse;
        ts.value = get_number(s, where, "value", 0.0);
        ts.t_off = get_number(s, where, "t_end", 0.0);
        if (!(ts.t_off >= 0.0))
            throw ConfigError("config: '" + where + ".t_end' must be nonnegative");
    } else if (kind == "table") {
        ts.kind = TimeSeries::Kind::Table;
        if (!s.contains("times") || !s.contains("values"))
            throw ConfigError("config: '" + where + "' table needs 'times' and 'values'");
        for (const auto& v : s.at("times")) ts.times.push_back(v.get<double>());
        for (const auto& v : s.at("values")) ts.values.push_back(v.get<double>());
        if (ts.times.size() != ts.values.size() || ts.times.empty())
            throw ConfigError("config: '" + where +
                              "' times/values must be equal-length and nonempty");
        if (!std::is_sorted(ts.times.begin(), ts.times.end()))
            throw ConfigError("config: '" + where + ".times' must be increasing");
    } else {
        throw ConfigError("config: '" + where +
                          ".kind' must be constant, pulse, or table");
    }
    return ts;
}

InitialSpec parse_initial(const json& ini) {
    reject_unknown(ini, "section 'initial'",
                   {"p", "w", "theta", "beta1", "beta2", "perturb"});
    InitialSpec s;
    s.p = get_number(ini, "initial", "p", 0.0);
    if (ini.contains("w") && ini.contains("theta"))
        throw ConfigError("config: give either 'initial.w' or 'initial.theta', not both");
    if (ini.contains("theta")) {
        const double theta = get_number(ini, "initial", "theta", 1.0);
        if (!(theta > 0.0)) throw ConfigError("config: 'initial.theta' must be positive");
        s.w = std::log(theta);
    } else {
        s.w = get_number(ini, "initial", "w", 0.0);
    }
    s.beta1 = get_number(ini, "initial", "beta1", 0.5);
    s.beta2 = get_number(ini, "initial", "beta2", 0.0);
    if (ini.contains("perturb")) {
        if (!ini.at("perturb").is_array())
            throw ConfigError("config: 'initial.perturb' must be an array");
        for (const auto& p : ini.at("perturb")) {
            reject_unknown(p, "section 'initial.perturb[]'",
                           {"field", "amplitude", "kx", "ky"});
            InitialSpec::Perturb pt;
            pt.field = get_string(p, "initial.perturb[]", "field", "");
            if (pt.field != "p" && pt.field != "w" && pt.field != "beta1" &&
                pt.field != "beta2")
                throw ConfigError(
                    "config: 'initial.perturb[].field' must be p, w, beta1 or beta2");
            pt.amplitude = get_number(p, "initial.perturb[]", "amplitude", 0.0);
            pt.kx = get_int(p, "initial.perturb[]", "kx", 1);
            pt.ky = get_int(p, "initial.perturb[]", "ky", 0);
            s.perturbs.push_back(pt);
        }
    }
    return s;
}

StepConfig parse_stepping(const json& st, StepConfig base, double* t_end) {
    reject_unknown(st, "section 'stepping'",
                   {"dt", "t_end", "picard_tol", "picard_max", "mode", "sigma", "lin_tol",
                    "log_theta_cap", "double_well", "double_well_strength",
                    "max_dt_halvings"});
    base.dt = get_number(st, "stepping", "dt", base.dt);
    base.picard_tol = get_number(st, "stepping", "picard_tol", base.picard_tol);
    base.picard_max = get_int(st, "stepping", "picard_max", base.picard_max);
    const std::string mode = get_string(
        st, "stepping", "mode",
        base.mode == ConstraintMode::Yosida ? "yosida" : "projection");
    if (mode == "yosida")
        base.mode = ConstraintMode::Yosida;
    else if (mode == "projection")
        base.mode = ConstraintMode::ExactProjection;
    else
        throw ConfigError("config: 'stepping.mode' must be yosida or projection");
    base.sigma = get_number(st, "stepping", "sigma", base.sigma);
    base.lin_tol = get_number(st, "stepping", "lin_tol", base.lin_tol);
    base.log_theta_cap = get_number(st, "stepping", "log_theta_cap", base.log_theta_cap);
    base.double_well = get_bool(st, "stepping", "double_well", base.double_well);
    base.double_well_strength =
        get_number(st, "stepping", "double_well_strength", base.double_well_strength);
    base.max_dt_halvings = get_int(st, "stepping", "max_dt_halvings", base.max_dt_halvings);
    if (st.contains("t_end")) *t_end = get_number(st, "stepping", "t_end", *t_end);
    try {
        base.validate();
    } catch (const ParameterError& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    return base;
}

OutputSpec parse_output(const json& o, OutputSpec base) {
    reject_unknown(o, "section 'output'", {"dir", "snapshot_every"});
    base.dir = get_string(o, "output", "dir", base.dir);
    base.snapshot_every = get_int(o, "output", "snapshot_every", base.snapshot_every);
    if (base.snapshot_every < 0)
        throw ConfigError("config: 'output.snapshot_every' must be nonnegative");
    return base;
}

}  // namespace

RunConfig parse_config(const json& j) {
    if (!j.is_object()) throw ConfigError("config: top level must be an object");
    reject_unknown(j, "the top level",
                   {"scenario", "material", "grid", "bc", "sources", "initial",
                    "stepping", "output"});
    RunConfig c;

    if (j.contains("scenario")) {
        if (!j.at("scenario").is_string())
            throw ConfigError("config: 'scenario' must be a string");
        c.scenario = j.at("scenario").get<std::string>();
        const auto names = scenario_names();
        if (std::find(names.begin(), names.end(), *c.scenario) == names.end())
            throw ConfigError("config: unknown scenario '" + *c.scenario + "'");
        for (const char* banned : {"material", "grid", "bc", "sources", "initial"})
            if (j.contains(banned))
                throw ConfigError(std::string("config: section '") + banned +
                                  "' cannot be combined with a scenario preset");
        if (j.contains("stepping")) {
            c.stepping_overlay = j.at("stepping");
            double ignored = 0.0;
            parse_stepping(c.stepping_overlay, StepConfig{}, &ignored);  // validate keys
        }
        if (j.contains("output")) c.output = parse_output(j.at("output"), OutputSpec{});
        return c;
    }

    const json& ini = require_section(j, "initial");
    c.initial = parse_initial(ini);
    c.material = parse_material(require_section(j, "material"), c.initial.beta1,
                                c.initial.beta2);
    parse_grid(require_section(j, "grid"), c);
    if (j.contains("bc")) parse_bc(j.at("bc"), c.bc);
    if (j.contains("sources")) {
        const json& s = j.at("sources");
        reject_unknown(s, "section 'sources'", {"R", "Pi"});
        if (s.contains("R")) c.source_R = parse_series(s.at("R"), "sources.R");
        if (s.contains("Pi")) c.source_Pi = parse_series(s.at("Pi"), "sources.Pi");
    }
    c.t_end = 1.0;
    const json& st = require_section(j, "stepping");
    if (!st.contains("t_end"))
        throw ConfigError("config: 'stepping.t_end' is required");
    c.step = parse_stepping(st, StepConfig{}, &c.t_end);
    if (!(c.t_end >= 0.0)) throw ConfigError("config: 'stepping.t_end' must be >= 0");
    if (j.contains("output")) c.output = parse_output(j.at("output"), OutputSpec{});

    // Admissibility of the uniform initial fractions; perturbations are
    // checked cellwise in build_problem.
    if (!in_triangle({c.initial.beta1, c.initial.beta2}))
        throw ConfigError(
            "config: initial fractions must lie in the admissible set K "
            "(beta1 >= 0, beta2 >= 0, beta1 + beta2 <= 1)");
    return c;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot open '" + path + "'");
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config: JSON parse error: ") + e.what());
    }
    return parse_config(j);
}

nlohmann::json normalized_json(const RunConfig& c) {
    json j;
    if (c.scenario) {
        j["scenario"] = *c.scenario;
        if (!c.stepping_overlay.is_null() && !c.stepping_overlay.empty())
            j["stepping"] = c.stepping_overlay;
        j["output"] = {{"dir", c.output.dir}, {"snapshot_every", c.output.snapshot_every}};
        return j;
    }
    j["material"] = {{"rho1", c.material.rho1}, {"rho2", c.material.rho2},
                     {"k", c.material.k},       {"m", c.material.m},
                     {"c0", c.material.c0},     {"lambda", c.material.lambda},
                     {"ell", c.material.ell},   {"theta_c", c.material.theta_c},
                     {"mu", c.material.mu},     {"nu", c.material.nu}};
    j["grid"] = {{"dim", c.grid_dim}, {"n", c.grid_n}, {"extent", c.grid_extent}};
    auto bc_kind = [&]() -> std::string {
        switch (c.bc.pressure_kind) {
            case PressureBCKind::Watertight: return "watertight";
            case PressureBCKind::Robin: return "robin";
            case PressureBCKind::Dirichlet: return "dirichlet";
            case PressureBCKind::SemiPermeable: return "semi_permeable";
        }
        return "watertight";
    };
    j["bc"] = {{"pressure",
                {{"kind", bc_kind()}, {"alpha_p", c.bc.alpha_p}, {"p_ext", c.bc.p_ext}}},
               {"temperature",
                {{"kind", c.bc.temperature_kind == TemperatureBCKind::RobinW
                              ? "robin_w"
                              : "robin_theta"},
                 {"alpha_theta", c.bc.alpha_theta},
                 {"theta_ext", c.bc.theta_ext}}}};
    auto series_json = [](const TimeSeries& ts) {
        switch (ts.kind) {
            case TimeSeries::Kind::Constant:
                return json{{"kind", "constant"}, {"value", ts.value}};
            case TimeSeries::Kind::Pulse:
                return json{{"kind", "pulse"}, {"value", ts.value}, {"t_end", ts.t_off}};
            case TimeSeries::Kind::Table:
                return json{{"kind", "table"}, {"times", ts.times}, {"values", ts.values}};
        }
        return json{};
    };
    j["sources"] = {{"R", series_json(c.source_R)}, {"Pi", series_json(c.source_Pi)}};
    json ini{{"p", c.initial.p},
             {"w", c.initial.w},
             {"beta1", c.initial.beta1},
             {"beta2", c.initial.beta2}};
    if (!c.initial.perturbs.empty()) {
        json arr = json::array();
        for (const auto& p : c.initial.perturbs)
            arr.push_back({{"field", p.field},
                           {"amplitude", p.amplitude},
                           {"kx", p.kx},
                           {"ky", p.ky}});
        ini["perturb"] = arr;
    }
    j["initial"] = ini;
    j["stepping"] = {
        {"dt", c.step.dt},
        {"t_end", c.t_end},
        {"picard_tol", c.step.picard_tol},
        {"picard_max", c.step.picard_max},
        {"mode", c.step.mode == ConstraintMode::Yosida ? "yosida" : "projection"},
        {"sigma", c.step.sigma},
        {"lin_tol", c.step.lin_tol},
        {"log_theta_cap", c.step.log_theta_cap},
        {"double_well", c.step.double_well},
        {"double_well_strength", c.step.double_well_strength},
        {"max_dt_halvings", c.step.max_dt_halvings}};
    j["output"] = {{"dir", c.output.dir}, {"snapshot_every", c.output.snapshot_every}};
    return j;
}

Problem build_problem(const RunConfig& c) {
    Problem pb;
    if (c.scenario) {
        ScenarioSetup setup = make_scenario(*c.scenario);
        pb.params = setup.params;
        pb.grid = setup.grid;
        pb.bc = setup.bc;
        pb.sources = setup.sources;
        pb.step = setup.step;
        pb.initial = setup.initial;
        pb.t_end = setup.t_end;
        pb.scenario_name = setup.name;
        if (!c.stepping_overlay.is_null() && !c.stepping_overlay.empty())
            pb.step = parse_stepping(c.stepping_overlay, pb.step, &pb.t_end);
        pb.output = c.output;
        return pb;
    }

    pb.params = c.material;
    pb.grid = c.grid_dim == 1
                  ? Grid::make_1d(c.grid_n[0], c.grid_extent[0])
                  : Grid::make_2d(c.grid_n[0], c.grid_n[1], c.grid_extent[0],
                                  c.grid_extent[1]);
    pb.bc = c.bc;
    const TimeSeries r = c.source_R, pi = c.source_Pi;
    pb.sources.R = [r](double, double, double t) { return r.eval(t); };
    pb.sources.Pi = [pi](double, double, double t) { return pi.eval(t); };
    pb.step = c.step;
    pb.t_end = c.t_end;
    pb.output = c.output;

    pb.initial = State::uniform(pb.grid, c.initial.p, c.initial.w, c.initial.beta1,
                                c.initial.beta2);
    for (const auto& pt : c.initial.perturbs) {
        Field* f = pt.field == "p" ? &pb.initial.p
                   : pt.field == "w" ? &pb.initial.w
                   : pt.field == "beta1" ? &pb.initial.beta1
                                         : &pb.initial.beta2;
        for (int j = 0; j < pb.grid.ny; ++j)
            for (int i = 0; i < pb.grid.nx; ++i) {
                double v = pt.amplitude *
                           std::cos(M_PI * pt.kx * pb.grid.x_center(i) / pb.grid.extent_x);
                if (pb.grid.dim == 2)
                    v *= std::cos(M_PI * pt.ky * pb.grid.y_center(j) / pb.grid.extent_y);
                (*f)[pb.grid.idx(i, j)] += v;
            }
    }
    for (int cidx = 0; cidx < pb.grid.size(); ++cidx)
        if (!in_triangle({pb.initial.beta1[cidx], pb.initial.beta2[cidx]}))
            throw ConfigError(
                "config: perturbed initial fractions leave the admissible set K");
    return pb;
}

}  // namespace cryoflow
