#include "impulseflow/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "impulseflow/io.hpp"
#include "impulseflow/measures.hpp"
#include "impulseflow/quotient.hpp"

namespace impulseflow {

namespace {

using json = nlohmann::json;
namespace fs = std::filesystem;

constexpr std::pair<ExperimentKind, std::string_view> kNames[] = {
    {ExperimentKind::Simulate, "simulate"},
    {ExperimentKind::CheckHypotheses, "check-hypotheses"},
    {ExperimentKind::Measure, "measure"},
    {ExperimentKind::Entropy, "entropy"},
    {ExperimentKind::Quotient, "quotient"},
};

// Config section holding the parameters of each experiment.
std::string section_name(ExperimentKind k) {
    return k == ExperimentKind::CheckHypotheses ? "check_hypotheses" : std::string(experiment_name(k));
}

// Typed access with the dotted path in every message.
class Reader {
public:
    Reader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) throw ConfigError(path_.empty() ? "config" : path_, "expected an object");
    }

    void allow_only(std::initializer_list<std::string_view> keys) const {
        for (const auto& [k, v] : j_.items()) {
            if (std::find(keys.begin(), keys.end(), k) == keys.end()) throw ConfigError(field(k), "unknown key");
        }
    }

    bool has(const std::string& k) const { return j_.contains(k); }
    const json& raw(const std::string& k) const { return j_.at(k); }
    std::string field(std::string_view k) const { return path_.empty() ? std::string(k) : path_ + "." + std::string(k); }

    double number(const std::string& k) const {
        const json& v = raw(k);
        if (!v.is_number()) throw ConfigError(field(k), "expected a number");
        const double d = v.get<double>();
        if (!std::isfinite(d)) throw ConfigError(field(k), "must be finite");
        return d;
    }

    std::uint64_t count(const std::string& k) const {
        const json& v = raw(k);
        if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0)) {
            throw ConfigError(field(k), "expected a nonnegative integer");
        }
        return v.get<std::uint64_t>();
    }

    std::string text(const std::string& k) const {
        const json& v = raw(k);
        if (!v.is_string()) throw ConfigError(field(k), "expected a string");
        return v.get<std::string>();
    }

    std::vector<double> numbers(const std::string& k) const {
        const json& v = raw(k);
        if (v.is_number()) return {number(k)};
        if (!v.is_array()) throw ConfigError(field(k), "expected a number or a list of numbers");
        std::vector<double> out;
        for (const auto& e : v) {
            if (!e.is_number() || !std::isfinite(e.get<double>())) {
                throw ConfigError(field(k), "expected finite numbers");
            }
            out.push_back(e.get<double>());
        }
        return out;
    }

    StateVector state(const std::string& k) const {
        const auto v = numbers(k);
        if (v.empty() || v.size() > kMaxDim) throw ConfigError(field(k), "expected 1 to 3 coordinates");
        StateVector s(v.size());
        std::copy(v.begin(), v.end(), s.begin());
        return s;
    }

    Reader sub(const std::string& k) const { return Reader(raw(k), field(k)); }

private:
    const json& j_;
    std::string path_;
};

void read_integrator(const Reader& r, IntegratorConfig& c) {
    r.allow_only({"abs_tol", "rel_tol", "max_step", "min_step"});
    if (r.has("abs_tol")) c.abs_tol = r.number("abs_tol");
    if (r.has("rel_tol")) c.rel_tol = r.number("rel_tol");
    if (r.has("max_step")) c.max_step = r.number("max_step");
    if (r.has("min_step")) c.min_step = r.number("min_step");
}

void read_section(const Reader& r, ExperimentConfig& cfg) {
    switch (cfg.experiment) {
        case ExperimentKind::Simulate: {
            auto& p = cfg.simulate;
            r.allow_only({"initial_state", "horizon", "dt_sample"});
            if (r.has("initial_state")) p.initial_state = r.state("initial_state");
            if (r.has("horizon")) p.horizon = r.number("horizon");
            if (r.has("dt_sample")) p.dt_sample = r.number("dt_sample");
            break;
        }
        case ExperimentKind::Measure: {
            auto& p = cfg.measure;
            r.allow_only({"initial_state", "horizon", "dt_sample", "burn_in", "grid", "t_shift"});
            if (r.has("initial_state")) p.initial_state = r.state("initial_state");
            if (r.has("horizon")) p.horizon = r.number("horizon");
            if (r.has("dt_sample")) p.dt_sample = r.number("dt_sample");
            if (r.has("burn_in")) p.burn_in = r.number("burn_in");
            if (r.has("grid")) p.grid = r.text("grid");
            if (r.has("t_shift")) p.t_shift = r.number("t_shift");
            break;
        }
        case ExperimentKind::CheckHypotheses: {
            auto& p = cfg.hypotheses;
            r.allow_only({"n_samples", "margin_tol", "approach_dirs", "scales", "xi"});
            if (r.has("n_samples")) p.n_samples = r.count("n_samples");
            if (r.has("margin_tol")) p.margin_tol = r.number("margin_tol");
            if (r.has("approach_dirs")) p.approach_dirs = r.count("approach_dirs");
            if (r.has("scales")) p.scales = r.numbers("scales");
            if (r.has("xi")) p.xi = r.number("xi");
            break;
        }
        case ExperimentKind::Entropy: {
            auto& p = cfg.entropy;
            r.allow_only({"T_list", "eps_list", "delta_list", "candidate_count", "dt_check", "saturation_divisor"});
            if (r.has("T_list")) p.T_list = r.numbers("T_list");
            if (r.has("eps_list")) p.eps_list = r.numbers("eps_list");
            if (r.has("delta_list")) p.delta_list = r.numbers("delta_list");
            if (r.has("candidate_count")) p.candidate_count = r.count("candidate_count");
            if (r.has("dt_check")) p.dt_check = r.number("dt_check");
            if (r.has("saturation_divisor")) p.saturation_divisor = r.count("saturation_divisor");
            break;
        }
        case ExperimentKind::Quotient: {
            auto& p = cfg.quotient;
            r.allow_only({"points_csv", "sample_count"});
            if (r.has("points_csv")) p.points_csv = r.text("points_csv");
            if (r.has("sample_count")) p.sample_count = r.count("sample_count");
            break;
        }
    }
}

std::string default_grid(std::string_view system) {
    if (system == "prey_predator") return "0:2:20,0:2:20,0:2:20";
    if (system == "doubling_suspension") return "-1:1:20,-1:1:20,0:1:10";
    return "-2:2:40,-2:2:40";
}

Overrides resolved_params(const ExperimentConfig& cfg) {
    for (const auto& f : fixture_catalog()) {
        if (f.name != cfg.system) continue;
        Overrides out = f.defaults;
        for (const auto& [k, v] : cfg.overrides) out[k] = v;
        return out;
    }
    return cfg.overrides;
}

json state_json(const StateVector& x) {
    json a = json::array();
    for (double v : x) a.push_back(v);
    return a;
}

// Fills every field whose default depends on the system.
ExperimentConfig resolve(const ExperimentConfig& cfg, const SystemSpec& sys) {
    ExperimentConfig r = cfg;
    if (!r.simulate.initial_state) r.simulate.initial_state = default_initial_state(sys);
    if (!r.measure.initial_state) r.measure.initial_state = default_initial_state(sys);
    if (!r.measure.burn_in) r.measure.burn_in = 0.1 * r.measure.horizon;
    if (r.measure.grid.empty()) r.measure.grid = default_grid(r.system);
    if (r.entropy.dt_check == 0.0 && !r.entropy.delta_list.empty()) {
        r.entropy.dt_check = r.entropy.delta_list.back() / 2.0;
    }
    return r;
}

json config_json(const ExperimentConfig& c) {
    json j;
    j["schema_version"] = c.schema_version;
    j["experiment"] = experiment_name(c.experiment);
    json params = json::object();
    for (const auto& [k, v] : resolved_params(c)) params[k] = v;
    j["system"] = {{"name", c.system}, {"overrides", params}};
    j["seed"] = c.seed;
    j["integrator"] = {{"abs_tol", c.integrator.abs_tol},
                       {"rel_tol", c.integrator.rel_tol},
                       {"max_step", c.integrator.max_step},
                       {"min_step", c.integrator.min_step}};
    json s;
    switch (c.experiment) {
        case ExperimentKind::Simulate:
            s = {{"horizon", c.simulate.horizon}, {"dt_sample", c.simulate.dt_sample}};
            if (c.simulate.initial_state) s["initial_state"] = state_json(*c.simulate.initial_state);
            break;
        case ExperimentKind::Measure:
            s = {{"horizon", c.measure.horizon},
                 {"dt_sample", c.measure.dt_sample},
                 {"grid", c.measure.grid},
                 {"t_shift", c.measure.t_shift}};
            if (c.measure.initial_state) s["initial_state"] = state_json(*c.measure.initial_state);
            if (c.measure.burn_in) s["burn_in"] = *c.measure.burn_in;
            break;
        case ExperimentKind::CheckHypotheses:
            s = {{"n_samples", c.hypotheses.n_samples},
                 {"margin_tol", c.hypotheses.margin_tol},
                 {"approach_dirs", c.hypotheses.approach_dirs},
                 {"scales", c.hypotheses.scales},
                 {"xi", c.hypotheses.xi}};
            break;
        case ExperimentKind::Entropy:
            s = {{"T_list", c.entropy.T_list},
                 {"eps_list", c.entropy.eps_list},
                 {"delta_list", c.entropy.delta_list},
                 {"candidate_count", c.entropy.candidate_count},
                 {"dt_check", c.entropy.dt_check},
                 {"saturation_divisor", c.entropy.saturation_divisor}};
            break;
        case ExperimentKind::Quotient:
            s = {{"sample_count", c.quotient.sample_count}};
            // Only the file name, so the manifest does not depend on where the run happened.
            if (!c.quotient.points_csv.empty()) s["points_csv"] = c.quotient.points_csv.filename().string();
            break;
    }
    j[section_name(c.experiment)] = s;
    return j;
}

void require(bool ok, const std::string& field, const std::string& what) {
    if (!ok) throw ConfigError(field, what);
}

EntropyConfig entropy_config(const ExperimentConfig& c) {
    EntropyConfig e;
    e.T_list = c.entropy.T_list;
    e.eps_list = c.entropy.eps_list;
    e.delta_list = c.entropy.delta_list;
    e.candidate_count = c.entropy.candidate_count;
    e.dt_check = c.entropy.dt_check;
    e.seed = c.seed;
    e.workers = c.workers;
    e.saturation_divisor = c.entropy.saturation_divisor;
    return e;
}

json transversality_json(const TransversalityReport& t) {
    return {{"sampled_points", t.sampled_points}, {"min_abs_inner", t.min_abs_inner},
            {"sign_consistent", t.sign_consistent}, {"sign", t.sign},
            {"worst_point", state_json(t.worst_point)}, {"margin_tol", t.margin_tol},
            {"pass", t.pass}};
}

json hypotheses_json(const SystemSpec& sys, const HypothesesReport& h) {
    json table = json::array();
    for (const auto& row : h.continuity_table) {
        json r = {{"scale", row.scale}, {"escaped", row.escaped}};
        r["max_tau"] = std::isfinite(row.max_tau) ? json(row.max_tau) : json(nullptr);
        table.push_back(r);
    }
    return {{"system", sys.name},
            {"transversality_D", transversality_json(h.transversality_D)},
            {"transversality_ID", transversality_json(h.transversality_ID)},
            {"separation",
             {{"dist_D_ID", h.separation.dist_D_ID},
              {"xi_margin", h.separation.xi_margin},
              {"witness_D", state_json(h.separation.witness_D)},
              {"witness_ID", state_json(h.separation.witness_ID)},
              {"pass", h.separation.pass}}},
            {"continuity", {{"table", table}, {"pass", h.continuity_ok}}},
            {"pass", h.pass}};
}

std::string_view axiom_name(AxiomKind k) {
    switch (k) {
        case AxiomKind::Symmetry: return "symmetry";
        case AxiomKind::Identity: return "identity";
        case AxiomKind::Triangle: return "triangle";
    }
    return "unknown";
}

}  // namespace

std::string_view experiment_name(ExperimentKind k) {
    for (const auto& [kind, name] : kNames) {
        if (kind == k) return name;
    }
    return "unknown";
}

ExperimentKind experiment_from_name(std::string_view name) {
    for (const auto& [kind, n] : kNames) {
        if (n == name) return kind;
    }
    throw ConfigError("experiment", "unknown experiment '" + std::string(name) +
                                        "' (simulate, check-hypotheses, measure, entropy, quotient)");
}

ExperimentConfig default_config(ExperimentKind kind, std::string_view system) {
    ExperimentConfig c;
    c.experiment = kind;
    c.system = std::string(system);
    auto& e = c.entropy;
    if (system == "doubling_suspension") {
        e.T_list = {2, 3, 4, 5, 6, 7, 8, 9, 10};
        e.eps_list = {0.1};
        e.delta_list = {0.1};
        e.candidate_count = 4096;
    } else if (system == "annulus") {
        e.T_list = {10, 20, 30, 40, 50, 60};
        e.eps_list = {0.2, 0.1, 0.05};
        e.delta_list = {0.3};
        e.candidate_count = 4096;
    } else {
        e.T_list = {2, 4, 6, 8, 10};
        e.eps_list = {0.2, 0.1};
        e.delta_list = {0.1};
        e.candidate_count = 1024;
    }
    return c;
}

ExperimentConfig parse_config(std::string_view json_text, ExperimentKind kind, const fs::path& base_dir,
                              std::optional<std::string> system_override) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ConfigError("config", std::string("invalid JSON: ") + e.what());
    }
    const Reader top(j, "");
    top.allow_only({"schema_version", "system", "seed", "workers", "output_dir", "integrator", "simulate", "measure",
                    "check_hypotheses", "entropy", "quotient"});
    require(top.has("schema_version"), "schema_version", "missing");
    const auto version = top.count("schema_version");
    require(version == static_cast<std::uint64_t>(kSchemaVersion), "schema_version",
            "unsupported version " + std::to_string(version) + " (expected " + std::to_string(kSchemaVersion) + ")");

    std::string system = "annulus";
    Overrides overrides;
    if (top.has("system")) {
        const json& s = top.raw("system");
        if (s.is_string()) {
            system = s.get<std::string>();
        } else {
            const Reader sr = top.sub("system");
            sr.allow_only({"name", "overrides"});
            require(sr.has("name"), "system.name", "missing");
            system = sr.text("name");
            if (sr.has("overrides")) {
                const Reader o = sr.sub("overrides");
                for (const auto& [k, v] : sr.raw("overrides").items()) overrides[k] = o.numbers(k);
            }
        }
    }
    if (system_override) {
        if (*system_override != system) overrides.clear();
        system = *system_override;
    }

    ExperimentConfig cfg = default_config(kind, system);
    cfg.overrides = std::move(overrides);
    if (top.has("seed")) cfg.seed = top.count("seed");
    if (top.has("workers")) cfg.workers = static_cast<unsigned>(top.count("workers"));
    if (top.has("output_dir")) {
        const fs::path p = top.text("output_dir");
        cfg.output_dir = p.is_relative() && !base_dir.empty() ? base_dir / p : p;
    }
    if (top.has("integrator")) read_integrator(top.sub("integrator"), cfg.integrator);
    const std::string section = section_name(kind);
    if (top.has(section)) read_section(top.sub(section), cfg);
    if (!cfg.quotient.points_csv.empty() && cfg.quotient.points_csv.is_relative() && !base_dir.empty()) {
        cfg.quotient.points_csv = base_dir / cfg.quotient.points_csv;
    }
    return cfg;
}

ExperimentConfig load_config(const fs::path& path, ExperimentKind kind, std::optional<std::string> system_override) {
    std::ifstream is(path);
    if (!is) throw ConfigError("config", "cannot read " + path.string());
    std::stringstream ss;
    ss << is.rdbuf();
    return parse_config(ss.str(), kind, path.parent_path(), std::move(system_override));
}

void validate_config(const ExperimentConfig& cfg) {
    try {
        cfg.integrator.validate();
    } catch (const PreconditionError& e) {
        throw ConfigError("integrator", e.what());
    }
    const SystemSpec sys = [&] {
        try {
            return build_fixture(cfg.system, cfg.overrides, cfg.integrator);
        } catch (const PreconditionError& e) {
            throw ConfigError("system", e.what());
        }
    }();
    const auto r = resolve(cfg, sys);
    const std::string sec = section_name(cfg.experiment);
    auto check_state = [&](const StateVector& x, const std::string& field) {
        require(x.size() == sys.dimension(), field,
                "expected " + std::to_string(sys.dimension()) + " coordinates for " + sys.name);
        require(sys.admissible(x), field, "state " + to_string(x) + " is outside the admissible region");
    };
    switch (cfg.experiment) {
        case ExperimentKind::Simulate:
            check_state(*r.simulate.initial_state, sec + ".initial_state");
            require(r.simulate.horizon > 0.0, sec + ".horizon", "must be positive");
            require(r.simulate.dt_sample > 0.0, sec + ".dt_sample", "must be positive");
            break;
        case ExperimentKind::Measure: {
            const auto& m = r.measure;
            check_state(*m.initial_state, sec + ".initial_state");
            require(m.horizon > 0.0, sec + ".horizon", "must be positive");
            require(m.dt_sample > 0.0, sec + ".dt_sample", "must be positive");
            require(*m.burn_in >= 0.0 && *m.burn_in < m.horizon, sec + ".burn_in", "must lie in [0, horizon)");
            require(m.t_shift > 0.0 && m.t_shift < m.horizon / 10.0, sec + ".t_shift",
                    "must lie in (0, horizon/10)");
            require(*m.burn_in + m.t_shift < m.horizon, sec + ".t_shift", "burn_in + t_shift must be below horizon");
            try {
                const auto grid = parse_grid(m.grid);
                require(grid.dimension() == sys.dimension(), sec + ".grid",
                        "needs " + std::to_string(sys.dimension()) + " axes for " + sys.name);
            } catch (const ConfigError&) {
                throw;
            } catch (const PreconditionError& e) {
                throw ConfigError(sec + ".grid", e.what());
            }
            break;
        }
        case ExperimentKind::CheckHypotheses: {
            const auto& h = r.hypotheses;
            require(h.n_samples >= 1, sec + ".n_samples", "must be at least 1");
            require(h.margin_tol > 0.0, sec + ".margin_tol", "must be positive");
            require(h.approach_dirs >= 1, sec + ".approach_dirs", "must be at least 1");
            require(!h.scales.empty(), sec + ".scales", "must not be empty");
            for (double s : h.scales) require(s > 0.0, sec + ".scales", "must be positive");
            require(h.xi > 0.0, sec + ".xi", "must be positive");
            break;
        }
        case ExperimentKind::Entropy:
            try {
                validate_entropy_config(entropy_config(r));
            } catch (const PreconditionError& e) {
                const std::string what = e.what();
                const auto colon = what.find(':');
                throw ConfigError(sec + "." + what.substr(0, colon), what.substr(colon + 2));
            }
            break;
        case ExperimentKind::Quotient:
            if (r.quotient.points_csv.empty()) {
                require(r.quotient.sample_count >= 1, sec + ".sample_count", "must be at least 1");
            } else {
                require(fs::is_regular_file(r.quotient.points_csv), sec + ".points_csv",
                        "no such file: " + r.quotient.points_csv.string());
            }
            break;
    }
}

std::string resolved_config_json(const ExperimentConfig& cfg) {
    const SystemSpec sys = build_fixture(cfg.system, cfg.overrides, cfg.integrator);
    return config_json(resolve(cfg, sys)).dump(2);
}

RunResult run_experiment(const ExperimentConfig& input) {
    validate_config(input);
    const SystemSpec sys = build_fixture(input.system, input.overrides, input.integrator);
    const ExperimentConfig cfg = resolve(input, sys);

    OutputSet out(cfg.output_dir);
    json results;
    std::vector<std::string> names;
    auto emit = [&](const std::string& name, const std::function<void(std::ostream&)>& body) {
        out.write(name, body);
        names.push_back(name);
    };

    try {
        switch (cfg.experiment) {
            case ExperimentKind::Simulate: {
                const auto& p = cfg.simulate;
                const auto traj = impulsive_trajectory(sys, *p.initial_state, p.horizon, p.dt_sample);
                emit("trajectory.csv", [&](std::ostream& os) { write_trajectory_csv(os, traj); });
                emit("impulses.csv", [&](std::ostream& os) { write_impulses_csv(os, traj); });
                results = {{"impulse_count", traj.impulse_times.size()},
                           {"final_state", state_json(traj.samples.back().x)}};
                break;
            }
            case ExperimentKind::Measure: {
                const auto& p = cfg.measure;
                const auto traj = impulsive_trajectory(sys, *p.initial_state, p.horizon, p.dt_sample);
                const auto grid = parse_grid(p.grid);
                const auto mu = occupation_measure(traj, grid, *p.burn_in);
                const double disc = pushforward_discrepancy(sys, traj, grid, p.t_shift, *p.burn_in);
                emit("measure.csv", [&](std::ostream& os) { write_measure_csv(os, mu); });
                results = {{"escaped_mass", mu.escaped},
                           {"valid", mu.valid()},
                           {"pushforward_discrepancy", disc},
                           {"impulse_count", traj.impulse_times.size()}};
                break;
            }
            case ExperimentKind::CheckHypotheses: {
                const auto rep = check_hypotheses(sys, cfg.hypotheses);
                const json j = hypotheses_json(sys, rep);
                emit("hypotheses.json", [&](std::ostream& os) { os << j.dump(2) << '\n'; });
                results = {{"pass", rep.pass}};
                break;
            }
            case ExperimentKind::Entropy: {
                const auto est = entropy_estimate(sys, entropy_config(cfg));
                emit("entropy_table.csv", [&](std::ostream& os) { write_entropy_table_csv(os, est); });
                emit("entropy_rates.csv", [&](std::ostream& os) { write_entropy_rates_csv(os, est); });
                results = {{"h_tau_estimate", est.h_tau_estimate},
                           {"lower_bound_only", est.lower_bound_only},
                           {"exhausted", est.exhausted},
                           {"monotone_in_eps", est.monotone_in_eps},
                           {"eta", std::isfinite(est.eta) ? json(est.eta) : json(nullptr)},
                           {"candidate_count", est.candidate_count},
                           {"dt_check", est.dt_check}};
                break;
            }
            case ExperimentKind::Quotient: {
                std::vector<StateVector> points;
                if (cfg.quotient.points_csv.empty()) {
                    points = sample_admissible(sys, cfg.quotient.sample_count, cfg.seed);
                } else {
                    for (const auto& row : read_points_csv(cfg.quotient.points_csv)) {
                        if (row.size() != sys.dimension()) {
                            throw ConfigError("quotient.points_csv", "expected " + std::to_string(sys.dimension()) +
                                                                         " columns for " + sys.name);
                        }
                        StateVector x(row.size());
                        std::copy(row.begin(), row.end(), x.begin());
                        points.push_back(x);
                    }
                }
                const auto rep = metric_axiom_audit(sys, points, cfg.workers);
                emit("quotient_classes.csv", [&](std::ostream& os) { write_classes_csv(os, rep.classes); });
                emit("quotient_dmatrix.csv", [&](std::ostream& os) { write_dmatrix_csv(os, rep.dmatrix); });
                json witnesses = json::array();
                for (const auto& w : rep.witnesses) {
                    witnesses.push_back({{"kind", axiom_name(w.kind)}, {"i", w.i}, {"j", w.j}, {"k", w.k},
                                         {"lhs", w.lhs}, {"rhs", w.rhs}});
                }
                results = {{"points", rep.points},
                           {"symmetry_violations", rep.symmetry_violations},
                           {"identity_violations", rep.identity_violations},
                           {"triangle_violations", rep.triangle_violations},
                           {"witnesses", witnesses},
                           {"pass", rep.pass()}};
                break;
            }
        }
        json manifest = {{"artifact", "impulseflow"},
                         {"version", kVersion},
                         {"config", config_json(cfg)},
                         {"outputs", names},
                         {"results", results}};
        emit("manifest.json", [&](std::ostream& os) { os << manifest.dump(2) << '\n'; });
    } catch (...) {
        out.remove_all();
        throw;
    }
    RunResult res;
    res.files = out.written();
    res.summary_json = results.dump();
    return res;
}

}  // namespace impulseflow
