#include <cmath>
#include <map>
#include <numbers>

#include <fmt/format.h>

#include "pilotwave/scenario.hpp"

namespace pilotwave {

using nlohmann::json;

namespace {

enum class Type { number, count, text, flag };
enum class Bound { none, positive, nonnegative, open_unit, at_least_one, grid_points };

struct Field {
    std::string key;
    Type type;
    json def;
    Bound bound = Bound::none;
    std::vector<std::string> choices = {};
};

using Schema = std::vector<Field>;

const std::map<ScenarioKind, Schema>& schemas() {
    static const std::map<ScenarioKind, Schema> table = {
        {ScenarioKind::evolve,
         {{"n_points", Type::count, 512, Bound::grid_points},
          {"x_min", Type::number, -10.0},
          {"x_max", Type::number, 10.0},
          {"boundary", Type::text, "periodic", Bound::none, {"periodic", "reflecting"}},
          {"mass", Type::number, 1.0, Bound::positive},
          {"hbar", Type::number, 1.0, Bound::positive},
          {"initial", Type::text, "ho_ground", Bound::none, {"gaussian", "ho_ground"}},
          {"x0", Type::number, 0.0},
          {"sigma", Type::number, 1.0, Bound::positive},
          {"k0", Type::number, 0.0},
          {"potential", Type::text, "harmonic", Bound::none, {"free", "harmonic"}},
          {"omega", Type::number, 1.0, Bound::positive},
          {"t_end", Type::number, 1.0, Bound::positive},
          {"dt", Type::number, 0.0, Bound::nonnegative},
          {"snapshot_dt", Type::number, 0.25, Bound::positive}}},
        {ScenarioKind::trajectories,
         {{"n_points", Type::count, 1024, Bound::grid_points},
          {"x_min", Type::number, -20.0},
          {"x_max", Type::number, 20.0},
          {"boundary", Type::text, "periodic", Bound::none, {"periodic", "reflecting"}},
          {"mass", Type::number, 1.0, Bound::positive},
          {"hbar", Type::number, 1.0, Bound::positive},
          {"x0", Type::number, 0.0},
          {"sigma", Type::number, 1.0, Bound::positive},
          {"k0", Type::number, 0.0},
          {"potential", Type::text, "free", Bound::none, {"free", "harmonic"}},
          {"omega", Type::number, 1.0, Bound::positive},
          {"t_end", Type::number, 2.0, Bound::positive},
          {"dt", Type::number, 0.0, Bound::nonnegative},
          {"snapshot_dt", Type::number, 0.01, Bound::positive},
          {"m", Type::count, 10000, Bound::at_least_one},
          {"probes", Type::count, 5, Bound::at_least_one},
          {"alpha", Type::number, 0.01, Bound::open_unit},
          {"node_eps", Type::number, 0.0, Bound::nonnegative},
          {"export_trajectories", Type::count, 200}}},
        {ScenarioKind::measure,
         {{"n_points", Type::count, 1024, Bound::grid_points},
          {"y_min", Type::number, -20.0},
          {"y_max", Type::number, 20.0},
          {"weight1", Type::number, 0.3, Bound::open_unit},
          {"pointer_sigma", Type::number, 1.0, Bound::positive},
          {"coupling", Type::number, 1.0, Bound::positive},
          {"pointer_mass", Type::number, 100.0, Bound::positive},
          {"hbar", Type::number, 1.0, Bound::positive},
          {"t_end", Type::number, 8.0, Bound::positive},
          {"snapshot_dt", Type::number, 0.05, Bound::positive},
          {"m", Type::count, 10000, Bound::at_least_one},
          {"collapse_eps", Type::number, 1e-6, Bound::open_unit},
          {"irrelevance_overlap", Type::number, 1e-8, Bound::open_unit},
          {"irrelevance_tol", Type::number, 1e-6, Bound::positive},
          {"branch_snapshots", Type::count, 5, Bound::at_least_one}}},
        {ScenarioKind::dirac,
         {{"n_points", Type::count, 1024, Bound::grid_points},
          {"x_min", Type::number, -40.0},
          {"x_max", Type::number, 40.0},
          {"mass", Type::number, 1.0, Bound::positive},
          {"c", Type::number, 1.0, Bound::positive},
          {"x0", Type::number, 0.0},
          {"sigma", Type::number, 2.0, Bound::positive},
          {"k0", Type::number, 1.0},
          {"t_end", Type::number, 10.0, Bound::positive},
          {"dt", Type::number, 0.0, Bound::nonnegative},
          {"snapshot_dt", Type::number, 0.05, Bound::positive},
          {"m", Type::count, 10000, Bound::at_least_one},
          {"probes", Type::count, 5, Bound::at_least_one},
          {"alpha", Type::number, 0.01, Bound::open_unit},
          {"random_fields", Type::count, 1000},
          {"export_trajectories", Type::count, 200}}},
        {ScenarioKind::field,
         {{"n_sites", Type::count, 16, Bound::at_least_one},
          {"dx", Type::number, 1.0, Bound::positive},
          {"mass_param", Type::number, 1.0, Bound::nonnegative},
          {"state", Type::text, "coherent", Bound::none, {"ground", "coherent", "squeezed"}},
          {"mode", Type::count, 1},
          {"amplitude_re", Type::number, 2.0},
          {"amplitude_im", Type::number, 0.0},
          {"squeeze", Type::number, 2.0, Bound::positive},
          {"t_end", Type::number, 10.0, Bound::positive},
          {"dt", Type::number, 0.01, Bound::positive},
          {"m", Type::count, 2000, Bound::at_least_one},
          {"probes", Type::count, 5, Bound::at_least_one},
          {"alpha", Type::number, 0.01, Bound::open_unit},
          {"record_every", Type::count, 10, Bound::at_least_one},
          {"tracking_tol", Type::number, 1e-6, Bound::positive}}},
        {ScenarioKind::belljump,
         {{"model", Type::text, "two_level", Bound::none, {"two_level", "fermion_chain", "file"}},
          {"hamiltonian_file", Type::text, ""},
          {"m", Type::count, 10000, Bound::at_least_one},
          {"t_end", Type::number, 3.0, Bound::positive},
          {"dt_max", Type::number, 0.01, Bound::positive},
          {"probes", Type::count, 10, Bound::at_least_one},
          {"exact_samples", Type::count, 301, Bound::at_least_one},
          {"rate_floor", Type::number, 1e-12, Bound::open_unit}}},
        {ScenarioKind::relax,
         {{"n_points", Type::count, 512, Bound::grid_points},
          {"box_length", Type::number, std::numbers::pi, Bound::positive},
          {"n_modes", Type::count, 16, Bound::at_least_one},
          {"mass", Type::number, 1.0, Bound::positive},
          {"hbar", Type::number, 1.0, Bound::positive},
          {"t_end", Type::number, 2.0, Bound::positive},
          {"dt", Type::number, 2e-5, Bound::positive},
          {"snapshot_dt", Type::number, 1e-3, Bound::positive},
          {"m", Type::count, 10000, Bound::at_least_one},
          {"cells", Type::count, 16, Bound::at_least_one},
          {"record_every", Type::count, 10, Bound::at_least_one},
          {"export_trajectories", Type::count, 200}}},
    };
    return table;
}

std::string show(const json& v) { return v.dump(); }

void check_field(const Field& f, const json& v, const std::string& where, std::vector<std::string>& out) {
    const std::string name = where + "." + f.key;
    switch (f.type) {
    case Type::number:
        if (!v.is_number()) {
            out.push_back(name + ": expected a number, got " + show(v));
            return;
        }
        break;
    case Type::count:
        if (!v.is_number_integer() || (v.is_number_integer() && !v.is_number_unsigned() && v.get<std::int64_t>() < 0)) {
            out.push_back(name + ": expected a non-negative integer, got " + show(v));
            return;
        }
        break;
    case Type::text:
        if (!v.is_string()) {
            out.push_back(name + ": expected a string, got " + show(v));
            return;
        }
        if (!f.choices.empty() &&
            std::find(f.choices.begin(), f.choices.end(), v.get<std::string>()) == f.choices.end()) {
            std::string allowed;
            for (const auto& c : f.choices) allowed += (allowed.empty() ? "" : ", ") + c;
            out.push_back(name + ": must be one of {" + allowed + "}, got " + show(v));
        }
        return;
    case Type::flag:
        if (!v.is_boolean()) out.push_back(name + ": expected true or false, got " + show(v));
        return;
    }
    const double x = v.get<double>();
    if (!std::isfinite(x)) {
        out.push_back(name + ": must be finite");
        return;
    }
    switch (f.bound) {
    case Bound::none:
        break;
    case Bound::positive:
        if (!(x > 0.0)) out.push_back(name + ": must be > 0, got " + show(v));
        break;
    case Bound::nonnegative:
        if (!(x >= 0.0)) out.push_back(name + ": must be >= 0, got " + show(v));
        break;
    case Bound::open_unit:
        if (!(x > 0.0 && x < 1.0)) out.push_back(name + ": must lie in (0, 1), got " + show(v));
        break;
    case Bound::at_least_one:
        if (!(x >= 1.0)) out.push_back(name + ": must be >= 1, got " + show(v));
        break;
    case Bound::grid_points:
        if (!(x >= 8.0)) out.push_back(name + ": must be >= 8, got " + show(v));
        break;
    }
}

// True when total / step is an integer within round-off.
bool divides(double total, double step) {
    const double r = total / step;
    return std::abs(r - std::round(r)) <= 1e-9 * std::max(1.0, r) && std::round(r) >= 1.0;
}

// Physical-validity rules that involve several fields.
void check_physics(ScenarioKind kind, const json& p, std::vector<std::string>& out) {
    const std::string w = std::string(to_string(kind));
    auto num = [&](const char* k) { return p.at(k).get<double>(); };
    auto cnt = [&](const char* k) { return p.at(k).get<std::uint64_t>(); };
    auto grid_rules = [&](const char* lo, const char* hi) {
        if (!(num(hi) > num(lo))) out.push_back(fmt::format("{}.{}: must exceed {}.{}", w, hi, w, lo));
    };
    auto resolution = [&](double sigma, double dx, const char* key) {
        if (dx > 0.0 && sigma < 4.0 * dx)
            out.push_back(fmt::format("{}.{}: {} is below 4 dx = {} (grid too coarse)", w, key, sigma, 4.0 * dx));
    };
    auto step_divides = [&](const char* total, const char* step) {
        if (num(step) > 0.0 && !divides(num(total), num(step)))
            out.push_back(fmt::format("{}.{}: {} is not a whole number of {}.{} = {}", w, total, num(total), w, step,
                                      num(step)));
    };
    switch (kind) {
    case ScenarioKind::evolve:
    case ScenarioKind::trajectories: {
        grid_rules("x_min", "x_max");
        const double dx = (num("x_max") - num("x_min")) / static_cast<double>(cnt("n_points"));
        if (p.contains("initial") && p.at("initial") == "ho_ground") {
            const double width = std::sqrt(num("hbar") / (2.0 * num("mass") * num("omega")));
            resolution(width, dx, "omega");
        } else {
            resolution(num("sigma"), dx, "sigma");
        }
        step_divides("t_end", "snapshot_dt");
        if (num("dt") > 0.0) step_divides("snapshot_dt", "dt");
        if (kind == ScenarioKind::trajectories && divides(num("t_end"), num("snapshot_dt"))) {
            const double probe = num("t_end") / static_cast<double>(cnt("probes"));
            if (!divides(probe, 2.0 * num("snapshot_dt")))
                out.push_back(fmt::format("{}.probes: probe spacing {} must be a whole number of RK4 steps "
                                          "(2 snapshot_dt = {})",
                                          w, probe, 2.0 * num("snapshot_dt")));
        }
        break;
    }
    case ScenarioKind::measure: {
        grid_rules("y_min", "y_max");
        const double dy = (num("y_max") - num("y_min")) / static_cast<double>(cnt("n_points"));
        resolution(num("pointer_sigma"), dy, "pointer_sigma");
        step_divides("t_end", "snapshot_dt");
        break;
    }
    case ScenarioKind::dirac: {
        grid_rules("x_min", "x_max");
        const double dx = (num("x_max") - num("x_min")) / static_cast<double>(cnt("n_points"));
        resolution(num("sigma"), dx, "sigma");
        step_divides("t_end", "snapshot_dt");
        if (num("dt") > 0.0) {
            step_divides("snapshot_dt", "dt");
            if (num("c") * num("dt") > dx) out.push_back(fmt::format("{}.dt: violates c dt <= dx = {}", w, dx));
        }
        if (divides(num("t_end"), num("snapshot_dt"))) {
            const double probe = num("t_end") / static_cast<double>(cnt("probes"));
            if (!divides(probe, 2.0 * num("snapshot_dt")))
                out.push_back(fmt::format("{}.probes: probe spacing {} must be a whole number of RK4 steps "
                                          "(2 snapshot_dt = {})",
                                          w, probe, 2.0 * num("snapshot_dt")));
        }
        break;
    }
    case ScenarioKind::field: {
        if (cnt("mode") >= cnt("n_sites"))
            out.push_back(fmt::format("{}.mode: must be below n_sites = {}", w, cnt("n_sites")));
        step_divides("t_end", "dt");
        if (divides(num("t_end"), num("dt"))) {
            const auto steps = static_cast<std::uint64_t>(std::llround(num("t_end") / num("dt")));
            if (steps % cnt("probes") != 0)
                out.push_back(fmt::format("{}.probes: {} steps do not split into {} equal probe intervals", w, steps,
                                          cnt("probes")));
        }
        break;
    }
    case ScenarioKind::belljump:
        if (p.at("model") == "file" && p.at("hamiltonian_file").get<std::string>().empty())
            out.push_back(w + ".hamiltonian_file: required when model is \"file\"");
        if (cnt("exact_samples") < 2) out.push_back(w + ".exact_samples: must be >= 2");
        break;
    case ScenarioKind::relax: {
        step_divides("t_end", "snapshot_dt");
        step_divides("snapshot_dt", "dt");
        const double dx = num("box_length") / static_cast<double>(cnt("n_points"));
        if (cnt("cells") > 0 && num("box_length") / static_cast<double>(cnt("cells")) < 2.0 * dx)
            out.push_back(fmt::format("{}.cells: coarse cells narrower than 2 dx", w));
        const double shortest = 2.0 * num("box_length") / static_cast<double>(cnt("n_modes"));
        if (shortest < 8.0 * dx)
            out.push_back(fmt::format("{}.n_modes: highest mode wavelength {} is under-resolved (needs >= 8 dx)", w,
                                      shortest));
        break;
    }
    }
}

json fill_block(ScenarioKind kind, const json& block, std::vector<std::string>& out) {
    const std::string where(to_string(kind));
    const auto& schema = schemas().at(kind);
    json params = json::object();
    if (!block.is_object()) {
        out.push_back(where + ": scenario block must be an object");
        return params;
    }
    for (const auto& [key, value] : block.items()) {
        const bool known = std::any_of(schema.begin(), schema.end(), [&](const Field& f) { return f.key == key; });
        if (!known) out.push_back(where + "." + key + ": unknown key");
    }
    const std::size_t before = out.size();
    for (const auto& f : schema) {
        const auto it = block.find(f.key);
        const json& v = it == block.end() ? f.def : *it;
        check_field(f, v, where, out);
        params[f.key] = v;
    }
    if (out.size() == before) check_physics(kind, params, out);
    return params;
}

}  // namespace

std::string_view to_string(ScenarioKind k) {
    switch (k) {
    case ScenarioKind::evolve: return "evolve";
    case ScenarioKind::trajectories: return "trajectories";
    case ScenarioKind::measure: return "measure";
    case ScenarioKind::dirac: return "dirac";
    case ScenarioKind::field: return "field";
    case ScenarioKind::belljump: return "belljump";
    case ScenarioKind::relax: return "relax";
    }
    return "unknown";
}

const std::vector<ScenarioKind>& all_scenarios() {
    static const std::vector<ScenarioKind> all = {ScenarioKind::evolve, ScenarioKind::trajectories,
                                                  ScenarioKind::measure, ScenarioKind::dirac,
                                                  ScenarioKind::field,  ScenarioKind::belljump,
                                                  ScenarioKind::relax};
    return all;
}

std::optional<ScenarioKind> scenario_from_string(std::string_view s) {
    for (auto k : all_scenarios())
        if (to_string(k) == s) return k;
    return std::nullopt;
}

namespace {
std::string join_violations(const std::vector<std::string>& v) {
    std::string out = "invalid configuration:";
    for (const auto& s : v) out += "\n  " + s;
    return out;
}
}  // namespace

ConfigError::ConfigError(std::vector<std::string> violations)
    : Error(join_violations(violations)), violations_(std::move(violations)) {}

json ScenarioConfig::echo() const {
    json out = json::object();
    out["scenario"] = std::string(to_string(scenario));
    out["seed"] = seed;
    out["output_dir"] = output_dir;
    out[std::string(to_string(scenario))] = params;
    return out;
}

ScenarioConfig default_config(ScenarioKind kind) {
    ScenarioConfig cfg;
    cfg.scenario = kind;
    std::vector<std::string> violations;
    cfg.params = fill_block(kind, json::object(), violations);
    if (!violations.empty()) throw ConfigError(violations);
    return cfg;
}

void validate(ScenarioConfig& cfg) {
    std::vector<std::string> violations;
    cfg.params = fill_block(cfg.scenario, cfg.params, violations);
    if (cfg.output_dir.empty()) violations.push_back("output_dir: must not be empty");
    if (!violations.empty()) throw ConfigError(violations);
}

ScenarioConfig parse_config(std::string_view text) {
    json doc;
    try {
        doc = json::parse(text.begin(), text.end());
    } catch (const json::parse_error& e) {
        throw ConfigError({fmt::format("syntax error at byte {}: {}", e.byte, e.what())});
    }
    std::vector<std::string> violations;
    if (!doc.is_object()) throw ConfigError({"top level must be a JSON object"});

    ScenarioConfig cfg;
    std::vector<ScenarioKind> blocks;
    for (const auto& [key, value] : doc.items()) {
        if (key == "scenario" || key == "seed" || key == "output_dir") continue;
        if (auto k = scenario_from_string(key)) blocks.push_back(*k);
        else violations.push_back(key + ": unknown key");
    }
    std::optional<ScenarioKind> named;
    if (auto it = doc.find("scenario"); it != doc.end()) {
        if (!it->is_string()) violations.push_back("scenario: expected a string, got " + it->dump());
        else if (!(named = scenario_from_string(it->get<std::string>())))
            violations.push_back("scenario: unknown scenario " + it->dump());
    }
    if (blocks.size() > 1) {
        std::string found;
        for (auto k : blocks) found += (found.empty() ? "" : ", ") + std::string(to_string(k));
        violations.push_back("exactly one scenario block is allowed, found: " + found);
    } else if (blocks.size() == 1 && named && *named != blocks.front()) {
        violations.push_back(fmt::format("scenario: \"{}\" does not match the \"{}\" block", to_string(*named),
                                         to_string(blocks.front())));
    } else if (blocks.empty() && !named && !doc.contains("scenario")) {
        violations.push_back("exactly one scenario must be given (a \"scenario\" key or one scenario block)");
    }
    if (auto it = doc.find("seed"); it != doc.end()) {
        if (!it->is_number_unsigned()) violations.push_back("seed: expected an unsigned 64-bit integer, got " + it->dump());
        else cfg.seed = it->get<std::uint64_t>();
    }
    if (auto it = doc.find("output_dir"); it != doc.end()) {
        if (!it->is_string() || it->get<std::string>().empty())
            violations.push_back("output_dir: expected a non-empty string, got " + it->dump());
        else cfg.output_dir = it->get<std::string>();
    }
    const auto kind = blocks.size() == 1 ? std::optional(blocks.front()) : named;
    if (kind && blocks.size() <= 1) {
        cfg.scenario = *kind;
        const auto it = doc.find(std::string(to_string(*kind)));
        cfg.params = fill_block(*kind, it == doc.end() ? json::object() : *it, violations);
    }
    if (!violations.empty()) throw ConfigError(violations);
    return cfg;
}

}  // namespace pilotwave
