#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "pilotwave/errors.hpp"
#include "pilotwave/io.hpp"

namespace pilotwave {

inline constexpr std::string_view tool_version = "0.1.0";

enum class ScenarioKind { evolve, trajectories, measure, dirac, field, belljump, relax };

std::string_view to_string(ScenarioKind k);
std::optional<ScenarioKind> scenario_from_string(std::string_view s);
const std::vector<ScenarioKind>& all_scenarios();

/// Invalid configuration. what() joins every violation; violations() lists them.
class ConfigError : public Error {
public:
    explicit ConfigError(std::vector<std::string> violations);
    const std::vector<std::string>& violations() const noexcept { return violations_; }

private:
    std::vector<std::string> violations_;
};

/// Validated scenario configuration. `params` holds the scenario block with
/// every default filled in.
struct ScenarioConfig {
    ScenarioKind scenario = ScenarioKind::trajectories;
    std::uint64_t seed = 1;
    std::string output_dir = "out";
    nlohmann::json params = nlohmann::json::object();

    /// Full normalised config, as written to the manifest.
    nlohmann::json echo() const;
};

/// Parses and validates JSON config text:
///   {"scenario": "...", "seed": n, "output_dir": "...", "<scenario>": {...}}
/// "scenario" may be omitted when exactly one block is present. Unknown keys,
/// type errors and physically invalid values are all collected before throwing.
ScenarioConfig parse_config(std::string_view text);

/// Config with all defaults for one scenario.
ScenarioConfig default_config(ScenarioKind kind);

/// Re-validates after programmatic edits (e.g. command-line overrides).
void validate(ScenarioConfig& cfg);

struct CheckResult {
    std::string name;
    bool pass = false;
    double value = 0.0;
    double threshold = 0.0;
    std::string detail;
};

struct RunResult {
    int exit_code = 0;  ///< 0 all checks pass, 1 a check failed, 2 config error, 3 runtime error
    std::vector<CheckResult> checks;
    std::vector<io::FileRecord> files;
    nlohmann::json manifest;
    std::filesystem::path output_dir;
};

/// Runs one scenario, writes its CSV/JSON outputs and manifest.json into
/// cfg.output_dir. Module errors are caught and reported in the manifest.
RunResult run_scenario(const ScenarioConfig& cfg);

/// Runs every scenario at reduced size into subdirectories of `output_dir`.
RunResult run_selftest(const std::filesystem::path& output_dir, std::uint64_t seed);

}  // namespace pilotwave
