#include <cstdlib>
#include <iostream>
#include <optional>

#include <CLI11.hpp>
#include <omp.h>

#include "pilotwave/io.hpp"
#include "pilotwave/scenario.hpp"

namespace pw = pilotwave;

namespace {

struct Options {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::string out;
    int threads = 0;
};

void set_threads(int requested) {
    int n = requested;
    if (n <= 0) {
        if (const char* env = std::getenv("PILOTWAVE_THREADS")) n = std::atoi(env);
    }
    if (n > 0) omp_set_num_threads(n);
}

void report(const pw::RunResult& r) {
    for (const auto& c : r.checks)
        std::cout << (c.pass ? "PASS " : "FAIL ") << c.name << "  value=" << pw::io::format_number(c.value)
                  << " threshold=" << pw::io::format_number(c.threshold)
                  << (c.detail.empty() ? "" : "  (" + c.detail + ")") << '\n';
    if (r.manifest.contains("error")) std::cerr << "error: " << r.manifest["error"]["message"].get<std::string>() << '\n';
    std::cout << "manifest: " << (r.output_dir / "manifest.json").string() << '\n';
}

int run(pw::ScenarioKind kind, const Options& opt) {
    pw::ScenarioConfig cfg;
    try {
        if (opt.config.empty()) {
            cfg = pw::default_config(kind);
        } else {
            cfg = pw::parse_config(pw::io::read_file(opt.config));
            if (cfg.scenario != kind)
                throw pw::ConfigError({"config describes scenario \"" + std::string(pw::to_string(cfg.scenario)) +
                                       "\" but the subcommand is \"" + std::string(pw::to_string(kind)) + "\""});
        }
        if (opt.seed) cfg.seed = *opt.seed;
        if (!opt.out.empty()) cfg.output_dir = opt.out;
        pw::validate(cfg);
    } catch (const pw::ConfigError& e) {
        std::cerr << e.what() << '\n';
        return 2;
    } catch (const pw::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    const auto result = pw::run_scenario(cfg);
    report(result);
    return result.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Pilot-wave numerical lab"};
    app.set_version_flag("--version", std::string(pw::tool_version));
    app.require_subcommand(1);
    Options opt;

    auto add_common = [&](CLI::App* sub, bool config) {
        if (config) sub->add_option("--config", opt.config, "scenario config (JSON)")->check(CLI::ExistingFile);
        sub->add_option("--seed", opt.seed, "master seed (overrides the config)");
        sub->add_option("--out", opt.out, "output directory (overrides the config)");
        sub->add_option("--threads", opt.threads, "OpenMP threads (default: PILOTWAVE_THREADS or all cores)")
            ->check(CLI::PositiveNumber);
    };
    std::vector<std::pair<CLI::App*, pw::ScenarioKind>> scenarios;
    for (auto kind : pw::all_scenarios()) {
        auto* sub = app.add_subcommand(std::string(pw::to_string(kind)), "run the " + std::string(pw::to_string(kind)) +
                                                                              " scenario");
        add_common(sub, true);
        scenarios.emplace_back(sub, kind);
    }
    auto* selftest = app.add_subcommand("selftest", "run every scenario at reduced size");
    add_common(selftest, false);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 2;
    }
    set_threads(opt.threads);

    try {
        for (auto [sub, kind] : scenarios)
            if (sub->parsed()) return run(kind, opt);
        const auto r = pw::run_selftest(opt.out.empty() ? "selftest_out" : opt.out, opt.seed.value_or(1));
        for (const auto& c : r.checks) std::cout << (c.pass ? "PASS " : "FAIL ") << c.name << '\n';
        return r.exit_code;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    }
}
