#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <iostream>

#include "quadsafe/errors.hpp"
#include "quadsafe/scenario_io.hpp"
#include "quadsafe/trace_export.hpp"
#include "quadsafe/verify/chain_oracle.hpp"

namespace {

using namespace quadsafe;

constexpr int kOk = 0;
constexpr int kInvalid = 1;
constexpr int kNonFinite = 2;

int runCommand(const std::string& ref, const std::string& out_dir, std::optional<double> dt,
               std::optional<long long> seed) {
    if (seed && *seed != 0) throw InvalidArgument("--seed: reserved for noise injection; must be 0 or absent");
    Scenario sc = resolve_scenario(ref);
    if (dt) {
        sc.dt = *dt;
        try {
            sc.validate();
        } catch (const InvalidArgument& e) {
            throw InvalidArgument(std::string("--dt: ") + e.what());
        }
    }
    const auto t0 = std::chrono::steady_clock::now();
    const SimulationResult result = run(sc);
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    export_trace(sc, result, out_dir, wall);

    const TraceSummary s = summarize(result.records, sc.dt);
    std::printf("%s: %zu steps, %zu infeasible, wall %.3f s -> %s\n", sc.name.c_str(), s.steps, s.infeasible_steps,
                wall, out_dir.c_str());
    if (result.aborted) {
        std::fprintf(stderr, "error: run aborted: %s\n", result.abort_message.c_str());
        return kNonFinite;
    }
    return kOk;
}

int presetsCommand(const std::string& show, bool commented) {
    if (show.empty()) {
        for (const auto& n : preset_names()) std::printf("%s\n", n.c_str());
        return kOk;
    }
    const Scenario sc = preset(show);
    if (commented) std::printf("# Scenario %s. Load with: quadsafe run <this file>\n", sc.name.c_str());
    std::fputs(emit_scenario(sc, commented).c_str(), stdout);
    return kOk;
}

int checkCommand(const std::string& ref) {
    const Scenario sc = resolve_scenario(ref);
    std::printf("%s: ok (%zu barriers, %zu steps)\n", sc.name.c_str(), sc.barriers.size(), sc.stepCount());
    return kOk;
}

int oracleCommand(int samples, unsigned long long seed) {
    bool ok = true;
    for (const auto& r : verify::check_all_chains(samples, seed)) {
        const bool pass = r.max_rel_lower <= 1e-4 && r.max_rel_top <= 1e-3;
        ok = ok && pass;
        std::printf("%-18s samples=%d max_rel_lower=%.3e max_rel_top=%.3e %s\n",
                    std::string(domainName(r.domain)).c_str(), r.samples, r.max_rel_lower, r.max_rel_top,
                    pass ? "ok" : "FAIL");
    }
    return ok ? kOk : kInvalid;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Quadrotor CBF safety-filter simulator"};
    app.require_subcommand(1);

    std::string ref;
    std::string out_dir = "out";
    std::optional<double> dt;
    std::optional<long long> seed;
    auto* run_cmd = app.add_subcommand("run", "Simulate a scenario and write trace.csv, events.csv, summary.txt");
    run_cmd->add_option("scenario", ref, "Scenario YAML file or presets:NAME")->required();
    run_cmd->add_option("--out", out_dir, "Output directory")->capture_default_str();
    run_cmd->add_option("--dt", dt, "Override the step size [s]");
    run_cmd->add_option("--seed", seed, "Reserved; must be 0");

    std::string show;
    bool commented = false;
    auto* presets_cmd = app.add_subcommand("presets", "List built-in scenarios");
    presets_cmd->add_option("--show", show, "Print the named preset as YAML");
    presets_cmd->add_flag("--commented", commented, "Annotate the printed YAML");

    std::string check_ref;
    auto* check_cmd = app.add_subcommand("check", "Validate a scenario without running it");
    check_cmd->add_option("scenario", check_ref, "Scenario YAML file or presets:NAME")->required();

    int samples = 100;
    unsigned long long oracle_seed = 1;
    auto* oracle_cmd = app.add_subcommand("oracle", "Finite-difference check of every barrier chain");
    oracle_cmd->add_option("--samples", samples, "Random in-set states per chain")->capture_default_str();
    oracle_cmd->add_option("--seed", oracle_seed, "Sampler seed")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kInvalid;
    }

    try {
        if (*run_cmd) return runCommand(ref, out_dir, dt, seed);
        if (*presets_cmd) return presetsCommand(show, commented);
        if (*check_cmd) return checkCommand(check_ref);
        if (*oracle_cmd) return oracleCommand(samples, oracle_seed);
    } catch (const NonFiniteState& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kNonFinite;
    } catch (const QuadsafeError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kInvalid;
    }
    return kOk;
}
