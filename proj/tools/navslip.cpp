// navslip: command-line front end for runs, sweeps and artifact checks.
#include <cstdlib>
#include <iostream>

#include "CLI11.hpp"
#include "navslip/errors.hpp"
#include "navslip/io.hpp"

namespace {

using namespace navslip;

struct RunFlags {
    std::string config, output;
    std::optional<int> threads;
    std::optional<std::uint64_t> seed;
    bool strict = false;
};

void add_run_flags(CLI::App* cmd, RunFlags& f) {
    cmd->add_option("--config", f.config, "Experiment config file (key = value)")->required();
    cmd->add_option("--output", f.output, "Run directory (default: $NAVSLIP_OUTPUT_ROOT/<run id>)");
    cmd->add_option("--threads", f.threads, "Worker threads for sweeps");
    cmd->add_option("--seed", f.seed, "Override the config seed");
    cmd->add_flag("--strict", f.strict, "Treat warnings as errors");
}

int run(const RunFlags& f, bool sweeps_only) {
    ExperimentConfig c;
    try {
        c = parse_config(f.config);
    } catch (const ValidationError& e) {
        for (const auto& p : e.problems()) std::cerr << "config error: " << p << "\n";
        return kExitValidation;
    }
    if (sweeps_only && !is_sweep(c.experiment)) {
        std::cerr << "config error: experiment " << to_string(c.experiment)
                  << " is not a sweep; use 'navslip run'\n";
        return kExitValidation;
    }
    DispatchOptions o;
    o.output = f.output;
    if (const char* root = std::getenv("NAVSLIP_OUTPUT_ROOT"); root && *root) o.output_root = root;
    o.seed = f.seed;
    o.threads = f.threads;
    o.strict = f.strict;
    o.config_path = f.config;
    return dispatch(c, o, std::cout).exit_code;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Vanishing-viscosity laboratory for the slip channel"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(kToolVersion));

    RunFlags run_flags, sweep_flags;
    auto* run_cmd = app.add_subcommand("run", "Run any configured experiment");
    add_run_flags(run_cmd, run_flags);
    auto* sweep_cmd = app.add_subcommand("sweep", "Run a viscosity or epsilon sweep");
    add_run_flags(sweep_cmd, sweep_flags);

    std::string check_config;
    auto* check_cmd = app.add_subcommand("check", "Validate a config and print its run id");
    check_cmd->add_option("--config", check_config, "Experiment config file")->required();

    std::string verify_dir;
    auto* verify_cmd = app.add_subcommand("verify", "Re-check checksums and thresholds of a run");
    verify_cmd->add_option("run_dir", verify_dir, "Run directory")->required();

    std::vector<std::string> report_dirs;
    auto* report_cmd = app.add_subcommand("report", "Rate table over sweep run directories");
    report_cmd->add_option("run_dirs", report_dirs, "Sweep run directories")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitValidation;
    }

    try {
        if (*run_cmd) return run(run_flags, false);
        if (*sweep_cmd) return run(sweep_flags, true);
        if (*check_cmd) {
            try {
                const ExperimentConfig c = parse_config(check_config);
                std::cout << canonical_text(c) << "run_id = " << run_id(c) << "\n";
                return kExitOk;
            } catch (const ValidationError& e) {
                for (const auto& p : e.problems()) std::cerr << "config error: " << p << "\n";
                return kExitValidation;
            }
        }
        if (*verify_cmd) {
            const VerifyReport r = verify_run(verify_dir);
            for (const auto& p : r.problems) std::cout << "PROBLEM " << p << "\n";
            for (const Check& k : r.checks)
                std::cout << (k.passed ? "PASS " : "FAIL ") << k.name << " = "
                          << format_double(k.value) << " (limit " << format_double(k.threshold)
                          << ")" << (k.detail.empty() ? "" : " " + k.detail) << "\n";
            std::cout << "verify exit " << r.exit_code << "\n";
            return r.exit_code;
        }
        if (*report_cmd) {
            std::vector<std::filesystem::path> dirs(report_dirs.begin(), report_dirs.end());
            print_report(report_sweeps(dirs), std::cout);
            return kExitOk;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitRuntime;
    }
    return kExitValidation;
}
