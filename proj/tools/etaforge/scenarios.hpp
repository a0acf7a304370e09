#pragma once

#include "model_io.hpp"
#include "report.hpp"

#include <cstdint>

namespace etaforge::cli {

struct RunOptions {
    std::uint64_t seed = 0;
    int threads = 1;
    bool quick = false;
    bool dump = false;
    bool trace_ir = false;
    std::filesystem::path out_dir = ".";
};

const std::vector<std::string>& scenario_names();

// Executes cfg["scenario"], writes one CSV per result table plus summary.md
// into opts.out_dir, and returns the outcome (exit_code 0 when every check
// passed, 2 otherwise). ConfigError and IoError propagate, as does the
// non-convergence family (QuadratureNotConverged, NoAdmissibleEps); every
// other failure of the computation itself lands in a named failing check.
ExitReport run_scenario(const json& cfg, const RunOptions& opts,
                        const std::filesystem::path& base_dir);

// Loads the config file and runs it; relative model paths resolve against the
// config's directory. Values in opts act as defaults that the config may
// override ("seed", "out_dir").
ExitReport run_config(const std::filesystem::path& config_path, const RunOptions& opts);

} // namespace etaforge::cli
