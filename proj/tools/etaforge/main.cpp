#include "acceptance.hpp"
#include "scenarios.hpp"

#include "etaforge/errors.hpp"

#include <CLI11.hpp>

#include <cstdio>

namespace {

using namespace etaforge;
using namespace etaforge::cli;

void print_report(const ExitReport& rep) {
    std::fputs(rep.summary_text.c_str(), stdout);
    std::printf("\nartifacts:\n");
    for (const auto& f : rep.files) std::printf("  %s\n", f.string().c_str());
}

int finish(const ExitReport& rep) {
    print_report(rep);
    return rep.exit_code;
}

int dispatch(int argc, char** argv) {
    CLI::App app{"eta-forge: equivariant spectral-asymmetry workbench"};
    app.require_subcommand(1);

    RunOptions opts;
    std::string config_path;

    CLI::App* run = app.add_subcommand("run", "execute a JSON scenario config");
    run->add_option("--config", config_path, "scenario config file")->required();
    run->add_option("--seed", opts.seed, "seed for seeded scenarios (config may override)");
    run->add_option("--threads", opts.threads, "worker threads for inner grids")
        ->check(CLI::PositiveNumber);
    run->add_flag("--quick", opts.quick, "halved grids, loosened tolerances");
    run->add_flag("--dump", opts.dump, "emit per-gridpoint tables where available");
    run->add_option("--out", opts.out_dir, "output directory (config may override)");

    CLI::App* verify = app.add_subcommand("verify", "built-in verification entry points");
    verify->require_subcommand(1);

    bool symbolic = false;
    CLI::App* eqfe = verify->add_subcommand("eqfe", "the derivative identity check");
    eqfe->add_flag("--symbolic", symbolic, "run the exact symbolic route");
    eqfe->add_flag("--trace-ir", opts.trace_ir, "dump canonical trace expressions");
    eqfe->add_option("--out", opts.out_dir, "output directory");
    eqfe->add_option("--threads", opts.threads, "worker threads")
        ->check(CLI::PositiveNumber);

    CLI::App* all = verify->add_subcommand("all", "the full acceptance suite");
    all->add_option("--seed", opts.seed, "instance seed");
    all->add_option("--threads", opts.threads, "worker threads")
        ->check(CLI::PositiveNumber);
    all->add_flag("--quick", opts.quick, "shrunken instance counts and grids");
    all->add_option("--out", opts.out_dir, "output directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 3;
    }

    if (run->parsed()) return finish(run_config(config_path, opts));

    if (eqfe->parsed()) {
        json cfg;
        if (symbolic) {
            cfg["scenario"] = "eqfe-symbolic";
        } else {
            // A stock noncommuting boundary pair keeps the numeric route
            // self-contained.
            cfg["scenario"] = "eqfe-numeric";
            const json identity =
                json::array({json::array({1.0, 0.0}), json::array({0.0, 1.0})});
            cfg["model"] = json{{"dim", 2}, {"generators", json::array({identity})}};
            cfg["D"] = json::array({json::array({1.0, 0.3}), json::array({0.3, -1.0})});
            cfg["C"] = json::array({json::array({0.5, 0.2}), json::array({0.2, -0.1})});
        }
        return finish(run_scenario(cfg, opts, "."));
    }

    json cfg;
    cfg["scenario"] = "verify-all";
    return finish(run_scenario(cfg, opts, "."));
}

} // namespace

int main(int argc, char** argv) {
    try {
        return dispatch(argc, argv);
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 3;
    } catch (const IoError& e) {
        std::fprintf(stderr, "io error: %s\n", e.what());
        return 3;
    } catch (const QuadratureNotConverged& e) {
        std::fprintf(stderr, "non-convergence: %s\n", e.what());
        return 4;
    } catch (const NoAdmissibleEps& e) {
        std::fprintf(stderr, "non-convergence: %s\n", e.what());
        return 4;
    } catch (const Error& e) {
        std::fprintf(stderr, "assertion failure: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
}
