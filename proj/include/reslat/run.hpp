#pragma once

#include "reslat/io.hpp"

#include <optional>

namespace reslat {

// Exit codes of the pipeline front end.
enum ExitCode : int {
    kExitOk = 0,
    kExitConfig = 1,
    kExitHypothesis = 2,
    kExitNumerical = 3,
};

// Declarative run configuration; one file drives the whole pipeline.
struct RunConfig {
    SystemSpec system;
    double e_min = 0.0;
    double e_max = 0.0;
    int node_count = 16;
    std::vector<double> h_list;
    double eps0 = 0.5;
    double delta = 0.5;

    double integrator_tol = 1e-12;
    double shooting_tol = 1e-11;
    double quantize_newton_tol = 1e-12;
    double tol_ell = 1e-6;
    double tol_res_base = 1e-8;
    int nonres_K = 10;
    double rho_c = 0.5;

    std::string output_dir = "out";
    std::string subcommand;  // optional default; the CLI positional wins

    static RunConfig from_json(const Json& j);
    Json to_json() const;
    static RunConfig load(const std::filesystem::path& path);
};

struct RunOptions {
    std::string out_dir;  // overrides config output_dir when non-empty
    int threads = 1;
    std::optional<Vec> seed_guess;  // overrides the built-in orbit initializer
};

// Executes one subcommand (check-hypotheses, analyze-orbit, resonances,
// oracle, compare) and writes the artifact files; returns the exit code.
int run_pipeline(const RunConfig& cfg, const std::string& subcommand, const RunOptions& opts);

}  // namespace reslat
