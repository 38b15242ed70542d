#include "reslat/run.hpp"

#include <CLI11.hpp>

#include <sstream>

namespace {

std::optional<reslat::Vec> parse_seed_guess(const std::string& s) {
    if (s.empty()) return std::nullopt;
    std::vector<double> vals;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ',')) vals.push_back(std::stod(tok));
    reslat::Vec v(vals.size());
    for (size_t i = 0; i < vals.size(); ++i) v(static_cast<int>(i)) = vals[i];
    return v;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"reslat: semiclassical resonance lattices from a periodic orbit"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir;
    int threads = 1;
    std::string seed_guess;

    for (const char* name : {"check-hypotheses", "analyze-orbit", "resonances", "oracle",
                             "compare"}) {
        auto* sub = app.add_subcommand(name);
        sub->add_option("--config", config_path, "run configuration file (JSON)")->required();
        sub->add_option("--out", out_dir, "output directory (overrides the config)");
        sub->add_option("--threads", threads, "lattice worker threads");
        sub->add_option("--seed-guess", seed_guess,
                        "comma-separated phase point overriding the orbit initializer");
    }

    CLI11_PARSE(app, argc, argv);
    const std::string sub = app.get_subcommands().front()->get_name();

    try {
        const reslat::RunConfig cfg = reslat::RunConfig::load(config_path);
        reslat::RunOptions opts;
        opts.out_dir = out_dir;
        opts.threads = threads;
        opts.seed_guess = parse_seed_guess(seed_guess);
        return reslat::run_pipeline(cfg, sub, opts);
    } catch (const reslat::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return reslat::kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return reslat::kExitNumerical;
    }
}
