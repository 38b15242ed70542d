#include "reslat/run.hpp"

#include "reslat/log.hpp"

#include <fstream>

namespace reslat {

namespace {

std::vector<Complex> mu_from_json(const Json& j) {
    std::vector<Complex> mu;
    for (const auto& e : j) {
        if (e.is_number()) {
            mu.emplace_back(e.get<double>(), 0.0);
        } else if (e.is_array() && e.size() == 2) {
            mu.emplace_back(e[0].get<double>(), e[1].get<double>());
        } else {
            throw ConfigError("config: model mu entries must be numbers or [re, im] pairs");
        }
    }
    return mu;
}

Json mu_to_json(const std::vector<Complex>& mu) {
    Json j = Json::array();
    for (const auto& m : mu) j.push_back(Json::array({m.real(), m.imag()}));
    return j;
}

void require(bool cond, const std::string& msg) {
    if (!cond) throw ConfigError("config: " + msg);
}

}  // namespace

RunConfig RunConfig::from_json(const Json& j) {
    RunConfig cfg;
    require(j.contains("system") && j["system"].is_object(), "missing system section");
    const Json& sys = j["system"];
    require(sys.contains("name") && sys["name"].is_string(), "missing system.name");
    cfg.system.name = sys["name"].get<std::string>();
    if (sys.contains("mu")) cfg.system.mu = mu_from_json(sys["mu"]);
    if (sys.contains("h1")) cfg.system.h1_kind = sys["h1"].get<std::string>();
    for (const auto& [key, val] : sys.items())
        if (key != "name" && key != "mu" && key != "h1") {
            require(val.is_number(), "system parameter " + key + " must be a number");
            cfg.system.params[key] = val.get<double>();
        }

    require(j.contains("energy_window") && j["energy_window"].is_array() &&
                j["energy_window"].size() == 2,
            "missing energy_window [lo, hi]");
    cfg.e_min = j["energy_window"][0].get<double>();
    cfg.e_max = j["energy_window"][1].get<double>();
    require(cfg.e_min <= cfg.e_max, "energy_window must be ordered");

    if (j.contains("node_count")) cfg.node_count = j["node_count"].get<int>();
    require(cfg.node_count >= 8 && cfg.node_count <= 64, "node_count must lie in [8, 64]");

    require(j.contains("h") && j["h"].is_array() && !j["h"].empty(),
            "missing h (list of semiclassical parameters)");
    for (const auto& hv : j["h"]) {
        const double h = hv.get<double>();
        require(h > 0.0 && h < 1.0, "every h must lie in (0, 1)");
        cfg.h_list.push_back(h);
    }

    if (j.contains("eps0")) cfg.eps0 = j["eps0"].get<double>();
    if (j.contains("delta")) cfg.delta = j["delta"].get<double>();
    require(cfg.eps0 > 0.0, "eps0 must be positive");
    require(cfg.delta > 0.0 && cfg.delta < 1.0, "delta must lie in (0, 1)");

    if (j.contains("tolerances")) {
        const Json& t = j["tolerances"];
        if (t.contains("integrator")) cfg.integrator_tol = t["integrator"].get<double>();
        if (t.contains("shooting")) cfg.shooting_tol = t["shooting"].get<double>();
        if (t.contains("quantize_newton"))
            cfg.quantize_newton_tol = t["quantize_newton"].get<double>();
        if (t.contains("tol_ell")) cfg.tol_ell = t["tol_ell"].get<double>();
        if (t.contains("tol_res_base")) cfg.tol_res_base = t["tol_res_base"].get<double>();
    }
    require(cfg.integrator_tol >= 1e-14 && cfg.integrator_tol <= 1e-4,
            "integrator tolerance out of range [1e-14, 1e-4]");
    require(cfg.quantize_newton_tol > 0.0 && cfg.quantize_newton_tol <= 1e-6,
            "quantize_newton tolerance out of range");

    if (j.contains("nonres_K")) cfg.nonres_K = j["nonres_K"].get<int>();
    require(cfg.nonres_K >= 1 && cfg.nonres_K <= 20, "nonres_K must lie in [1, 20]");
    if (j.contains("rho_c")) cfg.rho_c = j["rho_c"].get<double>();
    require(cfg.rho_c > 0.0 && cfg.rho_c <= 1.0, "rho_c must lie in (0, 1]");

    if (j.contains("output_dir")) cfg.output_dir = j["output_dir"].get<std::string>();
    if (j.contains("subcommand")) cfg.subcommand = j["subcommand"].get<std::string>();
    return cfg;
}

Json RunConfig::to_json() const {
    Json j;
    Json sys;
    sys["name"] = system.name;
    if (!system.mu.empty()) sys["mu"] = mu_to_json(system.mu);
    if (system.name == "model") sys["h1"] = system.h1_kind;
    for (const auto& [key, val] : system.params) sys[key] = val;
    j["system"]        = sys;
    j["energy_window"] = {e_min, e_max};
    j["node_count"]    = node_count;
    j["h"]             = h_list;
    j["eps0"]          = eps0;
    j["delta"]         = delta;
    j["tolerances"]    = Json{{"integrator", integrator_tol},
                              {"shooting", shooting_tol},
                              {"quantize_newton", quantize_newton_tol},
                              {"tol_ell", tol_ell},
                              {"tol_res_base", tol_res_base}};
    j["nonres_K"]      = nonres_K;
    j["rho_c"]         = rho_c;
    j["output_dir"]    = output_dir;
    if (!subcommand.empty()) j["subcommand"] = subcommand;
    return j;
}

RunConfig RunConfig::load(const std::filesystem::path& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError("config: cannot open " + path.string());
    Json j;
    try {
        j = Json::parse(f);
    } catch (const std::exception& e) {
        throw ConfigError(std::string("config: JSON parse failure: ") + e.what());
    }
    return from_json(j);
}

namespace {

struct PipelineState {
    std::optional<HamiltonianSystem> sys;
    std::optional<PeriodicOrbit> center_orbit;
    std::optional<OrbitFamily> family;
    std::optional<ActionModel> model;
    std::vector<ResonanceLattice> lattices;
};

PeriodicOrbit find_center_orbit(const RunConfig& cfg, const HamiltonianSystem& sys,
                                const RunOptions& opts) {
    const double ec = 0.5 * (cfg.e_min + cfg.e_max);
    PhasePoint guess = opts.seed_guess ? PhasePoint::from_z(*opts.seed_guess)
                                       : default_orbit_guess(sys, ec);
    ShootingOptions sopts;
    sopts.tol            = cfg.shooting_tol;
    sopts.integrator_tol = cfg.integrator_tol;
    return find_periodic_orbit(sys, guess, ec, sopts.tol, sopts);
}

QuantizationInput make_input(const RunConfig& cfg, double h) {
    QuantizationInput in;
    in.h          = h;
    in.eps0       = cfg.eps0;
    in.delta      = cfg.delta;
    in.newton_tol = cfg.quantize_newton_tol;
    return in;
}

void build_family_and_model(const RunConfig& cfg, const RunOptions& opts, PipelineState& st) {
    st.center_orbit = find_center_orbit(cfg, *st.sys, opts);
    log_info("orbit found: T = " + std::to_string(st.center_orbit->period));
    ShootingOptions sopts;
    sopts.tol            = cfg.shooting_tol;
    sopts.integrator_tol = cfg.integrator_tol;
    st.family = continue_family(*st.sys, *st.center_orbit, {cfg.e_min, cfg.e_max},
                                cfg.node_count, sopts);
    ActionModelOptions aopts;
    aopts.nonres_K     = cfg.nonres_K;
    aopts.tol_ell      = cfg.tol_ell;
    aopts.tol_res_base = cfg.tol_res_base;
    aopts.rho_c        = cfg.rho_c;
    st.model = build_action_model(*st.family, *st.sys, aopts);
    log_info("action model built, cz = " + std::to_string(st.model->cz_index));
}

}  // namespace

int run_pipeline(const RunConfig& cfg, const std::string& subcommand_in, const RunOptions& opts) {
    const std::string sub = subcommand_in.empty() ? cfg.subcommand : subcommand_in;
    Json report;
    report["status"]     = "ok";
    report["subcommand"] = sub;
    report["config"]     = cfg.to_json();

    const std::filesystem::path out_dir =
        opts.out_dir.empty() ? std::filesystem::path(cfg.output_dir)
                             : std::filesystem::path(opts.out_dir);

    // validate before creating any output
    static const std::vector<std::string> known = {"check-hypotheses", "analyze-orbit",
                                                   "resonances", "oracle", "compare"};
    if (std::find(known.begin(), known.end(), sub) == known.end()) {
        log_info("unknown subcommand '" + sub + "'");
        return kExitConfig;
    }
    if ((sub == "oracle" || sub == "compare") && cfg.system.name != "model") {
        log_info("subcommand '" + sub + "' requires the model system");
        return kExitConfig;
    }

    PipelineState st;
    int code = kExitOk;
    try {
        st.sys = build_system(cfg.system);

        if (sub == "check-hypotheses") {
            st.center_orbit = find_center_orbit(cfg, *st.sys, opts);
            const MonodromyData md = monodromy(*st.center_orbit);
            const auto rep = check_hypotheses(md, cfg.nonres_K, cfg.tol_res_base, cfg.tol_ell);
            report["hypotheses"] = to_json(rep);
            report["orbit"] = Json{{"energy", st.center_orbit->energy},
                                   {"period", st.center_orbit->period},
                                   {"closure_residual", closure_residual(*st.center_orbit)}};
            if (!rep.all_required()) {
                report["status"] = "hypothesis_failure";
                report["reason"] = "a required hypothesis flag failed";
                code = kExitHypothesis;
            }
        } else if (sub == "analyze-orbit" || sub == "resonances" || sub == "compare") {
            build_family_and_model(cfg, opts, st);
            const MonodromyData md = monodromy(st.family->orbits[cfg.node_count / 2]);
            report["hypotheses"] =
                to_json(check_hypotheses(md, cfg.nonres_K, cfg.tol_res_base, cfg.tol_ell));
            report["action_model"] = to_json(*st.model);
            report["cz_index"]     = st.model->cz_index;

            if (sub != "analyze-orbit") {
                Json lat_meta = Json::array();
                for (double h : cfg.h_list) {
                    const auto input = make_input(cfg, h);
                    auto lat = enumerate_lattice(*st.model, input, opts.threads);
                    lat_meta.push_back(Json{{"h", h},
                                            {"count", lat.resonances.size()},
                                            {"failures", lat.failures.size()}});
                    st.lattices.push_back(std::move(lat));
                }
                report["lattices"] = lat_meta;

                // the closed-form lattice covers the bare model only (no
                // sub-principal term)
                if (cfg.system.name == "model" && cfg.system.h1_kind == "zero") {
                    Json cmp_meta = Json::array();
                    for (size_t i = 0; i < cfg.h_list.size(); ++i) {
                        const auto input = make_input(cfg, cfg.h_list[i]);
                        const auto oracle =
                            model_oracle(cfg.system.mu, input, cfg.e_min, cfg.e_max);
                        try {
                            const auto rep_i = compare(st.lattices[i], oracle);
                            cmp_meta.push_back(Json{{"h", cfg.h_list[i]},
                                                    {"count", rep_i.count},
                                                    {"max_deviation", rep_i.max_deviation},
                                                    {"worst_m", rep_i.worst_m},
                                                    {"worst_k", rep_i.worst_k}});
                        } catch (const ConfigError& e) {
                            throw NumericalError(std::string("oracle comparison: ") + e.what());
                        }
                    }
                    report["oracle_comparison"] = cmp_meta;
                }
            }
        } else if (sub == "oracle") {
            for (double h : cfg.h_list) {
                const auto input = make_input(cfg, h);
                st.lattices.push_back(model_oracle(cfg.system.mu, input, cfg.e_min, cfg.e_max));
            }
            Json lat_meta = Json::array();
            for (const auto& lat : st.lattices)
                lat_meta.push_back(Json{{"h", lat.input.h}, {"count", lat.resonances.size()}});
            report["lattices"] = lat_meta;
        }
    } catch (const ConfigError& e) {
        log_info(std::string("config error: ") + e.what());
        return kExitConfig;
    } catch (const HypothesisError& e) {
        report["status"] = "hypothesis_failure";
        report["reason"] = e.what();
        code = kExitHypothesis;
    } catch (const std::exception& e) {
        report["status"] = "numerical_failure";
        report["reason"] = e.what();
        code = kExitNumerical;
    }

    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) {
        log_info("cannot create output directory " + out_dir.string());
        return kExitConfig;
    }

    emit_file(out_dir / "report.json", report.dump(2) + "\n");
    if (st.model) emit_file(out_dir / "actionmodel.json", to_json(*st.model).dump(2) + "\n");
    for (size_t i = 0; i < st.lattices.size(); ++i) {
        const std::string stem = i == 0 ? "lattice" : "lattice_" + std::to_string(i);
        emit_file(out_dir / (stem + ".csv"), lattice_csv(st.lattices[i]));
        emit_file(out_dir / (stem + ".json"), to_json(st.lattices[i]).dump(2) + "\n");
    }
    if (!st.lattices.empty()) emit_file(out_dir / "plotdata.csv", plotdata_csv(st.lattices));

    log_info("done: status " + report["status"].get<std::string>());
    return code;
}

}  // namespace reslat
