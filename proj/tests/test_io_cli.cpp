#include "reslat/run.hpp"

#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

using namespace reslat;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    REQUIRE(f.good());
    return std::string(std::istreambuf_iterator<char>(f), {});
}

Json hr_config_json() {
    return Json::parse(R"({
        "system": {"name": "model", "mu": [[1.0, 0.0]], "h1": "zero"},
        "energy_window": [-0.6, 0.6],
        "node_count": 12,
        "h": [0.01],
        "eps0": 0.5,
        "delta": 0.5
    })");
}

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& tag) {
        path = fs::temp_directory_path() / ("reslat_test_" + tag);
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

}  // namespace

TEST_CASE("config parse round-trip is idempotent") {
    const auto cfg1  = RunConfig::from_json(hr_config_json());
    const Json emit1 = cfg1.to_json();
    const auto cfg2  = RunConfig::from_json(emit1);
    const Json emit2 = cfg2.to_json();
    CHECK(emit1.dump(2) == emit2.dump(2));
}

TEST_CASE("config validation failures") {
    Json bad = hr_config_json();
    bad.erase("h");
    CHECK_THROWS_AS(RunConfig::from_json(bad), ConfigError);

    Json bad2 = hr_config_json();
    bad2["system"].erase("name");
    CHECK_THROWS_AS(RunConfig::from_json(bad2), ConfigError);

    Json bad3 = hr_config_json();
    bad3["node_count"] = 4;
    CHECK_THROWS_AS(RunConfig::from_json(bad3), ConfigError);

    Json bad4 = hr_config_json();
    bad4["delta"] = 1.5;
    CHECK_THROWS_AS(RunConfig::from_json(bad4), ConfigError);
}

TEST_CASE("csv emission shape and determinism") {
    QuantizationInput in;
    in.h = 0.1;
    const auto lat = model_oracle({Complex(1.0, 0.0)}, in, -0.6, 0.6);
    const std::string csv1 = lattice_csv(lat);
    const std::string csv2 = lattice_csv(lat);
    CHECK(csv1 == csv2);

    // N data rows plus one header line
    const size_t lines = std::count(csv1.begin(), csv1.end(), '\n');
    CHECK(lines == lat.resonances.size() + 1);
    CHECK(csv1.substr(0, csv1.find('\n')) == "m,k1,re_e,im_e,residual,iters");

    // empty lattice: header only
    ResonanceLattice empty;
    empty.input = in;
    CHECK(lattice_csv(empty) == "m,re_e,im_e,residual,iters\n");

    TempDir tmp("emit");
    emit_file(tmp.path / "a.csv", csv1);
    emit_file(tmp.path / "b.csv", csv1);
    CHECK(slurp(tmp.path / "a.csv") == slurp(tmp.path / "b.csv"));
}

TEST_CASE("check-hypotheses run: exit 0 with passing flags") {
    TempDir tmp("hyp");
    const auto cfg = RunConfig::from_json(hr_config_json());
    RunOptions opts;
    opts.out_dir = tmp.path.string();
    const int code = run_pipeline(cfg, "check-hypotheses", opts);
    CHECK(code == kExitOk);

    const Json rep = Json::parse(slurp(tmp.path / "report.json"));
    CHECK(rep["status"] == "ok");
    CHECK(rep["hypotheses"]["nondegenerate"] == true);
    CHECK(rep["hypotheses"]["no_nonpositive_real"] == true);
    CHECK(rep["hypotheses"]["partially_hyperbolic"] == true);
    CHECK(rep["hypotheses"]["nonres_weak"] == true);
    CHECK(rep["hypotheses"]["nonres_strong"] == true);
    CHECK(rep["hypotheses"]["all_required_pass"] == true);
}

TEST_CASE("resonances run matches the oracle and is deterministic") {
    TempDir tmp1("res1"), tmp2("res2");
    const auto cfg = RunConfig::from_json(hr_config_json());

    RunOptions opts1;
    opts1.out_dir = tmp1.path.string();
    CHECK(run_pipeline(cfg, "resonances", opts1) == kExitOk);

    const Json rep = Json::parse(slurp(tmp1.path / "report.json"));
    REQUIRE(rep.contains("oracle_comparison"));
    CHECK(rep["oracle_comparison"][0]["max_deviation"].get<double>() <= 1e-10);
    CHECK(rep["oracle_comparison"][0]["count"].get<size_t>() > 100);

    // repeated run produces byte-identical lattice.csv
    RunOptions opts2;
    opts2.out_dir = tmp2.path.string();
    CHECK(run_pipeline(cfg, "resonances", opts2) == kExitOk);
    CHECK(slurp(tmp1.path / "lattice.csv") == slurp(tmp2.path / "lattice.csv"));
    CHECK(slurp(tmp1.path / "lattice.json") == slurp(tmp2.path / "lattice.json"));
    CHECK(fs::exists(tmp1.path / "plotdata.csv"));
}

TEST_CASE("threaded enumeration is byte-identical to sequential") {
    TempDir tmp1("thr1"), tmp2("thr2");
    const auto cfg = RunConfig::from_json(hr_config_json());
    RunOptions seq, par;
    seq.out_dir = tmp1.path.string();
    par.out_dir = tmp2.path.string();
    par.threads = 4;
    CHECK(run_pipeline(cfg, "resonances", seq) == kExitOk);
    CHECK(run_pipeline(cfg, "resonances", par) == kExitOk);
    CHECK(slurp(tmp1.path / "lattice.csv") == slurp(tmp2.path / "lattice.csv"));
}

TEST_CASE("hypothesis failure exits with code 2 and a reasoned report") {
    TempDir tmp("hypfail");
    Json j = hr_config_json();
    j["system"]["mu"] = Json::array({Json::array({0.0, 1.0 / 3.0})});  // rational rotation
    j["nonres_K"]     = 3;
    const auto cfg = RunConfig::from_json(j);
    RunOptions opts;
    opts.out_dir = tmp.path.string();
    const int code = run_pipeline(cfg, "resonances", opts);
    CHECK(code == kExitHypothesis);
    const Json rep = Json::parse(slurp(tmp.path / "report.json"));
    CHECK(rep["status"] == "hypothesis_failure");
    CHECK(rep["reason"].get<std::string>().find("hypotheses failed") != std::string::npos);
    CHECK(!fs::exists(tmp.path / "lattice.csv"));  // no lattice emitted on failure
}

TEST_CASE("oracle subcommand writes the exact lattice") {
    TempDir tmp("oracle");
    const auto cfg = RunConfig::from_json(hr_config_json());
    RunOptions opts;
    opts.out_dir = tmp.path.string();
    CHECK(run_pipeline(cfg, "oracle", opts) == kExitOk);
    const std::string csv = slurp(tmp.path / "lattice.csv");
    // h = 0.01, first row is the most negative Re E
    CHECK(csv.find("m,k1,re_e,im_e,residual,iters") == 0);
    QuantizationInput in;
    in.h = 0.01;
    in.eps0 = 0.5;
    const auto oracle = model_oracle({Complex(1.0, 0.0)}, in, -0.6, 0.6);
    const size_t lines = std::count(csv.begin(), csv.end(), '\n');
    CHECK(lines == oracle.resonances.size() + 1);
}

TEST_CASE("compare subcommand reports zero deviation for the model") {
    TempDir tmp("cmp");
    const auto cfg = RunConfig::from_json(hr_config_json());
    RunOptions opts;
    opts.out_dir = tmp.path.string();
    CHECK(run_pipeline(cfg, "compare", opts) == kExitOk);
    const Json rep = Json::parse(slurp(tmp.path / "report.json"));
    CHECK(rep["oracle_comparison"][0]["max_deviation"].get<double>() <= 1e-10);
}

TEST_CASE("action model JSON round-trip reproduces the quantization") {
    TempDir tmp("amcache");
    const auto cfg = RunConfig::from_json(hr_config_json());
    RunOptions opts;
    opts.out_dir = tmp.path.string();
    CHECK(run_pipeline(cfg, "analyze-orbit", opts) == kExitOk);

    const auto cached = action_model_from_json(Json::parse(slurp(tmp.path / "actionmodel.json")));
    CHECK(cached.system_name == "model");
    CHECK(cached.dof_count() == 1);

    QuantizationInput in;
    in.h = 0.01;
    const auto r = solve_resonance(cached, 3, {2}, in);
    CHECK(std::abs(r.e - Complex(0.03, -0.025)) <= 1e-10);

    // serialize -> parse -> serialize is stable
    const Json j1 = to_json(cached);
    const Json j2 = to_json(action_model_from_json(j1));
    CHECK(j1.dump() == j2.dump());
}

TEST_CASE("analyze-orbit runs end to end on the generic systems") {
    // hyperboloid: single hr exponent, no elliptic block
    {
        TempDir tmp("hyp_run");
        Json j = hr_config_json();
        j["system"]        = Json{{"name", "hyperboloid_geodesic"}};
        j["energy_window"] = {0.35, 0.65};
        const auto cfg = RunConfig::from_json(j);
        RunOptions opts;
        opts.out_dir = tmp.path.string();
        CHECK(run_pipeline(cfg, "analyze-orbit", opts) == kExitOk);
        const Json rep = Json::parse(slurp(tmp.path / "report.json"));
        CHECK(rep["hypotheses"]["all_required_pass"] == true);
        CHECK(rep["action_model"]["kinds"][0] == "hr");
    }
    // coulomb-stark barrier orbit
    {
        TempDir tmp("cs_run");
        Json j = hr_config_json();
        j["system"]        = Json{{"name", "coulomb_stark"}, {"a", 1.0}, {"n", 2.0}};
        j["energy_window"] = {2.15, 2.35};
        const auto cfg = RunConfig::from_json(j);
        RunOptions opts;
        opts.out_dir = tmp.path.string();
        CHECK(run_pipeline(cfg, "analyze-orbit", opts) == kExitOk);
        const Json rep = Json::parse(slurp(tmp.path / "report.json"));
        CHECK(rep["hypotheses"]["all_required_pass"] == true);
        CHECK(rep["hypotheses"]["partially_hyperbolic"] == true);
    }
}

TEST_CASE("explicit seed guess overrides the built-in initializer") {
    TempDir tmp("seed");
    const auto cfg = RunConfig::from_json(hr_config_json());
    RunOptions opts;
    opts.out_dir = tmp.path.string();
    // center-manifold point at the window midpoint, handed in explicitly
    Vec z = Vec::Zero(4);
    z(2)  = 0.0;
    opts.seed_guess = z;
    CHECK(run_pipeline(cfg, "check-hypotheses", opts) == kExitOk);
    const Json rep = Json::parse(slurp(tmp.path / "report.json"));
    CHECK(rep["orbit"]["period"].get<double>() ==
          doctest::Approx(6.283185307179586).epsilon(1e-10));
}

TEST_CASE("unknown subcommand and wrong system exit with the config code") {
    const auto cfg = RunConfig::from_json(hr_config_json());
    RunOptions opts;
    opts.out_dir = (fs::temp_directory_path() / "reslat_nowrite").string();
    CHECK(run_pipeline(cfg, "no-such-command", opts) == kExitConfig);

    Json j = hr_config_json();
    j["system"] = Json{{"name", "hyperboloid_geodesic"}};
    j["energy_window"] = {0.35, 0.65};
    const auto cfg2 = RunConfig::from_json(j);
    CHECK(run_pipeline(cfg2, "oracle", opts) == kExitConfig);
    CHECK(!fs::exists(opts.out_dir));  // no partial outputs
}
