#include <doctest.h>

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "cli/config.hpp"
#include "cli/io.hpp"
#include "cli/run.hpp"

namespace fs = std::filesystem;
using qbath::cli::RunRequest;
using nlohmann::json;

namespace {

const fs::path config_dir{QBATH_CONFIG_DIR};

fs::path scratch_dir(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / "qbath_test_cli" / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

struct Outcome {
    int code;
    std::string out;
    std::string err;
};

Outcome run(const std::string& sub, const fs::path& config, const fs::path& out_dir, std::optional<std::uint64_t> seed = {},
            unsigned threads = 2) {
    RunRequest req{sub, config, out_dir, seed, threads};
    std::ostringstream out, err;
    const int code = qbath::cli::run(req, out, err);
    return {code, out.str(), err.str()};
}

fs::path write_config(const std::string& name, const std::string& text) {
    const fs::path p = scratch_dir("configs_" + name) / (name + ".json");
    std::ofstream(p) << text;
    return p;
}

std::vector<std::vector<std::string>> read_csv(const fs::path& p) {
    std::vector<std::vector<std::string>> rows;
    std::istringstream in(slurp(p));
    for (std::string line; std::getline(in, line);) {
        std::vector<std::string> cells;
        std::stringstream ls(line);
        for (std::string cell; std::getline(ls, cell, ',');) cells.push_back(cell);
        rows.push_back(cells);
    }
    return rows;
}

const char* small_model = R"({
  "model": {
    "nu": 1.0,
    "coupling_family": "rwa",
    "explicit": {"omegas": [1.0], "u_re": [0.5]}
  },
  "time": {"t_max": 1.0, "steps": 4})";

}  // namespace

TEST_CASE("validate on the decoupled sample prints the minimum eigenvalue and a manifest") {
    const fs::path dir = scratch_dir("validate");
    const Outcome o = run("validate", config_dir / "decoupled.json", dir);
    CHECK(o.code == 0);
    CHECK(o.out.find("min eigenvalue 0.5\n") != std::string::npos);

    const json m = json::parse(slurp(dir / "manifest.json"));
    CHECK(m["subcommand"] == "validate");
    CHECK(m["config_hash"].get<std::string>().rfind("fnv1a64:", 0) == 0);
    CHECK(m["seed"] == 0);
    CHECK(m["versions"].contains("qbath"));
    CHECK(m["versions"].contains("eigen"));
    CHECK(m["wall_time_s"].get<double>() >= 0.0);
    CHECK(json::parse(slurp(dir / "validate.json"))["min_eigenvalue"].get<double>() == doctest::Approx(0.5).epsilon(1e-14));
}

TEST_CASE("observables on the RWA coherent sample end on a near-pure plateau") {
    const fs::path dir = scratch_dir("observables");
    REQUIRE(run("observables", config_dir / "ohmic_rwa_coherent.json", dir).code == 0);
    const auto rows = read_csv(dir / "observables.csv");
    REQUIRE(rows.size() == 182);
    CHECK(rows[0] == std::vector<std::string>{"t", "mean_x", "mean_p", "var_x", "var_p", "purity"});
    CHECK(std::stod(rows.back()[5]) > 0.999);
    const json doc = json::parse(slurp(dir / "observables.json"));
    CHECK(doc["plateau_purity_range"][0].get<double>() > 0.999);
}

TEST_CASE("master-eq on the equilibrium sample has a vanishing sigma column") {
    const fs::path dir = scratch_dir("master_eq");
    REQUIRE(run("master-eq", config_dir / "ohmic_pp_equilibrium.json", dir).code == 0);
    const auto rows = read_csv(dir / "master_eq.csv");
    REQUIRE(rows[0].size() == 12);
    CHECK(rows[0][8] == "re_sigma");
    for (std::size_t r = 1; r < rows.size(); ++r) {
        CHECK(rows[r][8] == "0");
        CHECK(rows[r][9] == "0");
        CHECK(rows[r][11] == "1");
    }
    const json doc = json::parse(slurp(dir / "master_eq.json"));
    CHECK(doc["max_residual"].get<double>() < 1e-8);
    CHECK(doc["max_abs_sigma"].get<double>() == 0.0);
}

TEST_CASE("master-eq flags the singular instant of the resonant model") {
    const fs::path dir = scratch_dir("master_eq_singular");
    const fs::path cfg = write_config("singular", R"({
  "model": {"nu": 1.0, "coupling_family": "rwa", "explicit": {"omegas": [1.0], "u_re": [0.5]}},
  "bath": {"kind": "equilibrium", "beta": 2.0},
  "time": {"t_max": 6.283185307179586, "steps": 40}
})");
    REQUIRE(run("master-eq", cfg, dir).code == 0);
    const auto rows = read_csv(dir / "master_eq.csv");
    CHECK(rows[21][11] == "0");
    CHECK(rows[21][1] == "nan");
    CHECK(std::isfinite(std::stod(rows[21][10])));
    CHECK(json::parse(slurp(dir / "master_eq.json"))["singular_points"].get<int>() >= 1);
}

TEST_CASE("rwa-compare matches the closed forms") {
    for (const char* name : {"resonant_squeezed.json", "resonant_cat.json"}) {
        const fs::path dir = scratch_dir(std::string("rwa_") + name);
        REQUIRE(run("rwa-compare", config_dir / name, dir).code == 0);
        const json doc = json::parse(slurp(dir / "rwa_compare.json"));
        CHECK(doc["max_abs_diff"].get<double>() < 1e-7);
        CHECK(doc["passed"] == true);
        CHECK(doc["abs_A2_at_min"].get<double>() == doctest::Approx(0.5).epsilon(1e-6));
    }
}

TEST_CASE("n-sweep reports increasing recurrence and a 1/N variance of variance") {
    const fs::path dir = scratch_dir("n_sweep");
    REQUIRE(run("n-sweep", config_dir / "ohmic_n_sweep.json", dir).code == 0);
    const json doc = json::parse(slurp(dir / "n_sweep.json"));
    CHECK(doc["recurrence_onset_increasing"] == true);
    const double slope = doc["variance_of_variance_slope"].get<double>();
    CHECK(slope >= -1.3);
    CHECK(slope <= -0.7);
}

TEST_CASE("n-sweep on a decoupled bath flags no decay") {
    const fs::path dir = scratch_dir("n_sweep_decoupled");
    REQUIRE(run("n-sweep", config_dir / "decoupled_n_sweep.json", dir).code == 0);
    const json doc = json::parse(slurp(dir / "n_sweep.json"));
    CHECK(doc["no_decay"] == true);
    for (const auto& e : doc["entries"]) CHECK(e["plateau_sup_A"].get<double>() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("ensemble summaries carry estimate, std_error, n_samples and seed") {
    const fs::path dir = scratch_dir("ensemble");
    const fs::path cfg = write_config("ensemble", R"({
  "model": {"nu": 4.0, "coupling_family": "position_position",
            "spectral": {"family": "ohmic", "strength": 0.1, "cutoff": 5.0, "omega_min": 0.01, "omega_max": 20.0, "N": 16}},
  "bath": {"kind": "sample_coherent", "beta": 1.0},
  "oscillator": {"kind": "squeezed", "r": 0.3},
  "time": {"t_max": 5.0, "steps": 1},
  "experiment": {"n_samples": 64, "seed": 9}
})");
    REQUIRE(run("ensemble", cfg, dir).code == 0);
    const json doc = json::parse(slurp(dir / "ensemble.json"));
    const json& vx = doc["statistics"]["var_x"];
    CHECK(vx["n_samples"] == 64);
    CHECK(vx["seed"] == 9);
    CHECK(vx["std_error"].get<double>() < 1e-12);
    CHECK(vx["estimate"].get<double>() == doctest::Approx(doc["reference"]["member_var_x"].get<double>()).epsilon(1e-12));
    CHECK(read_csv(dir / "ensemble.csv").size() == 65);
}

TEST_CASE("artifacts are byte-identical for the same config and seed") {
    const fs::path cfg = write_config("identity", R"({
  "model": {"nu": 4.0, "coupling_family": "position_position",
            "spectral": {"family": "ohmic", "strength": 0.1, "cutoff": 5.0, "omega_min": 0.01, "omega_max": 20.0, "N": 16}},
  "bath": {"kind": "sample_number", "beta": 1.0},
  "oscillator": {"kind": "squeezed", "r": 0.2},
  "time": {"t_max": 4.0, "steps": 8},
  "outputs": {"formats": ["csv", "json", "binary"]},
  "experiment": {"n_samples": 16}
})");
    for (const char* sub : {"propagate", "observables", "ensemble"}) {
        const fs::path a = scratch_dir(std::string("identity_a_") + sub);
        const fs::path b = scratch_dir(std::string("identity_b_") + sub);
        REQUIRE(run(sub, cfg, a, 42, 3).code == 0);
        REQUIRE(run(sub, cfg, b, 42, 3).code == 0);
        for (const auto& entry : fs::directory_iterator(a)) {
            const std::string name = entry.path().filename().string();
            if (name == "manifest.json") {
                json ma = json::parse(slurp(entry.path())), mb = json::parse(slurp(b / name));
                ma.erase("wall_time_s");
                mb.erase("wall_time_s");
                CHECK(ma == mb);
            } else {
                CHECK_MESSAGE(slurp(entry.path()) == slurp(b / name), sub << "/" << name);
            }
        }
    }

    const fs::path c = scratch_dir("identity_c");
    const fs::path d = scratch_dir("identity_d");
    REQUIRE(run("observables", cfg, c, 42, 3).code == 0);
    REQUIRE(run("observables", cfg, d, 43, 3).code == 0);
    CHECK(slurp(c / "observables.csv") != slurp(d / "observables.csv"));
}

TEST_CASE("binary sidecar layout") {
    const fs::path dir = scratch_dir("sidecar");
    REQUIRE(run("propagate", config_dir / "ohmic_pp_equilibrium.json", dir).code == 0);
    const std::string bytes = slurp(dir / "propagator_BD.bin");
    auto u64 = [&](std::size_t offset) {
        std::uint64_t v = 0;
        for (int b = 7; b >= 0; --b) v = (v << 8) | static_cast<unsigned char>(bytes[offset + static_cast<std::size_t>(b)]);
        return v;
    };
    const std::uint64_t n = u64(0), t = u64(8);
    CHECK(n == 64);
    CHECK(t == 101);
    CHECK(bytes.size() == 16 + 2 * n * t * 16);
    // B_k(0) = 0 for every mode
    for (std::size_t k = 0; k < 2 * n; ++k) CHECK(u64(16 + 8 * k) == 0);
}

TEST_CASE("CSV floats carry 17 significant digits") {
    CHECK(qbath::cli::format_double(0.1) == "0.10000000000000001");
    CHECK(qbath::cli::format_double(0.5) == "0.5");
    CHECK(qbath::cli::format_double(std::nan("")) == "nan");
    const double x = 2.0 / 3.0;
    CHECK(std::stod(qbath::cli::format_double(x)) == x);
}

TEST_CASE("schema violations exit 2 with a line-anchored message") {
    struct Case {
        const char* name;
        std::string text;
        std::string needle;
    };
    const std::vector<Case> cases{
        {"unknown_key", std::string(small_model) + ",\n  \"colour\": 3\n}", ":8: unknown key 'colour'"},
        {"nested_unknown", R"({
  "model": {
    "nu": 1.0,
    "coupling_family": "rwa",
    "explicit": {"omegas": [1.0], "u_re": [0.5], "w": [1]}
  },
  "time": {"t_max": 1.0, "steps": 4}
})",
         ":5: unknown key 'w'"},
        {"wrong_type", std::string(small_model) + ",\n  \"bath\": {\"kind\": \"equilibrium\",\n    \"beta\": \"hot\"}\n}",
         ":9: 'beta' must be a positive number"},
        {"syntax", std::string(small_model) + ",\n  \"bath\": {\"kind\": }\n}", ":8: invalid JSON"},
        {"length", std::string(small_model) + ",\n\n  \"bath\": {\"kind\": \"number\", \"n\": [1, 2]}\n}",
         ":9: 'n' has 2 entries"},
        {"missing_time", R"({
  "model": {"nu": 1.0, "coupling_family": "rwa", "explicit": {"omegas": [1.0]}}
})",
         ":1: missing section 'time'"},
        {"pp_mismatch", R"({
  "model": {
    "nu": 1.0,
    "coupling_family": "position_position",
    "explicit": {"omegas": [1.0], "u_re": [0.1], "v_re": [0.2]}
  },
  "time": {"t_max": 1.0, "steps": 4}
})",
         ":2: "},
        {"unstable", R"({
  "model": {
    "nu": 1.0,
    "coupling_family": "position_position",
    "explicit": {"omegas": [1.0], "u_re": [10.0]}
  },
  "time": {"t_max": 1.0, "steps": 4}
})",
         ":2: model: Hamiltonian quadratic form is not positive definite"},
    };
    for (const Case& c : cases) {
        const fs::path cfg = write_config(c.name, c.text);
        const Outcome o = run("validate", cfg, scratch_dir(std::string("bad_") + c.name));
        CHECK_MESSAGE(o.code == 2, c.name);
        CHECK_MESSAGE(o.err.find(cfg.string() + c.needle) != std::string::npos, c.name << ": " << o.err);
    }
}

TEST_CASE("subcommand requirements are validated against the config") {
    const Outcome pp = run("rwa-compare", config_dir / "ohmic_pp_equilibrium.json", scratch_dir("req_rwa"));
    CHECK(pp.code == 2);
    CHECK(pp.err.find(":4: rwa-compare needs coupling_family 'rwa'") != std::string::npos);

    const Outcome ens = run("ensemble", config_dir / "ohmic_pp_equilibrium.json", scratch_dir("req_ens"));
    CHECK(ens.code == 2);
    CHECK(ens.err.find("ensemble needs bath kind") != std::string::npos);

    const Outcome kind = run("propagate", config_dir / "ohmic_n_sweep.json", scratch_dir("req_kind"));
    CHECK(kind.code == 2);
    CHECK(kind.err.find("does not match subcommand 'propagate'") != std::string::npos);

    const Outcome unknown = run("frobnicate", config_dir / "decoupled.json", scratch_dir("req_unknown"));
    CHECK(unknown.code == 2);
}

TEST_CASE("numerical failures exit 3 with a diagnostic JSON") {
    const fs::path dir = scratch_dir("ill_conditioned");
    const fs::path cfg = write_config("ill_conditioned", R"({
  "model": {
    "nu": 1.0,
    "coupling_family": "position_position",
    "explicit": {"omegas": [1e15], "u_re": [1e-3]}
  },
  "time": {"t_max": 1.0, "steps": 4}
})");
    const Outcome o = run("propagate", cfg, dir);
    CHECK(o.code == 3);
    const json diag = json::parse(slurp(dir / "error.json"));
    CHECK(diag["error"] == "ill_conditioned");
    CHECK(diag["condition_number"].get<double>() > 1e7);
    CHECK(json::parse(o.err)["subcommand"] == "propagate");
    CHECK(json::parse(slurp(dir / "manifest.json"))["exit_code"] == 3);
}

TEST_CASE("thread count resolution") {
    using qbath::cli::resolve_threads;
    CHECK(resolve_threads(5u, "3") == 5);
    CHECK(resolve_threads(std::nullopt, "3") == 3);
    CHECK(resolve_threads(std::nullopt, "x") >= 1);
    CHECK(resolve_threads(std::nullopt, nullptr) >= 1);
}
