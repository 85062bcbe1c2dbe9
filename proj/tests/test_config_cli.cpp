#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"
#include "json.hpp"

#include "homog/config.hpp"
#include "homog/environment.hpp"

using namespace homog;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct RunResult {
    int code = -1;
    std::string out, err;
};

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

fs::path fresh_dir(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / "homoglab_cli" / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

fs::path write_config(const fs::path& dir, const std::string& body) {
    const fs::path p = dir / "run.ini";
    std::ofstream out(p, std::ios::binary);
    out << body;
    return p;
}

RunResult run(const std::string& args, const fs::path& dir) {
    const fs::path out_file = dir / "stdout.txt";
    const fs::path err_file = dir / "stderr.txt";
    const std::string cmd = std::string(HOMOGLAB_BIN) + " " + args + " >" + out_file.string() +
                            " 2>" + err_file.string();
    const int raw = std::system(cmd.c_str());
    RunResult r;
    r.code = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
    r.out = slurp(out_file);
    r.err = slurp(err_file);
    return r;
}

json report_of(const fs::path& dir) { return json::parse(slurp(dir / "report.json")); }

const std::string ring_env =
    "[environment]\n"
    "model = nn_conductance\n"
    "d = 1\n"
    "law = two_point\n"
    "c1 = 1\n"
    "c2 = 4\n"
    "q = 0.5\n"
    "seed = 7\n"
    "L = 1024\n";

const std::string ring_ladder =
    "[ladder]\n"
    "S = 8\n"
    "eps = 1/8\n"
    "lambda = 1\n"
    "f = gaussian:4,0.5\n"
    "phis = cosine:1\n"
    "times = 0.1\n";

}  // namespace

TEST_CASE("gen-env writes the full lattice when every bond is open") {
    const fs::path dir = fresh_dir("gen_env_full");
    const fs::path cfg = write_config(dir,
                                      "[environment]\n"
                                      "model = percolation\n"
                                      "d = 2\n"
                                      "p = 1\n"
                                      "L = 6\n"
                                      "seed = 3\n");
    const RunResult r = run("gen-env --config " + cfg.string() + " --out " + dir.string(), dir);
    CHECK(r.code == 0);
    CHECK(r.out.find("36 atoms") != std::string::npos);
    const Environment env = load_environment((dir / "env.txt").string());
    CHECK(env.atoms.size() == 36);
    CHECK(env.edges.size() == 72);
}

TEST_CASE("gen-env output is byte-identical across reruns") {
    const fs::path a = fresh_dir("gen_env_a");
    const fs::path b = fresh_dir("gen_env_b");
    const std::string body =
        "[environment]\n"
        "model = percolation\n"
        "d = 2\n"
        "p = 0.7\n"
        "L = 32\n"
        "seed = 11\n";
    const fs::path ca = write_config(a, body);
    const fs::path cb = write_config(b, body);
    CHECK(run("gen-env --config " + ca.string() + " --out " + a.string(), a).code == 0);
    CHECK(run("gen-env --config " + cb.string() + " --out " + b.string(), b).code == 0);
    CHECK(slurp(a / "env.txt") == slurp(b / "env.txt"));
}

TEST_CASE("an unproductive percolation box exits with a runtime error") {
    const fs::path dir = fresh_dir("gen_env_empty");
    const fs::path cfg = write_config(dir,
                                      "[environment]\n"
                                      "model = percolation\n"
                                      "d = 2\n"
                                      "p = 0.001\n"
                                      "L = 8\n"
                                      "seed = 1\n");
    const RunResult r = run("gen-env --config " + cfg.string() + " --out " + dir.string(), dir);
    CHECK(r.code == 3);
    CHECK(r.err.find("empty cluster") != std::string::npos);
    CHECK(r.err.find("\"error\":\"runtime\"") != std::string::npos);
}

TEST_CASE("a config without an environment section is rejected") {
    const fs::path dir = fresh_dir("cfg_no_env");
    const fs::path cfg = write_config(dir, "[ladder]\nS = 8\n");
    const RunResult r = run("converge --config " + cfg.string() + " --out " + dir.string(), dir);
    CHECK(r.code == 2);
    CHECK(r.err.find("missing [environment] section") != std::string::npos);
}

TEST_CASE("unknown keys are rejected with their location") {
    const fs::path dir = fresh_dir("cfg_unknown_key");
    const fs::path cfg = write_config(dir,
                                      "[environment]\n"
                                      "model = percolation\n"
                                      "d = 2\n"
                                      "p = 0.7\n"
                                      "L = 8\n"
                                      "porosity = 0.4\n");
    const RunResult r = run("gen-env --config " + cfg.string() + " --out " + dir.string(), dir);
    CHECK(r.code == 2);
    CHECK(r.err.find("unknown key 'porosity'") != std::string::npos);
    CHECK(r.err.find("line 6") != std::string::npos);
}

TEST_CASE("a key claimed by the wrong model is rejected") {
    const fs::path dir = fresh_dir("cfg_wrong_model_key");
    const fs::path cfg = write_config(dir,
                                      "[environment]\n"
                                      "model = percolation\n"
                                      "d = 2\n"
                                      "p = 0.7\n"
                                      "L = 8\n"
                                      "rho = 1.0\n");
    const RunResult r = run("gen-env --config " + cfg.string() + " --out " + dir.string(), dir);
    CHECK(r.code == 2);
    CHECK(r.err.find("rho") != std::string::npos);
}

TEST_CASE("a malformed test function spec is a config error") {
    const fs::path dir = fresh_dir("cfg_bad_f");
    const fs::path cfg = write_config(dir, ring_env + "[ladder]\nf = gaussian:4\n");
    const RunResult r = run("poisson --config " + cfg.string() + " --out " + dir.string(), dir);
    CHECK(r.code == 2);
    CHECK(r.err.find("'f'") != std::string::npos);
}

TEST_CASE("the effective-matrix command agrees with an in-process oracle") {
    const fs::path dir = fresh_dir("effmat_ring");
    const fs::path cfg = write_config(dir, ring_env);
    const RunResult r =
        run("effective-matrix --config " + cfg.string() + " --out " + dir.string(), dir);
    REQUIRE(r.code == 0);
    CHECK(r.out.find("effective-matrix: diag(D)") != std::string::npos);

    // Replica 0 of the command uses the derived sub-seed, not the raw seed.
    const RunConfig parsed = load_config(cfg.string());
    BoxSpec box{parsed.plan.d, parsed.box_side()};
    const Environment env =
        generate_environment(box, parsed.plan.kernel, hash_key(parsed.plan.seed, TAG_ENV, 0));
    REQUIRE(env.edges.size() == 1024);
    double inv_sum = 0.0;
    for (const EnvEdge& e : env.edges) inv_sum += 1.0 / e.c;
    const double harmonic = static_cast<double>(env.edges.size()) / inv_sum;

    const json rep = report_of(dir);
    CHECK(rep["command"] == "effective-matrix");
    const double D00 = rep["effective_matrix"]["D"][0][0].get<double>();
    CHECK(D00 == doctest::Approx(harmonic).epsilon(1e-8));
    CHECK(rep["effective_matrix"]["d_star"] == 1);
    const double ub = rep["effective_matrix"]["upper_bound"][0][0].get<double>();
    CHECK(ub >= D00);
}

TEST_CASE("the poisson command certifies its conservation identities") {
    const fs::path dir = fresh_dir("poisson_ring");
    const fs::path cfg = write_config(dir, ring_env + ring_ladder);
    const RunResult r = run("poisson --config " + cfg.string() + " --out " + dir.string(), dir);
    REQUIRE(r.code == 0);
    const json rep = report_of(dir);
    CHECK(rep["mass_identity_gap"].get<double>() <= 1e-8 * rep["mu_f"].get<double>());
    CHECK(rep["energy_identity_gap"].get<double>() <= 1e-8);
    CHECK(rep["solver"]["bound_monotone"].is_boolean());
    CHECK(rep["solver"]["residual"].get<double>() <= 1e-10);
}

TEST_CASE("the semigroup command conserves mass and contracts") {
    const fs::path dir = fresh_dir("semigroup_ring");
    const fs::path cfg = write_config(dir, ring_env + ring_ladder);
    const RunResult r = run("semigroup --config " + cfg.string() + " --out " + dir.string(), dir);
    REQUIRE(r.code == 0);
    const json rep = report_of(dir);
    REQUIRE(rep["times"].size() == 1);
    CHECK(rep["times"][0]["contraction_ok"] == true);
    CHECK(rep["times"][0]["mass_gap"].get<double>() <= 1e-8 * rep["mu_f"].get<double>());
}

TEST_CASE("a single-rung ladder emits exactly one data row") {
    const fs::path dir = fresh_dir("converge_single");
    const fs::path cfg = write_config(dir,
                                      "[environment]\n"
                                      "model = nn_conductance\n"
                                      "d = 1\n"
                                      "law = constant\n"
                                      "c = 1\n"
                                      "seed = 5\n" +
                                          ring_ladder);
    const RunResult r = run("converge --config " + cfg.string() + " --out " + dir.string(), dir);
    REQUIRE(r.code == 0);
    const json rep = report_of(dir);
    CHECK(rep["rows"].size() == 1);
    CHECK(rep["rows"][0]["eps"].get<double>() == 0.125);

    const std::string csv = slurp(dir / "ladder.csv");
    size_t lines = 0;
    for (char ch : csv)
        if (ch == '\n') ++lines;
    CHECK(lines == 2);
    CHECK(csv.rfind("eps,", 0) == 0);
}

TEST_CASE("a seed override flows into the report") {
    const fs::path dir = fresh_dir("converge_seed");
    const fs::path cfg = write_config(dir,
                                      "[environment]\n"
                                      "model = nn_conductance\n"
                                      "d = 1\n"
                                      "law = constant\n"
                                      "c = 1\n"
                                      "seed = 5\n" +
                                          ring_ladder);
    const RunResult r =
        run("converge --config " + cfg.string() + " --seed 42 --out " + dir.string(), dir);
    REQUIRE(r.code == 0);
    CHECK(report_of(dir)["seed"] == 42);
}

TEST_CASE("fraction lists in configs parse as ratios") {
    const fs::path cfg_text = ring_env +
                              "[ladder]\n"
                              "eps = 1/8, 1/16\n";
    const RunConfig cfg = parse_config_text(cfg_text, "inline");
    REQUIRE(cfg.plan.eps.size() == 2);
    CHECK(cfg.plan.eps[0] == 0.125);
    CHECK(cfg.plan.eps[1] == 0.0625);
}

TEST_CASE("the packaged fixtures load and validate") {
    for (const char* name : {"ring1d.ini", "perc2d.ini"}) {
        const std::string path = std::string(FIXTURE_DIR) + "/" + name;
        const RunConfig cfg = load_config(path);
        CHECK_NOTHROW(cfg.plan.validate());
    }
}
