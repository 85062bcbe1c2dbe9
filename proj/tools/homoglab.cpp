#include <cstdio>
#include <filesystem>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"

#include "homog/config.hpp"
#include "homog/report.hpp"

using namespace homog;
using nlohmann::json;

namespace {

constexpr int EXIT_CONFIG = 2;
constexpr int EXIT_RUNTIME = 3;
constexpr int EXIT_SOLVER = 4;

struct Cli {
    std::string config_path;
    std::string out_dir;
    uint64_t seed = 0;
    bool seed_given = false;
    int jobs = 1;
};

std::string out_path(const Cli& cli, const RunConfig& cfg, const std::string& name) {
    std::filesystem::path dir = cli.out_dir.empty() ? cfg.output.dir : cli.out_dir;
    std::filesystem::create_directories(dir);
    return (dir / name).string();
}

RunConfig load(const Cli& cli) {
    RunConfig cfg = load_config(cli.config_path);
    if (cli.seed_given) cfg.plan.seed = cli.seed;
    return cfg;
}

void emit_error(const std::string& kind, const std::string& what) {
    json j{{"error", kind}, {"message", what}};
    std::fprintf(stderr, "%s\n", j.dump().c_str());
}

json base_report(const Cli& cli, const RunConfig& cfg, const std::string& command) {
    json j;
    j["schema"] = 1;
    j["command"] = command;
    j["seed"] = cfg.plan.seed;
    j["config"] = cli.config_path;
    return j;
}

json palm_block(const PalmEstimate& e) {
    return json{{"value", e.value}, {"std_error", e.std_error}, {"samples", e.samples}};
}

std::vector<Environment> sample_boxes(const RunConfig& cfg) {
    const ExperimentPlan& plan = cfg.plan;
    BoxSpec box{plan.d, cfg.box_side()};
    std::vector<Environment> envs;
    envs.reserve(static_cast<size_t>(plan.replicas));
    for (int r = 0; r < plan.replicas; ++r)
        envs.push_back(
            generate_environment(box, plan.kernel, hash_key(plan.seed, TAG_ENV, uint64_t(r))));
    return envs;
}

int cmd_gen_env(const Cli& cli) {
    const RunConfig cfg = load(cli);
    BoxSpec box{cfg.plan.d, cfg.box_side()};
    const Environment env = generate_environment(box, cfg.plan.kernel, cfg.plan.seed);
    const std::string path = out_path(cli, cfg, "env.txt");
    atomic_write(path, serialize_environment(env));
    std::printf("gen-env: %s, %zu atoms, %zu edges -> %s\n", env.model.c_str(), env.atoms.size(),
                env.edges.size(), path.c_str());
    return 0;
}

int cmd_palm(const Cli& cli) {
    const RunConfig cfg = load(cli);
    const std::vector<Environment> envs = sample_boxes(cfg);
    std::vector<double> ms, l0, l1, l2;
    for (const Environment& env : envs) {
        ms.push_back(estimate_intensity(env).value);
        l0.push_back(estimate_lambda_k(env, 0).value);
        l1.push_back(estimate_lambda_k(env, 1).value);
        l2.push_back(estimate_lambda_k(env, 2).value);
    }
    const PalmEstimate m = aggregate(ms), e0 = aggregate(l0), e1 = aggregate(l1),
                       e2 = aggregate(l2);
    json j = base_report(cli, cfg, "palm");
    j["palm"] = json{{"m", palm_block(m)},
                     {"lambda0", palm_block(e0)},
                     {"lambda1", palm_block(e1)},
                     {"lambda2", palm_block(e2)}};
    j["replicas"] = cfg.plan.replicas;
    atomic_write(out_path(cli, cfg, "report.json"), j.dump(2) + "\n");
    std::printf("palm: m = %.6g (+-%.2g), lambda0 = %.6g, lambda1 = %.6g, lambda2 = %.6g\n",
                m.value, m.std_error, e0.value, e1.value, e2.value);
    return 0;
}

int cmd_effective_matrix(const Cli& cli) {
    const RunConfig cfg = load(cli);
    const std::vector<Environment> envs = sample_boxes(cfg);
    const EffectiveMatrixResult res = estimate_D(envs, cfg.plan.solver, cfg.plan.gamma_tol);
    const EffectiveMatrix& em = res.matrix;
    const int d = em.d;

    json j = base_report(cli, cfg, "effective-matrix");
    json ej;
    json D = json::array(), se = json::array(), ub = json::array();
    for (int i = 0; i < d; ++i) {
        json r1 = json::array(), r2 = json::array(), r3 = json::array();
        for (int jj = 0; jj < d; ++jj) {
            r1.push_back(em.D[size_t(i)][size_t(jj)]);
            r2.push_back(em.std_error[size_t(i)][size_t(jj)]);
            r3.push_back(res.upper_bound[size_t(i)][size_t(jj)]);
        }
        D.push_back(r1);
        se.push_back(r2);
        ub.push_back(r3);
    }
    ej["D"] = D;
    ej["stderr"] = se;
    ej["upper_bound"] = ub;
    json evals = json::array(), evecs = json::array();
    for (int kk = 0; kk < d; ++kk) {
        evals.push_back(em.eigenvalues[kk]);
        json v = json::array();
        for (int i = 0; i < d; ++i) v.push_back(em.eigenvectors[size_t(kk)][i]);
        evecs.push_back(v);
    }
    ej["eigenvalues"] = evals;
    ej["eigenvectors"] = evecs;
    ej["d_star"] = em.d_star;
    ej["gamma_tol"] = em.gamma_tol;
    ej["flux_discrepancy"] = res.flux_discrepancy;
    ej["samples"] = em.samples;
    ej["iterations"] = res.total_iterations;
    j["effective_matrix"] = ej;
    j["warnings"] = res.warnings;
    atomic_write(out_path(cli, cfg, "report.json"), j.dump(2) + "\n");

    std::string diag;
    for (int i = 0; i < d; ++i) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%s%.6g", i ? ", " : "", em.D[size_t(i)][size_t(i)]);
        diag += buf;
    }
    std::printf("effective-matrix: diag(D) = [%s], d_star = %d, %d samples\n", diag.c_str(),
                em.d_star, em.samples);
    return 0;
}

/// Shared by poisson and semigroup: one environment at the smallest eps.
struct MicroRun {
    RunConfig cfg;
    double eps = 1.0;
    Environment env;
    SparseGenerator gen;
    AtomField f_eps;
};

MicroRun micro_setup(const Cli& cli) {
    MicroRun run;
    run.cfg = load(cli);
    ExperimentPlan& plan = run.cfg.plan;
    if (plan.eps.empty()) {
        run.eps = 1.0;
        plan.S = run.cfg.box_side();
    } else {
        run.eps = plan.eps.back();
    }
    BoxSpec box{plan.d, plan.S / run.eps};
    if (plan.lattice_model()) box.L = std::round(box.L);
    run.env = generate_environment(box, plan.kernel, hash_key(plan.seed, TAG_ENV, uint64_t(0)));
    run.gen = assemble(run.env, run.eps);
    const TestFunction f(plan.f, plan.d, plan.S);
    run.f_eps = restrict_to_atoms(run.gen, [&](const Vec& x) { return f(x); });
    return run;
}

int cmd_poisson(const Cli& cli) {
    MicroRun run = micro_setup(cli);
    const ExperimentPlan& plan = run.cfg.plan;
    auto [u, stats] = solve_massive_poisson(run.gen, plan.lambda, run.f_eps, plan.solver);

    auto mu_mass = [&](const std::vector<double>& w) {
        double acc = 0.0;
        for (size_t x = 0; x < w.size(); ++x) acc += run.gen.mu[x] * w[x];
        return acc;
    };
    const double mass_u = mu_mass(u.v);
    const double mass_f = mu_mass(run.f_eps.v);
    const double energy = dirichlet_energy(run.gen, u.v);
    const double pair_uf = mu_inner(run.gen, u.v, run.f_eps.v);
    const double norm2 = mu_inner(run.gen, u.v, u.v);

    json j = base_report(cli, run.cfg, "poisson");
    j["eps"] = run.eps;
    j["lambda"] = plan.lambda;
    j["atoms"] = run.env.atoms.size();
    j["solver"] = json{{"iterations", stats.iterations},
                       {"residual", stats.rel_residual},
                       {"seconds", stats.seconds},
                       {"bound_monotone", stats.bound_monotone}};
    j["mu_u"] = mass_u;
    j["mu_f"] = mass_f;
    j["mass_identity_gap"] = std::abs(mass_u - mass_f / plan.lambda);
    j["dirichlet_energy"] = energy;
    j["energy_identity_gap"] = std::abs(pair_uf - plan.lambda * norm2 - energy);
    atomic_write(out_path(cli, run.cfg, "report.json"), j.dump(2) + "\n");
    std::printf("poisson: eps = %.6g, %zu atoms, %ld iters, residual %.3g, energy %.6g\n", run.eps,
                run.env.atoms.size(), stats.iterations, stats.rel_residual, energy);
    return 0;
}

int cmd_semigroup(const Cli& cli) {
    MicroRun run = micro_setup(cli);
    const ExperimentPlan& plan = run.cfg.plan;
    std::vector<double> times = plan.times;
    if (times.empty()) times = {1.0};

    json j = base_report(cli, run.cfg, "semigroup");
    j["eps"] = run.eps;
    j["atoms"] = run.env.atoms.size();
    auto mu_mass = [&](const std::vector<double>& w) {
        double acc = 0.0;
        for (size_t x = 0; x < w.size(); ++x) acc += run.gen.mu[x] * w[x];
        return acc;
    };
    const double mass_f = mu_mass(run.f_eps.v);
    const double norm_f = mu_norm(run.gen, run.f_eps.v);
    json rows = json::array();
    double max_mass_gap = 0.0;
    for (double t : times) {
        SolveStats stats;
        const AtomField v = semigroup_action(run.gen, t, run.f_eps, plan.solver, &stats);
        const double mass_v = mu_mass(v.v);
        const double norm_v = mu_norm(run.gen, v.v);
        max_mass_gap = std::max(max_mass_gap, std::abs(mass_v - mass_f));
        rows.push_back(json{{"t", t},
                            {"mu_mass", mass_v},
                            {"mass_gap", std::abs(mass_v - mass_f)},
                            {"l2_norm", norm_v},
                            {"contraction_ok", norm_v <= norm_f * (1.0 + 1e-12)},
                            {"terms", stats.iterations}});
    }
    j["mu_f"] = mass_f;
    j["times"] = rows;
    atomic_write(out_path(cli, run.cfg, "report.json"), j.dump(2) + "\n");
    std::printf("semigroup: eps = %.6g, %zu atoms, %zu time points, max mass gap %.3g\n", run.eps,
                run.env.atoms.size(), times.size(), max_mass_gap);
    return 0;
}

int cmd_converge(const Cli& cli) {
    const RunConfig cfg = load(cli);
    const ConvergenceReport report = run_ladder(cfg.plan, cli.jobs);
    atomic_write(out_path(cli, cfg, "report.json"), report_json(report, cli.config_path));
    atomic_write(out_path(cli, cfg, "ladder.csv"), ladder_csv(report));

    for (const LadderRow& row : report.rows)
        if (!row.error.empty()) {
            const bool solver_fail = row.error.rfind("solver: ", 0) == 0;
            emit_error(solver_fail ? "solver" : "runtime",
                       "ladder cell eps=" + std::to_string(row.eps) + " replica=" +
                           std::to_string(row.replica) + ": " + row.error);
            return solver_fail ? EXIT_SOLVER : EXIT_RUNTIME;
        }

    const EffectiveMatrix& em = report.effective.matrix;
    std::string diag;
    for (int i = 0; i < em.d; ++i) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%s%.6g", i ? ", " : "", em.D[size_t(i)][size_t(i)]);
        diag += buf;
    }
    double max_gap = 0.0;
    const double eps_min = cfg.plan.eps.back();
    for (const LadderRow& row : report.rows) {
        if (row.eps != eps_min) continue;
        for (double g : row.weak_gaps) max_gap = std::max(max_gap, g);
        max_gap = std::max({max_gap, row.mass_gap, row.atomwise_l2, row.energy_gap});
        for (double g : row.flow_gaps) max_gap = std::max(max_gap, g);
        for (double g : row.semigroup_l2) max_gap = std::max(max_gap, g);
    }
    std::printf("converge: diag(D) = [%s], max gap at eps = %.6g: %.6g, %zu rows, %zu warnings\n",
                diag.c_str(), eps_min, max_gap, report.rows.size(), report.warnings.size());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"random-walk homogenization laboratory"};
    app.require_subcommand(1);

    Cli cli;
    std::string command;
    for (const char* name : {"gen-env", "effective-matrix", "poisson", "semigroup", "converge",
                             "palm"}) {
        CLI::App* sub = app.add_subcommand(name);
        sub->add_option("--config", cli.config_path, "config file path")->required();
        sub->add_option("--seed", cli.seed, "override config seed");
        sub->add_option("--jobs", cli.jobs, "worker threads for ladder rows");
        sub->add_option("--out", cli.out_dir, "output directory override");
        sub->callback([&command, name]() { command = name; });
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) ? EXIT_CONFIG : 0;
    }
    for (CLI::App* sub : app.get_subcommands())
        cli.seed_given = cli.seed_given || sub->count("--seed") > 0;

    try {
        if (command == "gen-env") return cmd_gen_env(cli);
        if (command == "palm") return cmd_palm(cli);
        if (command == "effective-matrix") return cmd_effective_matrix(cli);
        if (command == "poisson") return cmd_poisson(cli);
        if (command == "semigroup") return cmd_semigroup(cli);
        if (command == "converge") return cmd_converge(cli);
        emit_error("config", "unknown command");
        return EXIT_CONFIG;
    } catch (const ConfigError& e) {
        emit_error("config", e.what());
        return EXIT_CONFIG;
    } catch (const SolveFailure& e) {
        emit_error("solver", e.what());
        return EXIT_SOLVER;
    } catch (const GenerationError& e) {
        emit_error("runtime", e.what());
        return EXIT_RUNTIME;
    } catch (const std::invalid_argument& e) {
        emit_error("config", e.what());
        return EXIT_CONFIG;
    } catch (const std::exception& e) {
        emit_error("runtime", e.what());
        return EXIT_RUNTIME;
    }
}
