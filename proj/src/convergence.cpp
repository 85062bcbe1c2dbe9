#include "homog/convergence.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <thread>

namespace homog {

namespace {

double wall_seconds() {
    using clock = std::chrono::steady_clock;
    return std::chrono::duration<double>(clock::now().time_since_epoch()).count();
}

}  // namespace

int ExperimentPlan::grid_resolution() const {
    if (grid > 0) return grid;
    switch (d) {
        case 1: return 2048;
        case 2: return 512;
        default: return 128;
    }
}

void ExperimentPlan::validate() const {
    if (d < 1 || d > 3) throw std::invalid_argument("plan: dimension must be in 1..3");
    if (!(S > 0.0)) throw std::invalid_argument("plan: S must be positive");
    if (eps.empty()) throw std::invalid_argument("plan: eps ladder is empty");
    for (size_t i = 0; i < eps.size(); ++i) {
        if (!(eps[i] > 0.0)) throw std::invalid_argument("plan: eps must be positive");
        if (i > 0 && !(eps[i] < eps[i - 1]))
            throw std::invalid_argument("plan: eps ladder must be strictly decreasing");
        if (lattice_model()) {
            const double L = S / eps[i];
            if (std::abs(L - std::round(L)) > 1e-9 * std::max(1.0, L))
                throw std::invalid_argument("plan: S/eps must be an integer box side for lattice models");
        }
    }
    if (!(lambda > 0.0)) throw std::invalid_argument("plan: lambda must be positive");
    if (replicas < 1) throw std::invalid_argument("plan: replicas must be >= 1");
    for (double t : times)
        if (t < 0.0) throw std::invalid_argument("plan: time points must be nonnegative");
    solver.validate();
    validate_resolution(grid_resolution());
    // Construction validates width/radius against S.
    (void)TestFunction(f, d, S);
    for (const TestFunctionSpec& p : phis) (void)TestFunction(p, d, S);
}

uint64_t ExperimentPlan::env_seed(size_t eps_index, int replica) const {
    // Pinned: the sub-seed ignores eps, and coordinate-keyed streams make the
    // smaller boxes periodizations of the same master sample. Only lattice
    // models have coordinate-keyed samplers, so Mott always runs fresh.
    if (protocol == Protocol::PINNED && lattice_model())
        return hash_key(seed, TAG_ENV, static_cast<uint64_t>(replica));
    return hash_key(seed, TAG_ENV, static_cast<uint64_t>(replica), eps_index + 1);
}

double weak_solution_gap(const SparseGenerator& gen, std::span<const double> u_eps,
                         const GridField& u, const TestFunction& phi, double m) {
    if (u_eps.size() != gen.size()) throw std::invalid_argument("weak_solution_gap: field mismatch");
    double atom_side = 0.0;
    for (size_t x = 0; x < gen.size(); ++x)
        atom_side += gen.mu[x] * u_eps[x] * phi(gen.macro_pos[x]);
    GridField uphi = u;
    const double h = u.spacing();
    std::array<int, 3> k{0, 0, 0};
    for (size_t idx = 0; idx < uphi.size(); ++idx) {
        Vec xx = vec0();
        for (int i = 0; i < u.d; ++i) xx[i] = h * k[static_cast<size_t>(i)];
        uphi.v[idx] *= phi(xx);
        for (int i = 0; i < u.d; ++i) {
            if (++k[static_cast<size_t>(i)] < u.n) break;
            k[static_cast<size_t>(i)] = 0;
        }
    }
    return std::abs(atom_side - m * quadrature(uphi));
}

std::pair<double, double> strong_solution_gap(const SparseGenerator& gen,
                                              std::span<const double> u_eps, const GridField& u,
                                              double m) {
    if (u_eps.size() != gen.size()) throw std::invalid_argument("strong_solution_gap: field mismatch");
    double mass_atoms = 0.0, dist = 0.0;
    for (size_t x = 0; x < gen.size(); ++x) {
        mass_atoms += gen.mu[x] * u_eps[x] * u_eps[x];
        const double ux = interpolate(u, gen.macro_pos[x]);
        dist += gen.mu[x] * (u_eps[x] - ux) * (u_eps[x] - ux);
    }
    GridField u2 = u;
    for (double& vv : u2.v) vv *= vv;
    return {std::abs(mass_atoms - m * quadrature(u2)), dist};
}

namespace {

/// quadrature( (D grad_* u) . grad_* phi ) with grad_* phi from the analytic
/// gradient projected on the non-degenerate eigenspace.
double effective_flow_quadrature(const EffectiveMatrix& D, const GridField& u,
                                 const TestFunction& phi) {
    const std::array<GridField, 3> gu = grad_star(D, u);
    const double h = u.spacing();
    double acc = 0.0;
    std::array<int, 3> k{0, 0, 0};
    for (size_t idx = 0; idx < u.size(); ++idx) {
        Vec xx = vec0();
        for (int i = 0; i < u.d; ++i) xx[i] = h * k[static_cast<size_t>(i)];
        Vec gphi = phi.gradient(xx);
        Vec gphi_star = vec0();
        for (int i = 0; i < D.d_star; ++i) {
            const Vec& e = D.eigenvectors[static_cast<size_t>(i)];
            const double comp = dot(gphi, e, u.d);
            for (int ax = 0; ax < u.d; ++ax) gphi_star[ax] += comp * e[ax];
        }
        Vec gux = vec0();
        for (int ax = 0; ax < u.d; ++ax) gux[ax] = gu[static_cast<size_t>(ax)].v[idx];
        acc += dot(mat_vec(D.D, gux, u.d), gphi_star, u.d);
        for (int i = 0; i < u.d; ++i) {
            if (++k[static_cast<size_t>(i)] < u.n) break;
            k[static_cast<size_t>(i)] = 0;
        }
    }
    double vol = 1.0;
    for (int i = 0; i < u.d; ++i) vol *= h;
    return vol * acc;
}

}  // namespace

double flow_gap(const SparseGenerator& gen, std::span<const double> u_eps,
                const EffectiveMatrix& D, const GridField& u, const TestFunction& phi, double m) {
    if (u_eps.size() != gen.size()) throw std::invalid_argument("flow_gap: field mismatch");
    std::vector<double> phi_atoms(gen.size());
    for (size_t x = 0; x < gen.size(); ++x) phi_atoms[x] = phi(gen.macro_pos[x]);
    const double atom_side = dirichlet_pairing(gen, u_eps, phi_atoms);
    return std::abs(atom_side - m * effective_flow_quadrature(D, u, phi));
}

double energy_gap(const SparseGenerator& gen, std::span<const double> u_eps,
                  const EffectiveMatrix& D, const GridField& u, double m) {
    const std::array<GridField, 3> gu = grad_star(D, u);
    GridField density(u.d, u.n, u.S);
    for (size_t idx = 0; idx < u.size(); ++idx) {
        Vec g = vec0();
        for (int ax = 0; ax < u.d; ++ax) g[ax] = gu[static_cast<size_t>(ax)].v[idx];
        density.v[idx] = quad_form(D.D, g, u.d);
    }
    return std::abs(dirichlet_energy(gen, u_eps) - m * quadrature(density));
}

namespace {

struct RowInputs {
    const ExperimentPlan* plan;
    const EffectiveMatrix* D;
    double m;
    const GridField* u;                        // effective resolvent of f
    const GridField* f_grid;                   // f sampled on the grid
    const std::vector<GridField>* semigroups;  // brownian P_{t_k} f
};

LadderRow compute_row(const RowInputs& in, size_t eps_index, int replica) {
    const ExperimentPlan& plan = *in.plan;
    LadderRow row;
    row.eps = plan.eps[eps_index];
    row.replica = replica;
    const double t0 = wall_seconds();
    try {
        BoxSpec box{plan.d, plan.S / row.eps};
        if (plan.lattice_model()) box.L = std::round(box.L);
        const Environment env =
            generate_environment(box, plan.kernel, plan.env_seed(eps_index, replica));
        const SparseGenerator gen = assemble(env, row.eps);
        const TestFunction f(plan.f, plan.d, plan.S);

        const AtomField f_eps = restrict_to_atoms(gen, [&](const Vec& x) { return f(x); });
        // Certify the restricted source converges to f before drawing any
        // conclusions from this row.
        std::tie(row.f_cert_mass, row.f_cert_l2) =
            strong_solution_gap(gen, f_eps.v, *in.f_grid, in.m);

        auto [u_eps, stats] = solve_massive_poisson(gen, plan.lambda, f_eps, plan.solver);
        row.cg_iters = stats.iterations;
        row.residual = stats.rel_residual;

        for (const TestFunctionSpec& ps : plan.phis) {
            const TestFunction phi(ps, plan.d, plan.S);
            row.weak_gaps.push_back(weak_solution_gap(gen, u_eps.v, *in.u, phi, in.m));
            row.flow_gaps.push_back(flow_gap(gen, u_eps.v, *in.D, *in.u, phi, in.m));
        }
        std::tie(row.mass_gap, row.atomwise_l2) = strong_solution_gap(gen, u_eps.v, *in.u, in.m);
        row.energy_gap = energy_gap(gen, u_eps.v, *in.D, *in.u, in.m);

        // The solved field is the resolvent of the restricted source, so the
        // resolvent metrics reuse it; the L2 one coincides with atomwise_l2.
        row.resolvent_l2 = row.atomwise_l2;
        double l1 = 0.0;
        for (size_t x = 0; x < gen.size(); ++x)
            l1 += gen.mu[x] * std::abs(u_eps.v[x] - interpolate(*in.u, gen.macro_pos[x]));
        row.resolvent_l1 = l1;

        for (size_t k = 0; k < plan.times.size(); ++k) {
            const AtomField v_eps = semigroup_action(gen, plan.times[k], f_eps, plan.solver);
            const GridField& v = (*in.semigroups)[k];
            double l2 = 0.0, l1t = 0.0;
            for (size_t x = 0; x < gen.size(); ++x) {
                const double diff = v_eps.v[x] - interpolate(v, gen.macro_pos[x]);
                l2 += gen.mu[x] * diff * diff;
                l1t += gen.mu[x] * std::abs(diff);
            }
            row.semigroup_l2.push_back(l2);
            row.semigroup_l1.push_back(l1t);
        }
    } catch (const SolveFailure& ex) {
        row.error = std::string("solver: ") + ex.what();
    } catch (const std::exception& ex) {
        row.error = ex.what();
    }
    row.seconds = wall_seconds() - t0;
    return row;
}

}  // namespace

ConvergenceReport run_ladder(const ExperimentPlan& plan, int jobs) {
    plan.validate();
    const double t0 = wall_seconds();
    ConvergenceReport report;
    report.plan = plan;

    // Limit objects come from the largest boxes of the ladder.
    const size_t last = plan.eps.size() - 1;
    std::vector<Environment> big;
    big.reserve(static_cast<size_t>(plan.replicas));
    for (int r = 0; r < plan.replicas; ++r) {
        BoxSpec box{plan.d, plan.S / plan.eps[last]};
        big.push_back(generate_environment(box, plan.kernel, plan.env_seed(last, r)));
    }
    report.effective = estimate_D(big, plan.solver, plan.gamma_tol);

    {
        std::vector<double> ms, l0, l1, l2;
        for (const Environment& env : big) {
            ms.push_back(estimate_intensity(env).value);
            l0.push_back(estimate_lambda_k(env, 0).value);
            l1.push_back(estimate_lambda_k(env, 1).value);
            l2.push_back(estimate_lambda_k(env, 2).value);
        }
        report.m = aggregate(ms);
        report.lambda0 = aggregate(l0);
        report.lambda1 = aggregate(l1);
        report.lambda2 = aggregate(l2);
    }
    big.clear();
    big.shrink_to_fit();

    const TestFunction f(plan.f, plan.d, plan.S);
    const int n = plan.grid_resolution();
    const GridField f_grid = grid_from_function(f, n);
    const GridField u = solve_effective(report.effective.matrix.D, plan.lambda, f_grid);
    std::vector<GridField> semigroups;
    for (double t : plan.times)
        semigroups.push_back(brownian_semigroup(report.effective.matrix.D, t, f_grid));

    RowInputs inputs{&plan, &report.effective.matrix, report.m.value, &u, &f_grid, &semigroups};

    const size_t n_rows = plan.eps.size() * static_cast<size_t>(plan.replicas);
    report.rows.resize(n_rows);
    auto row_of = [&](size_t task) {
        const size_t eps_index = task / static_cast<size_t>(plan.replicas);
        const int replica = static_cast<int>(task % static_cast<size_t>(plan.replicas));
        report.rows[task] = compute_row(inputs, eps_index, replica);
    };
    if (jobs <= 1 || n_rows <= 1) {
        for (size_t task = 0; task < n_rows; ++task) row_of(task);
    } else {
        std::atomic<size_t> next{0};
        std::vector<std::thread> pool;
        const int k = std::min<size_t>(static_cast<size_t>(jobs), n_rows);
        pool.reserve(static_cast<size_t>(k));
        for (int w = 0; w < k; ++w)
            pool.emplace_back([&]() {
                while (true) {
                    const size_t task = next.fetch_add(1);
                    if (task >= n_rows) return;
                    row_of(task);
                }
            });
        for (std::thread& th : pool) th.join();
    }

    // Soft consistency checks, never fatal.
    const double quad_f2 = [&]() {
        GridField f2 = f_grid;
        for (double& vv : f2.v) vv *= vv;
        return quadrature(f2);
    }();
    for (const LadderRow& row : report.rows) {
        if (!row.error.empty()) {
            report.warnings.push_back("eps=" + std::to_string(row.eps) + " replica=" +
                                      std::to_string(row.replica) + " failed: " + row.error);
            continue;
        }
        if (row.f_cert_mass > plan.f_cert_tol || row.f_cert_l2 > plan.f_cert_tol)
            report.warnings.push_back(
                "eps=" + std::to_string(row.eps) + " replica=" + std::to_string(row.replica) +
                ": restricted source not certified (mass gap " + std::to_string(row.f_cert_mass) +
                ", atomwise " + std::to_string(row.f_cert_l2) + " vs tol " +
                std::to_string(plan.f_cert_tol) + ")");
        // Triangle-inequality proxy: sqrt(resolvent L2 gap) should not exceed
        // the Laplace quadrature of sqrt(semigroup L2 gaps) plus the tail the
        // time grid cannot see. Coarse time grids make this lenient only.
        if (plan.times.size() >= 2) {
            double quad = 0.0;
            for (size_t k = 0; k + 1 < plan.times.size(); ++k) {
                const double a = plan.times[k], b = plan.times[k + 1];
                const double ga = std::exp(-plan.lambda * a) * std::sqrt(row.semigroup_l2[k]);
                const double gb = std::exp(-plan.lambda * b) * std::sqrt(row.semigroup_l2[k + 1]);
                quad += 0.5 * (b - a) * (ga + gb);
            }
            const double cf = 2.0 * std::sqrt((1.0 + report.m.value) * quad_f2);
            const double uncovered =
                (1.0 - std::exp(-plan.lambda * plan.times.front())) / plan.lambda +
                std::exp(-plan.lambda * plan.times.back()) / plan.lambda;
            const double bound = 1.1 * (quad + cf * uncovered) + 1e-9;
            if (std::sqrt(row.resolvent_l2) > bound)
                report.warnings.push_back("eps=" + std::to_string(row.eps) + " replica=" +
                                          std::to_string(row.replica) +
                                          ": resolvent gap exceeds the semigroup quadrature proxy");
        }
    }
    report.seconds = wall_seconds() - t0;
    return report;
}

}  // namespace homog
