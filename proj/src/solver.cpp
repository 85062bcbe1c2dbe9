#include "homog/solver.hpp"

#include <chrono>
#include <cmath>

namespace homog {

namespace {

double now_seconds() {
    using clock = std::chrono::steady_clock;
    return std::chrono::duration<double>(clock::now().time_since_epoch()).count();
}

// 8-point Gauss-Legendre rule on [-1, 1].
constexpr int GL_N = 8;
constexpr double GL_X[GL_N] = {-0.9602898564975363, -0.7966664774136267, -0.5255324099163290,
                               -0.1834346424956498, 0.1834346424956498,  0.5255324099163290,
                               0.7966664774136267,  0.9602898564975363};
constexpr double GL_W[GL_N] = {0.1012285362903763, 0.2223810344533745, 0.3137066458778873,
                               0.3626837833783620, 0.3626837833783620, 0.3137066458778873,
                               0.2223810344533745, 0.1012285362903763};

}  // namespace

std::pair<AtomField, SolveStats> solve_massive_poisson(const SparseGenerator& gen, double lambda,
                                                       const AtomField& f, const SolveOptions& opts) {
    opts.validate();
    if (!(lambda > 0.0)) throw std::invalid_argument("solve_massive_poisson: lambda must be positive");
    if (f.size() != gen.size()) throw std::invalid_argument("solve_massive_poisson: field mismatch");
    const size_t N = gen.size();
    const long cap = opts.max_iter == -1 ? 20 * static_cast<long>(N) : opts.max_iter;
    const double t0 = now_seconds();

    AtomField x(gen);
    SolveStats stats;
    const double bnorm = mu_norm(gen, f.v);
    if (bnorm == 0.0) {
        stats.seconds = now_seconds() - t0;
        return {std::move(x), stats};
    }

    // A u = lambda u - L u, SPD in <.,.>_mu with spectrum >= lambda.
    std::vector<double> r = f.v;
    std::vector<double> z(N), p(N), Ap(N);
    const bool pc = opts.jacobi;
    const double inv_eps2 = 1.0 / (gen.eps * gen.eps);
    auto precondition = [&](const std::vector<double>& in, std::vector<double>& out) {
        if (!pc) {
            out = in;
            return;
        }
        for (size_t i = 0; i < N; ++i) out[i] = in[i] / (lambda + inv_eps2 * gen.diag_rate[i]);
    };

    precondition(r, z);
    p = z;
    double rz = mu_inner(gen, r, z);
    double rnorm = mu_norm(gen, r);
    double checkpoint = rnorm;

    while (rnorm > opts.tol * bnorm) {
        if (stats.iterations >= cap) {
            stats.rel_residual = rnorm / bnorm;
            stats.seconds = now_seconds() - t0;
            throw SolveFailure("solve_massive_poisson: iteration cap exceeded", stats);
        }
        apply_into(gen, p, Ap);
        for (size_t i = 0; i < N; ++i) Ap[i] = lambda * p[i] - Ap[i];
        const double pAp = mu_inner(gen, p, Ap);
        const double alpha = rz / pAp;
        for (size_t i = 0; i < N; ++i) x.v[i] += alpha * p[i];
        for (size_t i = 0; i < N; ++i) r[i] -= alpha * Ap[i];
        precondition(r, z);
        const double rz_next = mu_inner(gen, r, z);
        const double beta = rz_next / rz;
        rz = rz_next;
        for (size_t i = 0; i < N; ++i) p[i] = z[i] + beta * p[i];
        ++stats.iterations;
        rnorm = mu_norm(gen, r);
        if (stats.iterations % 10 == 0) {
            // ||error||_A <= ||r||_mu / sqrt(lambda); track the bound between
            // checkpoints, with slack for rounding.
            if (rnorm > checkpoint * (1.0 + 1e-9)) stats.bound_monotone = false;
            checkpoint = rnorm;
        }
    }
    stats.rel_residual = rnorm / bnorm;
    stats.seconds = now_seconds() - t0;
    return {std::move(x), stats};
}

AtomField semigroup_action(const SparseGenerator& gen, double t, const AtomField& f,
                           const SolveOptions& opts, SolveStats* stats) {
    opts.validate();
    if (t < 0.0) throw std::invalid_argument("semigroup_action: t must be nonnegative");
    if (f.size() != gen.size()) throw std::invalid_argument("semigroup_action: field mismatch");
    const double t0 = now_seconds();
    const size_t N = gen.size();

    double max_rate = 0.0;
    for (double r : gen.diag_rate) max_rate = std::max(max_rate, r);
    const double big_lambda = max_rate / (gen.eps * gen.eps);
    const double a = big_lambda * t;

    AtomField out(gen);
    if (a == 0.0) {
        out.v = f.v;
        if (stats) stats->seconds = now_seconds() - t0;
        return out;
    }

    const double log_a = std::log(a);
    std::vector<double> v = f.v;
    std::vector<double> Lv(N);
    double cum = 0.0;
    long n = 0;
    // Hard stop far beyond the Poisson bulk; the tail test below is the real
    // terminator.
    const long n_cap = static_cast<long>(a + 60.0 * std::sqrt(a + 1.0) + 200.0);
    while (true) {
        // p_n = e^{-a} a^n / n! computed in log space; sub-bulk underflow to 0
        // is harmless since those terms are far below tail_tol anyway.
        const double log_p = -a + static_cast<double>(n) * log_a - std::lgamma(static_cast<double>(n) + 1.0);
        const double p = std::exp(log_p);
        if (p > 0.0) {
            for (size_t i = 0; i < N; ++i) out.v[i] += p * v[i];
            cum += p;
        }
        if (cum >= 1.0 - opts.tail_tol || n >= n_cap) break;
        // v <- Pi v with Pi = I + L / Lambda*.
        apply_into(gen, v, Lv);
        for (size_t i = 0; i < N; ++i) v[i] += Lv[i] / big_lambda;
        ++n;
    }
    if (stats) {
        stats->iterations = n;
        stats->rel_residual = std::max(0.0, 1.0 - cum);
        stats->seconds = now_seconds() - t0;
    }
    return out;
}

AtomField resolvent_from_semigroup(const SparseGenerator& gen, double lambda, const AtomField& f,
                                   const SolveOptions& opts, const QuadratureSpec& quad) {
    opts.validate();
    quad.validate();
    if (!(lambda > 0.0))
        throw std::invalid_argument("resolvent_from_semigroup: lambda must be positive");
    if (f.size() != gen.size()) throw std::invalid_argument("resolvent_from_semigroup: field mismatch");
    const size_t N = gen.size();
    const double T = quad.T_over_lambda / lambda;
    const double h = T / quad.panels;

    // March the semigroup forward through the sorted quadrature nodes; the
    // truncated tail carries e^{-T lambda}/lambda * ||f|| which is negligible
    // for the default T = 40/lambda.
    AtomField acc(gen);
    AtomField state(gen);
    state.v = f.v;
    double s_prev = 0.0;
    for (int panel = 0; panel < quad.panels; ++panel) {
        const double s0 = panel * h;
        for (int q = 0; q < GL_N; ++q) {
            const double s = s0 + 0.5 * h * (GL_X[q] + 1.0);
            const double w = 0.5 * h * GL_W[q];
            state = semigroup_action(gen, s - s_prev, state, opts);
            s_prev = s;
            const double factor = w * std::exp(-lambda * s);
            for (size_t i = 0; i < N; ++i) acc.v[i] += factor * state.v[i];
        }
    }
    return acc;
}

}  // namespace homog
