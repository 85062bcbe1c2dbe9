#pragma once

#include <stdexcept>
#include <utility>

#include "homog/generator.hpp"

namespace homog {

struct SolveOptions {
    double tol = 1e-10;       // relative residual in the mu-norm
    long max_iter = -1;       // -1 means 20 * N
    double tail_tol = 1e-12;  // Poisson tail mass dropped by uniformization
    bool jacobi = false;      // diagonal preconditioner

    void validate() const {
        if (!(tol > 0.0 && tol < 1.0)) throw std::invalid_argument("SolveOptions: tol outside (0,1)");
        if (max_iter != -1 && max_iter < 1) throw std::invalid_argument("SolveOptions: max_iter < 1");
        if (!(tail_tol > 0.0 && tail_tol < 1.0))
            throw std::invalid_argument("SolveOptions: tail_tol outside (0,1)");
    }
};

struct SolveStats {
    long iterations = 0;
    double rel_residual = 0.0;
    double seconds = 0.0;
    // Residual-based error bound checked every 10 iterations; stays true when
    // the bound never increased between checkpoints.
    bool bound_monotone = true;
};

struct SolveFailure : std::runtime_error {
    SolveStats stats;
    SolveFailure(const std::string& msg, SolveStats s) : std::runtime_error(msg), stats(s) {}
};

/// CG in the mu-weighted inner product for (lambda - L^eps) u = f.
std::pair<AtomField, SolveStats> solve_massive_poisson(const SparseGenerator& gen, double lambda,
                                                       const AtomField& f, const SolveOptions& opts);

inline std::pair<AtomField, SolveStats> resolvent(const SparseGenerator& gen, double lambda,
                                                  const AtomField& f, const SolveOptions& opts) {
    return solve_massive_poisson(gen, lambda, f, opts);
}

/// e^{tL} f by uniformization: Poisson(Lambda* t) mixture of powers of
/// Pi = I + L/Lambda*, truncated when the remaining tail mass drops below
/// opts.tail_tol. Exact contraction and positivity up to the dropped tail.
AtomField semigroup_action(const SparseGenerator& gen, double t, const AtomField& f,
                           const SolveOptions& opts, SolveStats* stats = nullptr);

struct QuadratureSpec {
    double T_over_lambda = 40.0;  // integrate e^{-lambda s} P_s f on [0, T_over_lambda/lambda]
    int panels = 32;              // composite 8-point Gauss-Legendre panels

    void validate() const {
        if (!(T_over_lambda > 0.0)) throw std::invalid_argument("QuadratureSpec: T must be positive");
        if (panels < 1) throw std::invalid_argument("QuadratureSpec: panels < 1");
    }
};

/// Laplace-transform quadrature of the semigroup; cross-check of resolvent.
AtomField resolvent_from_semigroup(const SparseGenerator& gen, double lambda, const AtomField& f,
                                   const SolveOptions& opts, const QuadratureSpec& quad = {});

}  // namespace homog
