#pragma once

#include <span>
#include <string>
#include <vector>

#include "homog/solver.hpp"

namespace homog {

using Mat = std::array<std::array<double, 3>, 3>;

inline Mat mat_zero() { return {{{0, 0, 0}, {0, 0, 0}, {0, 0, 0}}}; }

inline Vec mat_vec(const Mat& m, const Vec& v, int d) {
    Vec out = vec0();
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) out[i] += m[static_cast<size_t>(i)][static_cast<size_t>(j)] * v[j];
    return out;
}

/// v . (M v) restricted to the first d components.
inline double quad_form(const Mat& m, const Vec& v, int d) { return dot(v, mat_vec(m, v, d), d); }

struct Corrector {
    Vec dir = vec0();
    AtomField chi;
    double residual = 0.0;  // relative, mu-norm
    long iterations = 0;
};

struct EffectiveMatrix {
    int d = 1;
    Mat D = mat_zero();
    Mat std_error = mat_zero();
    Vec eigenvalues = vec0();            // descending
    std::array<Vec, 3> eigenvectors{};   // eigenvectors[k] pairs with eigenvalues[k]
    int d_star = 0;
    double gamma_tol = 0.0;              // threshold actually used
    int samples = 1;
};

struct EffectiveMatrixResult {
    EffectiveMatrix matrix;
    Mat flux = mat_zero();         // replica mean of the flux-form estimator
    Mat upper_bound = mat_zero();  // replica mean of the zero-corrector bound
    double flux_discrepancy = 0.0; // max entry gap |D - flux| / max |D|, worst replica
    std::vector<Mat> replica_D;
    long total_iterations = 0;
    std::vector<std::string> warnings;
};

/// Connected components of the conductance graph; returns component id per
/// atom and writes the count.
std::vector<int32_t> connected_components(const SparseGenerator& gen, int* count);

/// Stationarity system for the direction-a corrector on the eps=1 generator,
/// solved by CG with the per-component mean projected out each iteration.
Corrector solve_corrector(const SparseGenerator& gen, const Vec& a, const SolveOptions& opts);

/// Gradient-form estimator for one sample; optionally also the flux form and
/// solver bookkeeping.
Mat estimate_D_single(const Environment& env, const SolveOptions& opts, Mat* flux_out = nullptr,
                      long* iterations = nullptr, std::vector<std::string>* warnings = nullptr);

/// Replica mean/stderr plus eigenstructure. gamma_tol <= 0 selects the
/// default threshold 1e-8 * max(gamma_1, 1).
EffectiveMatrixResult estimate_D(std::span<const Environment> replicas, const SolveOptions& opts,
                                 double gamma_tol = 0.0);

/// Zero-corrector quadratic form (1/(sum n)) sum_pairs c z_i z_j.
Mat variational_upper_bound(const Environment& env);

/// Cyclic Jacobi sweeps; eigenvalues descending, deterministic vector signs.
void eigendecompose(const Mat& D, int d, double gamma_tol, Vec& eigenvalues,
                    std::array<Vec, 3>& eigenvectors, int& d_star);

}  // namespace homog
