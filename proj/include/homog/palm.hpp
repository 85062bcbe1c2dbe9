#pragma once

#include <functional>
#include <span>
#include <vector>

#include "homog/environment.hpp"

namespace homog {

/// A weight-averaged spatial mean standing in for an expectation under the
/// point of view of the particle; error bars come from replica spread.
struct PalmEstimate {
    double value = 0.0;
    double std_error = 0.0;
    int samples = 1;
};

/// Mean mass per unit volume, (Σ_x n_x) / L^d.
PalmEstimate estimate_intensity(const Environment& env);

/// Per-atom k-th displacement moment of the jump rates, λ_k(x) = Σ_y r_{x,y}|z|^k.
std::vector<double> lambda_k_field(const Environment& env, int k);

/// Weighted spatial average (Σ_x n_x λ_k(x)) / (Σ_x n_x), k in {0,1,2}.
PalmEstimate estimate_lambda_k(const Environment& env, int k);

/// Σ_x ε^d n_x φ(εx) f(x). S_phi is the macroscopic torus side φ lives on and
/// must equal ε·L.
double ergodic_average(const Environment& env, double eps, double S_phi,
                       const std::function<double(const Vec&)>& phi, std::span<const double> f);

/// Mean and standard error across replica values.
PalmEstimate aggregate(std::span<const double> values);

}  // namespace homog
