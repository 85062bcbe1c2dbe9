#pragma once

#include <functional>
#include <span>
#include <vector>

#include "homog/environment.hpp"

namespace homog {

/// One unordered pair with both directed rates cached. z points from i to j;
/// the j->i orientation uses -z.
struct GenEdge {
    int32_t i = 0, j = 0;
    Vec z = vec0();
    double c = 0.0;
    double r_ij = 0.0;  // c / n_i
    double r_ji = 0.0;  // c / n_j
};

/// Diffusively rescaled generator on the macroscopic torus of side S = eps*L.
/// Matrix-free: the edge list is the operator.
struct SparseGenerator {
    int d = 1;
    double eps = 1.0;
    double box_L = 1.0;
    double S = 1.0;
    double eps_pow_d = 1.0;
    std::vector<double> weight;     // n_x
    std::vector<double> mu;         // eps^d n_x
    std::vector<Vec> macro_pos;     // eps * x
    std::vector<double> diag_rate;  // r_x = sum_y r_{x,y}, unscaled
    std::vector<GenEdge> edges;

    size_t size() const { return weight.size(); }
};

struct AtomField {
    const SparseGenerator* gen = nullptr;
    std::vector<double> v;

    AtomField() = default;
    explicit AtomField(const SparseGenerator& g, double fill = 0.0)
        : gen(&g), v(g.size(), fill) {}
    size_t size() const { return v.size(); }
    double& operator[](size_t i) { return v[i]; }
    double operator[](size_t i) const { return v[i]; }
};

SparseGenerator assemble(const Environment& env, double eps);

/// out = L^eps u, i.e. out(x) = eps^{-2} sum_y r_{x,y} (u(y) - u(x)).
void apply_into(const SparseGenerator& gen, std::span<const double> u, std::span<double> out);
AtomField apply(const SparseGenerator& gen, const AtomField& u);

/// (1/2) <grad u, grad u>_nu = eps^{d-2} sum_pairs c (u_j - u_i)^2.
double dirichlet_energy(const SparseGenerator& gen, std::span<const double> u);

/// <grad u, grad u>_nu over both orientations; equals 2x dirichlet_energy.
double nu_norm_sq_of_gradient(const SparseGenerator& gen, std::span<const double> u);

/// Mixed form eps^{d-2} sum_pairs c (u_j - u_i)(w_j - w_i).
double dirichlet_pairing(const SparseGenerator& gen, std::span<const double> u,
                         std::span<const double> w);

double mu_inner(const SparseGenerator& gen, std::span<const double> u, std::span<const double> v);
double mu_norm(const SparseGenerator& gen, std::span<const double> u);
double mu_total_mass(const SparseGenerator& gen);

/// Sample a macroscopic function at the atom positions eps*x.
AtomField restrict_to_atoms(const SparseGenerator& gen, const std::function<double(const Vec&)>& phi);

}  // namespace homog
