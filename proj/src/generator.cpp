#include "homog/generator.hpp"

#include <cmath>

namespace homog {

SparseGenerator assemble(const Environment& env, double eps) {
    if (!(eps > 0.0)) throw std::invalid_argument("assemble: eps must be positive");
    SparseGenerator gen;
    gen.d = env.box.d;
    gen.eps = eps;
    gen.box_L = env.box.L;
    gen.S = eps * env.box.L;
    gen.eps_pow_d = 1.0;
    for (int i = 0; i < gen.d; ++i) gen.eps_pow_d *= eps;

    const size_t N = env.atoms.size();
    gen.weight.resize(N);
    gen.mu.resize(N);
    gen.macro_pos.resize(N);
    gen.diag_rate.assign(N, 0.0);
    for (size_t x = 0; x < N; ++x) {
        const Atom& a = env.atoms[x];
        if (!(a.weight > 0.0)) throw std::invalid_argument("assemble: nonpositive atom weight");
        gen.weight[x] = a.weight;
        gen.mu[x] = gen.eps_pow_d * a.weight;
        Vec mp = a.pos;
        for (int i = 0; i < gen.d; ++i) mp[i] *= eps;
        gen.macro_pos[x] = mp;
    }
    gen.edges.reserve(env.edges.size());
    for (const EnvEdge& ee : env.edges) {
        if (!(ee.c > 0.0)) throw std::invalid_argument("assemble: nonpositive conductance on edge");
        GenEdge e;
        e.i = ee.i;
        e.j = ee.j;
        e.z = ee.z;
        e.c = ee.c;
        e.r_ij = ee.c / gen.weight[static_cast<size_t>(ee.i)];
        e.r_ji = ee.c / gen.weight[static_cast<size_t>(ee.j)];
        gen.diag_rate[static_cast<size_t>(ee.i)] += e.r_ij;
        gen.diag_rate[static_cast<size_t>(ee.j)] += e.r_ji;
        gen.edges.push_back(e);
    }
    return gen;
}

void apply_into(const SparseGenerator& gen, std::span<const double> u, std::span<double> out) {
    if (u.size() != gen.size() || out.size() != gen.size())
        throw std::invalid_argument("apply: field length mismatch");
    const double inv_eps2 = 1.0 / (gen.eps * gen.eps);
    for (double& o : out) o = 0.0;
    for (const GenEdge& e : gen.edges) {
        const double du = u[static_cast<size_t>(e.j)] - u[static_cast<size_t>(e.i)];
        out[static_cast<size_t>(e.i)] += e.r_ij * du;
        out[static_cast<size_t>(e.j)] -= e.r_ji * du;
    }
    for (double& o : out) o *= inv_eps2;
}

AtomField apply(const SparseGenerator& gen, const AtomField& u) {
    AtomField out(gen);
    apply_into(gen, u.v, out.v);
    return out;
}

double dirichlet_energy(const SparseGenerator& gen, std::span<const double> u) {
    return dirichlet_pairing(gen, u, u);
}

double dirichlet_pairing(const SparseGenerator& gen, std::span<const double> u,
                         std::span<const double> w) {
    if (u.size() != gen.size() || w.size() != gen.size())
        throw std::invalid_argument("dirichlet_pairing: field length mismatch");
    double scale = 1.0;
    for (int i = 0; i < gen.d - 2; ++i) scale *= gen.eps;
    for (int i = 0; i < 2 - gen.d; ++i) scale /= gen.eps;
    double acc = 0.0;
    for (const GenEdge& e : gen.edges) {
        const double du = u[static_cast<size_t>(e.j)] - u[static_cast<size_t>(e.i)];
        const double dw = w[static_cast<size_t>(e.j)] - w[static_cast<size_t>(e.i)];
        acc += e.c * du * dw;
    }
    return scale * acc;
}

double nu_norm_sq_of_gradient(const SparseGenerator& gen, std::span<const double> u) {
    return 2.0 * dirichlet_energy(gen, u);
}

double mu_inner(const SparseGenerator& gen, std::span<const double> u, std::span<const double> v) {
    if (u.size() != gen.size() || v.size() != gen.size())
        throw std::invalid_argument("mu_inner: field length mismatch");
    double acc = 0.0;
    for (size_t x = 0; x < gen.size(); ++x) acc += gen.mu[x] * u[x] * v[x];
    return acc;
}

double mu_norm(const SparseGenerator& gen, std::span<const double> u) {
    return std::sqrt(mu_inner(gen, u, u));
}

double mu_total_mass(const SparseGenerator& gen) {
    double acc = 0.0;
    for (double m : gen.mu) acc += m;
    return acc;
}

AtomField restrict_to_atoms(const SparseGenerator& gen,
                            const std::function<double(const Vec&)>& phi) {
    AtomField out(gen);
    for (size_t x = 0; x < gen.size(); ++x) out.v[x] = phi(gen.macro_pos[x]);
    return out;
}

}  // namespace homog
