#include <cmath>
#include <vector>

#include "doctest.h"
#include "homog/env_gen.hpp"
#include "homog/generator.hpp"

using namespace homog;

namespace {

BoxSpec box(int d, double L) {
    BoxSpec b;
    b.d = d;
    b.L = L;
    return b;
}

ConductanceLaw constant_law(double c) {
    ConductanceLaw law;
    law.kind = ConductanceLaw::Kind::CONSTANT;
    law.c = c;
    return law;
}

Environment mott_env() {
    MarkLaw marks;
    marks.kind = MarkLaw::Kind::UNIFORM;
    return generate_mott(box(2, 8), 1.0, marks, 3.0, 5);
}

// Two atoms with weights (0.3, 0.7) sharing conductance 0.21, so the directed
// rates are r_01 = 0.7 and r_10 = 0.3.
Environment two_atom_env() {
    Environment env;
    env.box = box(1, 3);
    env.model = "handmade";
    Atom a0, a1;
    a0.pos = {0, 0, 0};
    a0.weight = 0.3;
    a1.pos = {1, 0, 0};
    a1.weight = 0.7;
    env.atoms = {a0, a1};
    EnvEdge e;
    e.i = 0;
    e.j = 1;
    e.z = {1, 0, 0};
    e.c = 0.21;
    env.edges = {e};
    return env;
}

std::vector<double> random_field(const SparseGenerator& gen, uint64_t salt) {
    Stream st(hash_key(1, TAG_TEST, salt));
    std::vector<double> u(gen.size());
    for (double& x : u) x = st.next_uniform(-1.0, 1.0);
    return u;
}

}  // namespace

TEST_CASE("ring Laplacian on a unit impulse") {
    const Environment env = generate_nn_conductance(box(1, 4), constant_law(1.0), WeightMode::UNIT, 1);
    const SparseGenerator gen = assemble(env, 1.0);
    AtomField u(gen);
    u[0] = 1.0;
    const AtomField Lu = apply(gen, u);
    CHECK(Lu[0] == -2.0);
    CHECK(Lu[1] == 1.0);
    CHECK(Lu[2] == 0.0);
    CHECK(Lu[3] == 1.0);
}

TEST_CASE("the generator annihilates constants") {
    const SparseGenerator gen = assemble(mott_env(), 0.5);
    const AtomField u(gen, 3.7);
    const AtomField Lu = apply(gen, u);
    for (size_t x = 0; x < gen.size(); ++x) CHECK(Lu[x] == 0.0);
}

TEST_CASE("self-adjointness in the measure-weighted inner product") {
    const SparseGenerator gen = assemble(mott_env(), 0.5);
    for (uint64_t k = 0; k < 10; ++k) {
        const std::vector<double> f = random_field(gen, 2 * k);
        const std::vector<double> g = random_field(gen, 2 * k + 1);
        std::vector<double> Lf(gen.size()), Lg(gen.size());
        apply_into(gen, f, Lf);
        apply_into(gen, g, Lg);
        const double a = mu_inner(gen, f, Lg);
        const double b = mu_inner(gen, g, Lf);
        CHECK(std::abs(a - b) <= 1e-12 * std::max(1.0, std::abs(a)));
    }
}

TEST_CASE("the generator action is linear") {
    const SparseGenerator gen = assemble(mott_env(), 0.5);
    const std::vector<double> u = random_field(gen, 100);
    const std::vector<double> v = random_field(gen, 101);
    const double a = 2.25, b = -0.75;
    std::vector<double> w(gen.size()), Lu(gen.size()), Lv(gen.size()), Lw(gen.size());
    for (size_t x = 0; x < gen.size(); ++x) w[x] = a * u[x] + b * v[x];
    apply_into(gen, u, Lu);
    apply_into(gen, v, Lv);
    apply_into(gen, w, Lw);
    for (size_t x = 0; x < gen.size(); ++x)
        CHECK(Lw[x] == doctest::Approx(a * Lu[x] + b * Lv[x]).epsilon(1e-12));
}

TEST_CASE("two-atom chain action matches the hand computation") {
    const SparseGenerator gen = assemble(two_atom_env(), 1.0);
    AtomField u(gen);
    u[0] = 1.0;
    const AtomField Lu = apply(gen, u);
    CHECK(Lu[0] == doctest::Approx(-0.7).epsilon(1e-12));
    CHECK(Lu[1] == doctest::Approx(0.3).epsilon(1e-12));
}

TEST_CASE("Dirichlet energy of the ring impulse") {
    const Environment env = generate_nn_conductance(box(1, 4), constant_law(1.0), WeightMode::UNIT, 1);
    const SparseGenerator gen = assemble(env, 1.0);
    AtomField u(gen);
    u[0] = 1.0;
    CHECK(dirichlet_energy(gen, u.v) == 2.0);
    CHECK(dirichlet_energy(gen, std::vector<double>(4, 5.0)) == 0.0);
}

TEST_CASE("Dirichlet energy equals the pairing against the negated action") {
    const SparseGenerator gen = assemble(mott_env(), 0.5);
    for (uint64_t k = 0; k < 5; ++k) {
        const std::vector<double> u = random_field(gen, 200 + k);
        std::vector<double> Lu(gen.size());
        apply_into(gen, u, Lu);
        const double energy = dirichlet_energy(gen, u);
        double pairing = -mu_inner(gen, u, Lu);
        CHECK(energy == doctest::Approx(pairing).epsilon(1e-12));
        CHECK(dirichlet_pairing(gen, u, u) == energy);
        CHECK(nu_norm_sq_of_gradient(gen, u) == 2.0 * energy);
    }
}

TEST_CASE("measure pairings and restriction") {
    const Environment env = generate_nn_conductance(box(2, 6), constant_law(2.0), WeightMode::DEGREE, 3);
    const SparseGenerator gen = assemble(env, 0.5);
    const std::vector<double> ones(gen.size(), 1.0);
    const double mass = mu_inner(gen, ones, ones);
    CHECK(mass == mu_total_mass(gen));
    CHECK(mass == doctest::Approx(0.25 * env.total_weight()).epsilon(1e-14));

    const AtomField c = restrict_to_atoms(gen, [](const Vec&) { return 2.5; });
    for (size_t x = 0; x < gen.size(); ++x) CHECK(c[x] == 2.5);
}

TEST_CASE("restricted cosine mass converges to the continuum integral") {
    const double S = 8.0;
    for (double eps : {1.0 / 8.0, 1.0 / 16.0}) {
        const auto L = static_cast<int64_t>(S / eps);
        const Environment env =
            generate_nn_conductance(box(1, static_cast<double>(L)), constant_law(1.0), WeightMode::UNIT, 1);
        const SparseGenerator gen = assemble(env, eps);
        const AtomField phi =
            restrict_to_atoms(gen, [S](const Vec& x) { return std::cos(2.0 * M_PI * x[0] / S); });
        const double mass = mu_inner(gen, phi.v, phi.v);
        const double continuum = S / 2.0;  // m = 1 and integral of cos^2 over one period
        CHECK(std::abs(mass - continuum) <= 5.0 * eps * continuum);
    }
}

TEST_CASE("the quadratic form is nonpositive for the generator") {
    const SparseGenerator gen = assemble(mott_env(), 0.5);
    for (uint64_t k = 0; k < 10; ++k) {
        const std::vector<double> u = random_field(gen, 300 + k);
        std::vector<double> Lu(gen.size());
        apply_into(gen, u, Lu);
        CHECK(mu_inner(gen, u, Lu) <= 0.0);
    }
}

TEST_CASE("Dirichlet energy scales explicitly with the rescaling parameter") {
    const Environment env =
        generate_nn_conductance(box(1, 16), ConductanceLaw{ConductanceLaw::Kind::TWO_POINT}, WeightMode::UNIT, 7);
    std::vector<double> u(16);
    Stream st(hash_key(1, TAG_TEST, 400));
    for (double& x : u) x = st.next_uniform(-1.0, 1.0);

    const double ref = dirichlet_energy(assemble(env, 1.0), u) * std::pow(1.0, 2 - 1);
    for (double eps : {0.5, 0.25, 0.125}) {
        const double val = dirichlet_energy(assemble(env, eps), u) * std::pow(eps, 2 - 1);
        CHECK(val == doctest::Approx(ref).epsilon(1e-13));
    }
}

TEST_CASE("mass is conserved under the generator action") {
    const SparseGenerator gen = assemble(mott_env(), 0.5);
    for (uint64_t k = 0; k < 5; ++k) {
        const std::vector<double> u = random_field(gen, 500 + k);
        std::vector<double> Lu(gen.size());
        apply_into(gen, u, Lu);
        double total = 0.0, scale = 0.0;
        for (size_t x = 0; x < gen.size(); ++x) {
            total += gen.mu[x] * Lu[x];
            scale += gen.mu[x] * std::abs(Lu[x]);
        }
        CHECK(std::abs(total) <= 1e-12 * std::max(1.0, scale));
    }
}

TEST_CASE("assembly and application reject malformed input") {
    const Environment env = generate_nn_conductance(box(1, 4), constant_law(1.0), WeightMode::UNIT, 1);
    CHECK_THROWS_AS((void)assemble(env, 0.0), std::invalid_argument);
    CHECK_THROWS_AS((void)assemble(env, -1.0), std::invalid_argument);

    const SparseGenerator gen = assemble(env, 1.0);
    std::vector<double> bad(3, 0.0), out(4, 0.0);
    CHECK_THROWS_AS(apply_into(gen, bad, out), std::invalid_argument);
    CHECK_THROWS_AS((void)mu_inner(gen, bad, out), std::invalid_argument);
    CHECK_THROWS_AS((void)dirichlet_energy(gen, bad), std::invalid_argument);
}
