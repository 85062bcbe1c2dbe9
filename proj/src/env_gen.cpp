#include "homog/env_gen.hpp"

#include <algorithm>
#include <numeric>

namespace homog {

namespace {

int64_t lattice_side(const BoxSpec& box) {
    if (!box.lattice_side())
        throw std::invalid_argument("lattice model requires an integer box side, got L = " +
                                    std::to_string(box.L));
    return static_cast<int64_t>(box.L);
}

// Site coordinates packed into one key word; 21 bits per axis caps L at 2^21.
uint64_t pack_site(const std::array<int64_t, 3>& s) {
    return static_cast<uint64_t>(s[0]) | (static_cast<uint64_t>(s[1]) << 21) |
           (static_cast<uint64_t>(s[2]) << 42);
}

struct LatticeIndexer {
    int d;
    int64_t L;

    int64_t count() const {
        int64_t n = 1;
        for (int i = 0; i < d; ++i) n *= L;
        return n;
    }
    std::array<int64_t, 3> coords(int64_t idx) const {
        std::array<int64_t, 3> c{0, 0, 0};
        for (int i = 0; i < d; ++i) {
            c[i] = idx % L;
            idx /= L;
        }
        return c;
    }
    int64_t index(std::array<int64_t, 3> c) const {
        int64_t idx = 0;
        for (int i = d - 1; i >= 0; --i) idx = idx * L + c[i];
        return idx;
    }
    std::array<int64_t, 3> shift(std::array<int64_t, 3> c, const std::array<int64_t, 3>& z) const {
        for (int i = 0; i < d; ++i) {
            c[i] = (c[i] + z[i]) % L;
            if (c[i] < 0) c[i] += L;
        }
        return c;
    }
    Vec position(const std::array<int64_t, 3>& c) const {
        Vec p = vec0();
        for (int i = 0; i < d; ++i) p[i] = static_cast<double>(c[i]);
        return p;
    }
};

std::vector<Atom> lattice_atoms(const LatticeIndexer& ix) {
    std::vector<Atom> atoms(static_cast<size_t>(ix.count()));
    for (int64_t s = 0; s < ix.count(); ++s) atoms[static_cast<size_t>(s)].pos = ix.position(ix.coords(s));
    return atoms;
}

struct UnionFind {
    std::vector<int32_t> parent;
    std::vector<int32_t> size;

    explicit UnionFind(int64_t n)
        : parent(static_cast<size_t>(n)), size(static_cast<size_t>(n), 1) {
        std::iota(parent.begin(), parent.end(), 0);
    }
    int32_t find(int32_t a) {
        while (parent[static_cast<size_t>(a)] != a) {
            parent[static_cast<size_t>(a)] = parent[static_cast<size_t>(parent[static_cast<size_t>(a)])];
            a = parent[static_cast<size_t>(a)];
        }
        return a;
    }
    void unite(int32_t a, int32_t b) {
        a = find(a);
        b = find(b);
        if (a == b) return;
        if (size[static_cast<size_t>(a)] < size[static_cast<size_t>(b)]) std::swap(a, b);
        parent[static_cast<size_t>(b)] = a;
        size[static_cast<size_t>(a)] += size[static_cast<size_t>(b)];
    }
};

}  // namespace

bool percolation_bond_open(uint64_t seed, double p, int axis, const std::array<int64_t, 3>& site) {
    Stream st(hash_key(seed, TAG_BOND, static_cast<uint64_t>(axis), pack_site(site)));
    return st.next_u01() < p;
}

Environment generate_nn_conductance(const BoxSpec& box, const ConductanceLaw& law, WeightMode mode,
                                    uint64_t seed) {
    box.validate();
    law.validate();
    const int64_t L = lattice_side(box);
    if (L < 2) throw std::invalid_argument("nn_conductance: degenerate torus, L must be >= 2");

    Environment env;
    env.box = box;
    env.seed = seed;
    env.model = model_name(Model::NN_CONDUCTANCE);
    env.kernel.model = Model::NN_CONDUCTANCE;
    env.kernel.law = law;
    env.kernel.weight_mode = mode;
    env.kernel.R_max = 1.0;

    LatticeIndexer ix{box.d, L};
    env.atoms = lattice_atoms(ix);
    env.edges.reserve(static_cast<size_t>(box.d * ix.count()));
    for (int64_t s = 0; s < ix.count(); ++s) {
        const auto c = ix.coords(s);
        for (int axis = 0; axis < box.d; ++axis) {
            std::array<int64_t, 3> z{0, 0, 0};
            z[axis] = 1;
            const int64_t t = ix.index(ix.shift(c, z));
            Stream st(hash_key(seed, TAG_BOND, static_cast<uint64_t>(axis), pack_site(c)));
            EnvEdge e;
            e.i = static_cast<int32_t>(s);
            e.j = static_cast<int32_t>(t);
            e.c = law.sample(st);
            e.z = periodic_displacement(env.atoms[static_cast<size_t>(s)].pos,
                                        env.atoms[static_cast<size_t>(t)].pos, box);
            env.edges.push_back(e);
        }
    }
    if (mode == WeightMode::DEGREE) {
        for (Atom& a : env.atoms) a.weight = 0.0;
        for (const EnvEdge& e : env.edges) {
            env.atoms[static_cast<size_t>(e.i)].weight += e.c;
            env.atoms[static_cast<size_t>(e.j)].weight += e.c;
        }
    }
    return env;
}

Environment generate_percolation(const BoxSpec& box, double p, uint64_t seed) {
    box.validate();
    if (!(p > 0.0 && p <= 1.0)) throw std::invalid_argument("percolation: p must be in (0,1]");
    const int64_t L = lattice_side(box);
    if (L < 2) throw std::invalid_argument("percolation: degenerate torus, L must be >= 2");

    LatticeIndexer ix{box.d, L};
    const int64_t n = ix.count();
    struct Bond {
        int64_t s, t;
    };
    std::vector<Bond> open;
    open.reserve(static_cast<size_t>(n) * static_cast<size_t>(box.d));
    UnionFind uf(n);
    for (int64_t s = 0; s < n; ++s) {
        const auto c = ix.coords(s);
        for (int axis = 0; axis < box.d; ++axis) {
            if (!percolation_bond_open(seed, p, axis, c)) continue;
            std::array<int64_t, 3> z{0, 0, 0};
            z[axis] = 1;
            const int64_t t = ix.index(ix.shift(c, z));
            open.push_back({s, t});
            uf.unite(static_cast<int32_t>(s), static_cast<int32_t>(t));
        }
    }
    // Largest open cluster; ties broken by the smallest lexicographic vertex a
    // cluster contains. Walking coordinates in lexicographic order makes the
    // first visit to each cluster happen at exactly that vertex.
    int32_t best_root = -1;
    int32_t best_size = 0;
    {
        std::vector<bool> seen(static_cast<size_t>(n), false);
        std::array<int64_t, 3> c{0, 0, 0};
        for (int64_t step = 0; step < n; ++step) {
            const int64_t s = ix.index(c);
            const int32_t r = uf.find(static_cast<int32_t>(s));
            if (!seen[static_cast<size_t>(r)]) {
                seen[static_cast<size_t>(r)] = true;
                if (uf.size[static_cast<size_t>(r)] > best_size) {
                    best_size = uf.size[static_cast<size_t>(r)];
                    best_root = r;
                }
            }
            for (int i = box.d - 1; i >= 0; --i) {
                if (++c[static_cast<size_t>(i)] < L) break;
                c[static_cast<size_t>(i)] = 0;
            }
        }
    }
    if (best_size < 2) throw GenerationError("percolation: empty cluster (p too small for this box)");

    std::vector<int32_t> atom_of_site(static_cast<size_t>(n), -1);
    Environment env;
    env.box = box;
    env.seed = seed;
    env.model = model_name(Model::PERCOLATION);
    env.kernel.model = Model::PERCOLATION;
    env.kernel.p = p;
    env.kernel.R_max = 1.0;
    env.atoms.reserve(static_cast<size_t>(best_size));
    for (int64_t s = 0; s < n; ++s) {
        if (uf.find(static_cast<int32_t>(s)) != best_root) continue;
        atom_of_site[static_cast<size_t>(s)] = static_cast<int32_t>(env.atoms.size());
        Atom a;
        a.pos = ix.position(ix.coords(s));
        env.atoms.push_back(a);
    }
    for (const auto& b : open) {
        const int32_t ai = atom_of_site[static_cast<size_t>(b.s)];
        const int32_t aj = atom_of_site[static_cast<size_t>(b.t)];
        if (ai < 0 || aj < 0) continue;
        EnvEdge e;
        e.i = ai;
        e.j = aj;
        e.c = 1.0;
        e.z = periodic_displacement(env.atoms[static_cast<size_t>(ai)].pos,
                                    env.atoms[static_cast<size_t>(aj)].pos, box);
        env.edges.push_back(e);
    }
    return env;
}

Environment generate_mott(const BoxSpec& box, double rho, const MarkLaw& marks, double R_max,
                          uint64_t seed) {
    box.validate();
    if (!(rho > 0.0)) throw std::invalid_argument("mott: intensity must be positive");
    if (!(R_max > 0.0 && R_max < box.L / 2.0))
        throw std::invalid_argument("mott: requires 0 < R_max < L/2");

    Environment env;
    env.box = box;
    env.seed = seed;
    env.model = model_name(Model::MOTT);
    env.kernel.model = Model::MOTT;
    env.kernel.rho = rho;
    env.kernel.mark_law = marks;
    env.kernel.R_max = R_max;
    env.has_marks = true;

    Stream count_stream(hash_key(seed, TAG_COUNT));
    const long long n = count_stream.next_poisson(rho * box.volume());
    if (n <= 0) throw GenerationError("mott: zero sampled points");

    env.atoms.resize(static_cast<size_t>(n));
    for (long long k = 0; k < n; ++k) {
        Stream ps(hash_key(seed, TAG_POSITION, static_cast<uint64_t>(k)));
        Stream ms(hash_key(seed, TAG_MARK, static_cast<uint64_t>(k)));
        Atom& a = env.atoms[static_cast<size_t>(k)];
        for (int ax = 0; ax < box.d; ++ax) a.pos[ax] = ps.next_uniform(0.0, box.L);
        a.mark = marks.sample(ms);
    }
    {
        std::vector<size_t> order(env.atoms.size());
        std::iota(order.begin(), order.end(), size_t{0});
        std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
            return env.atoms[a].pos < env.atoms[b].pos;
        });
        for (size_t k = 1; k < order.size(); ++k)
            if (env.atoms[order[k - 1]].pos == env.atoms[order[k]].pos)
                throw GenerationError("mott: coincident sampled points");
    }

    const size_t N = env.atoms.size();
    for (size_t i = 0; i < N; ++i) {
        for (size_t j = i + 1; j < N; ++j) {
            Vec z = periodic_displacement(env.atoms[i].pos, env.atoms[j].pos, box);
            bool out = false;
            for (int ax = 0; ax < box.d; ++ax)
                if (std::abs(z[ax]) > R_max) out = true;
            if (out) continue;
            const double dist = norm(z, box.d);
            if (dist > R_max) continue;
            EnvEdge e;
            e.i = static_cast<int32_t>(i);
            e.j = static_cast<int32_t>(j);
            e.z = z;
            e.c = mott_rate(dist, env.atoms[i].mark, env.atoms[j].mark);
            env.edges.push_back(e);
        }
    }
    return env;
}

Environment generate_long_range(const BoxSpec& box, const ConductanceLaw& law, double s,
                                double R_max, uint64_t seed) {
    box.validate();
    law.validate();
    if (!(s > box.d + 2))
        throw std::invalid_argument(
            "long_range: decay exponent must exceed d+2 so the second displacement moment of the "
            "rates stays finite");
    const int64_t L = lattice_side(box);
    if (!(R_max >= 1.0 && R_max < box.L / 2.0))
        throw std::invalid_argument("long_range: requires 1 <= R_max < L/2");

    // Half-shell of lattice displacements, one per unordered pair.
    std::vector<std::array<int64_t, 3>> shell;
    const int64_t R = static_cast<int64_t>(std::floor(R_max));
    std::array<int64_t, 3> z{0, 0, 0};
    const int64_t lo1 = -R, hi1 = R;
    for (z[0] = lo1; z[0] <= hi1; ++z[0]) {
        const int64_t lim2 = box.d > 1 ? R : 0;
        for (z[1] = -lim2; z[1] <= lim2; ++z[1]) {
            const int64_t lim3 = box.d > 2 ? R : 0;
            for (z[2] = -lim3; z[2] <= lim3; ++z[2]) {
                const bool positive = z[0] > 0 || (z[0] == 0 && (z[1] > 0 || (z[1] == 0 && z[2] > 0)));
                if (!positive) continue;
                double n2 = 0.0;
                for (int i = 0; i < box.d; ++i) n2 += static_cast<double>(z[i] * z[i]);
                if (n2 > R_max * R_max) continue;
                shell.push_back(z);
            }
        }
    }
    std::sort(shell.begin(), shell.end());

    Environment env;
    env.box = box;
    env.seed = seed;
    env.model = model_name(Model::LONG_RANGE);
    env.kernel.model = Model::LONG_RANGE;
    env.kernel.law = law;
    env.kernel.s = s;
    env.kernel.R_max = R_max;

    LatticeIndexer ix{box.d, L};
    env.atoms = lattice_atoms(ix);
    env.edges.reserve(static_cast<size_t>(ix.count()) * shell.size());
    for (int64_t site = 0; site < ix.count(); ++site) {
        const auto c = ix.coords(site);
        for (size_t si = 0; si < shell.size(); ++si) {
            const auto& dz = shell[si];
            const int64_t t = ix.index(ix.shift(c, dz));
            double dist2 = 0.0;
            for (int i = 0; i < box.d; ++i) dist2 += static_cast<double>(dz[i] * dz[i]);
            Stream st(hash_key(seed, TAG_BOND, 16 + static_cast<uint64_t>(si), pack_site(c)));
            EnvEdge e;
            e.i = static_cast<int32_t>(site);
            e.j = static_cast<int32_t>(t);
            e.c = law.sample(st) * std::pow(std::sqrt(dist2), -s);
            e.z = periodic_displacement(env.atoms[static_cast<size_t>(site)].pos,
                                        env.atoms[static_cast<size_t>(t)].pos, box);
            env.edges.push_back(e);
        }
    }
    return env;
}

Environment generate_environment(const BoxSpec& box, const RateKernel& kernel, uint64_t seed) {
    switch (kernel.model) {
        case Model::NN_CONDUCTANCE:
            return generate_nn_conductance(box, kernel.law, kernel.weight_mode, seed);
        case Model::PERCOLATION:
            return generate_percolation(box, kernel.p, seed);
        case Model::MOTT:
            return generate_mott(box, kernel.rho, kernel.mark_law, kernel.R_max, seed);
        case Model::LONG_RANGE:
            return generate_long_range(box, kernel.law, kernel.s, kernel.R_max, seed);
    }
    throw std::invalid_argument("unknown model in kernel");
}

}  // namespace homog
