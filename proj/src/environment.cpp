#include "homog/environment.hpp"

#include <cinttypes>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

namespace homog {

const char* model_name(Model m) {
    switch (m) {
        case Model::NN_CONDUCTANCE: return "nn_conductance";
        case Model::LONG_RANGE: return "long_range";
        case Model::PERCOLATION: return "percolation";
        case Model::MOTT: return "mott";
    }
    return "?";
}

Model model_from_name(const std::string& s) {
    if (s == "nn_conductance") return Model::NN_CONDUCTANCE;
    if (s == "long_range") return Model::LONG_RANGE;
    if (s == "percolation") return Model::PERCOLATION;
    if (s == "mott") return Model::MOTT;
    throw std::invalid_argument("unknown model name: " + s);
}

double ConductanceLaw::sample(Stream& st) const {
    switch (kind) {
        case Kind::CONSTANT: return c;
        case Kind::TWO_POINT: return st.next_u01() < q ? c1 : c2;
        case Kind::UNIFORM: return st.next_uniform(lo, hi);
    }
    return c;
}

double ConductanceLaw::mean() const {
    switch (kind) {
        case Kind::CONSTANT: return c;
        case Kind::TWO_POINT: return q * c1 + (1.0 - q) * c2;
        case Kind::UNIFORM: return 0.5 * (lo + hi);
    }
    return c;
}

void ConductanceLaw::validate() const {
    switch (kind) {
        case Kind::CONSTANT:
            if (!(c > 0.0)) throw std::invalid_argument("conductance law: c must be positive");
            break;
        case Kind::TWO_POINT:
            if (!(c1 > 0.0) || !(c2 > 0.0))
                throw std::invalid_argument("conductance law: both two-point values must be positive");
            if (!(q >= 0.0 && q <= 1.0)) throw std::invalid_argument("conductance law: q outside [0,1]");
            break;
        case Kind::UNIFORM:
            if (!(lo > 0.0) || !(hi >= lo))
                throw std::invalid_argument("conductance law: uniform bounds must satisfy 0 < lo <= hi");
            break;
    }
}

double Environment::total_weight() const {
    double s = 0.0;
    for (const Atom& a : atoms) s += a.weight;
    return s;
}

Environment reweight_unit(const Environment& env) {
    Environment out = env;
    for (Atom& a : out.atoms) a.weight = 1.0;
    out.model = env.model + "+unit_weights";
    return out;
}

Environment reweight_degree(const Environment& env) {
    Environment out = env;
    for (Atom& a : out.atoms) a.weight = 0.0;
    for (const EnvEdge& e : out.edges) {
        out.atoms[static_cast<size_t>(e.i)].weight += e.c;
        out.atoms[static_cast<size_t>(e.j)].weight += e.c;
    }
    for (size_t k = 0; k < out.atoms.size(); ++k)
        if (!(out.atoms[k].weight > 0.0))
            throw GenerationError("reweight_degree: isolated atom " + std::to_string(k));
    out.model = env.model + "+degree_weights";
    return out;
}

namespace {

// %.16e prints 17 significant digits, enough to round-trip a double exactly.
void put_real(std::string& out, double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.16e", v);
    out += buf;
}

void put_kv(std::string& out, const char* key, const std::string& v) {
    out += key;
    out += " = ";
    out += v;
    out += '\n';
}

std::string real_str(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.16e", v);
    return buf;
}

const char* law_name(ConductanceLaw::Kind k) {
    switch (k) {
        case ConductanceLaw::Kind::CONSTANT: return "constant";
        case ConductanceLaw::Kind::TWO_POINT: return "two_point";
        case ConductanceLaw::Kind::UNIFORM: return "uniform";
    }
    return "?";
}

}  // namespace

std::string serialize_environment(const Environment& env) {
    std::string out;
    out.reserve(64 * env.atoms.size() + 48 * env.edges.size() + 512);
    out += "# point cloud environment v1\n";
    put_kv(out, "model", env.model);
    put_kv(out, "d", std::to_string(env.box.d));
    put_kv(out, "L", real_str(env.box.L));
    put_kv(out, "seed", std::to_string(env.seed));
    const RateKernel& k = env.kernel;
    switch (k.model) {
        case Model::NN_CONDUCTANCE:
            put_kv(out, "kernel.law", law_name(k.law.kind));
            if (k.law.kind == ConductanceLaw::Kind::CONSTANT) put_kv(out, "kernel.c", real_str(k.law.c));
            if (k.law.kind == ConductanceLaw::Kind::TWO_POINT) {
                put_kv(out, "kernel.c1", real_str(k.law.c1));
                put_kv(out, "kernel.c2", real_str(k.law.c2));
                put_kv(out, "kernel.q", real_str(k.law.q));
            }
            if (k.law.kind == ConductanceLaw::Kind::UNIFORM) {
                put_kv(out, "kernel.lo", real_str(k.law.lo));
                put_kv(out, "kernel.hi", real_str(k.law.hi));
            }
            put_kv(out, "kernel.weight_mode", k.weight_mode == WeightMode::UNIT ? "unit" : "degree");
            break;
        case Model::LONG_RANGE:
            put_kv(out, "kernel.law", law_name(k.law.kind));
            if (k.law.kind == ConductanceLaw::Kind::CONSTANT) put_kv(out, "kernel.c", real_str(k.law.c));
            if (k.law.kind == ConductanceLaw::Kind::TWO_POINT) {
                put_kv(out, "kernel.c1", real_str(k.law.c1));
                put_kv(out, "kernel.c2", real_str(k.law.c2));
                put_kv(out, "kernel.q", real_str(k.law.q));
            }
            if (k.law.kind == ConductanceLaw::Kind::UNIFORM) {
                put_kv(out, "kernel.lo", real_str(k.law.lo));
                put_kv(out, "kernel.hi", real_str(k.law.hi));
            }
            put_kv(out, "kernel.s", real_str(k.s));
            break;
        case Model::PERCOLATION:
            put_kv(out, "kernel.p", real_str(k.p));
            break;
        case Model::MOTT:
            put_kv(out, "kernel.rho", real_str(k.rho));
            put_kv(out, "kernel.mark_law", k.mark_law.kind == MarkLaw::Kind::ZERO ? "zero" : "uniform");
            if (k.mark_law.kind == MarkLaw::Kind::UNIFORM) {
                put_kv(out, "kernel.mark_lo", real_str(k.mark_law.lo));
                put_kv(out, "kernel.mark_hi", real_str(k.mark_law.hi));
            }
            break;
    }
    put_kv(out, "kernel.R_max", real_str(k.R_max));
    put_kv(out, "marks", env.has_marks ? "1" : "0");
    put_kv(out, "atoms", std::to_string(env.atoms.size()));
    put_kv(out, "edges", std::to_string(env.edges.size()));
    for (size_t i = 0; i < env.atoms.size(); ++i) {
        const Atom& a = env.atoms[i];
        out += "atom ";
        out += std::to_string(i);
        for (int ax = 0; ax < env.box.d; ++ax) {
            out += ' ';
            put_real(out, a.pos[ax]);
        }
        out += ' ';
        put_real(out, a.weight);
        if (env.has_marks) {
            out += ' ';
            put_real(out, a.mark);
        }
        out += '\n';
    }
    // Edge records carry the directed rate r_{i,j} = c/n_i per the exchange
    // format; the loader restores c = n_i r_{i,j}.
    for (const EnvEdge& e : env.edges) {
        out += "edge ";
        out += std::to_string(e.i);
        out += ' ';
        out += std::to_string(e.j);
        out += ' ';
        put_real(out, e.c / env.atoms[static_cast<size_t>(e.i)].weight);
        out += '\n';
    }
    return out;
}

namespace {

struct HeaderMap {
    std::vector<std::pair<std::string, std::string>> kv;

    const std::string* find(const std::string& key) const {
        for (const auto& [k, v] : kv)
            if (k == key) return &v;
        return nullptr;
    }
    std::string need(const std::string& key) const {
        const std::string* v = find(key);
        if (!v) throw std::invalid_argument("environment file: missing header key '" + key + "'");
        return *v;
    }
    double need_real(const std::string& key) const { return std::stod(need(key)); }
};

ConductanceLaw parse_law(const HeaderMap& h) {
    ConductanceLaw law;
    std::string name = h.need("kernel.law");
    if (name == "constant") {
        law.kind = ConductanceLaw::Kind::CONSTANT;
        law.c = h.need_real("kernel.c");
    } else if (name == "two_point") {
        law.kind = ConductanceLaw::Kind::TWO_POINT;
        law.c1 = h.need_real("kernel.c1");
        law.c2 = h.need_real("kernel.c2");
        law.q = h.need_real("kernel.q");
    } else if (name == "uniform") {
        law.kind = ConductanceLaw::Kind::UNIFORM;
        law.lo = h.need_real("kernel.lo");
        law.hi = h.need_real("kernel.hi");
    } else {
        throw std::invalid_argument("environment file: unknown conductance law '" + name + "'");
    }
    return law;
}

}  // namespace

Environment parse_environment(const std::string& text) {
    Environment env;
    HeaderMap header;
    std::istringstream in(text);
    std::string line;
    size_t atom_count = 0, edge_count = 0;
    bool counts_seen = false;
    std::vector<double> raw_rate;

    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ls(line);
        std::string tok;
        ls >> tok;
        if (tok == "atom") {
            if (!counts_seen) throw std::invalid_argument("environment file: atom record before header");
            size_t idx;
            ls >> idx;
            Atom a;
            for (int ax = 0; ax < env.box.d; ++ax) ls >> a.pos[ax];
            ls >> a.weight;
            if (env.has_marks) ls >> a.mark;
            if (!ls) throw std::invalid_argument("environment file: malformed atom record: " + line);
            if (idx != env.atoms.size())
                throw std::invalid_argument("environment file: atom indices must be consecutive");
            env.atoms.push_back(a);
        } else if (tok == "edge") {
            if (!counts_seen) throw std::invalid_argument("environment file: edge record before header");
            EnvEdge e;
            double r;
            ls >> e.i >> e.j >> r;
            if (!ls) throw std::invalid_argument("environment file: malformed edge record: " + line);
            if (e.i < 0 || e.j < 0 || static_cast<size_t>(e.i) >= env.atoms.size() ||
                static_cast<size_t>(e.j) >= env.atoms.size())
                throw std::invalid_argument("environment file: edge endpoint out of range");
            env.edges.push_back(e);
            raw_rate.push_back(r);
        } else {
            std::string eq, value;
            ls >> eq;
            std::getline(ls, value);
            size_t pos = value.find_first_not_of(' ');
            value = pos == std::string::npos ? std::string() : value.substr(pos);
            if (eq != "=") throw std::invalid_argument("environment file: malformed header line: " + line);
            header.kv.emplace_back(tok, value);
            if (tok == "edges") {
                // Header is complete once both counts are present.
                env.model = header.need("model");
                env.box.d = static_cast<int>(std::stol(header.need("d")));
                env.box.L = header.need_real("L");
                env.box.validate();
                env.seed = std::stoull(header.need("seed"));
                env.has_marks = header.need("marks") == "1";
                atom_count = std::stoul(header.need("atoms"));
                edge_count = std::stoul(header.need("edges"));
                RateKernel& k = env.kernel;
                std::string base = env.model.substr(0, env.model.find('+'));
                k.model = model_from_name(base);
                k.R_max = header.need_real("kernel.R_max");
                switch (k.model) {
                    case Model::NN_CONDUCTANCE:
                        k.law = parse_law(header);
                        k.weight_mode = header.need("kernel.weight_mode") == "degree" ? WeightMode::DEGREE
                                                                                      : WeightMode::UNIT;
                        break;
                    case Model::LONG_RANGE:
                        k.law = parse_law(header);
                        k.s = header.need_real("kernel.s");
                        break;
                    case Model::PERCOLATION:
                        k.p = header.need_real("kernel.p");
                        break;
                    case Model::MOTT:
                        k.rho = header.need_real("kernel.rho");
                        k.mark_law.kind = header.need("kernel.mark_law") == "zero" ? MarkLaw::Kind::ZERO
                                                                                   : MarkLaw::Kind::UNIFORM;
                        if (k.mark_law.kind == MarkLaw::Kind::UNIFORM) {
                            k.mark_law.lo = header.need_real("kernel.mark_lo");
                            k.mark_law.hi = header.need_real("kernel.mark_hi");
                        }
                        break;
                }
                counts_seen = true;
            }
        }
    }
    if (!counts_seen) throw std::invalid_argument("environment file: missing header");
    if (env.atoms.size() != atom_count || env.edges.size() != edge_count)
        throw std::invalid_argument("environment file: record counts disagree with header");
    // Restore conductances and displacements; positions round-trip exactly at
    // 17 digits, so recomputed displacements match the generator's.
    for (size_t k = 0; k < env.edges.size(); ++k) {
        EnvEdge& e = env.edges[k];
        e.c = raw_rate[k] * env.atoms[static_cast<size_t>(e.i)].weight;
        e.z = periodic_displacement(env.atoms[static_cast<size_t>(e.i)].pos,
                                    env.atoms[static_cast<size_t>(e.j)].pos, env.box);
    }
    return env;
}

void save_environment(const Environment& env, const std::string& path) {
    std::string body = serialize_environment(env);
    std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot open for write: " + tmp);
        out << body;
    }
    if (std::rename(tmp.c_str(), path.c_str()) != 0)
        throw std::runtime_error("cannot rename " + tmp + " -> " + path);
}

Environment load_environment(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open environment file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_environment(ss.str());
}

}  // namespace homog
