#include "homog/config.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <vector>

namespace homog {

namespace {

struct Entry {
    std::string section, key, value;
    int line = 0;
    bool used = false;
};

std::string trim(const std::string& s) {
    size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    size_t b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

[[noreturn]] void fail(const Entry& e, const std::string& what) {
    throw ConfigError(what + " '" + e.key + "' in [" + e.section + "] at line " +
                      std::to_string(e.line));
}

double to_double(const Entry& e) {
    const std::string& s = e.value;
    char* end = nullptr;
    double v = std::strtod(s.c_str(), &end);
    if (end == s.c_str() || *end != '\0') fail(e, "non-numeric value for key");
    return v;
}

long to_long(const Entry& e) {
    const std::string& s = e.value;
    char* end = nullptr;
    long v = std::strtol(s.c_str(), &end, 10);
    if (end == s.c_str() || *end != '\0') fail(e, "non-integer value for key");
    return v;
}

uint64_t to_u64(const Entry& e) {
    const std::string& s = e.value;
    char* end = nullptr;
    unsigned long long v = std::strtoull(s.c_str(), &end, 10);
    if (end == s.c_str() || *end != '\0') fail(e, "non-integer value for key");
    return v;
}

bool to_bool(const Entry& e) {
    if (e.value == "true" || e.value == "1" || e.value == "yes") return true;
    if (e.value == "false" || e.value == "0" || e.value == "no") return false;
    fail(e, "non-boolean value for key");
}

/// Number or a fraction "a/b" (the natural spelling for eps ladders).
double to_ratio(const Entry& e, const std::string& token) {
    const size_t slash = token.find('/');
    Entry sub = e;
    if (slash == std::string::npos) {
        sub.value = token;
        return to_double(sub);
    }
    sub.value = trim(token.substr(0, slash));
    const double a = to_double(sub);
    sub.value = trim(token.substr(slash + 1));
    const double b = to_double(sub);
    if (b == 0.0) fail(e, "zero denominator for key");
    return a / b;
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : s) {
        if (ch == sep) {
            out.push_back(trim(cur));
            cur.clear();
        } else {
            cur += ch;
        }
    }
    out.push_back(trim(cur));
    if (out.size() == 1 && out[0].empty()) out.clear();
    return out;
}

}  // namespace

double RunConfig::box_side() const {
    if (L > 0.0) return L;
    if (!plan.eps.empty()) {
        double side = plan.S / plan.eps.back();
        if (plan.lattice_model()) side = std::round(side);
        return side;
    }
    throw ConfigError("missing key 'L' in [environment] (no eps ladder to derive it from)");
}

RunConfig parse_config_text(const std::string& text, const std::string& origin) {
    std::vector<Entry> entries;
    {
        std::istringstream in(text);
        std::string raw, section;
        int line = 0;
        while (std::getline(in, raw)) {
            ++line;
            const std::string s = trim(raw);
            if (s.empty() || s[0] == '#' || s[0] == ';') continue;
            if (s.front() == '[') {
                if (s.back() != ']')
                    throw ConfigError(origin + ": malformed section header at line " +
                                      std::to_string(line));
                section = trim(s.substr(1, s.size() - 2));
                if (section != "environment" && section != "ladder" && section != "solver" &&
                    section != "output")
                    throw ConfigError("unknown section '[" + section + "]' at line " +
                                      std::to_string(line));
                continue;
            }
            const size_t eq = s.find('=');
            if (eq == std::string::npos)
                throw ConfigError(origin + ": expected 'key = value' at line " +
                                  std::to_string(line));
            if (section.empty())
                throw ConfigError(origin + ": key outside any section at line " +
                                  std::to_string(line));
            Entry e;
            e.section = section;
            e.key = trim(s.substr(0, eq));
            e.value = trim(s.substr(eq + 1));
            e.line = line;
            if (e.key.empty())
                throw ConfigError(origin + ": empty key at line " + std::to_string(line));
            entries.push_back(e);
        }
    }

    RunConfig cfg;
    auto find = [&](const std::string& section, const std::string& key) -> Entry* {
        Entry* hit = nullptr;
        for (Entry& e : entries)
            if (e.section == section && e.key == key) {
                e.used = true;
                hit = &e;  // last occurrence wins
            }
        return hit;
    };

    for (const Entry& e : entries) {
        if (e.section == "environment") cfg.has_environment = true;
        if (e.section == "ladder") cfg.has_ladder = true;
        if (e.section == "solver") cfg.has_solver = true;
        if (e.section == "output") cfg.has_output = true;
    }
    if (!cfg.has_environment) throw ConfigError(origin + ": missing [environment] section");

    ExperimentPlan& plan = cfg.plan;
    RateKernel& k = plan.kernel;

    Entry* e = find("environment", "model");
    if (!e) throw ConfigError(origin + ": missing key 'model' in [environment]");
    try {
        k.model = model_from_name(e->value);
    } catch (const std::exception&) {
        fail(*e, "unknown model for key");
    }
    if ((e = find("environment", "d"))) plan.d = static_cast<int>(to_long(*e));
    if ((e = find("environment", "seed"))) plan.seed = to_u64(*e);
    if ((e = find("environment", "L"))) cfg.L = to_double(*e);

    const bool has_law = k.model == Model::NN_CONDUCTANCE || k.model == Model::LONG_RANGE;
    if ((e = find("environment", "law"))) {
        if (!has_law) fail(*e, "model does not use key");
        if (e->value == "constant")
            k.law.kind = ConductanceLaw::Kind::CONSTANT;
        else if (e->value == "two_point")
            k.law.kind = ConductanceLaw::Kind::TWO_POINT;
        else if (e->value == "uniform")
            k.law.kind = ConductanceLaw::Kind::UNIFORM;
        else
            fail(*e, "unknown conductance law for key");
    }
    if ((e = find("environment", "c"))) {
        if (!has_law || k.law.kind != ConductanceLaw::Kind::CONSTANT)
            fail(*e, "law does not use key");
        k.law.c = to_double(*e);
    }
    for (const char* name : {"c1", "c2", "q"}) {
        if ((e = find("environment", name))) {
            if (!has_law || k.law.kind != ConductanceLaw::Kind::TWO_POINT)
                fail(*e, "law does not use key");
            const double v = to_double(*e);
            if (std::string(name) == "c1") k.law.c1 = v;
            if (std::string(name) == "c2") k.law.c2 = v;
            if (std::string(name) == "q") k.law.q = v;
        }
    }
    for (const char* name : {"lo", "hi"}) {
        if ((e = find("environment", name))) {
            if (!has_law || k.law.kind != ConductanceLaw::Kind::UNIFORM)
                fail(*e, "law does not use key");
            (std::string(name) == "lo" ? k.law.lo : k.law.hi) = to_double(*e);
        }
    }
    if ((e = find("environment", "weights"))) {
        if (k.model != Model::NN_CONDUCTANCE) fail(*e, "model does not use key");
        if (e->value == "unit")
            k.weight_mode = WeightMode::UNIT;
        else if (e->value == "degree")
            k.weight_mode = WeightMode::DEGREE;
        else
            fail(*e, "unknown weight mode for key");
    }
    if ((e = find("environment", "s"))) {
        if (k.model != Model::LONG_RANGE) fail(*e, "model does not use key");
        k.s = to_double(*e);
    }
    if ((e = find("environment", "p"))) {
        if (k.model != Model::PERCOLATION) fail(*e, "model does not use key");
        k.p = to_double(*e);
    }
    if ((e = find("environment", "rho"))) {
        if (k.model != Model::MOTT) fail(*e, "model does not use key");
        k.rho = to_double(*e);
    }
    if ((e = find("environment", "marks"))) {
        if (k.model != Model::MOTT) fail(*e, "model does not use key");
        if (e->value == "zero")
            k.mark_law.kind = MarkLaw::Kind::ZERO;
        else if (e->value == "uniform")
            k.mark_law.kind = MarkLaw::Kind::UNIFORM;
        else
            fail(*e, "unknown mark law for key");
    }
    for (const char* name : {"mark_lo", "mark_hi"}) {
        if ((e = find("environment", name))) {
            if (k.model != Model::MOTT) fail(*e, "model does not use key");
            (std::string(name) == "mark_lo" ? k.mark_law.lo : k.mark_law.hi) = to_double(*e);
        }
    }
    if ((e = find("environment", "R_max"))) {
        if (k.model != Model::MOTT && k.model != Model::LONG_RANGE)
            fail(*e, "model does not use key");
        k.R_max = to_double(*e);
    }

    if ((e = find("ladder", "S"))) plan.S = to_double(*e);
    if ((e = find("ladder", "eps"))) {
        plan.eps.clear();
        for (const std::string& tok : split(e->value, ','))
            plan.eps.push_back(to_ratio(*e, tok));
        if (plan.eps.empty()) fail(*e, "empty list for key");
    }
    if ((e = find("ladder", "lambda"))) plan.lambda = to_double(*e);
    if ((e = find("ladder", "f"))) {
        try {
            plan.f = parse_test_function(e->value, plan.d);
        } catch (const std::exception& ex) {
            throw ConfigError(std::string(ex.what()) + " (key 'f' in [ladder] at line " +
                              std::to_string(e->line) + ")");
        }
    }
    if ((e = find("ladder", "phis"))) {
        plan.phis.clear();
        for (const std::string& tok : split(e->value, ';')) {
            try {
                plan.phis.push_back(parse_test_function(tok, plan.d));
            } catch (const std::exception& ex) {
                throw ConfigError(std::string(ex.what()) + " (key 'phis' in [ladder] at line " +
                                  std::to_string(e->line) + ")");
            }
        }
    }
    if ((e = find("ladder", "times"))) {
        plan.times.clear();
        for (const std::string& tok : split(e->value, ',')) {
            Entry sub = *e;
            sub.value = tok;
            plan.times.push_back(to_double(sub));
        }
    }
    if ((e = find("ladder", "replicas"))) plan.replicas = static_cast<int>(to_long(*e));
    if ((e = find("ladder", "grid"))) plan.grid = static_cast<int>(to_long(*e));
    if ((e = find("ladder", "protocol"))) {
        if (e->value == "pinned")
            plan.protocol = Protocol::PINNED;
        else if (e->value == "fresh")
            plan.protocol = Protocol::FRESH;
        else
            fail(*e, "unknown protocol for key");
    }
    if ((e = find("ladder", "gamma_tol"))) plan.gamma_tol = to_double(*e);
    if ((e = find("ladder", "f_cert_tol"))) plan.f_cert_tol = to_double(*e);

    if ((e = find("solver", "tol"))) plan.solver.tol = to_double(*e);
    if ((e = find("solver", "max_iter"))) plan.solver.max_iter = to_long(*e);
    if ((e = find("solver", "tail_tol"))) plan.solver.tail_tol = to_double(*e);
    if ((e = find("solver", "jacobi"))) plan.solver.jacobi = to_bool(*e);

    if ((e = find("output", "dir"))) cfg.output.dir = e->value;

    for (const Entry& ent : entries)
        if (!ent.used)
            throw ConfigError("unknown key '" + ent.key + "' in [" + ent.section + "] at line " +
                              std::to_string(ent.line));

    if (plan.d < 1 || plan.d > 3) throw ConfigError("d must be 1, 2 or 3");
    try {
        k.law.validate();
    } catch (const std::exception& ex) {
        throw ConfigError(ex.what());
    }
    return cfg;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot read config file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config_text(buf.str(), path);
}

}  // namespace homog
