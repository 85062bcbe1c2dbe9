#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "homog/box.hpp"
#include "homog/rng.hpp"

namespace homog {

struct GenerationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class Model { NN_CONDUCTANCE, LONG_RANGE, PERCOLATION, MOTT };
enum class WeightMode { UNIT, DEGREE };

const char* model_name(Model m);
Model model_from_name(const std::string& s);

struct ConductanceLaw {
    enum class Kind { CONSTANT, TWO_POINT, UNIFORM };
    Kind kind = Kind::CONSTANT;
    double c = 1.0;                    // CONSTANT
    double c1 = 1.0, c2 = 4.0, q = 0.5;  // TWO_POINT: c1 w.p. q, else c2
    double lo = 0.5, hi = 1.5;         // UNIFORM

    double sample(Stream& st) const;
    double mean() const;
    void validate() const;
};

struct MarkLaw {
    enum class Kind { ZERO, UNIFORM };
    Kind kind = Kind::UNIFORM;
    double lo = -1.0, hi = 1.0;

    double sample(Stream& st) const { return kind == Kind::ZERO ? 0.0 : st.next_uniform(lo, hi); }
};

/// Parameters of the jump-rate model. Which fields are read depends on model.
struct RateKernel {
    Model model = Model::NN_CONDUCTANCE;
    ConductanceLaw law;                      // NN_CONDUCTANCE, LONG_RANGE
    WeightMode weight_mode = WeightMode::UNIT;  // NN_CONDUCTANCE
    double s = 4.0;      // LONG_RANGE decay exponent, requires s > d+2
    double p = 0.5;      // PERCOLATION open-bond probability
    double rho = 1.0;    // MOTT point intensity
    MarkLaw mark_law;    // MOTT energy marks
    double R_max = 1.0;  // truncation radius; NN and percolation use 1
};

struct Atom {
    Vec pos = vec0();
    double weight = 1.0;  // n_x
    double mark = 0.0;    // Mott energy, 0 otherwise
};

/// One unordered pair. z = periodic_displacement(atom i -> atom j).
/// The conductance c = n_i r_{i,j} = n_j r_{j,i} is the stored quantity, so
/// detailed balance is structural, not numerical.
struct EnvEdge {
    int32_t i = 0, j = 0;
    Vec z = vec0();
    double c = 0.0;
};

struct Environment {
    BoxSpec box;
    RateKernel kernel;
    uint64_t seed = 0;
    std::string model;
    bool has_marks = false;
    std::vector<Atom> atoms;
    std::vector<EnvEdge> edges;

    /// Jump rate along edge e leaving its i-side (j-side for rate_ji).
    double rate_ij(const EnvEdge& e) const { return e.c / atoms[static_cast<size_t>(e.i)].weight; }
    double rate_ji(const EnvEdge& e) const { return e.c / atoms[static_cast<size_t>(e.j)].weight; }

    double total_weight() const;
};

/// Same conductances, weights forced to n ≡ 1 (so rates become r = c).
Environment reweight_unit(const Environment& env);
/// Same conductances, weights set to the conductance degree n_x = Σ_y c_{x,y}.
Environment reweight_degree(const Environment& env);

std::string serialize_environment(const Environment& env);
Environment parse_environment(const std::string& text);
void save_environment(const Environment& env, const std::string& path);
Environment load_environment(const std::string& path);

}  // namespace homog
