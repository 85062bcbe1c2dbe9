#pragma once

#include "homog/environment.hpp"

namespace homog {

// Samplers for the four point-cloud models. All of them are pure functions of
// (parameters, seed). Lattice bond variables are keyed by absolute site
// coordinates, so enlarging the box extends the sample instead of reshuffling
// it; that property is what the pinned ladder protocol relies on.

Environment generate_nn_conductance(const BoxSpec& box, const ConductanceLaw& law, WeightMode mode,
                                    uint64_t seed);

Environment generate_percolation(const BoxSpec& box, double p, uint64_t seed);

Environment generate_mott(const BoxSpec& box, double rho, const MarkLaw& marks, double R_max,
                          uint64_t seed);

Environment generate_long_range(const BoxSpec& box, const ConductanceLaw& law, double s,
                                double R_max, uint64_t seed);

/// Dispatch on kernel.model.
Environment generate_environment(const BoxSpec& box, const RateKernel& kernel, uint64_t seed);

/// Mott pair rate exp{-|z| - |Ei| - |Ej| - |Ei-Ej|}; symmetric in (i,j).
inline double mott_rate(double dist, double Ei, double Ej) {
    return std::exp(-dist - std::abs(Ei) - std::abs(Ej) - std::abs(Ei - Ej));
}

/// Raw open/closed bond field used by generate_percolation; exposed so tests
/// can run an independent clustering pass over the identical sample.
bool percolation_bond_open(uint64_t seed, double p, int axis, const std::array<int64_t, 3>& site);

}  // namespace homog
