#include "homog/palm.hpp"

#include <cmath>

namespace homog {

PalmEstimate estimate_intensity(const Environment& env) {
    if (env.atoms.empty()) throw std::invalid_argument("estimate_intensity: empty environment");
    return {env.total_weight() / env.box.volume(), 0.0, 1};
}

std::vector<double> lambda_k_field(const Environment& env, int k) {
    if (k < 0 || k > 2) throw std::invalid_argument("lambda_k_field: k must be in {0,1,2}");
    std::vector<double> lam(env.atoms.size(), 0.0);
    for (const EnvEdge& e : env.edges) {
        double w = 1.0;
        if (k >= 1) {
            const double dist = norm(e.z, env.box.d);
            w = k == 1 ? dist : dist * dist;
        }
        lam[static_cast<size_t>(e.i)] += env.rate_ij(e) * w;
        lam[static_cast<size_t>(e.j)] += env.rate_ji(e) * w;
    }
    return lam;
}

PalmEstimate estimate_lambda_k(const Environment& env, int k) {
    if (env.atoms.empty()) throw std::invalid_argument("estimate_lambda_k: empty environment");
    const std::vector<double> lam = lambda_k_field(env, k);
    double num = 0.0, den = 0.0;
    for (size_t i = 0; i < lam.size(); ++i) {
        num += env.atoms[i].weight * lam[i];
        den += env.atoms[i].weight;
    }
    return {num / den, 0.0, 1};
}

double ergodic_average(const Environment& env, double eps, double S_phi,
                       const std::function<double(const Vec&)>& phi, std::span<const double> f) {
    if (f.size() != env.atoms.size())
        throw std::invalid_argument("ergodic_average: observable length mismatch");
    const double S = eps * env.box.L;
    if (std::abs(S - S_phi) > 1e-12 * std::max(1.0, std::abs(S_phi)))
        throw std::invalid_argument("ergodic_average: test function domain mismatch");
    double epsd = 1.0;
    for (int i = 0; i < env.box.d; ++i) epsd *= eps;
    double acc = 0.0;
    for (size_t x = 0; x < env.atoms.size(); ++x) {
        Vec mx = env.atoms[x].pos;
        for (int i = 0; i < env.box.d; ++i) mx[i] *= eps;
        acc += env.atoms[x].weight * phi(mx) * f[x];
    }
    return epsd * acc;
}

PalmEstimate aggregate(std::span<const double> values) {
    if (values.empty()) throw std::invalid_argument("aggregate: no samples");
    const int n = static_cast<int>(values.size());
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= n;
    double var = 0.0;
    for (double v : values) var += (v - mean) * (v - mean);
    const double se = n > 1 ? std::sqrt(var / (static_cast<double>(n) * (n - 1))) : 0.0;
    return {mean, se, n};
}

}  // namespace homog
