#pragma once

#include "homog/effective_field.hpp"
#include "homog/env_gen.hpp"
#include "homog/palm.hpp"

namespace homog {

enum class Protocol {
    PINNED,  // one master sample per replica, periodized at every box size
    FRESH    // independent sub-seed per (eps, replica)
};

struct ExperimentPlan {
    int d = 1;
    RateKernel kernel;
    double S = 8.0;
    std::vector<double> eps;  // strictly decreasing
    double lambda = 1.0;
    TestFunctionSpec f = TestFunctionSpec::gaussian({4.0, 4.0, 4.0}, 0.5);
    std::vector<TestFunctionSpec> phis;
    std::vector<double> times;
    int replicas = 1;
    double gamma_tol = 0.0;  // 0 selects the estimate_D default
    SolveOptions solver;
    uint64_t seed = 1;
    int grid = 0;  // 0 selects 2048 / 512 / 128 for d = 1 / 2 / 3
    Protocol protocol = Protocol::PINNED;
    double f_cert_tol = 0.05;

    int grid_resolution() const;
    void validate() const;
    bool lattice_model() const { return kernel.model != Model::MOTT; }
    /// Environment sub-seed for one ladder cell.
    uint64_t env_seed(size_t eps_index, int replica) const;
};

struct LadderRow {
    double eps = 0.0;
    int replica = 0;
    std::vector<double> weak_gaps;      // one per phi
    double mass_gap = 0.0;
    double atomwise_l2 = 0.0;
    std::vector<double> flow_gaps;      // one per phi
    double energy_gap = 0.0;
    double resolvent_l2 = 0.0;
    double resolvent_l1 = 0.0;
    std::vector<double> semigroup_l2;   // one per time point
    std::vector<double> semigroup_l1;
    double f_cert_mass = 0.0;  // restriction certificate, strong gap of restrict(f) vs f
    double f_cert_l2 = 0.0;
    long cg_iters = 0;
    double residual = 0.0;  // achieved relative residual of the row's solve
    double seconds = 0.0;
    std::string error;  // nonempty when this cell failed
};

struct ConvergenceReport {
    ExperimentPlan plan;
    EffectiveMatrixResult effective;
    PalmEstimate m, lambda0, lambda1, lambda2;
    std::vector<LadderRow> rows;  // eps-major, replica-minor, eps order of the plan
    std::vector<std::string> warnings;
    double seconds = 0.0;
};

// Gap metrics. L2-flavored gaps are the mu-weighted sums of squares, matching
// the limit statements they quantify; L1 gaps are mu-weighted absolute sums.

/// | sum eps^d n u(eps x) phi(eps x) - m * quadrature(u * phi) |
double weak_solution_gap(const SparseGenerator& gen, std::span<const double> u_eps,
                         const GridField& u, const TestFunction& phi, double m);

/// (| sum eps^d n u^2 - m * quadrature(u^2) |, sum eps^d n (u_eps - u(atom))^2)
std::pair<double, double> strong_solution_gap(const SparseGenerator& gen,
                                              std::span<const double> u_eps, const GridField& u,
                                              double m);

/// | eps^{d-2} sum_pairs c du dphi - m * quadrature(D grad_* u . grad_* phi) |
double flow_gap(const SparseGenerator& gen, std::span<const double> u_eps,
                const EffectiveMatrix& D, const GridField& u, const TestFunction& phi, double m);

/// | dirichlet_energy(u_eps) - m * quadrature(grad_* u . D grad_* u) |
double energy_gap(const SparseGenerator& gen, std::span<const double> u_eps,
                  const EffectiveMatrix& D, const GridField& u, double m);

ConvergenceReport run_ladder(const ExperimentPlan& plan, int jobs = 1);

}  // namespace homog
