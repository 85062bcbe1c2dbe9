#include "homog/report.hpp"

#include <cstdio>
#include <fstream>
#include <limits>

#include "json.hpp"

namespace homog {

using nlohmann::json;

void atomic_write(const std::string& path, const std::string& content) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot open for write: " + tmp);
        out << content;
        if (!out) throw std::runtime_error("write failed: " + tmp);
    }
    if (std::rename(tmp.c_str(), path.c_str()) != 0)
        throw std::runtime_error("cannot rename " + tmp + " -> " + path);
}

namespace {

std::string num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

json mat_json(const Mat& m, int d) {
    json rows = json::array();
    for (int i = 0; i < d; ++i) {
        json r = json::array();
        for (int j = 0; j < d; ++j) r.push_back(m[static_cast<size_t>(i)][static_cast<size_t>(j)]);
        rows.push_back(r);
    }
    return rows;
}

json palm_json(const PalmEstimate& e) {
    return json{{"value", e.value}, {"std_error", e.std_error}, {"samples", e.samples}};
}

json kernel_json(const RateKernel& k, int d) {
    json out;
    out["model"] = model_name(k.model);
    out["d"] = d;
    out["R_max"] = k.R_max;
    switch (k.model) {
        case Model::NN_CONDUCTANCE:
        case Model::LONG_RANGE: {
            switch (k.law.kind) {
                case ConductanceLaw::Kind::CONSTANT:
                    out["law"] = "constant";
                    out["c"] = k.law.c;
                    break;
                case ConductanceLaw::Kind::TWO_POINT:
                    out["law"] = "two_point";
                    out["c1"] = k.law.c1;
                    out["c2"] = k.law.c2;
                    out["q"] = k.law.q;
                    break;
                case ConductanceLaw::Kind::UNIFORM:
                    out["law"] = "uniform";
                    out["lo"] = k.law.lo;
                    out["hi"] = k.law.hi;
                    break;
            }
            if (k.model == Model::NN_CONDUCTANCE)
                out["weight_mode"] = k.weight_mode == WeightMode::UNIT ? "unit" : "degree";
            else
                out["s"] = k.s;
            break;
        }
        case Model::PERCOLATION:
            out["p"] = k.p;
            break;
        case Model::MOTT:
            out["rho"] = k.rho;
            out["mark_law"] = k.mark_law.kind == MarkLaw::Kind::ZERO ? "zero" : "uniform";
            if (k.mark_law.kind == MarkLaw::Kind::UNIFORM) {
                out["mark_lo"] = k.mark_law.lo;
                out["mark_hi"] = k.mark_law.hi;
            }
            break;
    }
    return out;
}

}  // namespace

std::string ladder_csv(const ConvergenceReport& report) {
    const size_t nphi = report.plan.phis.size();
    const size_t nt = report.plan.times.size();
    std::string out = "eps,replica";
    for (size_t j = 1; j <= nphi; ++j) out += ",weak_gap_" + std::to_string(j);
    out += ",mass_gap,atomwise_l2";
    for (size_t j = 1; j <= nphi; ++j) out += ",flow_gap_" + std::to_string(j);
    out += ",energy_gap,resolvent_l2,resolvent_l1";
    for (size_t k = 1; k <= nt; ++k) out += ",semigroup_l2_t" + std::to_string(k);
    for (size_t k = 1; k <= nt; ++k) out += ",semigroup_l1_t" + std::to_string(k);
    out += ",cg_iters,seconds\n";

    const double bad = std::numeric_limits<double>::quiet_NaN();
    for (const LadderRow& row : report.rows) {
        const bool ok = row.error.empty();
        out += num(row.eps);
        out += ',' + std::to_string(row.replica);
        for (size_t j = 0; j < nphi; ++j)
            out += ',' + num(ok ? row.weak_gaps[j] : bad);
        out += ',' + num(ok ? row.mass_gap : bad);
        out += ',' + num(ok ? row.atomwise_l2 : bad);
        for (size_t j = 0; j < nphi; ++j)
            out += ',' + num(ok ? row.flow_gaps[j] : bad);
        out += ',' + num(ok ? row.energy_gap : bad);
        out += ',' + num(ok ? row.resolvent_l2 : bad);
        out += ',' + num(ok ? row.resolvent_l1 : bad);
        for (size_t k = 0; k < nt; ++k)
            out += ',' + num(ok ? row.semigroup_l2[k] : bad);
        for (size_t k = 0; k < nt; ++k)
            out += ',' + num(ok ? row.semigroup_l1[k] : bad);
        out += ',' + std::to_string(row.cg_iters);
        out += ',' + num(row.seconds);
        out += '\n';
    }
    return out;
}

std::string report_json(const ConvergenceReport& report, const std::string& config_path) {
    const ExperimentPlan& plan = report.plan;
    const int d = plan.d;
    json j;
    j["schema"] = 1;
    j["command"] = "converge";
    j["seed"] = plan.seed;
    j["config"] = config_path;

    json pj;
    pj["kernel"] = kernel_json(plan.kernel, d);
    pj["S"] = plan.S;
    pj["eps"] = plan.eps;
    pj["lambda"] = plan.lambda;
    pj["f"] = plan.f.describe(d);
    json phis = json::array();
    for (const TestFunctionSpec& p : plan.phis) phis.push_back(p.describe(d));
    pj["phis"] = phis;
    pj["times"] = plan.times;
    pj["replicas"] = plan.replicas;
    pj["grid"] = plan.grid_resolution();
    pj["protocol"] = plan.protocol == Protocol::PINNED ? "pinned" : "fresh";
    pj["gamma_tol"] = plan.gamma_tol;
    pj["f_cert_tol"] = plan.f_cert_tol;
    pj["solver_options"] = json{{"tol", plan.solver.tol},
                                {"max_iter", plan.solver.max_iter},
                                {"tail_tol", plan.solver.tail_tol},
                                {"jacobi", plan.solver.jacobi}};
    j["plan"] = pj;

    j["palm"] = json{{"m", palm_json(report.m)},
                     {"lambda0", palm_json(report.lambda0)},
                     {"lambda1", palm_json(report.lambda1)},
                     {"lambda2", palm_json(report.lambda2)}};

    const EffectiveMatrix& em = report.effective.matrix;
    json ej;
    ej["D"] = mat_json(em.D, d);
    ej["stderr"] = mat_json(em.std_error, d);
    json evals = json::array(), evecs = json::array();
    for (int k = 0; k < d; ++k) {
        evals.push_back(em.eigenvalues[k]);
        json v = json::array();
        for (int i = 0; i < d; ++i) v.push_back(em.eigenvectors[static_cast<size_t>(k)][i]);
        evecs.push_back(v);
    }
    ej["eigenvalues"] = evals;
    ej["eigenvectors"] = evecs;
    ej["d_star"] = em.d_star;
    ej["gamma_tol"] = em.gamma_tol;
    ej["flux_discrepancy"] = report.effective.flux_discrepancy;
    ej["upper_bound"] = mat_json(report.effective.upper_bound, d);
    ej["samples"] = em.samples;
    j["effective_matrix"] = ej;

    long total_iters = report.effective.total_iterations;
    double max_res = 0.0, row_seconds = 0.0;
    for (const LadderRow& row : report.rows) {
        total_iters += row.cg_iters;
        max_res = std::max(max_res, row.residual);
        row_seconds += row.seconds;
    }
    j["solver"] = json{{"iterations", total_iters}, {"residual", max_res}, {"seconds", row_seconds}};

    json rows = json::array();
    for (const LadderRow& row : report.rows) {
        json rj;
        rj["eps"] = row.eps;
        rj["replica"] = row.replica;
        rj["weak_gaps"] = row.weak_gaps;
        rj["mass_gap"] = row.mass_gap;
        rj["atomwise_l2"] = row.atomwise_l2;
        rj["flow_gaps"] = row.flow_gaps;
        rj["energy_gap"] = row.energy_gap;
        rj["resolvent_l2"] = row.resolvent_l2;
        rj["resolvent_l1"] = row.resolvent_l1;
        rj["semigroup_l2"] = row.semigroup_l2;
        rj["semigroup_l1"] = row.semigroup_l1;
        rj["f_cert"] = json{{"mass_gap", row.f_cert_mass}, {"atomwise_l2", row.f_cert_l2}};
        rj["cg_iters"] = row.cg_iters;
        rj["seconds"] = row.seconds;
        if (!row.error.empty()) rj["error"] = row.error;
        rows.push_back(rj);
    }
    j["rows"] = rows;
    j["note"] =
        "the limit statements quantified here carry no rate; gap thresholds are "
        "trend-based engineering defaults";
    j["warnings"] = report.warnings;
    j["seconds"] = report.seconds;
    return j.dump(2) + "\n";
}

std::string grid_field_text(const GridField& g) {
    std::string out;
    out.reserve(24 * g.size() + 64);
    out += "# grid field v1\n";
    out += "d = " + std::to_string(g.d) + "\n";
    out += "n = " + std::to_string(g.n) + "\n";
    out += "S = " + num(g.S) + "\n";
    for (double v : g.v) {
        out += num(v);
        out += '\n';
    }
    return out;
}

std::string generator_dump(const Environment& env, double eps) {
    std::string dump = serialize_environment(env);
    const size_t nl = dump.find('\n');
    dump.insert(nl + 1, "eps = " + num(eps) + "\n");
    return dump;
}

}  // namespace homog
