#include "homog/effective_matrix.hpp"

#include <algorithm>
#include <cmath>

#include "homog/palm.hpp"

namespace homog {

std::vector<int32_t> connected_components(const SparseGenerator& gen, int* count) {
    const size_t N = gen.size();
    std::vector<int32_t> parent(N);
    for (size_t i = 0; i < N; ++i) parent[i] = static_cast<int32_t>(i);
    auto find = [&](int32_t a) {
        while (parent[static_cast<size_t>(a)] != a) {
            parent[static_cast<size_t>(a)] = parent[static_cast<size_t>(parent[static_cast<size_t>(a)])];
            a = parent[static_cast<size_t>(a)];
        }
        return a;
    };
    for (const GenEdge& e : gen.edges) {
        int32_t a = find(e.i), b = find(e.j);
        if (a != b) parent[static_cast<size_t>(std::max(a, b))] = std::min(a, b);
    }
    std::vector<int32_t> comp(N, -1);
    int c = 0;
    for (size_t i = 0; i < N; ++i) {
        int32_t r = find(static_cast<int32_t>(i));
        if (comp[static_cast<size_t>(r)] < 0) comp[static_cast<size_t>(r)] = c++;
        comp[i] = comp[static_cast<size_t>(r)];
    }
    if (count) *count = c;
    return comp;
}

namespace {

struct Projector {
    const SparseGenerator* gen;
    std::vector<int32_t> comp;
    int ncomp = 0;
    std::vector<double> comp_mass;

    explicit Projector(const SparseGenerator& g) : gen(&g) {
        comp = connected_components(g, &ncomp);
        comp_mass.assign(static_cast<size_t>(ncomp), 0.0);
        for (size_t i = 0; i < g.size(); ++i) comp_mass[static_cast<size_t>(comp[i])] += g.mu[i];
    }

    // Remove the mu-weighted mean on every component.
    void operator()(std::vector<double>& v) const {
        std::vector<double> mean(static_cast<size_t>(ncomp), 0.0);
        for (size_t i = 0; i < v.size(); ++i) mean[static_cast<size_t>(comp[i])] += gen->mu[i] * v[i];
        for (int k = 0; k < ncomp; ++k) mean[static_cast<size_t>(k)] /= comp_mass[static_cast<size_t>(k)];
        for (size_t i = 0; i < v.size(); ++i) v[i] -= mean[static_cast<size_t>(comp[i])];
    }
};

}  // namespace

Corrector solve_corrector(const SparseGenerator& gen, const Vec& a, const SolveOptions& opts) {
    opts.validate();
    if (gen.eps != 1.0) throw std::invalid_argument("solve_corrector: expects the eps=1 generator");
    const size_t N = gen.size();
    const long cap = opts.max_iter == -1 ? 20 * static_cast<long>(N) : opts.max_iter;

    Corrector cor;
    cor.dir = a;
    cor.chi = AtomField(gen);

    // B chi = g with B = -L (eps=1) and g(x) = (1/n_x) sum_y c_{x,y} a.z_{xy};
    // B is PSD in <.,.>_mu and positive definite on mean-zero functions per
    // component, which the projection enforces.
    std::vector<double> b(N, 0.0);
    for (const GenEdge& e : gen.edges) {
        const double az = dot(a, e.z, gen.d);
        b[static_cast<size_t>(e.i)] += e.r_ij * az;
        b[static_cast<size_t>(e.j)] -= e.r_ji * az;
    }
    Projector project(gen);
    project(b);

    const double bnorm = mu_norm(gen, b);
    if (bnorm == 0.0) return cor;

    std::vector<double> r = b, p = b, Ap(N);
    double rr = mu_inner(gen, r, r);
    double rnorm = std::sqrt(rr);
    while (rnorm > opts.tol * bnorm) {
        if (cor.iterations >= cap) {
            SolveStats st;
            st.iterations = cor.iterations;
            st.rel_residual = rnorm / bnorm;
            throw SolveFailure("solve_corrector: iteration cap exceeded", st);
        }
        apply_into(gen, p, Ap);
        for (size_t i = 0; i < N; ++i) Ap[i] = -Ap[i];
        const double pAp = mu_inner(gen, p, Ap);
        const double alpha = rr / pAp;
        for (size_t i = 0; i < N; ++i) cor.chi.v[i] += alpha * p[i];
        for (size_t i = 0; i < N; ++i) r[i] -= alpha * Ap[i];
        project(cor.chi.v);
        project(r);
        const double rr_next = mu_inner(gen, r, r);
        const double beta = rr_next / rr;
        rr = rr_next;
        for (size_t i = 0; i < N; ++i) p[i] = r[i] + beta * p[i];
        ++cor.iterations;
        rnorm = std::sqrt(rr);
    }
    cor.residual = rnorm / bnorm;
    return cor;
}

Mat estimate_D_single(const Environment& env, const SolveOptions& opts, Mat* flux_out,
                      long* iterations, std::vector<std::string>* warnings) {
    const SparseGenerator gen = assemble(env, 1.0);
    const int d = gen.d;
    int ncomp = 0;
    connected_components(gen, &ncomp);
    if (ncomp > 1 && warnings)
        warnings->push_back("conductance graph has " + std::to_string(ncomp) +
                            " components; correctors solved per component");

    std::array<Corrector, 3> chi;
    long iters = 0;
    for (int i = 0; i < d; ++i) {
        Vec a = vec0();
        a[i] = 1.0;
        chi[static_cast<size_t>(i)] = solve_corrector(gen, a, opts);
        iters += chi[static_cast<size_t>(i)].iterations;
    }
    if (iterations) *iterations = iters;

    const double W = mu_total_mass(gen);  // eps = 1, so this is sum n_x
    Mat D = mat_zero();
    Mat F = mat_zero();
    for (const GenEdge& e : gen.edges) {
        std::array<double, 3> corrected{};
        for (int i = 0; i < d; ++i)
            corrected[static_cast<size_t>(i)] =
                e.z[i] + chi[static_cast<size_t>(i)].chi.v[static_cast<size_t>(e.j)] -
                chi[static_cast<size_t>(i)].chi.v[static_cast<size_t>(e.i)];
        for (int i = 0; i < d; ++i) {
            for (int j = i; j < d; ++j)
                D[static_cast<size_t>(i)][static_cast<size_t>(j)] +=
                    e.c * corrected[static_cast<size_t>(i)] * corrected[static_cast<size_t>(j)];
            for (int j = 0; j < d; ++j)
                F[static_cast<size_t>(i)][static_cast<size_t>(j)] +=
                    e.c * e.z[i] * corrected[static_cast<size_t>(j)];
        }
    }
    for (int i = 0; i < d; ++i)
        for (int j = i; j < d; ++j) {
            D[static_cast<size_t>(i)][static_cast<size_t>(j)] /= W;
            D[static_cast<size_t>(j)][static_cast<size_t>(i)] =
                D[static_cast<size_t>(i)][static_cast<size_t>(j)];
        }
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) F[static_cast<size_t>(i)][static_cast<size_t>(j)] /= W;
    if (flux_out) *flux_out = F;
    return D;
}

Mat variational_upper_bound(const Environment& env) {
    const SparseGenerator gen = assemble(env, 1.0);
    const double W = mu_total_mass(gen);
    Mat ub = mat_zero();
    for (const GenEdge& e : gen.edges)
        for (int i = 0; i < gen.d; ++i)
            for (int j = 0; j < gen.d; ++j)
                ub[static_cast<size_t>(i)][static_cast<size_t>(j)] += e.c * e.z[i] * e.z[j];
    for (int i = 0; i < gen.d; ++i)
        for (int j = 0; j < gen.d; ++j) ub[static_cast<size_t>(i)][static_cast<size_t>(j)] /= W;
    return ub;
}

void eigendecompose(const Mat& D, int d, double gamma_tol, Vec& eigenvalues,
                    std::array<Vec, 3>& eigenvectors, int& d_star) {
    // Cyclic Jacobi on the d x d block; plenty for d <= 3.
    double a[3][3] = {};
    double v[3][3] = {};
    for (int i = 0; i < d; ++i) {
        for (int j = 0; j < d; ++j) a[i][j] = D[static_cast<size_t>(i)][static_cast<size_t>(j)];
        v[i][i] = 1.0;
    }
    for (int sweep = 0; sweep < 64; ++sweep) {
        double off = 0.0;
        for (int p = 0; p < d; ++p)
            for (int q = p + 1; q < d; ++q) off += a[p][q] * a[p][q];
        if (off < 1e-30) break;
        for (int p = 0; p < d; ++p) {
            for (int q = p + 1; q < d; ++q) {
                if (a[p][q] == 0.0) continue;
                const double theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                                 (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (int k = 0; k < d; ++k) {
                    const double akp = a[k][p], akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for (int k = 0; k < d; ++k) {
                    const double apk = a[p][k], aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
                for (int k = 0; k < d; ++k) {
                    const double vkp = v[k][p], vkq = v[k][q];
                    v[k][p] = c * vkp - s * vkq;
                    v[k][q] = s * vkp + c * vkq;
                }
            }
        }
    }
    std::array<int, 3> order{0, 1, 2};
    std::sort(order.begin(), order.begin() + d, [&](int x, int y) { return a[x][x] > a[y][y]; });
    eigenvalues = vec0();
    for (auto& e : eigenvectors) e = vec0();
    for (int k = 0; k < d; ++k) {
        const int src = order[static_cast<size_t>(k)];
        eigenvalues[k] = a[src][src];
        Vec col = vec0();
        for (int i = 0; i < d; ++i) col[i] = v[i][src];
        // Deterministic sign: largest-magnitude component positive.
        int big = 0;
        for (int i = 1; i < d; ++i)
            if (std::abs(col[i]) > std::abs(col[big])) big = i;
        if (col[big] < 0.0)
            for (int i = 0; i < d; ++i) col[i] = -col[i];
        eigenvectors[static_cast<size_t>(k)] = col;
    }
    d_star = 0;
    for (int k = 0; k < d; ++k)
        if (eigenvalues[k] > gamma_tol) ++d_star;
}

EffectiveMatrixResult estimate_D(std::span<const Environment> replicas, const SolveOptions& opts,
                                 double gamma_tol) {
    if (replicas.empty()) throw std::invalid_argument("estimate_D: needs at least one replica");
    EffectiveMatrixResult res;
    const int d = replicas[0].box.d;
    res.matrix.d = d;
    res.matrix.samples = static_cast<int>(replicas.size());

    std::vector<Mat> fluxes;
    for (const Environment& env : replicas) {
        Mat flux;
        long iters = 0;
        Mat Dr = estimate_D_single(env, opts, &flux, &iters, &res.warnings);
        res.replica_D.push_back(Dr);
        fluxes.push_back(flux);
        res.total_iterations += iters;

        Mat ub = variational_upper_bound(env);
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j) {
                res.upper_bound[static_cast<size_t>(i)][static_cast<size_t>(j)] +=
                    ub[static_cast<size_t>(i)][static_cast<size_t>(j)] / static_cast<double>(replicas.size());
                res.flux[static_cast<size_t>(i)][static_cast<size_t>(j)] +=
                    flux[static_cast<size_t>(i)][static_cast<size_t>(j)] / static_cast<double>(replicas.size());
            }
    }
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) {
            std::vector<double> vals;
            vals.reserve(res.replica_D.size());
            for (const Mat& m : res.replica_D)
                vals.push_back(m[static_cast<size_t>(i)][static_cast<size_t>(j)]);
            const PalmEstimate est = aggregate(vals);
            res.matrix.D[static_cast<size_t>(i)][static_cast<size_t>(j)] = est.value;
            res.matrix.std_error[static_cast<size_t>(i)][static_cast<size_t>(j)] = est.std_error;
        }

    double dmax = 0.0;
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j)
            dmax = std::max(dmax, std::abs(res.matrix.D[static_cast<size_t>(i)][static_cast<size_t>(j)]));
    for (size_t r = 0; r < res.replica_D.size(); ++r)
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j) {
                const double gap = std::abs(res.replica_D[r][static_cast<size_t>(i)][static_cast<size_t>(j)] -
                                            fluxes[r][static_cast<size_t>(i)][static_cast<size_t>(j)]);
                res.flux_discrepancy = std::max(res.flux_discrepancy, gap / std::max(dmax, 1e-300));
            }

    eigendecompose(res.matrix.D, d, 0.0, res.matrix.eigenvalues, res.matrix.eigenvectors,
                   res.matrix.d_star);
    double tol = gamma_tol;
    if (!(tol > 0.0)) tol = 1e-8 * std::max(res.matrix.eigenvalues[0], 1.0);
    res.matrix.gamma_tol = tol;
    res.matrix.d_star = 0;
    for (int k = 0; k < d; ++k)
        if (res.matrix.eigenvalues[k] > tol) ++res.matrix.d_star;
    return res;
}

}  // namespace homog
