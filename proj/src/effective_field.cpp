#include "homog/effective_field.hpp"

#include <fftw3.h>

#include <cmath>
#include <complex>
#include <functional>
#include <mutex>

namespace homog {

namespace {

constexpr double TWO_PI = 6.283185307179586476925286766559;

// FFTW plan creation is not thread-safe; execution is.
std::mutex plan_mutex;

thread_local double g_imag_residue = 0.0;

struct FftBuffers {
    int d, n;
    size_t total;
    std::vector<std::complex<double>> in, out;
    fftw_plan fwd, bwd;

    FftBuffers(int d_, int n_) : d(d_), n(n_) {
        total = 1;
        for (int i = 0; i < d; ++i) total *= static_cast<size_t>(n);
        in.resize(total);
        out.resize(total);
        int dims[3] = {n, n, n};
        std::lock_guard<std::mutex> lock(plan_mutex);
        // Dimension order: FFTW's first dimension varies slowest, our axis 0
        // varies fastest, so the cube layout matches with axes reversed;
        // symmetric shapes make the distinction harmless.
        fwd = fftw_plan_dft(d, dims, reinterpret_cast<fftw_complex*>(in.data()),
                            reinterpret_cast<fftw_complex*>(out.data()), FFTW_FORWARD, FFTW_ESTIMATE);
        bwd = fftw_plan_dft(d, dims, reinterpret_cast<fftw_complex*>(in.data()),
                            reinterpret_cast<fftw_complex*>(out.data()), FFTW_BACKWARD, FFTW_ESTIMATE);
    }
    ~FftBuffers() {
        std::lock_guard<std::mutex> lock(plan_mutex);
        fftw_destroy_plan(fwd);
        fftw_destroy_plan(bwd);
    }
    FftBuffers(const FftBuffers&) = delete;
    FftBuffers& operator=(const FftBuffers&) = delete;
};

int signed_freq(int k, int n) { return k <= n / 2 ? k : k - n; }

/// Apply a complex multiplier m(k-index vector) in Fourier space.
GridField apply_multiplier(const GridField& f,
                           const std::function<std::complex<double>(const std::array<int, 3>&)>& mult) {
    FftBuffers fft(f.d, f.n);
    for (size_t i = 0; i < fft.total; ++i) fft.in[i] = f.v[i];
    fftw_execute(fft.fwd);

    std::array<int, 3> k{0, 0, 0};
    for (size_t idx = 0; idx < fft.total; ++idx) {
        fft.in[idx] = fft.out[idx] * mult(k);
        for (int i = 0; i < f.d; ++i) {
            if (++k[static_cast<size_t>(i)] < f.n) break;
            k[static_cast<size_t>(i)] = 0;
        }
    }
    fftw_execute(fft.bwd);

    GridField out(f.d, f.n, f.S);
    const double scale = 1.0 / static_cast<double>(fft.total);
    double worst = 0.0;
    for (size_t i = 0; i < fft.total; ++i) {
        out.v[i] = fft.out[i].real() * scale;
        worst = std::max(worst, std::abs(fft.out[i].imag()) * scale);
    }
    g_imag_residue = worst;
    return out;
}

double symbol_kDk(const Mat& D, const std::array<int, 3>& k, int d, int n, double S) {
    Vec kappa = vec0();
    for (int i = 0; i < d; ++i)
        kappa[i] = TWO_PI * signed_freq(k[static_cast<size_t>(i)], n) / S;
    return quad_form(D, kappa, d);
}

}  // namespace

double last_imag_residue() { return g_imag_residue; }

GridField solve_effective(const Mat& D, double lambda, const GridField& f) {
    if (!(lambda > 0.0)) throw std::invalid_argument("solve_effective: lambda must be positive");
    return apply_multiplier(f, [&](const std::array<int, 3>& k) {
        return std::complex<double>(1.0 / (lambda + symbol_kDk(D, k, f.d, f.n, f.S)), 0.0);
    });
}

GridField solve_effective(const EffectiveMatrix& D, double lambda, const TestFunction& f,
                          int resolution) {
    return solve_effective(D.D, lambda, grid_from_function(f, resolution));
}

GridField brownian_semigroup(const Mat& D, double t, const GridField& f) {
    if (t < 0.0) throw std::invalid_argument("brownian_semigroup: t must be nonnegative");
    return apply_multiplier(f, [&](const std::array<int, 3>& k) {
        return std::complex<double>(std::exp(-t * symbol_kDk(D, k, f.d, f.n, f.S)), 0.0);
    });
}

GridField brownian_semigroup(const EffectiveMatrix& D, double t, const TestFunction& f,
                             int resolution) {
    return brownian_semigroup(D.D, t, grid_from_function(f, resolution));
}

GridField effective_resolvent(const Mat& D, double lambda, const GridField& f) {
    return solve_effective(D, lambda, f);
}

std::array<GridField, 3> grad_star(const EffectiveMatrix& D, const GridField& u) {
    std::array<GridField, 3> out;
    for (int a = 0; a < u.d; ++a) out[static_cast<size_t>(a)] = GridField(u.d, u.n, u.S);

    for (int i = 0; i < D.d_star; ++i) {
        const Vec e = D.eigenvectors[static_cast<size_t>(i)];
        GridField du = apply_multiplier(u, [&](const std::array<int, 3>& k) {
            double ke = 0.0;
            for (int ax = 0; ax < u.d; ++ax) {
                const int sf = signed_freq(k[static_cast<size_t>(ax)], u.n);
                if (sf == u.n / 2 || sf == -u.n / 2) continue;  // no odd-length Nyquist derivative
                ke += TWO_PI * sf / u.S * e[ax];
            }
            return std::complex<double>(0.0, ke);
        });
        for (int ax = 0; ax < u.d; ++ax)
            for (size_t idx = 0; idx < du.size(); ++idx)
                out[static_cast<size_t>(ax)].v[idx] += du.v[idx] * e[ax];
    }
    return out;
}

}  // namespace homog
