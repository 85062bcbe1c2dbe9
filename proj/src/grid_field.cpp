#include "homog/grid_field.hpp"

#include <cmath>
#include <stdexcept>

namespace homog {

void validate_resolution(int n) {
    if (n < 4 || (n & (n - 1)) != 0)
        throw std::invalid_argument("grid resolution must be a power of two >= 4, got " +
                                    std::to_string(n));
}

GridField::GridField(int d_, int n_, double S_) : d(d_), n(n_), S(S_) {
    validate_resolution(n_);
    if (d < 1 || d > 3) throw std::invalid_argument("GridField: dimension must be in 1..3");
    if (!(S > 0.0)) throw std::invalid_argument("GridField: side must be positive");
    size_t total = 1;
    for (int i = 0; i < d; ++i) total *= static_cast<size_t>(n);
    v.assign(total, 0.0);
}

GridField grid_from_function(const TestFunction& f, int n) {
    GridField g(f.dim(), n, f.side());
    const double h = g.spacing();
    const int d = g.d;
    std::array<int, 3> k{0, 0, 0};
    for (size_t idx = 0; idx < g.size(); ++idx) {
        Vec x = vec0();
        for (int i = 0; i < d; ++i) x[i] = h * k[static_cast<size_t>(i)];
        g.v[idx] = f(x);
        for (int i = 0; i < d; ++i) {
            if (++k[static_cast<size_t>(i)] < n) break;
            k[static_cast<size_t>(i)] = 0;
        }
    }
    return g;
}

double quadrature(const GridField& g) {
    double acc = 0.0;
    for (double x : g.v) acc += x;
    return g.cell_volume() * acc;
}

double grid_inner(const GridField& a, const GridField& b) {
    if (a.d != b.d || a.n != b.n || a.S != b.S)
        throw std::invalid_argument("grid_inner: incompatible grids");
    double acc = 0.0;
    for (size_t i = 0; i < a.size(); ++i) acc += a.v[i] * b.v[i];
    return a.cell_volume() * acc;
}

double grid_norm(const GridField& a) { return std::sqrt(grid_inner(a, a)); }

double interpolate(const GridField& g, const Vec& x) {
    const double h = g.spacing();
    std::array<int, 3> base{0, 0, 0};
    std::array<double, 3> frac{0.0, 0.0, 0.0};
    for (int i = 0; i < g.d; ++i) {
        double t = x[i] / h;
        double fl = std::floor(t);
        base[static_cast<size_t>(i)] = static_cast<int>(fl) % g.n;
        if (base[static_cast<size_t>(i)] < 0) base[static_cast<size_t>(i)] += g.n;
        frac[static_cast<size_t>(i)] = t - fl;
    }
    double acc = 0.0;
    const int corners = 1 << g.d;
    for (int c = 0; c < corners; ++c) {
        double w = 1.0;
        size_t idx = 0;
        size_t stride = 1;
        for (int i = 0; i < g.d; ++i) {
            const int bit = (c >> i) & 1;
            int ki = base[static_cast<size_t>(i)] + bit;
            if (ki >= g.n) ki -= g.n;
            w *= bit ? frac[static_cast<size_t>(i)] : 1.0 - frac[static_cast<size_t>(i)];
            idx += stride * static_cast<size_t>(ki);
            stride *= static_cast<size_t>(g.n);
        }
        acc += w * g.v[idx];
    }
    return acc;
}

}  // namespace homog
