#pragma once

#include <array>
#include <cmath>
#include <stdexcept>

namespace homog {

using Vec = std::array<double, 3>;

inline Vec vec0() { return {0.0, 0.0, 0.0}; }

inline double dot(const Vec& a, const Vec& b, int d) {
    double s = 0.0;
    for (int i = 0; i < d; ++i) s += a[i] * b[i];
    return s;
}

inline double norm(const Vec& a, int d) { return std::sqrt(dot(a, a, d)); }

/// Periodic sampling window [0,L)^d. The macroscopic torus side is S = eps*L.
struct BoxSpec {
    int d = 1;
    double L = 1.0;
    bool periodic = true;  // always true in v1

    void validate() const {
        if (d < 1 || d > 3) throw std::invalid_argument("BoxSpec: dimension must be in 1..3");
        if (!(L > 0.0)) throw std::invalid_argument("BoxSpec: side length must be positive");
    }
    bool lattice_side() const { return L == std::floor(L); }
    double volume() const {
        double v = 1.0;
        for (int i = 0; i < d; ++i) v *= L;
        return v;
    }
};

/// Unique representative of y - x (mod L) with components in [-L/2, L/2).
inline Vec periodic_displacement(const Vec& x, const Vec& y, const BoxSpec& box) {
    Vec z = vec0();
    const double L = box.L;
    for (int i = 0; i < box.d; ++i) {
        double r = std::fmod(y[i] - x[i], L);
        if (r < -L / 2.0) r += L;
        if (r >= L / 2.0) r -= L;
        z[i] = r;
    }
    return z;
}

/// Map a point back into [0,L)^d.
inline Vec wrap_position(Vec x, const BoxSpec& box) {
    for (int i = 0; i < box.d; ++i) {
        double r = std::fmod(x[i], box.L);
        if (r < 0.0) r += box.L;
        if (r >= box.L) r -= box.L;  // fmod can return L for tiny negatives
        x[i] = r;
    }
    return x;
}

}  // namespace homog
