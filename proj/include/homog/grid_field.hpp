#pragma once

#include <vector>

#include "homog/test_function.hpp"

namespace homog {

/// Values on the regular periodic grid {(S/n) k : k in [0,n)^d}, stored with
/// axis 0 fastest: index = k0 + n*(k1 + n*k2).
struct GridField {
    int d = 1;
    int n = 4;
    double S = 1.0;
    std::vector<double> v;

    GridField() = default;
    GridField(int d_, int n_, double S_);

    size_t size() const { return v.size(); }
    double spacing() const { return S / n; }
    double cell_volume() const {
        double h = spacing(), vol = 1.0;
        for (int i = 0; i < d; ++i) vol *= h;
        return vol;
    }
};

/// n must be a power of two >= 4.
void validate_resolution(int n);

GridField grid_from_function(const TestFunction& f, int n);

/// (S/n)^d sum of values.
double quadrature(const GridField& g);
double grid_inner(const GridField& a, const GridField& b);
double grid_norm(const GridField& a);

/// Periodic multilinear interpolation at a macroscopic point.
double interpolate(const GridField& g, const Vec& x);

}  // namespace homog
