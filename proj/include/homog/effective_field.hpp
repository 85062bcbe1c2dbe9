#pragma once

#include "homog/effective_matrix.hpp"
#include "homog/grid_field.hpp"

namespace homog {

// Homogenized-equation solvers. D is a constant matrix, so every operation is
// a Fourier multiplier in the wave vector kappa(k) = 2 pi k / S; degenerate
// directions of D contribute nothing to kappa . D kappa and are transported
// identically by the semigroup, which realizes the projected gradient without
// any special casing.

/// u with  (lambda + kappa . D kappa) u^ = f^.
GridField solve_effective(const Mat& D, double lambda, const GridField& f);
GridField solve_effective(const EffectiveMatrix& D, double lambda, const TestFunction& f,
                          int resolution);

/// Multiplier e^{-t kappa . D kappa}: the semigroup of Brownian motion with
/// covariance 2D.
GridField brownian_semigroup(const Mat& D, double t, const GridField& f);
GridField brownian_semigroup(const EffectiveMatrix& D, double t, const TestFunction& f,
                             int resolution);

GridField effective_resolvent(const Mat& D, double lambda, const GridField& f);

/// Components of the projected gradient: out[a](x) = sum_{i <= d_star}
/// (d_{e_i} u)(x) e_i[a]. Spectral derivatives; Nyquist modes dropped.
std::array<GridField, 3> grad_star(const EffectiveMatrix& D, const GridField& u);

/// Largest |imaginary part| left behind by the last inverse transform on this
/// thread, relative diagnostics for the realness invariant.
double last_imag_residue();

}  // namespace homog
