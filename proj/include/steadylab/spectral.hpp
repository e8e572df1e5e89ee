#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "steadylab/field.hpp"

namespace steadylab {

enum class NormKind { L2, H1dot, Hminus1, X };

/// Plancherel norms on the periodic box.
///   L2      : sqrt(V sum |c|^2)
///   H1dot   : L2 of (2 pi |xi|) c
///   Hminus1 : L2 of (2 pi |xi|)^-1 c, the dual norm on mean-free fields
///   X       : max(L2, Hminus1)
/// V is the box volume. The zero mode never contributes.
double norm(const SpectralVectorField& u, NormKind kind);

/// Real Parseval pairing <u, v> = integral of u.v over the box.
double inner_product(const SpectralVectorField& u, const SpectralVectorField& v);

/// Applies (I - k k^T / |k|^2) at every k != 0 and pins the mean to zero.
SpectralVectorField leray_project(SpectralVectorField u);

/// Zeroes every mode outside the retained dealiasing shell.
SpectralVectorField dealias(SpectralVectorField u);

/// P(a . grad b), evaluated pseudo-spectrally.
///
/// Both inputs are restricted to the retained shell, the product is formed on
/// the grid, transformed back, truncated to the shell and Leray-projected.
/// When `max_speed` is non-null it receives max_x |a(x)|.
SpectralVectorField nonlinear_term(const SpectralVectorField& a, const SpectralVectorField& b,
                                   double* max_speed = nullptr);

/// max_k |khat . c(k)| / max_k |c(k)|; zero for the zero field.
double divergence_ratio(const SpectralVectorField& u);

/// max_k |c(-k) - conj(c(k))| / max_k |c(k)|; zero for the zero field.
double hermitian_defect(const SpectralVectorField& u);

/// max_x |u(x)| on the collocation grid.
double max_speed(const SpectralVectorField& u);

/// Grid values of the three components, each n^3 long in lattice order.
std::array<std::vector<double>, 3> to_physical(const SpectralVectorField& u);
SpectralVectorField from_physical(const Lattice& lattice,
                                  const std::array<std::vector<double>, 3>& values);

/// Divergence-free Gaussian field supported on lo <= |xi| <= hi inside the
/// retained shell, unnormalised. Each coefficient is drawn from a counter-based
/// generator keyed by (seed, k, component), so the result does not depend on
/// traversal order.
SpectralVectorField random_band_field(const Lattice& lattice, double lo, double hi,
                                      std::uint64_t seed);

/// Band-limited forcing rescaled so that norm(f, X) equals spec.target_x_norm.
/// Throws PreconditionError naming the nearest available shells when the band
/// holds no retained lattice mode.
SpectralVectorField random_bandpass_forcing(const Lattice& lattice, const ForcingSpec& spec);

/// Sorted distinct radii |k|/period of retained nonzero modes.
std::vector<double> retained_shells(const Lattice& lattice);

}  // namespace steadylab
