#pragma once

#include <vector>

#include "steadylab/field.hpp"

namespace steadylab {

/// Diagonal heat multiplier exp(-4 pi^2 nu |xi|^2 t) applied to every mode.
SpectralVectorField heat_evolve(const SpectralVectorField& f, double nu, double t);

/// Measured heat energy against two envelopes.
///
/// paper_bound uses the rho0-rate form exp(-2 nu rho0 t) ||f||^2;
/// exact_bound uses the sharp spectral rate exp(-8 pi^2 nu rho_min^2 t),
/// rho_min the smallest supported |xi|. Only the sharp envelope decides `holds`.
struct HeatEnvelopeReport {
  std::vector<double> times;
  std::vector<double> measured;
  std::vector<double> paper_bound;
  std::vector<double> exact_bound;
  std::vector<bool> holds;
  std::vector<bool> paper_holds;
  double rho_min = 0.0;

  bool all_hold() const;
  bool all_paper_hold() const;
};

HeatEnvelopeReport heat_envelope_check(const SpectralVectorField& f, const PhysicalParams& params,
                                       const std::vector<double>& times);

/// 2 nu int_0^t ||grad Phi(s)||^2 ds, by the closed-form diagonal formula.
double heat_dissipation(const SpectralVectorField& f, double nu, double t);

/// ||Phi(t)||_2 ||grad Phi(t)||_2, the interpolation surrogate for ||Phi(t)||_3^2.
double heat_l3_surrogate(const SpectralVectorField& f, double nu, double t);

/// int_0^T ||Phi||_2 ||grad Phi||_2 ds by composite Simpson on `panels` panels.
double heat_l3_surrogate_integral(const SpectralVectorField& f, double nu, double horizon,
                                  int panels = 2048);

}  // namespace steadylab
