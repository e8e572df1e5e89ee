#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "steadylab/field.hpp"

namespace steadylab {

struct EvolutionConfig {
  double dt = 1e-3;
  double horizon = 2.0;
  /// Absolute L2 level of v = w + Phi at which an evolution may stop early.
  double tail_tolerance = 1e-10;
  int snapshot_stride = 10;
  /// Advective Courant limit: dt <= cfl * (period / n) / max|u|.
  double cfl = 0.5;

  void validate() const;
};

/// Scalar diagnostics of a difference-equation run, sampled every
/// snapshot_stride steps (plus the final step).
struct TrajectoryRecord {
  std::vector<double> times;
  std::vector<double> l2;                    // ||w||_2
  std::vector<double> h1dot;                 // ||grad w||_2
  std::vector<double> l2_v;                  // ||w + Phi||_2
  std::vector<double> cumulative_enstrophy;  // nu int_0^t ||grad w||^2
  std::vector<double> phi_l2;                // ||Phi||_2
  std::vector<double> phi_h1dot;             // ||grad Phi||_2
  std::vector<std::pair<double, SpectralVectorField>> snapshots;  // w(t)

  double dt = 0.0;
  int steps = 0;
  std::optional<SpectralVectorField> final_w;
  /// Trapezoid integral of w over [0, T] on the integrator grid, and the same
  /// sum with step 2 dt for a Richardson error estimate.
  std::optional<SpectralVectorField> dense_integral;
  std::optional<SpectralVectorField> dense_integral_coarse;
};

struct EvolveOptions {
  bool store_snapshots = true;
  bool accumulate_integral = false;
};

/// One ETD2 step of w_t = nu Lap w - P(advect . grad w) + P(source) with a
/// frozen, divergence-free `advect`. Throws CflError before touching any state.
SpectralVectorField imex_step(const SpectralVectorField& w, const SpectralVectorField& advect,
                              const SpectralVectorField& source, double nu, double dt,
                              double cfl = 0.5);

/// Integrates w_t + P(U . grad w) = nu Lap w - P(U . grad Phi(t)) from w(0) = 0,
/// where U = u_prev is frozen and Phi(t) = heat_evolve(f, nu, t). Stops at
/// the horizon or once ||w + Phi||_2 <= tail_tolerance.
TrajectoryRecord evolve_difference(const SpectralVectorField& u_prev, const SpectralVectorField& f,
                                   const PhysicalParams& params, const EvolutionConfig& cfg,
                                   const EvolveOptions& options = {});

struct TimeIntegralResult {
  SpectralVectorField value;
  double quadrature_error = 0.0;
  double tail_error = 0.0;
  double tail_rate = 0.0;
  double horizon = 0.0;

  double error_estimate() const { return quadrature_error + tail_error; }
};

/// int_0^inf of sampled fields: composite trapezoid over the samples plus the
/// analytic exponential tail g(T) / rate, the rate fitted to the last decade
/// of ||g|| samples. Throws Error("tail not integrable at this horizon") when
/// the fitted rate is not positive. `rate_hint` is a lower bound on the tail
/// rate used for the tail error bound.
TimeIntegralResult time_integral(const std::vector<double>& times,
                                 const std::vector<SpectralVectorField>& samples,
                                 double rate_hint);

/// Integral of w over [0, inf) for a recorded run. Uses the dense on-grid sum
/// when the run accumulated one, otherwise the stored snapshots.
TimeIntegralResult time_integral(const TrajectoryRecord& traj, double rate_hint);

/// Exponential rate fitted to the last decade of a positive decaying series.
double tail_rate(const std::vector<double>& times, const std::vector<double>& values);

/// CSV with columns t,l2_w,h1dot_w,l2_v,cum_enstrophy at 17 significant digits.
std::string trajectory_csv(const TrajectoryRecord& traj);

}  // namespace steadylab
