#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "steadylab/field.hpp"
#include "steadylab/linear_evolution.hpp"

namespace steadylab {

/// One ETD2 step of u_t + P(u . grad u) = nu Lap u + P f.
/// Throws CflError (checked on the incoming state) or NumericalBreakdown.
SpectralVectorField nse_step(const SpectralVectorField& u, const SpectralVectorField& f, double nu,
                             double dt, double cfl = 0.5);

/// Integrand samples of the two generalised energy inequalities for one
/// (s, t) window, recorded at every integrator step in [s, t].
/// Weights: phi = exp(-|xi|^2), psi = 1 - phi, E(tau) = (1 + tau)^alpha, and
/// K(tau) = exp(2 nu Lap (t - tau)) phi^2. Series ending in `_majorant` hold
/// the bounds ||u|| ||grad w||^2, ||U|| ||grad w||^2 and ||U||_3 ||grad w||^2
/// (||U||_3 through ||U||_2^1/2 ||grad U||_2^1/2) without their constants.
struct GeneralizedWindow {
  double s = 0.0;
  double t = 0.0;
  bool started = false;
  bool finished = false;

  // Endpoint terms.
  double low_lhs = 0.0;     // ||phi w(t)||^2
  double low_heat = 0.0;    // ||exp(nu Lap (t - s)) phi w(s)||^2
  double high_lhs = 0.0;    // E(t) ||psi w(t)||^2
  double high_start = 0.0;  // E(s) ||psi w(s)||^2

  std::vector<double> tau;
  // Low-frequency integrands.
  std::vector<double> low_adv;               // 2 |<u . grad w, K w>|
  std::vector<double> low_stretch;           // 2 |<w . grad U, K w>|
  std::vector<double> low_adv_majorant;      // 2 ||u|| ||grad w||^2
  std::vector<double> low_stretch_majorant;  // 2 ||U|| ||grad w||^2
  // Weighted high-frequency integrands.
  std::vector<double> high_viscous;           // 2 nu E ||grad (psi w)||^2
  std::vector<double> high_weight;            // E' ||psi w||^2
  std::vector<double> high_stretch;           // 2 E |<w . grad U, psi^2 w>|
  std::vector<double> high_adv;               // 2 E |<u . grad w, (1 - psi^2) w>|
  std::vector<double> high_stretch_majorant;  // 2 E ||U||_3 ||grad w||^2
  std::vector<double> high_adv_majorant;      // 2 E ||u|| ||grad w||^2

  // Snapshots of w at the window ends.
  std::optional<SpectralVectorField> w_s;
  std::optional<SpectralVectorField> w_t;
};

struct StabilityConfig {
  EvolutionConfig evolution{.dt = 1e-3, .horizon = 50.0, .tail_tolerance = 0.0,
                            .snapshot_stride = 10, .cfl = 0.5};
  double alpha = 4.0;
  /// Success once pert_l2 has fallen by this many decades.
  double decades = 3.0;
  long max_steps = 100000;
  std::vector<std::pair<double, double>> pairs;
};

struct StabilityRunRecord {
  std::vector<double> times;
  std::vector<double> pert_l2;
  std::vector<double> pert_h1dot;
  std::vector<double> low_energy;   // sharp split below rho(t)
  std::vector<double> high_energy;
  std::vector<double> gauss_low;    // ||phi w||^2
  std::vector<double> gauss_high;   // ||psi w||^2
  std::vector<int> violations_so_far;

  double alpha = 4.0;
  double nu = 0.0;
  double dt = 0.0;
  long steps = 0;
  int monotonicity_violations = 0;
  double violation_tolerance = 0.0;
  /// Largest |d||u||^2 - dt-averaged (2<f,u> - 2 nu ||grad u||^2)| / ||u||^2 per step.
  double energy_balance_defect = 0.0;

  /// Sobolev-constant gate K^{3/2} ||U||^{1/2} ||grad U||^{1/2} <= nu / 2.
  double gate_value = 0.0;
  bool gate_passed = false;
  /// 2 |<w0 . grad U, w0>| / (nu ||grad w0||^2), the measured production ratio.
  double measured_production = 0.0;
  std::vector<std::string> warnings;
  bool success = false;

  std::vector<GeneralizedWindow> windows;

  std::string to_csv() const;
};

/// Sharp constant of ||u||_6 <= K ||grad u||_2 in three dimensions.
double sobolev_constant_3d();

/// Integrates u from U + w0 under constant forcing f and records the decay
/// of w = u - U. The sharp Fourier split uses rho(t)^2 = alpha / (2 nu (1 + t)).
StabilityRunRecord stability_experiment(const SpectralVectorField& steady,
                                        const SpectralVectorField& f,
                                        const SpectralVectorField& w0,
                                        const PhysicalParams& params,
                                        const StabilityConfig& cfg);

}  // namespace steadylab
