#pragma once

#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "steadylab/field.hpp"
#include "steadylab/linear_evolution.hpp"
#include "steadylab/nse_solver.hpp"

namespace steadylab {

enum class RateModel { Algebraic, Exponential };

std::string to_string(RateModel model);

/// values ~ prefactor (1 + t)^-exponent, or prefactor exp(-exponent t).
struct RateFit {
  RateModel model = RateModel::Algebraic;
  double exponent = 0.0;
  double prefactor = 0.0;
  double t_lo = 0.0;
  double t_hi = 0.0;
  int samples = 0;
  double rms_log_residual = 0.0;
};

/// Least squares in log space over samples with t_lo <= t <= t_hi.
/// Throws PreconditionError for fewer than 8 samples or non-positive values.
RateFit fit_rate(const std::vector<double>& times, const std::vector<double>& values,
                 RateModel model, double t_lo, double t_hi);

struct SplitEnergy {
  double low = 0.0;
  double high = 0.0;
};

/// Sharp split of ||w||_2^2 at |xi| < radius (low) and the remainder (high).
SplitEnergy fourier_split(const SpectralVectorField& w, double radius);

/// Gaussian split ||phi w||^2 and ||psi w||^2 with phi = exp(-|xi|^2), psi = 1 - phi.
SplitEnergy gaussian_split(const SpectralVectorField& w);

struct InequalityReport {
  std::string name;
  std::vector<double> sample_points;
  std::vector<double> lhs;
  std::vector<double> rhs;
  /// min(rhs - lhs) over the checked samples.
  double slack = 0.0;
  /// Magnitude the tolerance is relative to (largest per-sample scale).
  double scale = 0.0;
  /// min over samples of (rhs - lhs) / sample scale; holds when >= -tolerance.
  double relative_slack = 0.0;
  bool holds = true;
  double fitted_constant = 0.0;
  /// Number of leading samples used to fit the constant (not checked).
  int calibration_samples = 0;
  std::vector<std::string> notes;
};

/// Relative tolerance of InequalityReport::holds.
inline constexpr double kInequalityTolerance = 1e-10;

/// Differential inequality
///   d/dt((1+t)^m ||w||^2) <= C [ ||U||^2 (1+t)^(m-7/2) (int_0^t ||w|| ds + ||f||_X)^2
///                               + nu^-3 ||f||_X^2 ||Phi||_3^2 (1+t)^m ]
/// on a recorded run. The derivative uses centred differences (one-sided at the
/// ends, where the tolerance is widened tenfold) and ||Phi||_3^2 its
/// interpolation surrogate ||Phi||_2 ||grad Phi||_2. C is the largest ratio
/// over the calibration samples t <= calibration_fraction * T, then frozen.
/// Throws PreconditionError when the estimated stencil error exceeds 10%.
InequalityReport check_bootstrap_inequality(const TrajectoryRecord& traj, double u_prev_l2,
                                            double f_xnorm, const PhysicalParams& params, int m,
                                            double calibration_fraction = 0.1);

/// One-sided envelope ||w(t)||^2 <= C (1+t)^-5/2, C fitted like the bootstrap constant.
InequalityReport check_decay_envelope(const TrajectoryRecord& traj,
                                      double calibration_fraction = 0.1);

/// Frozen constants of the majorant form: largest ratio pairing / majorant
/// over the calibration samples.
struct MajorantFit {
  double calibration_end = 0.0;
  int samples = 0;
  double low_adv = 0.0;
  double low_stretch = 0.0;
  double high_stretch = 0.0;
  double high_adv = 0.0;
};

struct GeneralizedInequalityResult {
  /// The inequalities with the measured pairings, one sample per (s, t) pair at t.
  InequalityReport low;
  InequalityReport high;
  /// Pairings replaced by frozen constants times their majorants; recorded.
  InequalityReport low_majorant;
  InequalityReport high_majorant;
  MajorantFit fit;
  std::vector<double> window_starts;
  /// Richardson estimate of the quadrature error of each window's high RHS.
  std::vector<double> quadrature_error;

  bool holds() const { return low.holds && high.holds; }
};

/// Evaluates both generalised energy inequalities at every requested (s, t)
/// pair. Endpoint terms are recomputed from the stored snapshots, time
/// integrals use composite Simpson on the per-step samples.
/// Throws PreconditionError when a pair was not tracked or lacks snapshots.
GeneralizedInequalityResult check_generalized_inequalities(
    const StabilityRunRecord& run, const std::vector<std::pair<double, double>>& pairs,
    double alpha, double calibration_fraction = 0.1);

/// Composite Simpson on uniform samples (3/8 rule on the last panel for odd
/// counts) and a Richardson estimate of its error.
std::pair<double, double> uniform_quadrature(const std::vector<double>& values, double h);

nlohmann::json to_json(const RateFit& fit);
nlohmann::json to_json(const InequalityReport& report);
nlohmann::json to_json(const GeneralizedInequalityResult& result);

/// One row per report: name,holds,slack,relative_slack,scale,fitted_constant,samples.
std::string summary_csv(const std::vector<InequalityReport>& reports);

}  // namespace steadylab
