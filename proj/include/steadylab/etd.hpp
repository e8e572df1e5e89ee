#pragma once

#include <vector>

#include "steadylab/field.hpp"

namespace steadylab {

/// Two-stage exponential time differencing (Cox-Matthews ETD2RK) for
/// u_t = nu Lap u + N(u, t) with the diffusion integrated exactly:
///
///   a       = E u_n + dt phi1 N(u_n, t_n)
///   u_{n+1} = a + dt phi2 (N(a, t_n + dt) - N(u_n, t_n))
///
/// with E = exp(-4 pi^2 nu |xi|^2 dt), phi1(z) = (e^z - 1)/z,
/// phi2(z) = (e^z - 1 - z)/z^2 evaluated at z = -4 pi^2 nu |xi|^2 dt.
/// Steady states of the continuous equation are exact fixed points of the map.
class EtdStepper {
 public:
  EtdStepper(const Lattice& lattice, double nu, double dt);

  double dt() const { return dt_; }
  double nu() const { return nu_; }

  /// Exact diffusion over one step.
  SpectralVectorField decay(const SpectralVectorField& u) const;

  /// rhs(field, time) returns N. `n0` is N(u, t), reusable by the caller.
  template <typename Rhs>
  SpectralVectorField step(const SpectralVectorField& u, const SpectralVectorField& n0, double t,
                           Rhs&& rhs) const {
    SpectralVectorField a = predictor(u, n0);
    SpectralVectorField n1 = rhs(a, t + dt_);
    corrector(a, n1, n0);
    return a;
  }

  template <typename Rhs>
  SpectralVectorField step(const SpectralVectorField& u, double t, Rhs&& rhs) const {
    const SpectralVectorField n0 = rhs(u, t);
    return step(u, n0, t, rhs);
  }

 private:
  SpectralVectorField predictor(const SpectralVectorField& u, const SpectralVectorField& n0) const;
  void corrector(SpectralVectorField& a, const SpectralVectorField& n1,
                 const SpectralVectorField& n0) const;

  Lattice lattice_;
  double nu_;
  double dt_;
  // Indexed by integer |k|^2.
  std::vector<double> decay_;
  std::vector<double> phi1_dt_;
  std::vector<double> phi2_dt_;
};

/// phi-functions of the scheme, exposed for testing.
double etd_phi1(double z);
double etd_phi2(double z);

}  // namespace steadylab
