#include "steadylab/etd.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "steadylab/error.hpp"

namespace steadylab {

double etd_phi1(double z) {
  if (z == 0.0) return 1.0;
  return std::expm1(z) / z;
}

double etd_phi2(double z) {
  if (std::abs(z) < 0.05) {
    // Taylor series sum z^j / (j+2)!
    double term = 0.5, sum = 0.0;
    for (int j = 0; j < 9; ++j) {
      sum += term;
      term *= z / (j + 3);
    }
    return sum;
  }
  return (std::expm1(z) - z) / (z * z);
}

EtdStepper::EtdStepper(const Lattice& lattice, double nu, double dt)
    : lattice_(lattice), nu_(nu), dt_(dt) {
  if (!(dt > 0.0)) throw PreconditionError("time step must be positive");
  if (!(nu > 0.0)) throw PreconditionError("viscosity must be positive");
  const auto k2 = lattice.k2();
  const int k2max = *std::max_element(k2.begin(), k2.end());
  decay_.resize(k2max + 1);
  phi1_dt_.resize(k2max + 1);
  phi2_dt_.resize(k2max + 1);
  const double scale = 4.0 * std::numbers::pi * std::numbers::pi * nu /
                       (lattice.period() * lattice.period());
  for (int q = 0; q <= k2max; ++q) {
    const double z = -scale * q * dt;
    decay_[q] = std::exp(z);
    phi1_dt_[q] = dt * etd_phi1(z);
    phi2_dt_[q] = dt * etd_phi2(z);
  }
}

SpectralVectorField EtdStepper::decay(const SpectralVectorField& u) const {
  SpectralVectorField out = u;
  const auto k2 = lattice_.k2();
  for (int c = 0; c < 3; ++c) {
    auto comp = out.component(c);
    for (std::size_t i = 0; i < comp.size(); ++i) comp[i] *= decay_[k2[i]];
  }
  return out;
}

SpectralVectorField EtdStepper::predictor(const SpectralVectorField& u,
                                          const SpectralVectorField& n0) const {
  if (!(u.lattice() == lattice_) || !(n0.lattice() == lattice_)) throw LatticeMismatch();
  SpectralVectorField a(lattice_);
  const auto k2 = lattice_.k2();
  for (int c = 0; c < 3; ++c) {
    auto out = a.component(c);
    auto uc = u.component(c);
    auto nc = n0.component(c);
    for (std::size_t i = 0; i < out.size(); ++i)
      out[i] = decay_[k2[i]] * uc[i] + phi1_dt_[k2[i]] * nc[i];
  }
  return a;
}

void EtdStepper::corrector(SpectralVectorField& a, const SpectralVectorField& n1,
                           const SpectralVectorField& n0) const {
  const auto k2 = lattice_.k2();
  for (int c = 0; c < 3; ++c) {
    auto out = a.component(c);
    auto n1c = n1.component(c);
    auto n0c = n0.component(c);
    for (std::size_t i = 0; i < out.size(); ++i)
      out[i] += phi2_dt_[k2[i]] * (n1c[i] - n0c[i]);
  }
}

}  // namespace steadylab
