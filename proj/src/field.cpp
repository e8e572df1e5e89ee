#include "steadylab/field.hpp"

#include <algorithm>
#include <cmath>

#include "steadylab/error.hpp"

namespace steadylab {

SpectralVectorField::SpectralVectorField(Lattice lattice)
    : lattice_(std::move(lattice)), coeffs_(3 * lattice_.size()) {}

SpectralVectorField& SpectralVectorField::operator+=(const SpectralVectorField& other) {
  if (!(lattice_ == other.lattice_)) throw LatticeMismatch();
  for (std::size_t i = 0; i < coeffs_.size(); ++i) coeffs_[i] += other.coeffs_[i];
  return *this;
}

SpectralVectorField& SpectralVectorField::operator-=(const SpectralVectorField& other) {
  if (!(lattice_ == other.lattice_)) throw LatticeMismatch();
  for (std::size_t i = 0; i < coeffs_.size(); ++i) coeffs_[i] -= other.coeffs_[i];
  return *this;
}

SpectralVectorField& SpectralVectorField::operator*=(double s) {
  for (auto& c : coeffs_) c *= s;
  return *this;
}

SpectralVectorField& SpectralVectorField::axpy(double s, const SpectralVectorField& other) {
  if (!(lattice_ == other.lattice_)) throw LatticeMismatch();
  for (std::size_t i = 0; i < coeffs_.size(); ++i) coeffs_[i] += s * other.coeffs_[i];
  return *this;
}

bool SpectralVectorField::is_zero() const {
  return std::all_of(coeffs_.begin(), coeffs_.end(),
                     [](const Complex& c) { return c == Complex{}; });
}

SpectralVectorField operator+(SpectralVectorField a, const SpectralVectorField& b) {
  a += b;
  return a;
}

SpectralVectorField operator-(SpectralVectorField a, const SpectralVectorField& b) {
  a -= b;
  return a;
}

SpectralVectorField operator*(double s, SpectralVectorField a) {
  a *= s;
  return a;
}

void PhysicalParams::validate() const {
  if (!(nu > 0.0)) throw PreconditionError("physics.nu must be positive");
  if (!(rho0 > 0.0)) throw PreconditionError("physics.rho0 must be positive");
  if (!(m_energy > 0.0)) throw PreconditionError("physics.m_energy must be positive");
}

void ForcingSpec::validate() const {
  if (!(rho0 > 0.0)) throw PreconditionError("ForcingSpec: rho0 must be positive");
  if (!(rho1 > rho0)) throw PreconditionError("ForcingSpec: rho1 must exceed rho0");
  if (!(target_x_norm >= 0.0) || !std::isfinite(target_x_norm))
    throw PreconditionError("ForcingSpec: target_x_norm must be finite and non-negative");
}

}  // namespace steadylab
