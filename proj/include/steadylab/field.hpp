#pragma once

#include <complex>
#include <cstdint>
#include <span>
#include <vector>

#include "steadylab/lattice.hpp"

namespace steadylab {

using Complex = std::complex<double>;

/// Three-component vector field stored by its Fourier coefficients.
///
/// u(x) = sum_k c(k) exp(2 pi i k.x / period). Coefficients are stored
/// component-major: all x-components in lattice order, then y, then z.
/// The physical field is real, so c(-k) = conj(c(k)); the mean c(0) is zero.
class SpectralVectorField {
 public:
  explicit SpectralVectorField(Lattice lattice);

  const Lattice& lattice() const { return lattice_; }
  std::size_t modes() const { return lattice_.size(); }

  std::span<Complex> component(int c) {
    return {coeffs_.data() + c * modes(), modes()};
  }
  std::span<const Complex> component(int c) const {
    return {coeffs_.data() + c * modes(), modes()};
  }
  Complex& at(int c, std::size_t flat) { return coeffs_[c * modes() + flat]; }
  const Complex& at(int c, std::size_t flat) const { return coeffs_[c * modes() + flat]; }

  std::span<Complex> data() { return coeffs_; }
  std::span<const Complex> data() const { return coeffs_; }

  SpectralVectorField& operator+=(const SpectralVectorField& other);
  SpectralVectorField& operator-=(const SpectralVectorField& other);
  SpectralVectorField& operator*=(double s);
  /// this += s * other
  SpectralVectorField& axpy(double s, const SpectralVectorField& other);

  bool is_zero() const;

 private:
  Lattice lattice_;
  std::vector<Complex> coeffs_;
};

SpectralVectorField operator+(SpectralVectorField a, const SpectralVectorField& b);
SpectralVectorField operator-(SpectralVectorField a, const SpectralVectorField& b);
SpectralVectorField operator*(double s, SpectralVectorField a);

/// Viscosity, spectral-gap radius (continuous wavenumber units) and energy budget M.
struct PhysicalParams {
  double nu = 0.05;
  double rho0 = 3.0;
  double m_energy = 1.0;

  void validate() const;
};

/// Band-limited random forcing request.
struct ForcingSpec {
  double rho0 = 3.0;
  double rho1 = 5.0;
  double target_x_norm = 1.0;
  std::uint64_t seed = 1;

  void validate() const;
};

}  // namespace steadylab
