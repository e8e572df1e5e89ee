#pragma once

#include <array>
#include <cstddef>
#include <memory>
#include <span>
#include <vector>

namespace steadylab {

/// Periodic wavenumber lattice of an n^3 box with side `period`.
///
/// Frequencies are the integer triples k with -n/2 < k_j <= n/2. Storage index
/// of a triple follows the FFT convention: axis index i holds k = i for
/// i <= n/2 and k = i - n otherwise; the flat index is (ix*n + iy)*n + iz.
/// The continuous wavenumber is xi = k / period.
///
/// Copies share the precomputed tables; a Lattice is immutable.
class Lattice {
 public:
  Lattice(int n, double period, double dealias_fraction);

  int n() const { return n_; }
  double period() const { return period_; }
  double dealias_fraction() const { return dealias_fraction_; }
  /// Radius of the retained shell |k| <= dealias_fraction * n / 2 (integer units).
  double cutoff() const { return dealias_fraction_ * n_ / 2.0; }
  std::size_t size() const { return tables_->k2.size(); }
  double volume() const { return period_ * period_ * period_; }
  double spacing() const { return period_ / n_; }

  /// Signed integer frequency for an axis index.
  int freq(int axis_index) const { return tables_->freq[axis_index]; }
  std::array<int, 3> k_of(std::size_t flat) const;
  std::size_t index_of(int kx, int ky, int kz) const;
  /// Flat index of -k.
  std::size_t mirror(std::size_t flat) const { return tables_->mirror[flat]; }

  /// |k|^2 in integer units.
  std::span<const int> k2() const { return tables_->k2; }
  /// |xi|^2 = |k|^2 / period^2.
  double xi2(std::size_t flat) const { return tables_->k2[flat] * inv_period2_; }
  /// True when the mode survives 2/3-rule style dealiasing.
  bool retained(std::size_t flat) const { return tables_->retained[flat] != 0; }

  bool operator==(const Lattice& other) const {
    return n_ == other.n_ && period_ == other.period_ &&
           dealias_fraction_ == other.dealias_fraction_;
  }

 private:
  struct Tables {
    std::vector<int> freq;
    std::vector<int> k2;
    std::vector<std::size_t> mirror;
    std::vector<unsigned char> retained;
  };

  int n_;
  double period_;
  double dealias_fraction_;
  double inv_period2_;
  std::shared_ptr<const Tables> tables_;
};

/// Validating factory; rejects odd or tiny n, non-positive period and
/// dealias fractions outside (0, 1].
Lattice make_lattice(int n, double period = 1.0, double dealias_fraction = 2.0 / 3.0);

}  // namespace steadylab
