#include "steadylab/lattice.hpp"

#include <cmath>
#include <string>

#include "steadylab/error.hpp"

namespace steadylab {

Lattice::Lattice(int n, double period, double dealias_fraction)
    : n_(n), period_(period), dealias_fraction_(dealias_fraction) {
  if (n % 2 != 0) throw PreconditionError("n must be even (got " + std::to_string(n) + ")");
  if (n < 4) throw PreconditionError("n must be at least 4 (got " + std::to_string(n) + ")");
  if (!(period > 0.0) || !std::isfinite(period))
    throw PreconditionError("period must be positive");
  if (!(dealias_fraction > 0.0) || dealias_fraction > 1.0)
    throw PreconditionError("dealias_fraction must lie in (0, 1]");
  inv_period2_ = 1.0 / (period * period);

  auto t = std::make_shared<Tables>();
  t->freq.resize(n);
  for (int i = 0; i < n; ++i) t->freq[i] = (i <= n / 2) ? i : i - n;

  const std::size_t total = static_cast<std::size_t>(n) * n * n;
  t->k2.resize(total);
  t->mirror.resize(total);
  t->retained.resize(total);
  const double c = cutoff();
  const double c2 = c * c * (1.0 + 1e-12);
  std::size_t flat = 0;
  for (int ix = 0; ix < n; ++ix) {
    for (int iy = 0; iy < n; ++iy) {
      for (int iz = 0; iz < n; ++iz, ++flat) {
        const int kx = t->freq[ix], ky = t->freq[iy], kz = t->freq[iz];
        const int k2 = kx * kx + ky * ky + kz * kz;
        t->k2[flat] = k2;
        const int mx = (n - ix) % n, my = (n - iy) % n, mz = (n - iz) % n;
        t->mirror[flat] = (static_cast<std::size_t>(mx) * n + my) * n + mz;
        t->retained[flat] = static_cast<double>(k2) <= c2 ? 1 : 0;
      }
    }
  }
  tables_ = std::move(t);
}

std::array<int, 3> Lattice::k_of(std::size_t flat) const {
  const std::size_t nn = static_cast<std::size_t>(n_);
  const std::size_t iz = flat % nn;
  const std::size_t iy = (flat / nn) % nn;
  const std::size_t ix = flat / (nn * nn);
  return {freq(static_cast<int>(ix)), freq(static_cast<int>(iy)), freq(static_cast<int>(iz))};
}

std::size_t Lattice::index_of(int kx, int ky, int kz) const {
  auto wrap = [this](int k) {
    if (k <= -n_ / 2 || k > n_ / 2)
      throw PreconditionError("frequency " + std::to_string(k) + " outside lattice");
    return static_cast<std::size_t>(k >= 0 ? k : k + n_);
  };
  const std::size_t nn = static_cast<std::size_t>(n_);
  return (wrap(kx) * nn + wrap(ky)) * nn + wrap(kz);
}

Lattice make_lattice(int n, double period, double dealias_fraction) {
  return Lattice(n, period, dealias_fraction);
}

}  // namespace steadylab
