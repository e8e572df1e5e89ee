#include "steadylab/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>
#include <sstream>

#include "steadylab/error.hpp"
#include "steadylab/fft.hpp"

namespace steadylab {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

void require_same(const Lattice& a, const Lattice& b) {
  if (!(a == b)) throw LatticeMismatch();
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

double unit_uniform(std::uint64_t bits) {
  // 53 random bits mapped into (0, 1].
  return (static_cast<double>(bits >> 11) + 1.0) * 0x1.0p-53;
}

/// Standard complex Gaussian keyed by (seed, k, component).
Complex keyed_gaussian(std::uint64_t seed, int kx, int ky, int kz, int comp) {
  std::uint64_t h = splitmix64(seed);
  for (std::int64_t v : {std::int64_t{kx}, std::int64_t{ky}, std::int64_t{kz}, std::int64_t{comp}})
    h = splitmix64(h ^ static_cast<std::uint64_t>(v + 0x100000));
  const double u1 = unit_uniform(splitmix64(h ^ 0xA5A5A5A5ULL));
  const double u2 = unit_uniform(splitmix64(h ^ 0x5A5A5A5AULL));
  const double r = std::sqrt(-2.0 * std::log(u1));
  return {r * std::cos(kTwoPi * u2), r * std::sin(kTwoPi * u2)};
}

/// True for the member of the pair {k, -k} that carries the independent draw.
bool canonical(const std::array<int, 3>& k) {
  if (k[0] != 0) return k[0] > 0;
  if (k[1] != 0) return k[1] > 0;
  return k[2] >= 0;
}

}  // namespace

double norm(const SpectralVectorField& u, NormKind kind) {
  const Lattice& lat = u.lattice();
  const std::size_t m = lat.size();
  double l2 = 0.0, h1 = 0.0, hm1 = 0.0;
  for (std::size_t i = 1; i < m; ++i) {
    double e = 0.0;
    for (int c = 0; c < 3; ++c) e += std::norm(u.at(c, i));
    if (e == 0.0) continue;
    const double w2 = kTwoPi * kTwoPi * lat.xi2(i);
    l2 += e;
    h1 += w2 * e;
    hm1 += e / w2;
  }
  const double vol = lat.volume();
  switch (kind) {
    case NormKind::L2: return std::sqrt(vol * l2);
    case NormKind::H1dot: return std::sqrt(vol * h1);
    case NormKind::Hminus1: return std::sqrt(vol * hm1);
    case NormKind::X: return std::max(std::sqrt(vol * l2), std::sqrt(vol * hm1));
  }
  return 0.0;
}

double inner_product(const SpectralVectorField& u, const SpectralVectorField& v) {
  require_same(u.lattice(), v.lattice());
  double acc = 0.0;
  const auto a = u.data();
  const auto b = v.data();
  for (std::size_t i = 0; i < a.size(); ++i)
    acc += a[i].real() * b[i].real() + a[i].imag() * b[i].imag();
  return u.lattice().volume() * acc;
}

SpectralVectorField leray_project(SpectralVectorField u) {
  const Lattice& lat = u.lattice();
  for (int c = 0; c < 3; ++c) u.at(c, 0) = Complex{};
  const int n = lat.n();
  std::size_t i = 0;
  for (int ix = 0; ix < n; ++ix)
    for (int iy = 0; iy < n; ++iy)
      for (int iz = 0; iz < n; ++iz, ++i) {
        if (i == 0) continue;
        const double k[3] = {double(lat.freq(ix)), double(lat.freq(iy)), double(lat.freq(iz))};
        const double inv_k2 = 1.0 / lat.k2()[i];
        const Complex kdotu = k[0] * u.at(0, i) + k[1] * u.at(1, i) + k[2] * u.at(2, i);
        const Complex s = kdotu * inv_k2;
        for (int c = 0; c < 3; ++c) u.at(c, i) -= k[c] * s;
      }
  return u;
}

SpectralVectorField dealias(SpectralVectorField u) {
  const Lattice& lat = u.lattice();
  for (std::size_t i = 0; i < lat.size(); ++i)
    if (!lat.retained(i))
      for (int c = 0; c < 3; ++c) u.at(c, i) = Complex{};
  return u;
}

namespace {

struct NonlinearWorkspace {
  int n = 0;
  std::vector<fft::Buffer> buffers;
  std::array<std::vector<double>, 3> prod;

  void reserve(int size_n, std::size_t m) {
    if (n == size_n) return;
    buffers.clear();
    for (int i = 0; i < 3; ++i) buffers.emplace_back(m);
    for (auto& p : prod) p.resize(m);
    n = size_n;
  }
};

}  // namespace

SpectralVectorField nonlinear_term(const SpectralVectorField& a, const SpectralVectorField& b,
                                   double* max_speed_out) {
  require_same(a.lattice(), b.lattice());
  const Lattice& lat = a.lattice();
  const int n = lat.n();
  const std::size_t m = lat.size();

  thread_local NonlinearWorkspace ws;
  ws.reserve(n, m);
  fft::Buffer& a01 = ws.buffers[0];
  fft::Buffer& a2 = ws.buffers[1];
  fft::Buffer& g = ws.buffers[2];

  // Physical a on the retained shell: (a0 + i a1) and a2.
  {
    Complex* z01 = a01.data();
    Complex* z2 = a2.data();
    for (std::size_t i = 0; i < m; ++i) {
      if (!lat.retained(i)) {
        z01[i] = Complex{};
        z2[i] = Complex{};
        continue;
      }
      const Complex x = a.at(0, i), y = a.at(1, i);
      z01[i] = {x.real() - y.imag(), x.imag() + y.real()};
      z2[i] = a.at(2, i);
    }
    fft::backward(n, a01);
    fft::backward(n, a2);
  }

  if (max_speed_out) {
    double vmax = 0.0;
    for (std::size_t x = 0; x < m; ++x) {
      const double s = std::norm(a01.data()[x]) + a2.data()[x].real() * a2.data()[x].real();
      vmax = std::max(vmax, s);
    }
    *max_speed_out = std::sqrt(vmax);
  }

  const double scale = kTwoPi / lat.period();

  // product_c(x) = sum_j a_j(x) d_j b_c(x). Gradient spectra d_j b_c = i xi_j b_c
  // are synthesised two at a time in the flat order (c, j).
  for (auto& p : ws.prod) std::fill(p.begin(), p.end(), 0.0);
  for (int pair = 0; pair < 5; ++pair) {
    const int first = 2 * pair;
    const int second = first + 1;
    const bool has_second = second < 9;
    Complex* z = g.data();
    const int j1 = first % 3, c1 = first / 3;
    const int j2 = second % 3, c2 = second / 3;
    std::size_t i = 0;
    for (int ix = 0; ix < n; ++ix)
      for (int iy = 0; iy < n; ++iy)
        for (int iz = 0; iz < n; ++iz, ++i) {
          if (!lat.retained(i)) {
            z[i] = Complex{};
            continue;
          }
          const double xi[3] = {scale * lat.freq(ix), scale * lat.freq(iy), scale * lat.freq(iz)};
          const Complex b1 = b.at(c1, i);
          // i xi b1
          Complex v{-xi[j1] * b1.imag(), xi[j1] * b1.real()};
          if (has_second) {
            // + i (i xi b2) = -xi b2
            const Complex b2 = b.at(c2, i);
            v -= xi[j2] * b2;
          }
          z[i] = v;
        }
    fft::backward(n, g);
    for (int which = 0; which < (has_second ? 2 : 1); ++which) {
      const int idx = first + which;
      const int comp = idx / 3;
      const int j = idx % 3;
      double* out = ws.prod[comp].data();
      const Complex* gd = g.data();
      const Complex* ad = (j == 2) ? a2.data() : a01.data();
      const bool a_imag = (j == 1);
      const bool g_imag = (which == 1);
      for (std::size_t x = 0; x < m; ++x) {
        const double aj = a_imag ? ad[x].imag() : ad[x].real();
        const double gj = g_imag ? gd[x].imag() : gd[x].real();
        out[x] += aj * gj;
      }
    }
  }

  SpectralVectorField result(lat);
  fft::Buffer& z = g;
  for (std::size_t x = 0; x < m; ++x) z.data()[x] = Complex{ws.prod[0][x], ws.prod[1][x]};
  fft::analyze_pair(n, z, result.component(0), result.component(1));
  for (std::size_t x = 0; x < m; ++x) z.data()[x] = Complex{ws.prod[2][x], 0.0};
  fft::analyze_pair(n, z, result.component(2), {});

  return leray_project(dealias(std::move(result)));
}

double divergence_ratio(const SpectralVectorField& u) {
  const Lattice& lat = u.lattice();
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < lat.size(); ++i) {
    double mag2 = 0.0;
    for (int c = 0; c < 3; ++c) mag2 += std::norm(u.at(c, i));
    den = std::max(den, std::sqrt(mag2));
    if (i == 0) continue;
    const auto k = lat.k_of(i);
    const Complex kdotu = double(k[0]) * u.at(0, i) + double(k[1]) * u.at(1, i) +
                          double(k[2]) * u.at(2, i);
    num = std::max(num, std::abs(kdotu) / std::sqrt(double(lat.k2()[i])));
  }
  return den == 0.0 ? 0.0 : num / den;
}

double hermitian_defect(const SpectralVectorField& u) {
  const Lattice& lat = u.lattice();
  double num = 0.0, den = 0.0;
  for (int c = 0; c < 3; ++c) {
    for (std::size_t i = 0; i < lat.size(); ++i) {
      den = std::max(den, std::abs(u.at(c, i)));
      num = std::max(num, std::abs(u.at(c, lat.mirror(i)) - std::conj(u.at(c, i))));
    }
  }
  return den == 0.0 ? 0.0 : num / den;
}

std::array<std::vector<double>, 3> to_physical(const SpectralVectorField& u) {
  const Lattice& lat = u.lattice();
  const std::size_t m = lat.size();
  std::array<std::vector<double>, 3> out;
  fft::Buffer a(m), b(m);
  fft::synthesize_pair(lat.n(), u.component(0), u.component(1), a);
  fft::synthesize_pair(lat.n(), u.component(2), {}, b);
  for (auto& v : out) v.resize(m);
  for (std::size_t x = 0; x < m; ++x) {
    out[0][x] = a.data()[x].real();
    out[1][x] = a.data()[x].imag();
    out[2][x] = b.data()[x].real();
  }
  return out;
}

SpectralVectorField from_physical(const Lattice& lattice,
                                  const std::array<std::vector<double>, 3>& values) {
  const std::size_t m = lattice.size();
  for (const auto& v : values)
    if (v.size() != m) throw PreconditionError("from_physical: wrong grid size");
  SpectralVectorField u(lattice);
  fft::Buffer z(m);
  for (std::size_t x = 0; x < m; ++x) z.data()[x] = Complex{values[0][x], values[1][x]};
  fft::analyze_pair(lattice.n(), z, u.component(0), u.component(1));
  for (std::size_t x = 0; x < m; ++x) z.data()[x] = Complex{values[2][x], 0.0};
  fft::analyze_pair(lattice.n(), z, u.component(2), {});
  return u;
}

double max_speed(const SpectralVectorField& u) {
  const auto phys = to_physical(u);
  double vmax = 0.0;
  for (std::size_t x = 0; x < phys[0].size(); ++x)
    vmax = std::max(vmax, phys[0][x] * phys[0][x] + phys[1][x] * phys[1][x] +
                              phys[2][x] * phys[2][x]);
  return std::sqrt(vmax);
}

SpectralVectorField random_band_field(const Lattice& lattice, double lo, double hi,
                                      std::uint64_t seed) {
  SpectralVectorField u(lattice);
  const double lo2 = lo * lo, hi2 = hi * hi;
  for (std::size_t i = 1; i < lattice.size(); ++i) {
    if (!lattice.retained(i)) continue;
    const double xi2 = lattice.xi2(i);
    if (xi2 < lo2 || xi2 > hi2) continue;
    const auto k = lattice.k_of(i);
    if (!canonical(k)) continue;
    const std::size_t mi = lattice.mirror(i);
    for (int c = 0; c < 3; ++c) {
      Complex g = keyed_gaussian(seed, k[0], k[1], k[2], c);
      if (mi == i) g = Complex{g.real(), 0.0};
      u.at(c, i) = g;
      u.at(c, mi) = std::conj(g);
    }
  }
  return leray_project(std::move(u));
}

std::vector<double> retained_shells(const Lattice& lattice) {
  std::set<int> k2s;
  for (std::size_t i = 1; i < lattice.size(); ++i)
    if (lattice.retained(i)) k2s.insert(lattice.k2()[i]);
  std::vector<double> radii;
  radii.reserve(k2s.size());
  for (int k2 : k2s) radii.push_back(std::sqrt(double(k2)) / lattice.period());
  return radii;
}

SpectralVectorField random_bandpass_forcing(const Lattice& lattice, const ForcingSpec& spec) {
  spec.validate();
  const auto shells = retained_shells(lattice);
  const bool nonempty = std::any_of(shells.begin(), shells.end(), [&](double r) {
    return r >= spec.rho0 && r <= spec.rho1;
  });
  if (!nonempty) {
    std::ostringstream msg;
    msg.precision(6);
    msg << "empty forcing band [" << spec.rho0 << ", " << spec.rho1
        << "]: no retained lattice shell inside (cutoff " << lattice.cutoff() / lattice.period()
        << ")";
    auto below = std::find_if(shells.rbegin(), shells.rend(),
                              [&](double r) { return r < spec.rho0; });
    auto above = std::find_if(shells.begin(), shells.end(),
                              [&](double r) { return r > spec.rho1; });
    msg << "; nearest shells below: ";
    if (below != shells.rend()) msg << *below; else msg << "none";
    msg << ", above: ";
    if (above != shells.end()) msg << *above; else msg << "none";
    throw PreconditionError(msg.str());
  }
  SpectralVectorField f = random_band_field(lattice, spec.rho0, spec.rho1, spec.seed);
  const double x = norm(f, NormKind::X);
  if (spec.target_x_norm == 0.0 || x == 0.0) return SpectralVectorField(lattice);
  f *= spec.target_x_norm / x;
  return f;
}

}  // namespace steadylab
