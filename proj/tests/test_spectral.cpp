#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <cstring>
#include <set>

#include "steadylab/checkpoint.hpp"
#include "steadylab/error.hpp"
#include "steadylab/fft.hpp"
#include "steadylab/lattice.hpp"
#include "steadylab/spectral.hpp"
#include "test_support.hpp"

using namespace steadylab;
using testsupport::kPi;
using testsupport::Rng;

TEST(Lattice, RejectsBadShapes) {
  EXPECT_THROW(make_lattice(15), PreconditionError);
  EXPECT_THROW(make_lattice(2), PreconditionError);
  EXPECT_THROW(make_lattice(16, 0.0), PreconditionError);
  EXPECT_THROW(make_lattice(16, 1.0, 1.5), PreconditionError);
}

TEST(Lattice, IndexRoundTripAndMirror) {
  const Lattice lat = make_lattice(8, 2.0);
  for (std::size_t i = 0; i < lat.size(); ++i) {
    const auto k = lat.k_of(i);
    EXPECT_EQ(lat.index_of(k[0], k[1], k[2]), i);
    EXPECT_EQ(lat.mirror(lat.mirror(i)), i);
    EXPECT_EQ(lat.k2()[i], k[0] * k[0] + k[1] * k[1] + k[2] * k[2]);
    EXPECT_DOUBLE_EQ(lat.xi2(i), lat.k2()[i] / 4.0);
  }
  EXPECT_THROW(lat.index_of(5, 0, 0), PreconditionError);
}

TEST(Lattice, TwoThirdsRuleRetainsBall) {
  const Lattice lat = make_lattice(12);
  int kept = 0;
  for (std::size_t i = 0; i < lat.size(); ++i) {
    const bool inside = lat.k2()[i] <= 16;  // (2/3 * 6)^2
    EXPECT_EQ(lat.retained(i), inside);
    kept += inside;
  }
  EXPECT_GT(kept, 0);
}

TEST(Norms, MatchIndependentSums) {
  const Lattice lat = make_lattice(16, 1.7);
  Rng rng(3);
  const auto u = testsupport::random_field(lat, rng);
  double l2 = 0, h1 = 0, hm1 = 0;
  for (std::size_t i = 0; i < lat.size(); ++i) {
    const auto k = lat.k_of(i);
    const double kk = 2.0 * kPi *
                      std::sqrt(double(k[0] * k[0] + k[1] * k[1] + k[2] * k[2])) / 1.7;
    for (int c = 0; c < 3; ++c) {
      const double a = std::norm(u.at(c, i));
      l2 += a;
      if (kk > 0) {
        h1 += kk * kk * a;
        hm1 += a / (kk * kk);
      }
    }
  }
  const double vol = std::pow(1.7, 3);
  EXPECT_NEAR(norm(u, NormKind::L2), std::sqrt(vol * l2), 1e-13 * std::sqrt(vol * l2));
  EXPECT_NEAR(norm(u, NormKind::H1dot), std::sqrt(vol * h1), 1e-12 * std::sqrt(vol * h1));
  EXPECT_NEAR(norm(u, NormKind::Hminus1), std::sqrt(vol * hm1), 1e-12 * std::sqrt(vol * hm1));
  EXPECT_DOUBLE_EQ(norm(u, NormKind::X),
                   std::max(norm(u, NormKind::L2), norm(u, NormKind::Hminus1)));
  // Physical-space quadrature is exact for trigonometric polynomials on the grid.
  EXPECT_NEAR(norm(u, NormKind::L2), testsupport::grid_l2(u), 1e-12 * norm(u, NormKind::L2));
}

TEST(Norms, InnerProductIsPolarisationOfL2) {
  const Lattice lat = make_lattice(8);
  Rng rng(5);
  const auto a = testsupport::random_field(lat, rng);
  const auto b = testsupport::random_field(lat, rng);
  const double p = norm(a + b, NormKind::L2), m = norm(a - b, NormKind::L2);
  EXPECT_NEAR(inner_product(a, b), 0.25 * (p * p - m * m), 1e-13);
}

TEST(Leray, ProjectsAndIsIdempotent) {
  const Lattice lat = make_lattice(16);
  Rng rng(9);
  const auto raw = testsupport::random_field(lat, rng, 1e9, false);
  const auto p = leray_project(raw);
  EXPECT_LT(divergence_ratio(p), 1e-14);
  EXPECT_LT(testsupport::max_abs_diff(leray_project(p), p), 1e-15);
  EXPECT_GT(divergence_ratio(raw), 1e-3);
  // Pure gradients vanish.
  SpectralVectorField g(lat);
  for (std::size_t i = 0; i < lat.size(); ++i) {
    const auto k = lat.k_of(i);
    const Complex phi = raw.at(0, i);
    for (int c = 0; c < 3; ++c) g.at(c, i) = Complex(0, 2 * kPi * k[c]) * phi;
  }
  EXPECT_LT(norm(leray_project(g), NormKind::L2), 1e-13 * norm(g, NormKind::L2));
}

TEST(Fft, PairSynthesisRoundTrip) {
  const int n = 8;
  const Lattice lat = make_lattice(n);
  Rng rng(1);
  const auto a = testsupport::random_field(lat, rng, 1e9, false);
  const auto b = testsupport::random_field(lat, rng, 1e9, false);
  fft::Buffer buf(lat.size());
  fft::synthesize_pair(n, a.component(0), b.component(1), buf);
  // Grid values agree with direct evaluation.
  const auto direct = testsupport::evaluate(a, 3.0 / n, 1.0 / n, 6.0 / n);
  const auto directb = testsupport::evaluate(b, 3.0 / n, 1.0 / n, 6.0 / n);
  const std::size_t flat = (3 * n + 1) * n + 6;
  EXPECT_NEAR(buf.data()[flat].real(), direct[0], 1e-12);
  EXPECT_NEAR(buf.data()[flat].imag(), directb[1], 1e-12);
  std::vector<Complex> ra(lat.size()), rb(lat.size());
  fft::analyze_pair(n, buf, ra, rb);
  for (std::size_t i = 0; i < lat.size(); ++i) {
    EXPECT_NEAR(std::abs(ra[i] - a.at(0, i)), 0.0, 1e-14);
    EXPECT_NEAR(std::abs(rb[i] - b.at(1, i)), 0.0, 1e-14);
  }
}

namespace {

// P(a . grad b) with products formed by direct trigonometric sums.
SpectralVectorField reference_nonlinear(const SpectralVectorField& a,
                                        const SpectralVectorField& b) {
  const Lattice& lat = a.lattice();
  const int n = lat.n();
  std::vector<std::array<double, 3>> prod(lat.size());
  std::size_t flat = 0;
  for (int ix = 0; ix < n; ++ix)
    for (int iy = 0; iy < n; ++iy)
      for (int iz = 0; iz < n; ++iz, ++flat) {
        const double x = double(ix) / n, y = double(iy) / n, z = double(iz) / n;
        const auto av = testsupport::evaluate(a, x, y, z);
        std::array<double, 3> out{0, 0, 0};
        for (std::size_t i = 0; i < lat.size(); ++i) {
          const auto k = lat.k_of(i);
          const double ph = 2 * kPi * (k[0] * x + k[1] * y + k[2] * z);
          const Complex e(std::cos(ph), std::sin(ph));
          const double adk = av[0] * k[0] + av[1] * k[1] + av[2] * k[2];
          for (int c = 0; c < 3; ++c)
            out[c] += (Complex(0, 2 * kPi * adk) * b.at(c, i) * e).real();
        }
        prod[flat] = out;
      }
  SpectralVectorField r(lat);
  for (std::size_t i = 0; i < lat.size(); ++i) {
    const auto k = lat.k_of(i);
    Complex c3[3] = {0, 0, 0};
    std::size_t g = 0;
    for (int ix = 0; ix < n; ++ix)
      for (int iy = 0; iy < n; ++iy)
        for (int iz = 0; iz < n; ++iz, ++g) {
          const double ph = -2 * kPi * (k[0] * ix + k[1] * iy + k[2] * iz) / n;
          const Complex e(std::cos(ph), std::sin(ph));
          for (int c = 0; c < 3; ++c) c3[c] += prod[g][c] * e;
        }
    const double k2 = lat.k2()[i];
    if (k2 == 0) continue;
    const Complex kc = (double(k[0]) * c3[0] + double(k[1]) * c3[1] + double(k[2]) * c3[2]) / k2;
    for (int c = 0; c < 3; ++c) r.at(c, i) = (c3[c] - kc * double(k[c])) / double(lat.size());
  }
  return r;
}

}  // namespace

TEST(Nonlinear, MatchesDirectSummationWithoutAliasing) {
  const Lattice lat = make_lattice(8);
  Rng rng(21);
  // |k| <= 1 in both factors keeps the product inside the retained shell.
  const auto a = testsupport::random_field(lat, rng, 1.0);
  const auto b = testsupport::random_field(lat, rng, 1.5);
  const auto got = nonlinear_term(a, b);
  const auto ref = reference_nonlinear(a, b);
  EXPECT_LT(testsupport::max_abs_diff(got, ref), 1e-12);
  EXPECT_GT(norm(ref, NormKind::L2), 1e-3);
}

TEST(Nonlinear, OutputIsSolenoidalHermitianAndDealiased) {
  const Lattice lat = make_lattice(16);
  Rng rng(4);
  const auto a = testsupport::random_field(lat, rng);
  const auto b = testsupport::random_field(lat, rng);
  double speed = 0;
  const auto r = nonlinear_term(a, b, &speed);
  EXPECT_LT(divergence_ratio(r), 1e-13);
  EXPECT_LT(hermitian_defect(r), 1e-14);
  for (std::size_t i = 0; i < lat.size(); ++i)
    if (!lat.retained(i)) {
      for (int c = 0; c < 3; ++c) EXPECT_EQ(r.at(c, i), Complex(0, 0));
    }
  EXPECT_NEAR(speed, max_speed(a), 1e-14);
}

TEST(Nonlinear, TrilinearOrthogonalityProperty) {
  const Lattice lat = make_lattice(16);
  Rng rng(77);
  for (int trial = 0; trial < 10; ++trial) {
    const auto a = testsupport::random_field(lat, rng);
    const auto w = testsupport::random_field(lat, rng);
    const double pairing = inner_product(nonlinear_term(a, w), dealias(w));
    const double scale =
        norm(a, NormKind::L2) * norm(w, NormKind::H1dot) * norm(w, NormKind::L2);
    EXPECT_LE(std::abs(pairing), 1e-12 * scale) << "trial " << trial;
  }
}

TEST(Nonlinear, RejectsMixedLattices) {
  const auto a = SpectralVectorField(make_lattice(8));
  const auto b = SpectralVectorField(make_lattice(16));
  EXPECT_THROW(nonlinear_term(a, b), LatticeMismatch);
}

TEST(Physical, RoundTrip) {
  const Lattice lat = make_lattice(8);
  Rng rng(8);
  const auto u = testsupport::random_field(lat, rng, 1e9, false);
  const auto back = from_physical(lat, to_physical(u));
  // from_physical returns every resolved mode; only the Nyquist planes can differ.
  EXPECT_LT(testsupport::max_abs_diff(dealias(back), dealias(u)), 1e-14);
  const auto v = to_physical(u);
  double m = 0;
  for (const auto& c : v)
    for (double x : c) m = std::max(m, std::abs(x));
  EXPECT_LE(max_speed(u), std::sqrt(3.0) * m + 1e-14);
}

TEST(RandomBand, DeterministicSolenoidalAndInBand) {
  const Lattice lat = make_lattice(16);
  const auto a = random_band_field(lat, 3.0, 5.0, 42);
  const auto b = random_band_field(lat, 3.0, 5.0, 42);
  const auto c = random_band_field(lat, 3.0, 5.0, 43);
  EXPECT_EQ(testsupport::max_abs_diff(a, b), 0.0);
  EXPECT_GT(testsupport::max_abs_diff(a, c), 0.0);
  EXPECT_LT(divergence_ratio(a), 1e-14);
  EXPECT_LT(hermitian_defect(a), 1e-15);
  for (std::size_t i = 0; i < lat.size(); ++i) {
    const double r = std::sqrt(lat.xi2(i));
    if (r < 3.0 - 1e-12 || r > 5.0 + 1e-12) {
      for (int k = 0; k < 3; ++k) EXPECT_EQ(a.at(k, i), Complex(0, 0));
    }
  }
}

TEST(RandomBand, ForcingHitsTargetXNorm) {
  const Lattice lat = make_lattice(16);
  for (double target : {0.1, 1.0, 7.5}) {
    ForcingSpec spec{.rho0 = 3.0, .rho1 = 5.0, .target_x_norm = target, .seed = 5};
    const auto f = random_bandpass_forcing(lat, spec);
    EXPECT_NEAR(norm(f, NormKind::X), target, 1e-13 * target);
  }
  ForcingSpec zero{.rho0 = 3.0, .rho1 = 5.0, .target_x_norm = 0.0, .seed = 5};
  EXPECT_TRUE(random_bandpass_forcing(lat, zero).is_zero());
}

TEST(RandomBand, EmptyBandNamesShells) {
  const Lattice lat = make_lattice(8);
  ForcingSpec spec{.rho0 = 2.1, .rho1 = 2.2, .target_x_norm = 1.0, .seed = 1};
  try {
    random_bandpass_forcing(lat, spec);
    FAIL() << "expected PreconditionError";
  } catch (const PreconditionError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("nearest shells"), std::string::npos);
    EXPECT_NE(msg.find("2.23607"), std::string::npos);
  }
  ForcingSpec inverted{.rho0 = 5.0, .rho1 = 3.0, .target_x_norm = 1.0, .seed = 1};
  EXPECT_THROW(random_bandpass_forcing(lat, inverted), PreconditionError);
}

TEST(Checkpoint, LayoutAndRoundTrip) {
  const Lattice lat = make_lattice(8, 2.5);
  Rng rng(12);
  const auto u = testsupport::random_field(lat, rng);
  const auto bytes = encode_checkpoint(u);
  ASSERT_EQ(bytes.size(), 20 + 16 * 3 * lat.size());
  EXPECT_EQ(std::string(bytes.begin(), bytes.begin() + 4), "SSNS");
  EXPECT_EQ(bytes[4], 1);
  EXPECT_EQ(bytes[8], 8);
  double period = 0;
  std::memcpy(&period, bytes.data() + 12, 8);
  EXPECT_EQ(period, 2.5);
  double re = 0;
  std::memcpy(&re, bytes.data() + 20 + 16 * 5, 8);
  EXPECT_EQ(re, u.at(0, 5).real());

  const auto back = decode_checkpoint(bytes);
  EXPECT_EQ(testsupport::max_abs_diff(back, u), 0.0);
  EXPECT_EQ(encode_checkpoint(back), bytes);

  const auto path = std::filesystem::temp_directory_path() / "steadylab_ckpt_test.ssns";
  save_checkpoint(u, path);
  EXPECT_EQ(encode_checkpoint(load_checkpoint(path)), bytes);
  std::filesystem::remove(path);
}

TEST(Checkpoint, RejectsCorruptInput) {
  std::vector<unsigned char> junk = {'N', 'O', 'P', 'E', 0, 0, 0, 0};
  EXPECT_THROW(decode_checkpoint(junk), IoError);
  auto bytes = encode_checkpoint(SpectralVectorField(make_lattice(4)));
  bytes.resize(bytes.size() - 3);
  EXPECT_THROW(decode_checkpoint(bytes), IoError);
  EXPECT_THROW(load_checkpoint("/nonexistent/dir/x.ssns"), IoError);
}
