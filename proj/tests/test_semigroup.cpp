#include <gtest/gtest.h>

#include <cmath>

#include "steadylab/error.hpp"
#include "steadylab/semigroup.hpp"
#include "steadylab/spectral.hpp"
#include "test_support.hpp"

using namespace steadylab;
using testsupport::kPi;

TEST(Heat, ZeroTimeIsIdentity) {
  const Lattice lat = make_lattice(8);
  testsupport::Rng rng(1);
  const auto f = testsupport::random_field(lat, rng);
  EXPECT_EQ(testsupport::max_abs_diff(heat_evolve(f, 0.3, 0.0), f), 0.0);
  EXPECT_THROW(heat_evolve(f, 0.3, -1e-9), PreconditionError);
}

TEST(Heat, SingleModeFactor) {
  const Lattice lat = make_lattice(16);
  const auto f = testsupport::mode_pair(lat, 0, 3, 4, {Complex(1, 0), Complex(0, 0), Complex(0, 0)});
  const auto g = heat_evolve(f, 1.0, 0.01);
  const std::size_t i = lat.index_of(0, 3, 4);
  // 4 pi^2 * 25 * 0.01 = pi^2
  EXPECT_NEAR(g.at(0, i).real(), std::exp(-kPi * kPi), 1e-17);
  EXPECT_NEAR(g.at(0, i).real(), 5.1724e-5, 1e-9);
}

TEST(Heat, SemigroupPropertyOnRandomData) {
  const Lattice lat = make_lattice(16, 1.3);
  testsupport::Rng rng(19);
  for (int trial = 0; trial < 5; ++trial) {
    const auto f = testsupport::random_field(lat, rng);
    const double s = rng.uniform(0.0, 0.2), t = rng.uniform(0.0, 0.2), nu = rng.uniform(0.01, 1.0);
    const auto a = heat_evolve(heat_evolve(f, nu, s), nu, t);
    const auto b = heat_evolve(f, nu, s + t);
    EXPECT_LE(testsupport::max_abs_diff(a, b), 1e-13);
  }
}

TEST(Heat, ShellRateMatchesModewiseSum) {
  const Lattice lat = make_lattice(16);
  const auto f = random_band_field(lat, 3.0, 3.0, 2);
  const double nu = 0.05;
  for (double t : {0.0, 0.1, 0.5}) {
    double e = 0.0;
    for (std::size_t i = 0; i < lat.size(); ++i)
      for (int c = 0; c < 3; ++c)
        e += std::norm(f.at(c, i)) * std::exp(-8 * kPi * kPi * nu * lat.xi2(i) * t);
    const double l2 = norm(heat_evolve(f, nu, t), NormKind::L2);
    EXPECT_NEAR(l2 * l2, e, 1e-13 * e);
    const double f2 = std::pow(norm(f, NormKind::L2), 2);
    EXPECT_NEAR(l2 * l2, std::exp(-8 * kPi * kPi * nu * 9 * t) * f2, 1e-12 * f2);
  }
}

TEST(HeatEnvelope, SingleShellIsTight) {
  const Lattice lat = make_lattice(16);
  const auto f = random_band_field(lat, 4.0, 4.0, 3);
  PhysicalParams p{.nu = 0.1, .rho0 = 3.0, .m_energy = 1.0};
  const auto rep = heat_envelope_check(f, p, {0.0, 0.01, 0.05, 0.2});
  EXPECT_TRUE(rep.all_hold());
  EXPECT_NEAR(rep.rho_min, 4.0, 1e-15);
  for (std::size_t i = 0; i < rep.times.size(); ++i)
    EXPECT_NEAR(rep.measured[i], rep.exact_bound[i], 1e-12 * rep.exact_bound[0]);
}

TEST(HeatEnvelope, MultiShellStrictlyBelowAfterZero) {
  const Lattice lat = make_lattice(16);
  const auto f = random_band_field(lat, 3.0, 5.0, 4);
  PhysicalParams p{.nu = 0.05, .rho0 = 3.0, .m_energy = 1.0};
  std::vector<double> times;
  for (int i = 0; i < 20; ++i) times.push_back(0.05 * i);
  const auto rep = heat_envelope_check(f, p, times);
  EXPECT_TRUE(rep.all_hold());
  for (std::size_t i = 1; i < times.size(); ++i) EXPECT_LT(rep.measured[i], rep.exact_bound[i]);
  EXPECT_EQ(rep.paper_bound.size(), times.size());
}

TEST(HeatEnvelope, RejectsLowModes) {
  const Lattice lat = make_lattice(16);
  const auto f = random_band_field(lat, 1.0, 4.0, 4);
  PhysicalParams p{.nu = 0.05, .rho0 = 3.0, .m_energy = 1.0};
  try {
    heat_envelope_check(f, p, {0.0});
    FAIL();
  } catch (const PreconditionError& e) {
    EXPECT_NE(std::string(e.what()).find("shells"), std::string::npos);
  }
}

TEST(Heat, EnergyIdentity) {
  const Lattice lat = make_lattice(16, 0.8);
  testsupport::Rng rng(30);
  const auto f = testsupport::random_field(lat, rng);
  const double nu = 0.07;
  const double f2 = std::pow(norm(f, NormKind::L2), 2);
  for (double t : {0.0, 0.01, 0.3, 2.0}) {
    const double phi2 = std::pow(norm(heat_evolve(f, nu, t), NormKind::L2), 2);
    EXPECT_NEAR(phi2 + heat_dissipation(f, nu, t), f2, 1e-10 * f2);
  }
  // Independent check of the dissipation by Simpson in time.
  const double T = 0.05;
  const int panels = 400;
  double acc = 0.0;
  for (int i = 0; i <= panels; ++i) {
    const double w = (i == 0 || i == panels) ? 1.0 : (i % 2 ? 4.0 : 2.0);
    const double g = norm(heat_evolve(f, nu, T * i / panels), NormKind::H1dot);
    acc += w * g * g;
  }
  acc *= 2.0 * nu * T / (3.0 * panels);
  EXPECT_NEAR(heat_dissipation(f, nu, T), acc, 1e-8 * acc);
}

TEST(Heat, SurrogateIntegralMonotoneAndBounded) {
  const Lattice lat = make_lattice(16);
  const auto f = random_band_field(lat, 3.0, 5.0, 6);
  const double nu = 0.05;
  double prev = 0.0;
  for (double T : {0.1, 0.5, 1.0, 2.0, 4.0, 8.0}) {
    const double v = heat_l3_surrogate_integral(f, nu, T);
    EXPECT_GT(v, prev);
    prev = v;
  }
  // Bounded by the integral of the sharp-rate envelope.
  const double l2 = norm(f, NormKind::L2), h1 = norm(f, NormKind::H1dot);
  const double rate = 8 * kPi * kPi * nu * 9.0;
  EXPECT_LE(prev, l2 * h1 / rate * (1 + 1e-9));
  EXPECT_NEAR(heat_l3_surrogate(f, nu, 0.0), l2 * h1, 1e-12 * l2 * h1);
}
