#include <gtest/gtest.h>

#include <cmath>

#include "steadylab/error.hpp"
#include "steadylab/spectral.hpp"
#include "steadylab/steady_builder.hpp"
#include "test_support.hpp"

using namespace steadylab;
using testsupport::kPi;

namespace {
const PhysicalParams kParams{.nu = 0.05, .rho0 = 3.0, .m_energy = 1.0};

SpectralVectorField forcing(const Lattice& lat, double amp, std::uint64_t seed = 7) {
  return random_bandpass_forcing(lat, {.rho0 = 3.0, .rho1 = 5.0, .target_x_norm = amp, .seed = seed});
}

// nu (2 pi |xi|)^2 U + P(a . grad U) - f measured in H^-1 relative to f.
double reference_linear_defect(const SpectralVectorField& a, const SpectralVectorField& u,
                               const SpectralVectorField& f, double nu) {
  const Lattice& lat = u.lattice();
  SpectralVectorField d = nonlinear_term(a, u);
  for (std::size_t i = 0; i < lat.size(); ++i)
    for (int c = 0; c < 3; ++c)
      d.at(c, i) += nu * 4 * kPi * kPi * lat.xi2(i) * u.at(c, i) - f.at(c, i);
  return norm(d, NormKind::Hminus1) / norm(f, NormKind::Hminus1);
}
}  // namespace

TEST(Stokes, SingleModeCoefficient) {
  const Lattice lat = make_lattice(16);
  const auto f = leray_project(
      testsupport::mode_pair(lat, 0, 3, 4, {Complex(1, 0), Complex(0, 0.5), Complex(0, 0)}));
  const auto u = stokes_solve(f, 1.0);
  const std::size_t i = lat.index_of(0, 3, 4);
  const double factor = 1.0 / (100.0 * kPi * kPi);
  EXPECT_NEAR(factor, 1.013212e-3, 1e-9);
  for (int c = 0; c < 3; ++c)
    EXPECT_NEAR(std::abs(u.at(c, i) - factor * f.at(c, i)), 0.0, 1e-12 * factor);
  EXPECT_TRUE(stokes_solve(SpectralVectorField(lat), 1.0).is_zero());
}

TEST(Stokes, PlugBackResidual) {
  const Lattice lat = make_lattice(16, 1.4);
  testsupport::Rng rng(3);
  const auto f = testsupport::random_field(lat, rng);
  const auto u = stokes_solve(f, 0.2);
  EXPECT_LE(steady_residual(u, f, 0.2, false), 1e-12);
  EXPECT_LE(reference_linear_defect(SpectralVectorField(lat), u, f, 0.2), 1e-12);
}

TEST(LinearSolve, ResidualMatchesReference) {
  const Lattice lat = make_lattice(16);
  const auto f = forcing(lat, 0.3);
  const auto a = stokes_solve(f, kParams.nu);
  const auto r = linear_steady_solve(a, f, kParams.nu, 1e-12, 200);
  EXPECT_LE(r.residual, 1e-12);
  EXPECT_LE(reference_linear_defect(a, r.field, f, kParams.nu), 1e-11);
  EXPECT_NEAR(linear_steady_residual(a, r.field, f, kParams.nu),
              reference_linear_defect(a, r.field, f, kParams.nu), 1e-13);
  EXPECT_GT(r.inner_iterations, 1);
  EXPECT_LT(r.inner_ratio, 1.0);
}

TEST(Build, DirectRouteConvergesWithinBounds) {
  const Lattice lat = make_lattice(16);
  const auto f = forcing(lat, 0.3);
  BuildOptions o;
  o.tol_outer = 1e-11;
  o.tol_inner = 1e-13;
  const auto r = build_steady(f, kParams, o);
  ASSERT_TRUE(r.trace.converged);
  EXPECT_EQ(r.trace.bound_violations, 0);
  EXPECT_EQ(r.trace.budget_violations, 0);
  for (const auto& it : r.trace.iterates) {
    EXPECT_LE(it.l2, kParams.m_energy);
    EXPECT_LE(it.h1dot, r.trace.gradient_bound * (1 + 1e-10));
    if (it.index >= 2) {
      EXPECT_LT(it.ratio, 1.0);
    }
  }
  EXPECT_LT(r.trace.max_ratio(), 1.0);
  EXPECT_LE(steady_residual(r.field, f, kParams.nu), 1e-9);
  EXPECT_LT(divergence_ratio(r.field), 1e-12);
  EXPECT_LT(hermitian_defect(r.field), 1e-14);
  EXPECT_NEAR(r.trace.gradient_bound, 0.3 / kParams.nu, 1e-12);
}

TEST(Build, ZeroForcingGivesZero) {
  const Lattice lat = make_lattice(8);
  const auto r = build_steady(SpectralVectorField(lat), kParams);
  EXPECT_TRUE(r.trace.converged);
  EXPECT_TRUE(r.field.is_zero());
}

TEST(Build, BudgetAndGapErrors) {
  const Lattice lat = make_lattice(16);
  PhysicalParams tight = kParams;
  tight.m_energy = 1e-4;
  try {
    build_steady(forcing(lat, 0.3), tight);
    FAIL();
  } catch (const BudgetError& e) {
    EXPECT_NE(std::string(e.what()).find("increase M or decrease ||f||_X"), std::string::npos);
  }
  const auto low = random_bandpass_forcing(lat, {.rho0 = 1.0, .rho1 = 5.0, .target_x_norm = 0.3, .seed = 7});
  EXPECT_THROW(build_steady(low, kParams), PreconditionError);
}

TEST(Build, LargeForcingStopsWithError) {
  const Lattice lat = make_lattice(16);
  PhysicalParams roomy = kParams;
  roomy.m_energy = 1e6;
  BuildOptions o;
  o.max_inner = 60;
  EXPECT_THROW(build_steady(forcing(lat, 40.0), roomy, o), Error);
}

TEST(Build, ContractionRatioGrowsWithForcing) {
  const Lattice lat = make_lattice(16);
  std::vector<double> q;
  for (double a : {0.25, 0.5, 1.0}) {
    const auto r = build_steady(forcing(lat, a), kParams);
    ASSERT_TRUE(r.trace.converged);
    q.push_back(r.trace.median_ratio());
  }
  EXPECT_LT(q[0], q[1]);
  EXPECT_LT(q[1], q[2]);
  EXPECT_NEAR(q[2] / q[1], 2.0, 0.4);
}

TEST(Build, AdmissibleStartRespectsBoundsAndUniqueness) {
  const Lattice lat = make_lattice(16);
  const auto f = forcing(lat, 0.3);
  const auto s = admissible_start(f, kParams, 99);
  EXPECT_LE(norm(s, NormKind::L2), 0.9 * kParams.m_energy * (1 + 1e-12));
  EXPECT_LE(norm(s, NormKind::H1dot), 0.9 * 0.3 / kParams.nu * (1 + 1e-12));
  EXPECT_LT(divergence_ratio(s), 1e-13);
  BuildOptions o;
  o.tol_outer = 1e-11;
  o.tol_inner = 1e-13;
  const auto u = uniqueness_probe(f, kParams, 99, o);
  EXPECT_LE(u.discrepancy, 10 * o.tol_outer);
  EXPECT_GT(u.from_alt.trace.iterates.size(), 2u);
}

TEST(Build, QuadratureMapMatchesDirectSolve) {
  const Lattice lat = make_lattice(16);
  const auto f = forcing(lat, 0.3);
  const auto a = stokes_solve(f, kParams.nu);
  EvolutionConfig cfg{.dt = 5e-3, .horizon = 3.0, .tail_tolerance = 0.0, .snapshot_stride = 10};
  TimeIntegralResult details{SpectralVectorField(lat)};
  const auto q = quadrature_linear_solve(a, f, kParams, cfg, &details);
  const auto d = linear_steady_solve(a, f, kParams.nu, 1e-13, 200).field;
  EXPECT_LE(testsupport::rel_l2_diff(d, q), 1e-4);
  EXPECT_GT(details.tail_rate, 0.0);
}

TEST(Build, RouteNamesRoundTrip) {
  for (auto r : {SteadyRoute::Direct, SteadyRoute::Quadrature}) EXPECT_EQ(parse_route(to_string(r)), r);
  EXPECT_THROW(parse_route("magic"), PreconditionError);
}
