#include <gtest/gtest.h>

#include <cmath>

#include "steadylab/decay_lab.hpp"
#include "steadylab/error.hpp"
#include "steadylab/spectral.hpp"
#include "steadylab/steady_builder.hpp"
#include "test_support.hpp"

using namespace steadylab;
using testsupport::Rng;

TEST(FitRate, RecoversExactLaws) {
  std::vector<double> t, alg, ex;
  for (int i = 0; i < 40; ++i) {
    t.push_back(0.25 * i);
    alg.push_back(3.0 * std::pow(1.0 + t.back(), -2.5));
    ex.push_back(0.7 * std::exp(-1.3 * t.back()));
  }
  const auto a = fit_rate(t, alg, RateModel::Algebraic, 0.0, 100.0);
  EXPECT_NEAR(a.exponent, 2.5, 1e-12);
  EXPECT_NEAR(a.prefactor, 3.0, 1e-12);
  EXPECT_LT(a.rms_log_residual, 1e-12);
  EXPECT_EQ(a.samples, 40);
  const auto e = fit_rate(t, ex, RateModel::Exponential, 1.0, 5.0);
  EXPECT_NEAR(e.exponent, 1.3, 1e-12);
  EXPECT_EQ(e.samples, 17);
  EXPECT_DOUBLE_EQ(e.t_lo, 1.0);
  EXPECT_DOUBLE_EQ(e.t_hi, 5.0);
}

TEST(FitRate, Errors) {
  std::vector<double> t{0, 1, 2, 3, 4, 5, 6, 7, 8}, v(9, 1.0);
  EXPECT_THROW(fit_rate(t, v, RateModel::Algebraic, 0, 3), PreconditionError);
  v[4] = 0.0;
  EXPECT_THROW(fit_rate(t, v, RateModel::Algebraic, 0, 10), PreconditionError);
  EXPECT_THROW(fit_rate(t, std::vector<double>(3, 1.0), RateModel::Algebraic, 0, 10),
               PreconditionError);
}

TEST(Splits, SharpSplitPartitionsEnergy) {
  const Lattice lat = make_lattice(16, 0.9);
  Rng rng(2);
  for (int trial = 0; trial < 5; ++trial) {
    const auto w = testsupport::random_field(lat, rng);
    const double e = std::pow(norm(w, NormKind::L2), 2);
    const double r = rng.uniform(0.5, 8.0);
    const auto s = fourier_split(w, r);
    EXPECT_NEAR(s.low + s.high, e, 1e-13 * e);
    EXPECT_NEAR(fourier_split(w, 1e6).low, e, 1e-13 * e);
  }
  // A shell exactly at the radius counts as high.
  const auto single = random_band_field(lat, 2.0 / 0.9, 2.0 / 0.9, 1);
  EXPECT_EQ(fourier_split(single, 2.0 / 0.9).low, 0.0);
  EXPECT_THROW(fourier_split(single, 0.0), PreconditionError);
}

TEST(Splits, GaussianSplitMatchesModeSum) {
  const Lattice lat = make_lattice(8);
  Rng rng(3);
  const auto w = testsupport::random_field(lat, rng);
  double lo = 0, hi = 0;
  for (std::size_t i = 0; i < lat.size(); ++i) {
    const double phi = std::exp(-lat.xi2(i));
    for (int c = 0; c < 3; ++c) {
      lo += phi * phi * std::norm(w.at(c, i));
      hi += (1 - phi) * (1 - phi) * std::norm(w.at(c, i));
    }
  }
  const auto s = gaussian_split(w);
  EXPECT_NEAR(s.low, lo, 1e-13 * lo);
  EXPECT_NEAR(s.high, hi, 1e-13 * hi);
}

TEST(Quadrature, ExactOnCubicsForAllCounts) {
  for (int n = 2; n <= 13; ++n) {
    const double h = 0.3;
    std::vector<double> v;
    for (int i = 0; i <= n; ++i) {
      const double x = i * h;
      v.push_back(1 - 2 * x + 0.5 * x * x + 0.25 * x * x * x);
    }
    const double X = n * h;
    const double exact = X - X * X + X * X * X / 6 + X * X * X * X / 16;
    EXPECT_NEAR(uniform_quadrature(v, h).first, exact, 1e-12 * std::abs(exact) + 1e-13) << n;
  }
}

TEST(Quadrature, ErrorEstimateBoundsActualErrorOnResolvedGrids) {
  // about 8 or more samples per oscillation
  for (int n : {16, 20, 32, 33, 64, 101}) {
    const double h = 2.0 / n;
    std::vector<double> v;
    for (int i = 0; i <= n; ++i) v.push_back(std::exp(-3.0 * i * h) * std::cos(5.0 * i * h));
    // int_0^2 e^{-3x} cos 5x dx
    const double e2 = std::exp(-6.0);
    const double exact = (3.0 - e2 * (3.0 * std::cos(10.0) - 5.0 * std::sin(10.0))) / 34.0;
    const auto [value, err] = uniform_quadrature(v, h);
    EXPECT_LE(std::abs(value - exact), 2.0 * err + 1e-15) << n;
  }
}

namespace {
TrajectoryRecord synthetic(double exponent) {
  TrajectoryRecord tr;
  for (int i = 0; i <= 200; ++i) {
    const double t = 0.05 * i;
    tr.times.push_back(t);
    tr.l2.push_back(std::sqrt(0.1 * std::pow(1.0 + t, -exponent)));
  }
  return tr;
}
}  // namespace

TEST(Envelope, HoldsForFastDecayAndCatchesSlowDecay) {
  const auto ok = check_decay_envelope(synthetic(3.0));
  EXPECT_TRUE(ok.holds);
  EXPECT_NEAR(ok.fitted_constant, 0.1, 1e-15);
  EXPECT_EQ(ok.calibration_samples, 21);
  const auto bad = check_decay_envelope(synthetic(1.0));
  EXPECT_FALSE(bad.holds);
  EXPECT_LT(bad.slack, 0.0);
}

namespace {
struct DecayRun {
  Lattice lat = make_lattice(16);
  PhysicalParams p{.nu = 0.05, .rho0 = 3.0, .m_energy = 1.0};
  SpectralVectorField f{lat}, u{lat};
  TrajectoryRecord tr;
  DecayRun() {
    f = random_bandpass_forcing(lat, {.rho0 = 3.0, .rho1 = 5.0, .target_x_norm = 0.3, .seed = 7});
    u = build_steady(f, p).field;
    EvolutionConfig cfg{.dt = 5e-3, .horizon = 2.0, .tail_tolerance = 0.0, .snapshot_stride = 4};
    tr = evolve_difference(u, f, p, cfg, {.store_snapshots = false});
  }
};
}  // namespace

TEST(Bootstrap, HoldsOnRecordedRun) {
  DecayRun run;
  for (int m : {4, 6}) {
    const auto rep = check_bootstrap_inequality(run.tr, norm(run.u, NormKind::L2),
                                                norm(run.f, NormKind::X), run.p, m);
    EXPECT_TRUE(rep.holds) << m << " " << rep.relative_slack;
    EXPECT_GT(rep.fitted_constant, 0.0);
    EXPECT_EQ(rep.lhs.size() + rep.calibration_samples, run.tr.times.size());
  }
  EXPECT_TRUE(check_decay_envelope(run.tr).holds);
}

TEST(Bootstrap, DetectsLateGrowth) {
  DecayRun run;
  auto tr = run.tr;
  const std::size_t n = tr.l2.size();
  for (std::size_t i = n / 2; i < n; ++i) tr.l2[i] *= std::exp(20.0 * (tr.times[i] - tr.times[n / 2]) * (tr.times[i] - tr.times[n / 2]));
  const auto rep = check_bootstrap_inequality(tr, norm(run.u, NormKind::L2),
                                              norm(run.f, NormKind::X), run.p, 4);
  EXPECT_FALSE(rep.holds);
}

TEST(Bootstrap, RejectsSparseSamplingAndSmallM) {
  DecayRun run;
  // a bump of width 0.2 sampled every 0.3
  TrajectoryRecord sparse;
  for (int i = 0; i <= 7; ++i) {
    const double t = 0.3 * i;
    sparse.times.push_back(t);
    sparse.l2.push_back(0.01 * (1.0 + std::exp(-std::pow((t - 0.9) / 0.2, 2))));
    sparse.phi_l2.push_back(0.3 * std::exp(-t));
    sparse.phi_h1dot.push_back(3.0 * std::exp(-t));
  }
  try {
    check_bootstrap_inequality(sparse, 1.0, 0.3, run.p, 4);
    FAIL();
  } catch (const PreconditionError& e) {
    EXPECT_NE(std::string(e.what()).find("insufficient sampling density"), std::string::npos) << e.what();
  }
  EXPECT_THROW(check_bootstrap_inequality(run.tr, 1.0, 0.3, run.p, 3), PreconditionError);
}

TEST(Generalized, MissingWindowIsReported) {
  StabilityRunRecord rec;
  rec.alpha = 4.0;
  rec.dt = 1e-3;
  try {
    check_generalized_inequalities(rec, {{0.0, 0.5}}, 4.0);
    FAIL();
  } catch (const PreconditionError& e) {
    EXPECT_NE(std::string(e.what()).find("missing snapshots"), std::string::npos);
  }
}

TEST(Reports, CsvAndJson) {
  const auto rep = check_decay_envelope(synthetic(3.0));
  const std::string csv = summary_csv({rep});
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "name,holds,slack,relative_slack,scale,fitted_constant,samples");
  EXPECT_NE(csv.find("decay_envelope_5_2,true,"), std::string::npos);
  const auto j = to_json(rep);
  EXPECT_EQ(j["name"], "decay_envelope_5_2");
  EXPECT_EQ(j["holds"], true);
}
