#include "steadylab/nse_solver.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "steadylab/error.hpp"
#include "steadylab/etd.hpp"
#include "steadylab/format.hpp"
#include "steadylab/spectral.hpp"

namespace steadylab {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kFourPi2 = 4.0 * kPi * kPi;

bool finite_field(const SpectralVectorField& u) {
  for (const Complex& c : u.data())
    if (!std::isfinite(c.real()) || !std::isfinite(c.imag())) return false;
  return true;
}

/// V sum_k weight(k) Re(a(k) . conj b(k))
template <typename Weight>
double weighted_pairing(const SpectralVectorField& a, const SpectralVectorField& b, Weight&& wgt) {
  const Lattice& lat = a.lattice();
  double acc = 0.0;
  for (std::size_t i = 1; i < lat.size(); ++i) {
    double s = 0.0;
    for (int c = 0; c < 3; ++c) {
      const Complex x = a.at(c, i), y = b.at(c, i);
      s += x.real() * y.real() + x.imag() * y.imag();
    }
    if (s != 0.0) acc += wgt(i) * s;
  }
  return lat.volume() * acc;
}

void check_cfl(double dt, double speed, const Lattice& lat, double cfl) {
  if (speed <= 0.0) return;
  const double limit = cfl * lat.spacing() / speed;
  if (dt > limit) {
    std::ostringstream msg;
    msg << "CFL violation: dt=" << dt << " exceeds " << limit << " (max speed " << speed << ")";
    throw CflError(msg.str());
  }
}

}  // namespace

SpectralVectorField nse_step(const SpectralVectorField& u, const SpectralVectorField& f, double nu,
                             double dt, double cfl) {
  if (!(u.lattice() == f.lattice())) throw LatticeMismatch();
  const SpectralVectorField pf = leray_project(f);
  EtdStepper stepper(u.lattice(), nu, dt);
  auto rhs = [&](const SpectralVectorField& x, double) {
    SpectralVectorField n = nonlinear_term(x, x);
    n *= -1.0;
    n += pf;
    return n;
  };
  double speed = 0.0;
  SpectralVectorField n0 = nonlinear_term(u, u, &speed);
  check_cfl(dt, speed, u.lattice(), cfl);
  n0 *= -1.0;
  n0 += pf;
  SpectralVectorField next = stepper.step(u, n0, 0.0, rhs);
  if (!finite_field(next)) throw NumericalBreakdown("non-finite state after nse_step");
  return next;
}

double sobolev_constant_3d() {
  // Talenti/Aubin: K = (1 / sqrt(3 pi)) (Gamma(3) / Gamma(3/2))^{1/3}.
  return std::cbrt(2.0 / std::tgamma(1.5)) / std::sqrt(3.0 * kPi);
}

std::string StabilityRunRecord::to_csv() const {
  std::string out = "t,pert_l2,pert_h1dot,low_energy,high_energy,violations_so_far\n";
  for (std::size_t i = 0; i < times.size(); ++i) {
    out += fmt17(times[i]) + ',' + fmt17(pert_l2[i]) + ',' + fmt17(pert_h1dot[i]) + ',' +
           fmt17(low_energy[i]) + ',' + fmt17(high_energy[i]) + ',' +
           std::to_string(violations_so_far[i]) + '\n';
  }
  return out;
}

StabilityRunRecord stability_experiment(const SpectralVectorField& steady,
                                        const SpectralVectorField& f,
                                        const SpectralVectorField& w0,
                                        const PhysicalParams& params,
                                        const StabilityConfig& cfg) {
  params.validate();
  cfg.evolution.validate();
  if (!(cfg.alpha > 3.0)) throw PreconditionError("stability: alpha must exceed 3");
  if (!(steady.lattice() == f.lattice()) || !(steady.lattice() == w0.lattice()))
    throw LatticeMismatch();
  if (divergence_ratio(w0) > 1e-10) throw PreconditionError("perturbation is not divergence-free");
  for (int c = 0; c < 3; ++c)
    if (w0.at(c, 0) != Complex{}) throw PreconditionError("perturbation has a nonzero mean");

  const Lattice& lat = f.lattice();
  const double nu = params.nu;
  const double dt = cfg.evolution.dt;
  const double alpha = cfg.alpha;
  const std::size_t m = lat.size();

  std::vector<double> phi(m), psi(m), lap(m);
  for (std::size_t i = 0; i < m; ++i) {
    phi[i] = std::exp(-lat.xi2(i));
    psi[i] = 1.0 - phi[i];
    lap[i] = kFourPi2 * lat.xi2(i);
  }

  StabilityRunRecord rec;
  rec.alpha = alpha;
  rec.nu = nu;
  rec.dt = dt;

  const double u_l2 = norm(steady, NormKind::L2);
  const double u_h1 = norm(steady, NormKind::H1dot);
  const double steady_l3 = std::sqrt(u_l2 * u_h1);
  rec.gate_value = std::pow(sobolev_constant_3d(), 1.5) * steady_l3;
  rec.gate_passed = rec.gate_value <= 0.5 * nu;
  if (!rec.gate_passed) {
    std::ostringstream msg;
    msg << "smallness gate failed: K^1.5 ||U||^1/2 ||grad U||^1/2 = " << rec.gate_value
        << " > nu/2 = " << 0.5 * nu;
    rec.warnings.push_back(msg.str());
  }
  {
    const double g2 = std::pow(norm(w0, NormKind::H1dot), 2);
    const double prod = std::abs(inner_product(nonlinear_term(w0, steady), w0));
    rec.measured_production = g2 > 0.0 ? 2.0 * prod / (nu * g2) : 0.0;
    if (rec.measured_production > 1.0) {
      std::ostringstream msg;
      msg << "measured energy production 2|<w0.grad U, w0>| / (nu ||grad w0||^2) = "
          << rec.measured_production << " exceeds 1";
      rec.warnings.push_back(msg.str());
    }
  }

  struct WindowSteps {
    long s_idx;
    long t_idx;
  };
  std::vector<WindowSteps> win_steps;
  for (const auto& [s, t] : cfg.pairs) {
    if (!(s >= 0.0) || !(t > s)) throw PreconditionError("generalized inequality pairs need 0 <= s < t");
    GeneralizedWindow w;
    w.s = s;
    w.t = t;
    rec.windows.push_back(w);
    win_steps.push_back({std::lround(s / dt), std::lround(t / dt)});
    if (win_steps.back().s_idx == win_steps.back().t_idx)
      throw PreconditionError("generalized inequality window shorter than one time step");
  }
  long last_window_step = 0;
  for (const auto& ws : win_steps) last_window_step = std::max(last_window_step, ws.t_idx);

  const SpectralVectorField pf = leray_project(f);
  EtdStepper stepper(lat, nu, dt);
  auto rhs = [&](const SpectralVectorField& x, double) {
    SpectralVectorField n = nonlinear_term(x, x);
    n *= -1.0;
    n += pf;
    return n;
  };

  SpectralVectorField u = steady + w0;
  const double w0_l2 = norm(w0, NormKind::L2);
  rec.violation_tolerance = 1e-9 * w0_l2;

  auto sample = [&](double t, const SpectralVectorField& w) {
    rec.times.push_back(t);
    rec.pert_l2.push_back(norm(w, NormKind::L2));
    rec.pert_h1dot.push_back(norm(w, NormKind::H1dot));
    const double rho2 = alpha / (2.0 * nu * (1.0 + t));
    double lo = 0.0, hi = 0.0, glo = 0.0, ghi = 0.0;
    for (std::size_t i = 1; i < m; ++i) {
      double e = 0.0;
      for (int c = 0; c < 3; ++c) e += std::norm(w.at(c, i));
      if (e == 0.0) continue;
      (lat.xi2(i) < rho2 ? lo : hi) += e;
      glo += phi[i] * phi[i] * e;
      ghi += psi[i] * psi[i] * e;
    }
    const double vol = lat.volume();
    rec.low_energy.push_back(vol * lo);
    rec.high_energy.push_back(vol * hi);
    rec.gauss_low.push_back(vol * glo);
    rec.gauss_high.push_back(vol * ghi);
    rec.violations_so_far.push_back(rec.monotonicity_violations);
  };

  auto energy_rate = [&](const SpectralVectorField& x) {
    return 2.0 * inner_product(pf, x) - 2.0 * nu * std::pow(norm(x, NormKind::H1dot), 2);
  };

  auto track_windows = [&](long j, const SpectralVectorField& w) {
    bool active = false;
    for (const auto& ws : win_steps)
      if (j >= ws.s_idx && j <= ws.t_idx) active = true;
    if (!active) return;
    const double tau = j * dt;
    const SpectralVectorField n_adv = nonlinear_term(u, w);      // P(u . grad w)
    const SpectralVectorField n_str = nonlinear_term(w, steady);  // P(w . grad U)
    const double gw2 = std::pow(norm(w, NormKind::H1dot), 2);
    const double ul2 = norm(u, NormKind::L2);
    const double e = std::pow(1.0 + tau, alpha);
    const double ep = alpha * std::pow(1.0 + tau, alpha - 1.0);
    const auto psi2 = [&](std::size_t i) { return psi[i] * psi[i]; };
    const auto one_minus_psi2 = [&](std::size_t i) { return 1.0 - psi[i] * psi[i]; };
    const double high_str = 2.0 * e * std::abs(weighted_pairing(n_str, w, psi2));
    const double high_adv = 2.0 * e * std::abs(weighted_pairing(n_adv, w, one_minus_psi2));
    const double psi_w2 = weighted_pairing(w, w, psi2);
    const double grad_psi_w2 =
        weighted_pairing(w, w, [&](std::size_t i) { return lap[i] * psi[i] * psi[i]; });
    const double adv_major = 2.0 * ul2 * gw2;
    const double str_major = 2.0 * u_l2 * gw2;
    const double str3_major = 2.0 * steady_l3 * gw2;

    for (std::size_t p = 0; p < rec.windows.size(); ++p) {
      const auto& ws = win_steps[p];
      if (j < ws.s_idx || j > ws.t_idx) continue;
      GeneralizedWindow& gw = rec.windows[p];
      const double horizon = ws.t_idx * dt;
      const auto kernel = [&](std::size_t i) {
        return std::exp(-2.0 * nu * lap[i] * (horizon - tau)) * phi[i] * phi[i];
      };
      const double low_adv = 2.0 * std::abs(weighted_pairing(n_adv, w, kernel));
      const double low_str = 2.0 * std::abs(weighted_pairing(n_str, w, kernel));
      gw.tau.push_back(tau);
      gw.low_adv.push_back(low_adv);
      gw.low_stretch.push_back(low_str);
      gw.low_adv_majorant.push_back(adv_major);
      gw.low_stretch_majorant.push_back(str_major);
      gw.high_viscous.push_back(2.0 * nu * e * grad_psi_w2);
      gw.high_weight.push_back(ep * psi_w2);
      gw.high_stretch.push_back(high_str);
      gw.high_adv.push_back(high_adv);
      gw.high_stretch_majorant.push_back(e * str3_major);
      gw.high_adv_majorant.push_back(e * adv_major);
      if (j == ws.s_idx) {
        gw.started = true;
        gw.low_heat = weighted_pairing(w, w, [&](std::size_t i) {
          const double g = std::exp(-nu * lap[i] * (horizon - tau)) * phi[i];
          return g * g;
        });
        gw.high_start = e * psi_w2;
        gw.w_s = w;
      }
      if (j == ws.t_idx) {
        gw.finished = true;
        gw.low_lhs = weighted_pairing(w, w, [&](std::size_t i) { return phi[i] * phi[i]; });
        gw.high_lhs = e * psi_w2;
        gw.w_t = w;
      }
    }
  };

  SpectralVectorField w = u - steady;
  sample(0.0, w);
  track_windows(0, w);
  double prev_l2 = w0_l2;
  double prev_energy = std::pow(norm(u, NormKind::L2), 2);
  double prev_rate = energy_rate(u);
  const double target = std::pow(10.0, -cfg.decades) * w0_l2;
  const long horizon_steps = static_cast<long>(std::ceil(cfg.evolution.horizon / dt - 1e-9));

  long j = 0;
  while (true) {
    double speed = 0.0;
    SpectralVectorField n0 = nonlinear_term(u, u, &speed);
    try {
      check_cfl(dt, speed, lat, cfg.evolution.cfl);
    } catch (const CflError& e) {
      throw CflError(std::string(e.what()) + " at step " + std::to_string(j + 1));
    }
    n0 *= -1.0;
    n0 += pf;
    SpectralVectorField next = stepper.step(u, n0, j * dt, rhs);
    if (!finite_field(next))
      throw NumericalBreakdown("non-finite state in stability run at step " + std::to_string(j + 1));
    u = std::move(next);
    ++j;
    w = u - steady;

    const double l2 = norm(w, NormKind::L2);
    if (l2 > prev_l2 + rec.violation_tolerance) ++rec.monotonicity_violations;
    prev_l2 = l2;
    const double energy = std::pow(norm(u, NormKind::L2), 2);
    const double rate = energy_rate(u);
    if (prev_energy > 0.0) {
      const double defect = std::abs((energy - prev_energy) - 0.5 * dt * (prev_rate + rate));
      rec.energy_balance_defect = std::max(rec.energy_balance_defect, defect / prev_energy);
    }
    prev_energy = energy;
    prev_rate = rate;

    track_windows(j, w);
    const bool decayed = l2 <= target;
    const bool windows_done = j >= last_window_step;
    const bool stop = (decayed && windows_done) || j >= cfg.max_steps || j >= horizon_steps;
    if (stop || j % cfg.evolution.snapshot_stride == 0) sample(j * dt, w);
    if (stop) break;
  }
  rec.steps = j;
  rec.success = rec.pert_l2.back() <= 1e-3 * rec.pert_l2.front() || w0_l2 == 0.0;
  return rec;
}

}  // namespace steadylab
