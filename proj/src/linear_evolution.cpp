#include "steadylab/linear_evolution.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "steadylab/error.hpp"
#include "steadylab/etd.hpp"
#include "steadylab/format.hpp"
#include "steadylab/semigroup.hpp"
#include "steadylab/spectral.hpp"

namespace steadylab {

namespace {

void check_cfl(double dt, double speed, const Lattice& lat, double cfl) {
  if (speed <= 0.0) return;
  const double limit = cfl * lat.spacing() / speed;
  if (dt > limit) {
    std::ostringstream msg;
    msg << "CFL violation: dt=" << dt << " exceeds " << limit << " (max speed " << speed
        << ", cfl " << cfl << ")";
    throw CflError(msg.str());
  }
}

bool finite_field(const SpectralVectorField& u) {
  for (const Complex& c : u.data())
    if (!std::isfinite(c.real()) || !std::isfinite(c.imag())) return false;
  return true;
}

}  // namespace

void EvolutionConfig::validate() const {
  if (!(dt > 0.0)) throw PreconditionError("evolution.dt must be positive");
  if (!(horizon >= dt)) throw PreconditionError("evolution.horizon must be at least dt");
  if (!(tail_tolerance >= 0.0)) throw PreconditionError("evolution.tail_tolerance must be >= 0");
  if (snapshot_stride < 1) throw PreconditionError("evolution.snapshot_stride must be >= 1");
  if (!(cfl > 0.0)) throw PreconditionError("evolution.cfl must be positive");
}

SpectralVectorField imex_step(const SpectralVectorField& w, const SpectralVectorField& advect,
                              const SpectralVectorField& source, double nu, double dt,
                              double cfl) {
  if (!(w.lattice() == advect.lattice()) || !(w.lattice() == source.lattice()))
    throw LatticeMismatch();
  check_cfl(dt, max_speed(advect), w.lattice(), cfl);
  const SpectralVectorField psource = leray_project(source);
  EtdStepper stepper(w.lattice(), nu, dt);
  auto rhs = [&](const SpectralVectorField& x, double) {
    SpectralVectorField n = nonlinear_term(advect, x);
    n *= -1.0;
    n += psource;
    return n;
  };
  return stepper.step(w, 0.0, rhs);
}

TrajectoryRecord evolve_difference(const SpectralVectorField& u_prev, const SpectralVectorField& f,
                                   const PhysicalParams& params, const EvolutionConfig& cfg,
                                   const EvolveOptions& options) {
  params.validate();
  cfg.validate();
  if (!(u_prev.lattice() == f.lattice())) throw LatticeMismatch();
  const Lattice& lat = f.lattice();

  const double fx = norm(f, NormKind::X);
  const double grad_prev = norm(u_prev, NormKind::H1dot);
  if (grad_prev > fx / params.nu * (1.0 + 1e-10)) {
    std::ostringstream msg;
    msg << "advecting field violates ||grad U^i||_2 <= ||f||_X / nu: " << grad_prev << " > "
        << fx / params.nu;
    throw PreconditionError(msg.str());
  }
  if (divergence_ratio(u_prev) > 1e-10)
    throw PreconditionError("advecting field is not divergence-free");
  for (std::size_t i = 1; i < lat.size(); ++i) {
    if (lat.xi2(i) >= params.rho0 * params.rho0) continue;
    for (int c = 0; c < 3; ++c)
      if (f.at(c, i) != Complex{})
        throw PreconditionError("forcing has a mode below rho0 at |xi|=" +
                                std::to_string(std::sqrt(lat.xi2(i))));
  }
  check_cfl(cfg.dt, max_speed(u_prev), lat, cfg.cfl);

  const double nu = params.nu;
  const double dt = cfg.dt;
  EtdStepper stepper(lat, nu, dt);
  auto rhs = [&](const SpectralVectorField& w, double t) {
    SpectralVectorField v = heat_evolve(f, nu, t);
    v += w;
    SpectralVectorField n = nonlinear_term(u_prev, v);
    n *= -1.0;
    return n;
  };

  TrajectoryRecord rec;
  rec.dt = dt;
  SpectralVectorField w(lat);
  double enstrophy = 0.0;
  double prev_grad2 = 0.0;

  auto record = [&](double t) {
    const SpectralVectorField phi = heat_evolve(f, nu, t);
    rec.times.push_back(t);
    rec.l2.push_back(norm(w, NormKind::L2));
    rec.h1dot.push_back(norm(w, NormKind::H1dot));
    rec.l2_v.push_back(norm(w + phi, NormKind::L2));
    rec.cumulative_enstrophy.push_back(enstrophy);
    rec.phi_l2.push_back(norm(phi, NormKind::L2));
    rec.phi_h1dot.push_back(norm(phi, NormKind::H1dot));
    if (options.store_snapshots) rec.snapshots.emplace_back(t, w);
  };

  std::optional<SpectralVectorField> fine, coarse;
  SpectralVectorField coarse_anchor(lat);  // w at the last even step
  if (options.accumulate_integral) {
    fine.emplace(lat);
    coarse.emplace(lat);
  }

  record(0.0);
  const long max_steps = static_cast<long>(std::ceil(cfg.horizon / dt - 1e-9));
  long step = 0;
  bool done = false;
  while (!done) {
    const double t = step * dt;
    SpectralVectorField next = stepper.step(w, t, rhs);
    if (!finite_field(next))
      throw NumericalBreakdown("non-finite state in evolve_difference at step " +
                               std::to_string(step + 1));
    ++step;
    const double grad2 = std::pow(norm(next, NormKind::H1dot), 2);
    enstrophy += 0.5 * dt * nu * (prev_grad2 + grad2);
    prev_grad2 = grad2;
    if (fine) {
      fine->axpy(0.5 * dt, w);
      fine->axpy(0.5 * dt, next);
      if (step % 2 == 0) {
        coarse->axpy(dt, coarse_anchor);
        coarse->axpy(dt, next);
        coarse_anchor = next;
      }
    }
    w = std::move(next);
    const double tn = step * dt;
    const double v_l2 = norm(w + heat_evolve(f, nu, tn), NormKind::L2);
    const bool small = v_l2 <= cfg.tail_tolerance;
    // The dense quadrature needs an even step count for its Richardson partner.
    done = (step >= max_steps || small) && (!fine || step % 2 == 0);
    if (done || step % cfg.snapshot_stride == 0) record(tn);
  }
  rec.steps = static_cast<int>(step);
  rec.final_w = w;
  if (fine) {
    rec.dense_integral = std::move(fine);
    rec.dense_integral_coarse = std::move(coarse);
  }
  return rec;
}

double tail_rate(const std::vector<double>& times, const std::vector<double>& values) {
  const std::size_t n = values.size();
  if (n < 2 || times.size() != n) return 0.0;
  const double last = values.back();
  if (!(last > 0.0)) return std::numeric_limits<double>::infinity();
  std::size_t start = n - 1;
  while (start > 0 && values[start - 1] > 0.0 && values[start - 1] <= 10.0 * last) --start;
  if (n - start < 3) start = n >= 4 ? n / 2 : 0;
  // Least squares of log(value) against time.
  double st = 0.0, sy = 0.0, stt = 0.0, sty = 0.0;
  std::size_t count = 0;
  for (std::size_t i = start; i < n; ++i) {
    if (!(values[i] > 0.0)) continue;
    const double y = std::log(values[i]);
    st += times[i];
    sy += y;
    stt += times[i] * times[i];
    sty += times[i] * y;
    ++count;
  }
  if (count < 2) return 0.0;
  const double denom = count * stt - st * st;
  if (denom <= 0.0) return 0.0;
  const double slope = (count * sty - st * sy) / denom;
  return -slope;
}

TimeIntegralResult time_integral(const std::vector<double>& times,
                                 const std::vector<SpectralVectorField>& samples,
                                 double rate_hint) {
  if (samples.empty() || samples.size() != times.size())
    throw PreconditionError("time_integral: need matching, non-empty samples");
  const Lattice& lat = samples.front().lattice();
  TimeIntegralResult res{SpectralVectorField(lat)};
  res.horizon = times.back();
  const std::size_t n = samples.size();

  SpectralVectorField coarse(lat);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const double h = times[i + 1] - times[i];
    res.value.axpy(0.5 * h, samples[i]);
    res.value.axpy(0.5 * h, samples[i + 1]);
  }
  if (n >= 3) {
    std::size_t i = 0;
    for (; i + 2 < n; i += 2) {
      const double h = times[i + 2] - times[i];
      coarse.axpy(0.5 * h, samples[i]);
      coarse.axpy(0.5 * h, samples[i + 2]);
    }
    if (i + 1 < n) {
      const double h = times[i + 1] - times[i];
      coarse.axpy(0.5 * h, samples[i]);
      coarse.axpy(0.5 * h, samples[i + 1]);
    }
    res.quadrature_error = norm(res.value - coarse, NormKind::L2) / 3.0;
  }

  std::vector<double> l2;
  l2.reserve(n);
  for (const auto& s : samples) l2.push_back(norm(s, NormKind::L2));
  const double last = l2.back();
  if (last == 0.0) return res;
  const double rate = tail_rate(times, l2);
  if (!(rate > 0.0)) throw Error("tail not integrable at this horizon");
  res.tail_rate = rate;
  res.value.axpy(1.0 / rate, samples.back());
  res.tail_error = last / std::min(rate, rate_hint > 0.0 ? rate_hint : rate);
  return res;
}

TimeIntegralResult time_integral(const TrajectoryRecord& traj, double rate_hint) {
  if (!traj.dense_integral) {
    std::vector<double> times;
    std::vector<SpectralVectorField> samples;
    for (const auto& [t, w] : traj.snapshots) {
      times.push_back(t);
      samples.push_back(w);
    }
    return time_integral(times, samples, rate_hint);
  }
  TimeIntegralResult res{*traj.dense_integral};
  res.horizon = traj.times.back();
  res.quadrature_error = norm(*traj.dense_integral - *traj.dense_integral_coarse, NormKind::L2) / 3.0;
  const double last = traj.l2.back();
  if (last == 0.0) return res;
  const double rate = tail_rate(traj.times, traj.l2);
  if (!(rate > 0.0)) throw Error("tail not integrable at this horizon");
  res.tail_rate = rate;
  res.value.axpy(1.0 / rate, *traj.final_w);
  res.tail_error = last / std::min(rate, rate_hint > 0.0 ? rate_hint : rate);
  return res;
}

std::string trajectory_csv(const TrajectoryRecord& traj) {
  std::string out = "t,l2_w,h1dot_w,l2_v,cum_enstrophy\n";
  for (std::size_t i = 0; i < traj.times.size(); ++i) {
    out += fmt17(traj.times[i]) + ',' + fmt17(traj.l2[i]) + ',' + fmt17(traj.h1dot[i]) + ',' +
           fmt17(traj.l2_v[i]) + ',' + fmt17(traj.cumulative_enstrophy[i]) + '\n';
  }
  return out;
}

}  // namespace steadylab
