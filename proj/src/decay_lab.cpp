#include "steadylab/decay_lab.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "steadylab/error.hpp"
#include "steadylab/format.hpp"
#include "steadylab/spectral.hpp"

namespace steadylab {

namespace {

constexpr double kFourPi2 = 4.0 * std::numbers::pi * std::numbers::pi;

/// V sum_k weight(k) |w(k)|^2
template <typename Weight>
double weighted_energy(const SpectralVectorField& w, Weight&& wgt) {
  const Lattice& lat = w.lattice();
  double acc = 0.0;
  for (std::size_t i = 1; i < lat.size(); ++i) {
    double e = 0.0;
    for (int c = 0; c < 3; ++c) e += std::norm(w.at(c, i));
    if (e != 0.0) acc += wgt(i) * e;
  }
  return lat.volume() * acc;
}

/// Derivative of the quadratic interpolant through (x0,y0),(x1,y1),(x2,y2) at x.
double lagrange_derivative(double x0, double y0, double x1, double y1, double x2, double y2,
                           double x) {
  return y0 * ((x - x1) + (x - x2)) / ((x0 - x1) * (x0 - x2)) +
         y1 * ((x - x0) + (x - x2)) / ((x1 - x0) * (x1 - x2)) +
         y2 * ((x - x0) + (x - x1)) / ((x2 - x0) * (x2 - x1));
}

/// Second-order derivative estimate at sample i using neighbours `stride` apart.
/// Returns NaN when the stencil does not fit.
double stencil_derivative(const std::vector<double>& t, const std::vector<double>& g,
                          std::size_t i, std::size_t stride) {
  const std::size_t n = t.size();
  if (n < 2 * stride + 1) return std::numeric_limits<double>::quiet_NaN();
  std::size_t a, b, c;
  if (i >= stride && i + stride < n) {
    a = i - stride, b = i, c = i + stride;
  } else if (i < stride) {
    if (i != 0) return std::numeric_limits<double>::quiet_NaN();
    a = 0, b = stride, c = 2 * stride;
  } else {
    if (i != n - 1) return std::numeric_limits<double>::quiet_NaN();
    a = n - 1 - 2 * stride, b = n - 1 - stride, c = n - 1;
  }
  return lagrange_derivative(t[a], g[a], t[b], g[b], t[c], g[c], t[i]);
}

std::size_t calibration_count(const std::vector<double>& t, double fraction) {
  if (!(fraction > 0.0 && fraction < 1.0))
    throw PreconditionError("calibration fraction must lie in (0, 1)");
  const double end = t.front() + fraction * (t.back() - t.front());
  std::size_t k = 0;
  while (k < t.size() && t[k] <= end) ++k;
  return std::max<std::size_t>(k, 2);
}

void finish_report(InequalityReport& rep, const std::vector<double>& scales,
                   const std::vector<double>& tolerances) {
  rep.slack = std::numeric_limits<double>::infinity();
  rep.relative_slack = std::numeric_limits<double>::infinity();
  rep.scale = 0.0;
  rep.holds = true;
  for (std::size_t i = 0; i < rep.lhs.size(); ++i) {
    const double d = rep.rhs[i] - rep.lhs[i];
    rep.slack = std::min(rep.slack, d);
    rep.scale = std::max(rep.scale, scales[i]);
    const double rel = scales[i] > 0.0 ? d / scales[i] : (d < 0.0 ? -1.0 : 0.0);
    rep.relative_slack = std::min(rep.relative_slack, rel);
    if (rel < -tolerances[i]) rep.holds = false;
  }
  if (rep.lhs.empty()) {
    rep.slack = 0.0;
    rep.relative_slack = 0.0;
  }
}

}  // namespace

std::string to_string(RateModel model) {
  return model == RateModel::Algebraic ? "algebraic" : "exponential";
}

RateFit fit_rate(const std::vector<double>& times, const std::vector<double>& values,
                 RateModel model, double t_lo, double t_hi) {
  if (times.size() != values.size()) throw PreconditionError("fit_rate: series lengths differ");
  std::vector<double> xs, ys;
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (times[i] < t_lo || times[i] > t_hi) continue;
    if (!(values[i] > 0.0)) {
      std::ostringstream msg;
      msg << "fit_rate: non-positive value " << values[i] << " at t=" << times[i];
      throw PreconditionError(msg.str());
    }
    xs.push_back(model == RateModel::Algebraic ? std::log1p(times[i]) : times[i]);
    ys.push_back(std::log(values[i]));
    lo = std::min(lo, times[i]);
    hi = std::max(hi, times[i]);
  }
  if (xs.size() < 8) {
    throw PreconditionError("fit_rate: window holds " + std::to_string(xs.size()) +
                            " samples, at least 8 required");
  }
  const double n = static_cast<double>(xs.size());
  double sx = 0.0, sy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) sx += xs[i], sy += ys[i];
  const double mx = sx / n, my = sy / n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
  }
  if (!(sxx > 0.0)) throw PreconditionError("fit_rate: window has no spread in time");
  const double slope = sxy / sxx;
  const double icept = my - slope * mx;
  double rss = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double r = ys[i] - (icept + slope * xs[i]);
    rss += r * r;
  }
  RateFit fit;
  fit.model = model;
  fit.exponent = -slope;
  fit.prefactor = std::exp(icept);
  fit.t_lo = lo;
  fit.t_hi = hi;
  fit.samples = static_cast<int>(xs.size());
  fit.rms_log_residual = std::sqrt(rss / n);
  return fit;
}

SplitEnergy fourier_split(const SpectralVectorField& w, double radius) {
  if (!(radius > 0.0)) throw PreconditionError("fourier_split: radius must be positive");
  const Lattice& lat = w.lattice();
  const double r2 = radius * radius;
  double lo = 0.0, hi = 0.0;
  for (std::size_t i = 1; i < lat.size(); ++i) {
    double e = 0.0;
    for (int c = 0; c < 3; ++c) e += std::norm(w.at(c, i));
    (lat.xi2(i) < r2 ? lo : hi) += e;
  }
  return {lat.volume() * lo, lat.volume() * hi};
}

SplitEnergy gaussian_split(const SpectralVectorField& w) {
  const Lattice& lat = w.lattice();
  const double lo = weighted_energy(w, [&](std::size_t i) {
    const double p = std::exp(-lat.xi2(i));
    return p * p;
  });
  const double hi = weighted_energy(w, [&](std::size_t i) {
    const double q = -std::expm1(-lat.xi2(i));
    return q * q;
  });
  return {lo, hi};
}

std::pair<double, double> uniform_quadrature(const std::vector<double>& v, double h) {
  const std::size_t n = v.empty() ? 0 : v.size() - 1;
  if (n == 0) return {0.0, 0.0};
  double trap = 0.0;
  for (std::size_t i = 0; i < n; ++i) trap += 0.5 * h * (v[i] + v[i + 1]);
  if (n == 1) return {trap, std::abs(trap)};

  auto simpson = [&](std::size_t first, std::size_t last, std::size_t stride) {
    double s = v[first] + v[last];
    for (std::size_t i = first + stride, k = 1; i < last; i += stride, ++k)
      s += (k % 2 ? 4.0 : 2.0) * v[i];
    return s * stride * h / 3.0;
  };
  double value;
  if (n % 2 == 0) {
    value = simpson(0, n, 1);
  } else {
    value = n > 3 ? simpson(0, n - 3, 1) : 0.0;
    value += 3.0 * h / 8.0 * (v[n - 3] + 3.0 * v[n - 2] + 3.0 * v[n - 1] + v[n]);
  }
  double err;
  if (n % 4 == 0)
    err = std::abs(value - simpson(0, n, 2)) / 15.0;
  else
    err = std::abs(value - trap);
  return {value, err};
}

InequalityReport check_bootstrap_inequality(const TrajectoryRecord& traj, double u_prev_l2,
                                            double f_xnorm, const PhysicalParams& params, int m,
                                            double calibration_fraction) {
  if (m < 4) throw PreconditionError("bootstrap inequality needs m >= 4");
  params.validate();
  const auto& t = traj.times;
  const std::size_t n = t.size();
  if (n < 5 || traj.l2.size() != n || traj.phi_l2.size() != n || traj.phi_h1dot.size() != n)
    throw PreconditionError("bootstrap inequality needs at least 5 aligned samples with l2, "
                            "h1dot and heat surrogate series");

  InequalityReport rep;
  rep.name = "bootstrap_m" + std::to_string(m);

  std::vector<double> g(n), d(n), base(n);
  for (std::size_t i = 0; i < n; ++i) g[i] = std::pow(1.0 + t[i], m) * traj.l2[i] * traj.l2[i];

  // Stencil error: Richardson comparison of the h and 2h second-order stencils.
  double dmax = 0.0, err_interior = 0.0, err_end = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    d[i] = stencil_derivative(t, g, i, 1);
    dmax = std::max(dmax, std::abs(d[i]));
    const double coarse = stencil_derivative(t, g, i, 2);
    if (std::isnan(coarse)) continue;
    const double e = std::abs(d[i] - coarse) / 3.0;
    if (i == 0 || i == n - 1)
      err_end = std::max(err_end, e);
    else
      err_interior = std::max(err_interior, e);
  }
  if (dmax > 0.0 && (err_interior > 0.1 * dmax || err_end > 1.0 * dmax)) {
    std::ostringstream msg;
    msg << "insufficient sampling density for the time derivative: relative stencil error "
        << std::max(err_interior, err_end / 10.0) / dmax << " > 0.1";
    throw PreconditionError(msg.str());
  }

  double integral = 0.0;
  const double nu3 = params.nu * params.nu * params.nu;
  for (std::size_t i = 0; i < n; ++i) {
    if (i > 0) integral += 0.5 * (t[i] - t[i - 1]) * (traj.l2[i] + traj.l2[i - 1]);
    const double a = u_prev_l2 * u_prev_l2 * std::pow(1.0 + t[i], m - 3.5) *
                     (integral + f_xnorm) * (integral + f_xnorm);
    const double b = f_xnorm * f_xnorm / nu3 * traj.phi_l2[i] * traj.phi_h1dot[i] *
                     std::pow(1.0 + t[i], m);
    base[i] = a + b;
  }

  const std::size_t k = calibration_count(t, calibration_fraction);
  double c = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    if (base[i] > 0.0)
      c = std::max(c, d[i] / base[i]);
    else if (d[i] > 0.0)
      throw PreconditionError("bootstrap inequality: positive derivative where the bound vanishes");
  }
  rep.fitted_constant = c;
  rep.calibration_samples = static_cast<int>(k);

  double scale = 0.0;
  for (std::size_t i = 0; i < n; ++i) scale = std::max({scale, std::abs(d[i]), c * base[i]});
  std::vector<double> scales, tols;
  for (std::size_t i = k; i < n; ++i) {
    rep.sample_points.push_back(t[i]);
    rep.lhs.push_back(d[i]);
    rep.rhs.push_back(c * base[i]);
    scales.push_back(scale);
    tols.push_back(i == n - 1 ? 10.0 * kInequalityTolerance : kInequalityTolerance);
  }
  finish_report(rep, scales, tols);
  {
    std::ostringstream note;
    note << "relative stencil error " << (dmax > 0.0 ? err_interior / dmax : 0.0);
    rep.notes.push_back(note.str());
  }
  return rep;
}

InequalityReport check_decay_envelope(const TrajectoryRecord& traj, double calibration_fraction) {
  const auto& t = traj.times;
  const std::size_t n = t.size();
  if (n < 2 || traj.l2.size() != n) throw PreconditionError("decay envelope needs a trajectory");
  InequalityReport rep;
  rep.name = "decay_envelope_5_2";
  const std::size_t k = calibration_count(t, calibration_fraction);
  double c = 0.0;
  for (std::size_t i = 0; i < k; ++i)
    c = std::max(c, traj.l2[i] * traj.l2[i] * std::pow(1.0 + t[i], 2.5));
  rep.fitted_constant = c;
  rep.calibration_samples = static_cast<int>(k);
  std::vector<double> scales, tols;
  for (std::size_t i = k; i < n; ++i) {
    const double lhs = traj.l2[i] * traj.l2[i];
    const double rhs = c * std::pow(1.0 + t[i], -2.5);
    rep.sample_points.push_back(t[i]);
    rep.lhs.push_back(lhs);
    rep.rhs.push_back(rhs);
    scales.push_back(std::max(lhs, rhs));
    tols.push_back(kInequalityTolerance);
  }
  finish_report(rep, scales, tols);
  rep.notes.push_back(
      "one-sided check: decay on the periodic box is exponential, faster than the whole-space rate");
  return rep;
}

GeneralizedInequalityResult check_generalized_inequalities(
    const StabilityRunRecord& run, const std::vector<std::pair<double, double>>& pairs,
    double alpha, double calibration_fraction) {
  if (!(alpha > 3.0)) throw PreconditionError("generalized inequalities need alpha > 3");
  if (std::abs(alpha - run.alpha) > 1e-12 * alpha) {
    std::ostringstream msg;
    msg << "alpha " << alpha << " differs from the recorded run's alpha " << run.alpha;
    throw PreconditionError(msg.str());
  }
  if (!(calibration_fraction > 0.0 && calibration_fraction < 1.0))
    throw PreconditionError("calibration fraction must lie in (0, 1)");

  GeneralizedInequalityResult res;
  std::vector<const GeneralizedWindow*> wins;
  for (const auto& [s, t] : pairs) {
    if (!(t > s)) throw PreconditionError("generalized inequality pairs need s < t");
    const GeneralizedWindow* found = nullptr;
    for (const auto& w : run.windows)
      if (std::abs(w.s - s) <= 1e-12 * std::max(1.0, s) &&
          std::abs(w.t - t) <= 1e-12 * std::max(1.0, t))
        found = &w;
    std::ostringstream where;
    where << "(" << s << ", " << t << ")";
    if (!found) throw PreconditionError("missing snapshots: window " + where.str() + " was not tracked");
    if (!found->finished || !found->w_s || !found->w_t || found->tau.size() < 2)
      throw PreconditionError("missing snapshots: window " + where.str() + " did not complete");
    wins.push_back(found);
  }
  if (wins.empty()) return res;

  // Calibration span: the leading fraction of the tracked time range.
  double t0 = std::numeric_limits<double>::infinity(), t1 = 0.0;
  for (const auto* w : wins) {
    t0 = std::min(t0, w->tau.front());
    t1 = std::max(t1, w->tau.back());
  }
  MajorantFit& fit = res.fit;
  fit.calibration_end = t0 + calibration_fraction * (t1 - t0);
  auto ratio = [](double num, double den) { return den > 0.0 ? num / den : 0.0; };
  std::vector<double> seen;
  for (const auto* w : wins) {
    for (std::size_t i = 0; i < w->tau.size(); ++i) {
      if (w->tau[i] > fit.calibration_end) break;
      fit.low_adv = std::max(fit.low_adv, ratio(w->low_adv[i], w->low_adv_majorant[i]));
      fit.low_stretch =
          std::max(fit.low_stretch, ratio(w->low_stretch[i], w->low_stretch_majorant[i]));
      fit.high_stretch =
          std::max(fit.high_stretch, ratio(w->high_stretch[i], w->high_stretch_majorant[i]));
      fit.high_adv = std::max(fit.high_adv, ratio(w->high_adv[i], w->high_adv_majorant[i]));
      if (std::find(seen.begin(), seen.end(), w->tau[i]) == seen.end()) seen.push_back(w->tau[i]);
    }
  }
  fit.samples = static_cast<int>(seen.size());
  if (fit.samples == 0)
    throw PreconditionError("no tracked samples inside the calibration span");

  const Lattice& lat = wins.front()->w_t->lattice();
  const double nu = run.nu;
  const double h = run.dt;

  res.low.name = "generalized_low";
  res.high.name = "generalized_high";
  res.low_majorant.name = "generalized_low_majorant";
  res.high_majorant.name = "generalized_high_majorant";
  res.low_majorant.fitted_constant = std::max(fit.low_adv, fit.low_stretch);
  res.high_majorant.fitted_constant = std::max(fit.high_stretch, fit.high_adv);
  res.low_majorant.calibration_samples = res.high_majorant.calibration_samples = fit.samples;

  std::vector<double> sc_low, sc_high, sc_low_m, sc_high_m, tol;
  for (const auto* w : wins) {
    const double s = w->tau.front();
    const double t = w->tau.back();
    const double es = std::pow(1.0 + s, alpha);
    const double et = std::pow(1.0 + t, alpha);
    const auto phi2 = [&](std::size_t i) {
      const double p = std::exp(-lat.xi2(i));
      return p * p;
    };
    const auto psi2 = [&](std::size_t i) {
      const double q = -std::expm1(-lat.xi2(i));
      return q * q;
    };
    const double low_lhs = weighted_energy(*w->w_t, phi2);
    const double low_heat = weighted_energy(*w->w_s, [&](std::size_t i) {
      return std::exp(-2.0 * nu * kFourPi2 * lat.xi2(i) * (t - s)) * phi2(i);
    });
    const double high_lhs = et * weighted_energy(*w->w_t, psi2);
    const double high_start = es * weighted_energy(*w->w_s, psi2);

    const auto q = [&](const std::vector<double>& v) { return uniform_quadrature(v, h); };
    const auto [l_adv, e1] = q(w->low_adv);
    const auto [l_str, e2] = q(w->low_stretch);
    const auto [h_visc, e3] = q(w->high_viscous);
    const auto [h_wt, e4] = q(w->high_weight);
    const auto [h_str, e5] = q(w->high_stretch);
    const auto [h_adv, e6] = q(w->high_adv);
    const double l_adv_m = q(w->low_adv_majorant).first;
    const double l_str_m = q(w->low_stretch_majorant).first;
    const double h_str_m = q(w->high_stretch_majorant).first;
    const double h_adv_m = q(w->high_adv_majorant).first;
    (void)e1, (void)e2;
    res.quadrature_error.push_back(e3 + e4 + e5 + e6);

    res.window_starts.push_back(w->s);
    const double low_major = fit.low_adv * l_adv_m + fit.low_stretch * l_str_m;
    const double high_major = fit.high_stretch * h_str_m + fit.high_adv * h_adv_m;

    for (auto* r : {&res.low, &res.high, &res.low_majorant, &res.high_majorant})
      r->sample_points.push_back(w->t);
    res.low.lhs.push_back(low_lhs);
    res.low.rhs.push_back(low_heat + l_adv + l_str);
    res.low_majorant.lhs.push_back(low_lhs);
    res.low_majorant.rhs.push_back(low_heat + low_major);
    // The viscous integral is moved to the left so both sides are non-negative.
    res.high.lhs.push_back(high_lhs + h_visc);
    res.high.rhs.push_back(high_start + h_wt + h_str + h_adv);
    res.high_majorant.lhs.push_back(high_lhs + h_visc);
    res.high_majorant.rhs.push_back(high_start + h_wt + high_major);

    sc_low.push_back(low_lhs + low_heat + l_adv + l_str);
    sc_low_m.push_back(low_lhs + low_heat + low_major);
    sc_high.push_back(high_lhs + h_visc + high_start + h_wt + h_str + h_adv);
    sc_high_m.push_back(high_lhs + h_visc + high_start + h_wt + high_major);
    tol.push_back(kInequalityTolerance);
  }
  finish_report(res.low, sc_low, tol);
  finish_report(res.high, sc_high, tol);
  finish_report(res.low_majorant, sc_low_m, tol);
  finish_report(res.high_majorant, sc_high_m, tol);
  {
    std::ostringstream note;
    note << "majorant constants frozen over t <= " << fit.calibration_end << " ("
         << fit.samples << " samples)";
    res.low_majorant.notes.push_back(note.str());
    res.high_majorant.notes.push_back(note.str());
  }
  return res;
}

nlohmann::json to_json(const RateFit& fit) {
  return {{"model", to_string(fit.model)},
          {"exponent", fit.exponent},
          {"prefactor", fit.prefactor},
          {"fit_window", {fit.t_lo, fit.t_hi}},
          {"samples", fit.samples},
          {"rms_log_residual", fit.rms_log_residual}};
}

nlohmann::json to_json(const InequalityReport& r) {
  return {{"name", r.name},
          {"sample_points", r.sample_points},
          {"lhs", r.lhs},
          {"rhs", r.rhs},
          {"slack", r.slack},
          {"relative_slack", r.relative_slack},
          {"scale", r.scale},
          {"holds", r.holds},
          {"fitted_constant", r.fitted_constant},
          {"calibration_samples", r.calibration_samples},
          {"notes", r.notes}};
}

nlohmann::json to_json(const GeneralizedInequalityResult& r) {
  return {{"low", to_json(r.low)},
          {"high", to_json(r.high)},
          {"low_majorant", to_json(r.low_majorant)},
          {"high_majorant", to_json(r.high_majorant)},
          {"window_starts", r.window_starts},
          {"quadrature_error", r.quadrature_error},
          {"fit",
           {{"calibration_end", r.fit.calibration_end},
            {"samples", r.fit.samples},
            {"low_adv", r.fit.low_adv},
            {"low_stretch", r.fit.low_stretch},
            {"high_stretch", r.fit.high_stretch},
            {"high_adv", r.fit.high_adv}}},
          {"holds", r.holds()}};
}

std::string summary_csv(const std::vector<InequalityReport>& reports) {
  std::string out = "name,holds,slack,relative_slack,scale,fitted_constant,samples\n";
  for (const auto& r : reports) {
    out += r.name + ',' + (r.holds ? "true" : "false") + ',' + fmt17(r.slack) + ',' +
           fmt17(r.relative_slack) + ',' + fmt17(r.scale) + ',' + fmt17(r.fitted_constant) + ',' +
           std::to_string(r.sample_points.size()) + '\n';
  }
  return out;
}

}  // namespace steadylab
