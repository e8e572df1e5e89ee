#include "steadylab/steady_builder.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "steadylab/error.hpp"
#include "steadylab/format.hpp"
#include "steadylab/spectral.hpp"

namespace steadylab {

namespace {

constexpr double kFourPi2 = 4.0 * std::numbers::pi * std::numbers::pi;

/// -nu Lap u
SpectralVectorField apply_stokes(const SpectralVectorField& u, double nu) {
  SpectralVectorField out = u;
  const Lattice& lat = u.lattice();
  for (std::size_t i = 0; i < lat.size(); ++i) {
    const double s = kFourPi2 * nu * lat.xi2(i);
    for (int c = 0; c < 3; ++c) out.at(c, i) *= s;
  }
  return out;
}

double relative_hm1(const SpectralVectorField& defect, const SpectralVectorField& f) {
  const double fn = norm(f, NormKind::Hminus1);
  const double dn = norm(defect, NormKind::Hminus1);
  return fn > 0.0 ? dn / fn : dn;
}

void require_gradient_bound(const SpectralVectorField& u_prev, const SpectralVectorField& f,
                            double nu) {
  const double bound = norm(f, NormKind::X) / nu;
  const double g = norm(u_prev, NormKind::H1dot);
  if (g > bound * (1.0 + 1e-10)) {
    std::ostringstream msg;
    msg << "advecting field violates ||grad U^i||_2 <= ||f||_X / nu: " << g << " > " << bound;
    throw PreconditionError(msg.str());
  }
}

}  // namespace

SpectralVectorField stokes_solve(const SpectralVectorField& f, double nu) {
  if (!(nu > 0.0)) throw PreconditionError("stokes_solve: viscosity must be positive");
  SpectralVectorField u = f;
  const Lattice& lat = f.lattice();
  for (int c = 0; c < 3; ++c) u.at(c, 0) = Complex{};
  for (std::size_t i = 1; i < lat.size(); ++i) {
    const double s = 1.0 / (kFourPi2 * nu * lat.xi2(i));
    for (int c = 0; c < 3; ++c) u.at(c, i) *= s;
  }
  return u;
}

double steady_residual(const SpectralVectorField& u, const SpectralVectorField& f, double nu,
                       bool nonlinear) {
  if (!(u.lattice() == f.lattice())) throw LatticeMismatch();
  SpectralVectorField defect = apply_stokes(u, nu);
  if (nonlinear) defect += nonlinear_term(u, u);
  defect -= leray_project(f);
  return relative_hm1(defect, f);
}

double linear_steady_residual(const SpectralVectorField& u_prev, const SpectralVectorField& u,
                              const SpectralVectorField& f, double nu) {
  SpectralVectorField defect = apply_stokes(u, nu);
  defect += nonlinear_term(u_prev, u);
  defect -= leray_project(f);
  return relative_hm1(defect, f);
}

LinearSolveResult linear_steady_solve(const SpectralVectorField& u_prev,
                                      const SpectralVectorField& f, double nu, double tol,
                                      int max_inner) {
  if (!(u_prev.lattice() == f.lattice())) throw LatticeMismatch();
  if (!(nu > 0.0)) throw PreconditionError("linear_steady_solve: viscosity must be positive");
  require_gradient_bound(u_prev, f, nu);

  const SpectralVectorField pf = leray_project(f);
  LinearSolveResult res{SpectralVectorField(f.lattice())};
  if (pf.is_zero()) return res;

  SpectralVectorField u = stokes_solve(pf, nu);
  double prev_residual = 0.0;
  int increases = 0;
  for (int j = 1;; ++j) {
    const SpectralVectorField adv = nonlinear_term(u_prev, u);
    SpectralVectorField defect = apply_stokes(u, nu);
    defect += adv;
    defect -= pf;
    const double r = relative_hm1(defect, pf);
    if (j > 1 && prev_residual > 0.0) res.inner_ratio = r / prev_residual;
    res.inner_iterations = j;
    res.residual = r;
    if (r <= tol) break;
    increases = (j > 1 && r > prev_residual) ? increases + 1 : 0;
    if (increases >= 3) {
      std::ostringstream msg;
      msg << "inner contraction violated: advection too strong for viscosity (measured inner "
             "ratio "
          << res.inner_ratio << ")";
      throw ContractionError(msg.str());
    }
    if (j >= max_inner) {
      std::ostringstream msg;
      msg << "inner iteration did not reach tolerance " << tol << " in " << max_inner
          << " steps (residual " << r << ", ratio " << res.inner_ratio << ")";
      throw ContractionError(msg.str());
    }
    prev_residual = r;
    u = stokes_solve(pf - adv, nu);
  }
  res.field = std::move(u);
  return res;
}

std::string to_string(SteadyRoute route) {
  return route == SteadyRoute::Direct ? "direct" : "quadrature";
}

SteadyRoute parse_route(const std::string& name) {
  if (name == "direct") return SteadyRoute::Direct;
  if (name == "quadrature") return SteadyRoute::Quadrature;
  throw PreconditionError("unknown steady route '" + name + "' (expected direct|quadrature)");
}

double IterationTrace::max_ratio() const {
  double q = 0.0;
  for (const auto& it : iterates)
    if (it.index >= 2) q = std::max(q, it.ratio);
  return q;
}

double IterationTrace::median_ratio() const {
  std::vector<double> qs;
  for (const auto& it : iterates)
    if (it.index >= 2) qs.push_back(it.ratio);
  if (qs.empty()) return 0.0;
  std::sort(qs.begin(), qs.end());
  const std::size_t mid = qs.size() / 2;
  return qs.size() % 2 ? qs[mid] : 0.5 * (qs[mid - 1] + qs[mid]);
}

std::string IterationTrace::to_csv() const {
  std::string out = "i,l2,h1dot,contraction,ratio,residual,inner_iterations\n";
  for (const auto& it : iterates) {
    out += std::to_string(it.index) + ',' + fmt17(it.l2) + ',' + fmt17(it.h1dot) + ',' +
           fmt17(it.contraction) + ',' + fmt17(it.ratio) + ',' + fmt17(it.residual) + ',' +
           std::to_string(it.inner_iterations) + '\n';
  }
  return out;
}

SpectralVectorField quadrature_linear_solve(const SpectralVectorField& u_prev,
                                            const SpectralVectorField& f,
                                            const PhysicalParams& params,
                                            const EvolutionConfig& cfg,
                                            TimeIntegralResult* details) {
  EvolveOptions opts;
  opts.store_snapshots = false;
  opts.accumulate_integral = true;
  const TrajectoryRecord traj = evolve_difference(u_prev, f, params, cfg, opts);
  // Slowest heat rate on the box bounds the tail decay of w from below.
  const double period = f.lattice().period();
  const double rate_hint = 0.5 * kFourPi2 * params.nu / (period * period);
  TimeIntegralResult ti = time_integral(traj, rate_hint);
  // int_0^inf Phi dt is exactly the Stokes solution for f.
  SpectralVectorField u = stokes_solve(f, params.nu);
  u += ti.value;
  if (details) *details = std::move(ti);
  return u;
}

BuildResult build_steady(const SpectralVectorField& f, const PhysicalParams& params,
                         const BuildOptions& options) {
  params.validate();
  const Lattice& lat = f.lattice();
  for (std::size_t i = 1; i < lat.size(); ++i) {
    if (lat.xi2(i) >= params.rho0 * params.rho0) continue;
    for (int c = 0; c < 3; ++c)
      if (f.at(c, i) != Complex{})
        throw PreconditionError("forcing violates the spectral gap: mode at |xi|=" +
                                std::to_string(std::sqrt(lat.xi2(i))) + " < rho0");
  }

  BuildResult out{options.start ? *options.start : SpectralVectorField(lat), {}};
  IterationTrace& trace = out.trace;
  trace.route = options.route;
  trace.gradient_bound = norm(f, NormKind::X) / params.nu;
  trace.energy_budget = params.m_energy;

  auto check_bounds = [&](const SpectralVectorField& u, IterateRecord& rec) {
    rec.l2 = norm(u, NormKind::L2);
    rec.h1dot = norm(u, NormKind::H1dot);
    if (rec.h1dot > trace.gradient_bound * (1.0 + 1e-10)) ++trace.bound_violations;
    if (rec.l2 > params.m_energy) {
      ++trace.budget_violations;
      std::ostringstream msg;
      msg << "energy budget exceeded: increase M or decrease ||f||_X (||U^" << rec.index
          << "||_2 = " << rec.l2 << " > M = " << params.m_energy << ")";
      throw BudgetError(msg.str());
    }
  };

  SpectralVectorField u = out.field;
  {
    IterateRecord rec;
    check_bounds(u, rec);
    if (rec.h1dot > trace.gradient_bound * (1.0 + 1e-10))
      throw PreconditionError("starting iterate violates ||grad U^0||_2 <= ||f||_X / nu");
    rec.residual = steady_residual(u, f, params.nu);
    trace.iterates.push_back(rec);
  }

  int non_contracting = 0;
  for (int i = 1; i <= options.max_outer; ++i) {
    IterateRecord rec;
    rec.index = i;
    SpectralVectorField next(lat);
    if (options.route == SteadyRoute::Direct) {
      LinearSolveResult ls =
          linear_steady_solve(u, f, params.nu, options.tol_inner, options.max_inner);
      rec.inner_iterations = ls.inner_iterations;
      next = std::move(ls.field);
    } else {
      next = quadrature_linear_solve(u, f, params, options.evolution);
    }
    rec.contraction = norm(next - u, NormKind::H1dot);
    const double prev_contraction = trace.iterates.back().contraction;
    if (i >= 2) rec.ratio = prev_contraction > 0.0 ? rec.contraction / prev_contraction : 0.0;
    check_bounds(next, rec);
    rec.residual = steady_residual(next, f, params.nu);
    trace.iterates.push_back(rec);
    u = std::move(next);

    if (rec.contraction <= options.tol_outer * trace.gradient_bound) {
      trace.converged = true;
      break;
    }
    non_contracting = (i >= 2 && rec.ratio >= 1.0) ? non_contracting + 1 : 0;
    if (non_contracting >= 3) {
      std::ostringstream msg;
      msg << "outer iteration is not contracting (q >= 1 for 3 consecutive iterates, last q = "
          << rec.ratio << "); forcing too large for the smallness condition ||f||_X < nu^3/(C M)";
      throw ContractionError(msg.str());
    }
  }
  out.field = std::move(u);
  return out;
}

SpectralVectorField admissible_start(const SpectralVectorField& f, const PhysicalParams& params,
                                     std::uint64_t seed) {
  const Lattice& lat = f.lattice();
  const double bound = norm(f, NormKind::X) / params.nu;
  SpectralVectorField r = random_band_field(lat, 0.0, lat.cutoff() / lat.period(), seed);
  const double l2 = norm(r, NormKind::L2);
  const double h1 = norm(r, NormKind::H1dot);
  if (bound == 0.0 || l2 == 0.0) return SpectralVectorField(lat);
  r *= 0.9 * std::min(params.m_energy / l2, bound / h1);
  return r;
}

UniquenessResult uniqueness_probe(const SpectralVectorField& f, const PhysicalParams& params,
                                  std::uint64_t alt_seed, const BuildOptions& options) {
  BuildOptions zero_opts = options;
  zero_opts.start.reset();
  BuildOptions alt_opts = options;
  alt_opts.start = admissible_start(f, params, alt_seed);
  UniquenessResult res{0.0, build_steady(f, params, zero_opts), build_steady(f, params, alt_opts)};
  const double base = norm(res.from_zero.field, NormKind::L2);
  const double diff = norm(res.from_zero.field - res.from_alt.field, NormKind::L2);
  res.discrepancy = base > 0.0 ? diff / base : diff;
  return res;
}

}  // namespace steadylab
