#include "steadylab/semigroup.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <sstream>

#include "steadylab/error.hpp"
#include "steadylab/spectral.hpp"

namespace steadylab {

namespace {
constexpr double kFourPi2 = 4.0 * std::numbers::pi * std::numbers::pi;

/// Energy per |k|^2 shell, V sum |c|^2.
std::map<int, double> shell_energies(const SpectralVectorField& f) {
  const Lattice& lat = f.lattice();
  std::map<int, double> shells;
  for (std::size_t i = 1; i < lat.size(); ++i) {
    double e = 0.0;
    for (int c = 0; c < 3; ++c) e += std::norm(f.at(c, i));
    if (e > 0.0) shells[lat.k2()[i]] += lat.volume() * e;
  }
  return shells;
}
}  // namespace

SpectralVectorField heat_evolve(const SpectralVectorField& f, double nu, double t) {
  if (t < 0.0) throw PreconditionError("heat_evolve: negative time");
  SpectralVectorField out = f;
  if (t == 0.0) return out;
  const Lattice& lat = f.lattice();
  const auto k2 = lat.k2();
  // One exponential per distinct integer |k|^2.
  std::vector<double> g(*std::max_element(k2.begin(), k2.end()) + 1);
  const double rate = kFourPi2 * nu * t / (lat.period() * lat.period());
  for (std::size_t q = 0; q < g.size(); ++q) g[q] = std::exp(-rate * static_cast<double>(q));
  for (int c = 0; c < 3; ++c) {
    auto comp = out.component(c);
    for (std::size_t i = 0; i < comp.size(); ++i) comp[i] *= g[k2[i]];
  }
  return out;
}

bool HeatEnvelopeReport::all_hold() const {
  return std::all_of(holds.begin(), holds.end(), [](bool b) { return b; });
}

bool HeatEnvelopeReport::all_paper_hold() const {
  return std::all_of(paper_holds.begin(), paper_holds.end(), [](bool b) { return b; });
}

HeatEnvelopeReport heat_envelope_check(const SpectralVectorField& f, const PhysicalParams& params,
                                       const std::vector<double>& times) {
  params.validate();
  const Lattice& lat = f.lattice();
  const auto shells = shell_energies(f);
  std::ostringstream offending;
  for (const auto& [k2, e] : shells) {
    const double r = std::sqrt(double(k2)) / lat.period();
    if (r < params.rho0) offending << (offending.tellp() > 0 ? ", " : "") << "|xi|=" << r;
  }
  if (offending.tellp() > 0)
    throw PreconditionError("heat_envelope_check: forcing has modes below rho0=" +
                            std::to_string(params.rho0) + " on shells " + offending.str());

  HeatEnvelopeReport rep;
  rep.times = times;
  double total = 0.0;
  for (const auto& [k2, e] : shells) total += e;
  rep.rho_min = shells.empty() ? params.rho0
                               : std::sqrt(double(shells.begin()->first)) / lat.period();
  for (double t : times) {
    if (t < 0.0) throw PreconditionError("heat_envelope_check: negative sample time");
    const double l2 = norm(heat_evolve(f, params.nu, t), NormKind::L2);
    const double measured = l2 * l2;
    const double exact = std::exp(-2.0 * kFourPi2 * params.nu * rep.rho_min * rep.rho_min * t) * total;
    const double paper = std::exp(-2.0 * params.nu * params.rho0 * t) * total;
    rep.measured.push_back(measured);
    rep.exact_bound.push_back(exact);
    rep.paper_bound.push_back(paper);
    rep.holds.push_back(measured <= exact * (1.0 + 1e-12));
    rep.paper_holds.push_back(measured <= paper * (1.0 + 1e-12));
  }
  return rep;
}

double heat_dissipation(const SpectralVectorField& f, double nu, double t) {
  if (t < 0.0) throw PreconditionError("heat_dissipation: negative time");
  const Lattice& lat = f.lattice();
  double acc = 0.0;
  for (const auto& [k2, e] : shell_energies(f)) {
    const double rate = 2.0 * kFourPi2 * nu * k2 / (lat.period() * lat.period());
    acc += e * -std::expm1(-rate * t);
  }
  return acc;
}

double heat_l3_surrogate(const SpectralVectorField& f, double nu, double t) {
  const Lattice& lat = f.lattice();
  double l2 = 0.0, h1 = 0.0;
  for (const auto& [k2, e] : shell_energies(f)) {
    const double xi2 = k2 / (lat.period() * lat.period());
    const double decay = std::exp(-2.0 * kFourPi2 * nu * xi2 * t);
    l2 += e * decay;
    h1 += kFourPi2 * xi2 * e * decay;
  }
  return std::sqrt(l2) * std::sqrt(h1);
}

double heat_l3_surrogate_integral(const SpectralVectorField& f, double nu, double horizon,
                                  int panels) {
  if (horizon <= 0.0) return 0.0;
  if (panels % 2) ++panels;
  const double h = horizon / panels;
  double acc = heat_l3_surrogate(f, nu, 0.0) + heat_l3_surrogate(f, nu, horizon);
  for (int i = 1; i < panels; ++i)
    acc += (i % 2 ? 4.0 : 2.0) * heat_l3_surrogate(f, nu, i * h);
  return acc * h / 3.0;
}

}  // namespace steadylab
