#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "steadylab/field.hpp"
#include "steadylab/linear_evolution.hpp"

namespace steadylab {

/// Exact inverse of -nu Lap on mean-free fields: c(k) / (4 pi^2 nu |xi|^2).
SpectralVectorField stokes_solve(const SpectralVectorField& f, double nu);

/// ||P(u . grad u) - nu Lap u - f||_{H^-1} / ||f||_{H^-1} (absolute when f = 0).
/// With `nonlinear` false the advection term is dropped (pure Stokes defect).
double steady_residual(const SpectralVectorField& u, const SpectralVectorField& f, double nu,
                       bool nonlinear = true);

/// Defect of the linearised steady problem nu Lap U = P(u_prev . grad U) - f,
/// measured the same way as steady_residual.
double linear_steady_residual(const SpectralVectorField& u_prev, const SpectralVectorField& u,
                              const SpectralVectorField& f, double nu);

struct LinearSolveResult {
  SpectralVectorField field;
  int inner_iterations = 0;
  double residual = 0.0;
  /// Last measured ratio of successive inner residuals (0 when one step sufficed).
  double inner_ratio = 0.0;
};

/// Solves u_prev . grad U + grad p = nu Lap U + f by Stokes-preconditioned
/// Picard iteration U_{j+1} = stokes_solve(f - P(u_prev . grad U_j)) until the
/// relative H^-1 residual is at most `tol`. Throws ContractionError when the
/// residual grows over three consecutive inner steps.
LinearSolveResult linear_steady_solve(const SpectralVectorField& u_prev,
                                      const SpectralVectorField& f, double nu, double tol = 1e-10,
                                      int max_inner = 200);

enum class SteadyRoute { Direct, Quadrature };

std::string to_string(SteadyRoute route);
SteadyRoute parse_route(const std::string& name);

struct IterateRecord {
  int index = 0;
  double l2 = 0.0;
  double h1dot = 0.0;
  double contraction = 0.0;  // ||grad (U^i - U^{i-1})||_2, 0 for i = 0
  double ratio = 0.0;        // contraction_i / contraction_{i-1}, 0 for i < 2
  double residual = 0.0;     // steady_residual(U^i, f)
  int inner_iterations = 0;
};

struct IterationTrace {
  std::vector<IterateRecord> iterates;
  SteadyRoute route = SteadyRoute::Direct;
  bool converged = false;
  double gradient_bound = 0.0;  // ||f||_X / nu
  double energy_budget = 0.0;   // M
  int bound_violations = 0;
  int budget_violations = 0;

  /// Largest ratio q_i over i >= 2; 0 when fewer than three iterates exist.
  double max_ratio() const;
  /// Median of q_i over i >= 2, a steadier estimate of the asymptotic rate.
  double median_ratio() const;

  std::string to_csv() const;
};

struct BuildOptions {
  SteadyRoute route = SteadyRoute::Direct;
  double tol_outer = 1e-8;
  double tol_inner = 1e-10;
  int max_outer = 60;
  int max_inner = 200;
  /// Starting iterate; zero when absent.
  std::optional<SpectralVectorField> start;
  /// Time stepping used by the quadrature route.
  EvolutionConfig evolution{};
};

struct BuildResult {
  SpectralVectorField field;
  IterationTrace trace;
};

/// Outer fixed-point iteration U^{i+1} = S(U^i) where S solves the linearised
/// steady problem, either directly or as stokes_solve(f) + int_0^inf w dt.
/// Asserts ||U^i||_2 <= M and ||grad U^i||_2 <= ||f||_X / nu at every iterate;
/// throws BudgetError / ContractionError as documented in the README.
BuildResult build_steady(const SpectralVectorField& f, const PhysicalParams& params,
                         const BuildOptions& options = {});

/// One application of the quadrature map: stokes_solve(f) + int_0^inf w dt
/// with w from evolve_difference(u_prev, f).
SpectralVectorField quadrature_linear_solve(const SpectralVectorField& u_prev,
                                            const SpectralVectorField& f,
                                            const PhysicalParams& params,
                                            const EvolutionConfig& cfg,
                                            TimeIntegralResult* details = nullptr);

/// Admissible alternative start: a random solenoidal field scaled so that
/// ||U||_2 <= M and ||grad U||_2 <= ||f||_X / nu, each with a 10% margin.
SpectralVectorField admissible_start(const SpectralVectorField& f, const PhysicalParams& params,
                                     std::uint64_t seed);

struct UniquenessResult {
  double discrepancy = 0.0;  // ||U_a - U_b||_2 / ||U_a||_2 (absolute when U_a = 0)
  BuildResult from_zero;
  BuildResult from_alt;
};

UniquenessResult uniqueness_probe(const SpectralVectorField& f, const PhysicalParams& params,
                                  std::uint64_t alt_seed, const BuildOptions& options = {});

}  // namespace steadylab
