#include "steadylab/experiment.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include "steadylab/checkpoint.hpp"
#include "steadylab/decay_lab.hpp"
#include "steadylab/error.hpp"
#include "steadylab/format.hpp"
#include "steadylab/nse_solver.hpp"
#include "steadylab/semigroup.hpp"
#include "steadylab/spectral.hpp"
#include "steadylab/steady_builder.hpp"

namespace steadylab {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

std::string utc_now() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string bytes_of(const std::vector<unsigned char>& v) { return {v.begin(), v.end()}; }

CheckResult at_most(const std::string& name, double value, double limit,
                    const std::string& detail = "") {
  return {name, value <= limit, value, limit, detail};
}

CheckResult flag(const std::string& name, bool ok, const std::string& detail = "") {
  return {name, ok, ok ? 1.0 : 0.0, 1.0, detail};
}

json check_json(const CheckResult& c) {
  return {{"name", c.name}, {"passed", c.passed}, {"value", c.value}, {"limit", c.limit},
          {"detail", c.detail}};
}

// Everything a command produces before it is written to disk.
struct CommandOutput {
  std::vector<OutputRecord> records;
  std::vector<CheckResult> checks;
  std::vector<std::string> warnings;
  json summary = json::object();
};

std::string summary_document(const CommandOutput& out) {
  json doc = out.summary;
  doc["checks"] = json::array();
  for (const auto& c : out.checks) doc["checks"].push_back(check_json(c));
  doc["warnings"] = out.warnings;
  return doc.dump(2) + "\n";
}

BuildResult build_for(const ExperimentConfig& cfg, const SpectralVectorField& f,
                      CommandOutput& out) {
  BuildResult r = build_steady(f, cfg.physics, cfg.build_options());
  const auto& tr = r.trace;
  const double residual = tr.iterates.empty() ? 0.0 : tr.iterates.back().residual;
  out.checks.push_back(flag("build_converged", tr.converged,
                            std::to_string(tr.iterates.size()) + " outer iterates"));
  out.checks.push_back(at_most("gradient_bound_violations", tr.bound_violations, 0,
                               "||grad U^i|| <= ||f||_X / nu at every iterate"));
  out.checks.push_back(at_most("energy_budget_violations", tr.budget_violations, 0,
                               "||U^i|| <= M at every iterate"));
  out.checks.push_back(at_most("steady_residual", residual, cfg.verify_residual));
  const double q = tr.max_ratio();
  if (tr.iterates.size() >= 3) out.checks.push_back(at_most("contraction_ratio", q, 1.0 - 1e-12));
  out.records.push_back({"iterations.csv", tr.to_csv()});
  out.records.push_back({"forcing.ssns", bytes_of(encode_checkpoint(f))});
  out.records.push_back({"steady.ssns", bytes_of(encode_checkpoint(r.field))});
  out.summary["route"] = to_string(tr.route);
  out.summary["outer_iterations"] = tr.iterates.size();
  out.summary["max_ratio"] = q;
  out.summary["median_ratio"] = tr.median_ratio();
  out.summary["forcing_x_norm"] = norm(f, NormKind::X);
  out.summary["steady_l2"] = norm(r.field, NormKind::L2);
  out.summary["steady_h1dot"] = norm(r.field, NormKind::H1dot);
  out.summary["gradient_bound"] = tr.gradient_bound;
  out.summary["energy_budget"] = tr.energy_budget;
  out.summary["residual"] = residual;
  return r;
}

CommandOutput cmd_build_steady(const ExperimentConfig& cfg) {
  CommandOutput out;
  const Lattice lat = cfg.lattice();
  const SpectralVectorField f = random_bandpass_forcing(lat, cfg.forcing());
  build_for(cfg, f, out);
  return out;
}

std::string heat_csv(const HeatEnvelopeReport& r) {
  std::string s = "t,measured,paper_bound,exact_bound,holds,paper_holds\n";
  for (std::size_t i = 0; i < r.times.size(); ++i)
    s += fmt17(r.times[i]) + "," + fmt17(r.measured[i]) + "," + fmt17(r.paper_bound[i]) + "," +
         fmt17(r.exact_bound[i]) + "," + (r.holds[i] ? "1" : "0") + "," +
         (r.paper_holds[i] ? "1" : "0") + "\n";
  return s;
}

CommandOutput cmd_decay(const ExperimentConfig& cfg) {
  CommandOutput out;
  const Lattice lat = cfg.lattice();
  const SpectralVectorField f = random_bandpass_forcing(lat, cfg.forcing());
  const BuildResult built = build_for(cfg, f, out);

  std::vector<double> times;
  for (int i = 0; i < 50; ++i) times.push_back(cfg.evolution.horizon * i / 49.0);
  const HeatEnvelopeReport heat = heat_envelope_check(f, cfg.physics, times);
  out.checks.push_back(flag("heat_envelope_sharp", heat.all_hold(), "exp(-8 pi^2 nu rho^2 t)"));
  out.summary["heat_envelope_rho0_form_holds"] = heat.all_paper_hold();
  if (!heat.all_paper_hold())
    out.warnings.push_back("rho0-rate heat envelope exp(-2 nu rho0 t) fails at some sample");
  out.records.push_back({"heat_envelope.csv", heat_csv(heat)});

  const TrajectoryRecord traj =
      evolve_difference(built.field, f, cfg.physics, cfg.evolution, {.store_snapshots = false});
  out.records.push_back({"trajectory.csv", trajectory_csv(traj)});
  out.summary["steps"] = traj.steps;
  out.summary["final_l2_w"] = traj.l2.empty() ? 0.0 : traj.l2.back();

  if (f.is_zero() || built.field.is_zero()) {
    out.checks.push_back(at_most("zero_source_trajectory", traj.l2.empty() ? 0.0 : traj.l2.back(),
                                 0.0, "w stays identically zero"));
    return out;
  }
  std::vector<InequalityReport> reports;
  const double u_l2 = norm(built.field, NormKind::L2);
  const double fx = norm(f, NormKind::X);
  for (int m : cfg.bootstrap_m) {
    reports.push_back(
        check_bootstrap_inequality(traj, u_l2, fx, cfg.physics, m, cfg.calibration_fraction));
    reports.back().name += "_m" + std::to_string(m);
  }
  reports.push_back(check_decay_envelope(traj, cfg.calibration_fraction));
  json reps = json::array();
  for (const auto& r : reports) {
    CheckResult c{r.name, r.holds, r.relative_slack, -kInequalityTolerance, ""};
    c.detail = "C = " + fmt17(r.fitted_constant) + " from " +
               std::to_string(r.calibration_samples) + " calibration samples";
    out.checks.push_back(c);
    reps.push_back(to_json(r));
  }
  out.records.push_back({"inequalities.csv", summary_csv(reports)});
  out.records.push_back({"inequalities.json", reps.dump(2) + "\n"});
  return out;
}

CommandOutput cmd_stability(const ExperimentConfig& cfg) {
  CommandOutput out;
  const Lattice lat = cfg.lattice();
  const SpectralVectorField f = random_bandpass_forcing(lat, cfg.forcing());
  const BuildResult built = build_for(cfg, f, out);
  const auto& so = cfg.stability;

  SpectralVectorField w0 = random_band_field(lat, so.w0_lo, so.w0_hi, so.w0_seed);
  const double w0_l2 = norm(w0, NormKind::L2);
  const double target = so.w0_ratio * norm(built.field, NormKind::L2);
  if (w0_l2 > 0.0 && target > 0.0) {
    w0 *= target / w0_l2;
  } else {
    w0 = SpectralVectorField(lat);
  }
  out.records.push_back({"w0.ssns", bytes_of(encode_checkpoint(w0))});

  StabilityConfig sc;
  sc.evolution = cfg.evolution;
  sc.evolution.dt = so.dt;
  sc.evolution.horizon = so.horizon;
  sc.alpha = so.alpha;
  sc.decades = so.decades;
  sc.pairs = so.pairs;
  const StabilityRunRecord rec = stability_experiment(built.field, f, w0, cfg.physics, sc);
  out.records.push_back({"stability.csv", rec.to_csv()});
  for (const auto& w : rec.warnings) out.warnings.push_back(w);

  const double e0 = rec.pert_l2.empty() ? 0.0 : rec.pert_l2.front() * rec.pert_l2.front();
  const double e1 = rec.pert_l2.empty() ? 0.0 : rec.pert_l2.back() * rec.pert_l2.back();
  out.checks.push_back(at_most("monotonicity_violations", rec.monotonicity_violations, 0,
                               "per-step tolerance " + fmt17(rec.violation_tolerance)));
  out.checks.push_back(flag("perturbation_decayed", rec.success,
                            "final/initial L2 " + fmt17(e0 > 0 ? std::sqrt(e1 / e0) : 0.0)));
  if (e0 > 0.0) {
    out.checks.push_back(at_most("final_energy_ratio", e1 / e0, 1e-3));
    out.checks.push_back(at_most("split_low_fraction", rec.low_energy.back() / e0, 1e-6));
    out.checks.push_back(at_most("split_high_fraction", rec.high_energy.back() / e0, 1e-6));
  }
  out.summary["steps"] = rec.steps;
  out.summary["gate_value"] = rec.gate_value;
  out.summary["gate_passed"] = rec.gate_passed;
  out.summary["measured_production"] = rec.measured_production;
  out.summary["energy_balance_defect"] = rec.energy_balance_defect;

  if (!sc.pairs.empty() && e0 > 0.0) {
    const GeneralizedInequalityResult g =
        check_generalized_inequalities(rec, sc.pairs, sc.alpha, cfg.calibration_fraction);
    for (const InequalityReport* r : {&g.low, &g.high})
      out.checks.push_back({r->name, r->holds, r->relative_slack, -kInequalityTolerance,
                            std::to_string(r->lhs.size()) + " (s, t) pairs"});
    for (const InequalityReport* r : {&g.low_majorant, &g.high_majorant}) {
      out.summary[r->name + "_holds"] = r->holds;
      if (!r->holds)
        out.warnings.push_back(r->name + " with frozen constants fails (relative slack " +
                               fmt17(r->relative_slack) + ")");
    }
    out.records.push_back({"generalized.json", to_json(g).dump(2) + "\n"});
  }
  return out;
}

CommandOutput cmd_verify_bounds(const ExperimentConfig& cfg) {
  CommandOutput out;
  if (cfg.verify_checkpoint.empty())
    throw ConfigError("verify-bounds needs verify.checkpoint");
  const SpectralVectorField u = load_checkpoint(cfg.verify_checkpoint, cfg.dealias_fraction);
  const Lattice lat = u.lattice();
  if (lat.n() != cfg.n || lat.period() != cfg.period)
    throw ConfigError("checkpoint lattice (n = " + std::to_string(lat.n()) +
                      ") does not match lattice.n / lattice.period");
  const SpectralVectorField f = cfg.verify_forcing.empty()
                                    ? random_bandpass_forcing(lat, cfg.forcing())
                                    : load_checkpoint(cfg.verify_forcing, cfg.dealias_fraction);
  const double l2 = norm(u, NormKind::L2);
  const double h1 = norm(u, NormKind::H1dot);
  const double fx = norm(f, NormKind::X);
  const double bound = fx / cfg.physics.nu;
  const double residual = steady_residual(u, f, cfg.physics.nu);
  out.checks.push_back(at_most("energy_budget", l2, cfg.physics.m_energy * (1.0 + 1e-10)));
  out.checks.push_back(at_most("gradient_bound", h1, bound * (1.0 + 1e-10)));
  out.checks.push_back(at_most("steady_residual", residual, cfg.verify_residual));
  out.checks.push_back(at_most("divergence_ratio", divergence_ratio(u), 1e-12));
  out.summary["steady_l2"] = l2;
  out.summary["steady_h1dot"] = h1;
  out.summary["forcing_x_norm"] = fx;
  out.summary["residual"] = residual;
  return out;
}

RunManifest finish(const std::string& command, const ExperimentConfig& cfg,
                   const fs::path& out_dir, const std::string& started, CommandOutput out) {
  out.summary["command"] = command;
  out.records.push_back({"summary.json", summary_document(out)});
  RunManifest m = write_outputs(out.records, out_dir);
  m.command = command;
  m.config = cfg.echo();
  m.started = started;
  m.finished = utc_now();
  m.checks = std::move(out.checks);
  m.warnings = std::move(out.warnings);
  m.summary = std::move(out.summary);
  std::ofstream(out_dir / "manifest.json") << m.to_json().dump(2) << "\n";
  return m;
}

std::string rollup_csv(const std::vector<double>& values, const std::vector<RunManifest>& points) {
  std::string s = "index,value,passed,max_ratio,median_ratio,steady_h1dot,digest,error\n";
  for (std::size_t i = 0; i < points.size(); ++i) {
    const auto& p = points[i];
    auto num = [&](const char* key) {
      return p.summary.contains(key) ? fmt17(p.summary[key].get<double>()) : std::string();
    };
    std::string err = p.error;
    std::replace(err.begin(), err.end(), ',', ';');
    std::replace(err.begin(), err.end(), '\n', ' ');
    s += std::to_string(i) + "," + fmt17(values[i]) + "," + (p.passed() ? "1" : "0") + "," +
         num("max_ratio") + "," + num("median_ratio") + "," + num("steady_h1dot") + "," +
         p.digest + "," + err + "\n";
  }
  return s;
}

RunManifest run_sweep(const ExperimentConfig& cfg, const fs::path& out_dir, int workers,
                      const std::string& started) {
  const auto& values = cfg.sweep.values;
  if (values.empty()) throw ConfigError("sweep needs at least one entry in sweep.values");
  std::vector<RunManifest> points(values.size());
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < values.size(); i = next++) {
      char name[32];
      std::snprintf(name, sizeof name, "point_%03zu", i);
      RunManifest& p = points[i];
      p.command = cfg.sweep.command;
      try {
        ExperimentConfig point = cfg;
        set_config_value(point, cfg.sweep.key, fmt17(values[i]));
        p = run_command(cfg.sweep.command, point, out_dir / name, 1);
      } catch (const std::exception& e) {
        p.error = std::string(name) + " (" + cfg.sweep.key + " = " + fmt17(values[i]) +
                  "): " + e.what();
      }
    }
  };
  const int nthreads = std::max(1, std::min<int>(workers, static_cast<int>(values.size())));
  std::vector<std::thread> pool;
  for (int t = 1; t < nthreads; ++t) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();

  CommandOutput out;
  json rows = json::array();
  std::vector<double> xs, qs;
  json first_failing = nullptr;
  for (std::size_t i = 0; i < points.size(); ++i) {
    const auto& p = points[i];
    char name[32];
    std::snprintf(name, sizeof name, "point_%03zu", i);
    out.checks.push_back(flag(std::string(name), p.passed(), p.error));
    if (!p.passed() && first_failing.is_null()) first_failing = values[i];
    rows.push_back({{"index", i}, {"value", values[i]}, {"passed", p.passed()},
                    {"digest", p.digest}, {"error", p.error}, {"summary", p.summary}});
    if (p.summary.contains("median_ratio") && values[i] > 0.0) {
      const double q = p.summary["median_ratio"].get<double>();
      if (q > 0.0) {
        xs.push_back(values[i]);
        qs.push_back(q);
      }
    }
  }
  out.summary["key"] = cfg.sweep.key;
  out.summary["point_command"] = cfg.sweep.command;
  out.summary["points"] = rows;
  out.summary["first_failing_value"] = first_failing;
  if (xs.size() >= 2) out.summary["ratio_slope"] = loglog_slope(xs, qs);
  out.records.push_back({"sweep.csv", rollup_csv(values, points)});

  RunManifest m = finish("sweep", cfg, out_dir, started, std::move(out));
  // The roll-up digest also covers every point's artifacts.
  std::vector<Artifact> all = m.artifacts;
  for (std::size_t i = 0; i < points.size(); ++i) {
    char name[32];
    std::snprintf(name, sizeof name, "point_%03zu", i);
    for (const auto& a : points[i].artifacts)
      all.push_back({std::string(name) + "/" + a.path, a.sha256, a.bytes});
  }
  std::sort(all.begin(), all.end(),
            [](const Artifact& a, const Artifact& b) { return a.path < b.path; });
  std::string listing;
  for (const auto& a : all) listing += a.path + " " + a.sha256 + "\n";
  m.artifacts = std::move(all);
  m.digest = sha256_hex(listing);
  std::ofstream(out_dir / "manifest.json") << m.to_json().dump(2) << "\n";
  return m;
}

}  // namespace

bool RunManifest::passed() const {
  if (!error.empty()) return false;
  return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.passed; });
}

json RunManifest::to_json() const {
  json j;
  j["command"] = command;
  j["tool_version"] = tool_version;
  j["config"] = config;
  j["started"] = started;
  j["finished"] = finished;
  j["passed"] = passed();
  j["checks"] = json::array();
  for (const auto& c : checks) j["checks"].push_back(check_json(c));
  j["artifacts"] = json::array();
  for (const auto& a : artifacts)
    j["artifacts"].push_back({{"path", a.path}, {"sha256", a.sha256}, {"bytes", a.bytes}});
  j["digest"] = digest;
  j["warnings"] = warnings;
  j["summary"] = summary;
  if (!error.empty()) j["error"] = error;
  return j;
}

std::string sha256_hex(const std::string& bytes) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1)
    throw Error("SHA-256 computation failed");
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[md[i] >> 4];
    out += hex[md[i] & 15];
  }
  return out;
}

RunManifest write_outputs(const std::vector<OutputRecord>& records, const fs::path& out_dir) {
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create " + out_dir.string() + ": " + ec.message());
  RunManifest m;
  for (const auto& r : records) {
    const fs::path path = out_dir / r.path;
    fs::create_directories(path.parent_path(), ec);
    if (ec) throw IoError("cannot create " + path.parent_path().string() + ": " + ec.message());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out.write(r.bytes.data(), static_cast<std::streamsize>(r.bytes.size()));
    if (!out) throw IoError("cannot write " + path.string());
    m.artifacts.push_back({r.path, sha256_hex(r.bytes), r.bytes.size()});
  }
  std::sort(m.artifacts.begin(), m.artifacts.end(),
            [](const Artifact& a, const Artifact& b) { return a.path < b.path; });
  std::string listing;
  for (const auto& a : m.artifacts) listing += a.path + " " + a.sha256 + "\n";
  m.digest = sha256_hex(listing);
  return m;
}

RunManifest run_command(const std::string& command, const ExperimentConfig& cfg,
                        const fs::path& out_dir, int workers) {
  const std::string started = utc_now();
  if (command == "sweep") return run_sweep(cfg, out_dir, workers, started);
  CommandOutput out;
  if (command == "build-steady") {
    out = cmd_build_steady(cfg);
  } else if (command == "decay") {
    out = cmd_decay(cfg);
  } else if (command == "stability") {
    out = cmd_stability(cfg);
  } else if (command == "verify-bounds") {
    out = cmd_verify_bounds(cfg);
  } else {
    throw ConfigError("unknown command '" + command +
                      "' (expected build-steady|decay|stability|verify-bounds|sweep)");
  }
  return finish(command, cfg, out_dir, started, std::move(out));
}

json stdout_summary(const RunManifest& m, const fs::path& out_dir) {
  json j;
  j["command"] = m.command;
  j["passed"] = m.passed();
  j["out_dir"] = out_dir.string();
  j["manifest"] = (out_dir / "manifest.json").string();
  j["digest"] = m.digest;
  j["checks"] = json::array();
  for (const auto& c : m.checks)
    j["checks"].push_back({{"name", c.name}, {"passed", c.passed}, {"value", c.value}});
  j["warnings"] = m.warnings;
  if (!m.error.empty()) j["error"] = m.error;
  return j;
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2)
    throw PreconditionError("loglog_slope needs two or more paired samples");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = static_cast<double>(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0))
      throw PreconditionError("loglog_slope needs positive samples");
    const double lx = std::log(x[i]), ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  const double den = n * sxx - sx * sx;
  if (den == 0.0) throw PreconditionError("loglog_slope needs distinct abscissae");
  return (n * sxy - sx * sy) / den;
}

}  // namespace steadylab
