#include "steadylab/config.hpp"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

#include "steadylab/error.hpp"
#include "steadylab/format.hpp"

namespace steadylab {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, sep)) out.push_back(trim(item));
  return out;
}

double to_double(const std::string& key, const std::string& v) {
  errno = 0;
  char* end = nullptr;
  const double x = std::strtod(v.c_str(), &end);
  if (v.empty() || *end != '\0' || errno == ERANGE || !std::isfinite(x))
    throw ConfigError(key + ": expected a finite number, got '" + v + "'");
  return x;
}

long long to_integer(const std::string& key, const std::string& v) {
  errno = 0;
  char* end = nullptr;
  const long long x = std::strtoll(v.c_str(), &end, 10);
  if (v.empty() || *end != '\0' || errno == ERANGE)
    throw ConfigError(key + ": expected an integer, got '" + v + "'");
  return x;
}

int to_int(const std::string& key, const std::string& v) {
  const long long x = to_integer(key, v);
  if (x < -2147483647LL || x > 2147483647LL) throw ConfigError(key + ": integer out of range");
  return static_cast<int>(x);
}

std::uint64_t to_seed(const std::string& key, const std::string& v) {
  const long long x = to_integer(key, v);
  if (x < 0) throw ConfigError(key + ": seed must be non-negative");
  return static_cast<std::uint64_t>(x);
}

std::string join_doubles(const std::vector<double>& xs) {
  std::string out;
  for (std::size_t i = 0; i < xs.size(); ++i) out += (i ? "," : "") + fmt17(xs[i]);
  return out;
}

struct Entry {
  std::function<void(ExperimentConfig&, const std::string&)> set;
  std::function<std::string(const ExperimentConfig&)> get;
};

const std::map<std::string, Entry>& table() {
  using C = ExperimentConfig;
  static const std::map<std::string, Entry> t = [] {
    std::map<std::string, Entry> m;
    auto real = [&m](const std::string& key, auto access) {
      m[key] = {[key, access](C& c, const std::string& v) { access(c) = to_double(key, v); },
                [access](const C& c) { return fmt17(access(const_cast<C&>(c))); }};
    };
    auto integer = [&m](const std::string& key, auto access) {
      m[key] = {[key, access](C& c, const std::string& v) { access(c) = to_int(key, v); },
                [access](const C& c) { return std::to_string(access(const_cast<C&>(c))); }};
    };
    auto seed = [&m](const std::string& key, auto access) {
      m[key] = {[key, access](C& c, const std::string& v) { access(c) = to_seed(key, v); },
                [access](const C& c) { return std::to_string(access(const_cast<C&>(c))); }};
    };
    auto text = [&m](const std::string& key, auto access) {
      m[key] = {[access](C& c, const std::string& v) { access(c) = v; },
                [access](const C& c) { return access(const_cast<C&>(c)); }};
    };

    integer("lattice.n", [](C& c) -> int& { return c.n; });
    real("lattice.period", [](C& c) -> double& { return c.period; });
    real("lattice.dealias_fraction", [](C& c) -> double& { return c.dealias_fraction; });
    real("physics.nu", [](C& c) -> double& { return c.physics.nu; });
    real("physics.rho0", [](C& c) -> double& { return c.physics.rho0; });
    real("physics.m_energy", [](C& c) -> double& { return c.physics.m_energy; });
    real("forcing.rho1", [](C& c) -> double& { return c.rho1; });
    real("forcing.amplitude", [](C& c) -> double& { return c.amplitude; });
    seed("seed", [](C& c) -> std::uint64_t& { return c.seed; });
    real("evolution.dt", [](C& c) -> double& { return c.evolution.dt; });
    real("evolution.horizon", [](C& c) -> double& { return c.evolution.horizon; });
    real("evolution.tail_tolerance", [](C& c) -> double& { return c.evolution.tail_tolerance; });
    integer("evolution.snapshot_stride", [](C& c) -> int& { return c.evolution.snapshot_stride; });
    real("evolution.cfl", [](C& c) -> double& { return c.evolution.cfl; });
    m["builder.route"] = {
        [](C& c, const std::string& v) {
          try {
            c.route = parse_route(v);
          } catch (const PreconditionError& e) {
            throw ConfigError(std::string("builder.route: ") + e.what());
          }
        },
        [](const C& c) { return to_string(c.route); }};
    real("builder.tol_outer", [](C& c) -> double& { return c.tol_outer; });
    real("builder.tol_inner", [](C& c) -> double& { return c.tol_inner; });
    integer("builder.max_outer", [](C& c) -> int& { return c.max_outer; });
    integer("builder.max_inner", [](C& c) -> int& { return c.max_inner; });
    m["decay.m"] = {[](C& c, const std::string& v) {
                      c.bootstrap_m.clear();
                      for (const auto& item : split(v, ','))
                        c.bootstrap_m.push_back(to_int("decay.m", item));
                    },
                    [](const C& c) {
                      std::string out;
                      for (std::size_t i = 0; i < c.bootstrap_m.size(); ++i)
                        out += (i ? "," : "") + std::to_string(c.bootstrap_m[i]);
                      return out;
                    }};
    real("decay.calibration_fraction", [](C& c) -> double& { return c.calibration_fraction; });
    real("stability.alpha", [](C& c) -> double& { return c.stability.alpha; });
    real("stability.decades", [](C& c) -> double& { return c.stability.decades; });
    real("stability.w0_ratio", [](C& c) -> double& { return c.stability.w0_ratio; });
    real("stability.w0_lo", [](C& c) -> double& { return c.stability.w0_lo; });
    real("stability.w0_hi", [](C& c) -> double& { return c.stability.w0_hi; });
    seed("stability.w0_seed", [](C& c) -> std::uint64_t& { return c.stability.w0_seed; });
    real("stability.dt", [](C& c) -> double& { return c.stability.dt; });
    real("stability.horizon", [](C& c) -> double& { return c.stability.horizon; });
    m["stability.pairs"] = {
        [](C& c, const std::string& v) {
          c.stability.pairs.clear();
          for (const auto& item : split(v, ',')) {
            const auto ends = split(item, ':');
            if (ends.size() != 2)
              throw ConfigError("stability.pairs: expected s:t entries, got '" + item + "'");
            c.stability.pairs.emplace_back(to_double("stability.pairs", ends[0]),
                                           to_double("stability.pairs", ends[1]));
          }
        },
        [](const C& c) {
          std::string out;
          for (std::size_t i = 0; i < c.stability.pairs.size(); ++i)
            out += (i ? "," : "") + fmt17(c.stability.pairs[i].first) + ":" +
                   fmt17(c.stability.pairs[i].second);
          return out;
        }};
    text("verify.checkpoint", [](C& c) -> std::string& { return c.verify_checkpoint; });
    text("verify.forcing", [](C& c) -> std::string& { return c.verify_forcing; });
    real("verify.residual", [](C& c) -> double& { return c.verify_residual; });
    text("sweep.command", [](C& c) -> std::string& { return c.sweep.command; });
    text("sweep.key", [](C& c) -> std::string& { return c.sweep.key; });
    m["sweep.values"] = {[](C& c, const std::string& v) {
                           c.sweep.values.clear();
                           if (v.empty()) return;
                           for (const auto& item : split(v, ','))
                             c.sweep.values.push_back(to_double("sweep.values", item));
                         },
                         [](const C& c) { return join_doubles(c.sweep.values); }};
    return m;
  }();
  return t;
}

// Words people reach for instead of the accepted key names.
const std::map<std::string, std::string>& synonyms() {
  static const std::map<std::string, std::string> s = {
      {"viscosity", "physics.nu"},       {"nu", "physics.nu"},
      {"resolution", "lattice.n"},       {"grid", "lattice.n"},
      {"n", "lattice.n"},                {"box", "lattice.period"},
      {"length", "lattice.period"},      {"dealias", "lattice.dealias_fraction"},
      {"rho0", "physics.rho0"},          {"gap", "physics.rho0"},
      {"rho1", "forcing.rho1"},          {"amplitude", "forcing.amplitude"},
      {"forcing", "forcing.amplitude"},  {"budget", "physics.m_energy"},
      {"dt", "evolution.dt"},            {"timestep", "evolution.dt"},
      {"horizon", "evolution.horizon"},  {"alpha", "stability.alpha"},
      {"m", "decay.m"},                  {"route", "builder.route"},
      {"tolerance", "builder.tol_outer"}, {"pairs", "stability.pairs"},
  };
  return s;
}

std::size_t edit_distance(const std::string& a, const std::string& b) {
  std::vector<std::size_t> row(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) row[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    std::size_t diag = row[0];
    row[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t up = row[j];
      row[j] = std::min({row[j] + 1, row[j - 1] + 1, diag + (a[i - 1] == b[j - 1] ? 0 : 1)});
      diag = up;
    }
  }
  return row[b.size()];
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
  return s;
}

void validate(const ExperimentConfig& c) {
  try {
    (void)c.lattice();
  } catch (const PreconditionError& e) {
    throw ConfigError(std::string("lattice: ") + e.what());
  }
  try {
    c.physics.validate();
  } catch (const PreconditionError& e) {
    throw ConfigError(std::string("PhysicalParams: ") + e.what());
  }
  try {
    c.forcing().validate();
  } catch (const PreconditionError& e) {
    throw ConfigError(std::string("invariant violated: ") + e.what() + " (physics.rho0 = " +
                      fmt17(c.physics.rho0) + ", forcing.rho1 = " + fmt17(c.rho1) + ")");
  }
  try {
    c.evolution.validate();
  } catch (const PreconditionError& e) {
    throw ConfigError(std::string("EvolutionConfig: ") + e.what());
  }
  if (!(c.tol_outer > 0.0) || !(c.tol_inner > 0.0))
    throw ConfigError("builder: tolerances must be positive");
  if (c.max_outer < 1 || c.max_inner < 1)
    throw ConfigError("builder: iteration limits must be at least 1");
  if (c.bootstrap_m.empty()) throw ConfigError("decay.m: at least one exponent is required");
  for (int m : c.bootstrap_m)
    if (m < 4) throw ConfigError("decay.m: bootstrap exponents must be at least 4");
  if (!(c.calibration_fraction > 0.0) || !(c.calibration_fraction < 1.0))
    throw ConfigError("decay.calibration_fraction must lie in (0, 1)");
  const auto& s = c.stability;
  if (!(s.alpha > 3.0)) throw ConfigError("stability.alpha must exceed 3");
  if (!(s.decades > 0.0)) throw ConfigError("stability.decades must be positive");
  if (!(s.w0_ratio >= 0.0)) throw ConfigError("stability.w0_ratio must be non-negative");
  if (!(s.w0_lo >= 0.0) || !(s.w0_hi > s.w0_lo))
    throw ConfigError("stability: need 0 <= w0_lo < w0_hi");
  if (!(s.dt > 0.0) || !(s.horizon >= s.dt))
    throw ConfigError("stability: need dt > 0 and horizon >= dt");
  for (const auto& [a, b] : s.pairs)
    if (!(a >= 0.0) || !(b > a)) throw ConfigError("stability.pairs: need 0 <= s < t");
  if (!(c.verify_residual > 0.0)) throw ConfigError("verify.residual must be positive");
  static const std::set<std::string> commands = {"build-steady", "decay", "stability",
                                                 "verify-bounds"};
  if (!commands.count(c.sweep.command))
    throw ConfigError("sweep.command must be one of build-steady|decay|stability|verify-bounds");
  if (!table().count(c.sweep.key) || c.sweep.key.rfind("sweep.", 0) == 0)
    throw ConfigError("sweep.key: '" + c.sweep.key + "' is not a sweepable key");
}

void assign(ExperimentConfig& cfg, const std::string& key, const std::string& value) {
  const auto it = table().find(key);
  if (it == table().end()) {
    std::string msg = "unknown key '" + key + "'";
    const std::string hint = suggest_key(key);
    if (!hint.empty()) msg += " (did you mean '" + hint + "'?)";
    throw ConfigError(msg);
  }
  try {
    it->second.set(cfg, value);
  } catch (const ConfigError& e) {
    const std::string what = e.what();
    if (what.rfind(key, 0) == 0) throw;
    throw ConfigError(key + ": " + what);
  }
}

}  // namespace

ForcingSpec ExperimentConfig::forcing() const {
  return ForcingSpec{.rho0 = physics.rho0, .rho1 = rho1, .target_x_norm = amplitude,
                     .seed = seed};
}

BuildOptions ExperimentConfig::build_options() const {
  BuildOptions o;
  o.route = route;
  o.tol_outer = tol_outer;
  o.tol_inner = tol_inner;
  o.max_outer = max_outer;
  o.max_inner = max_inner;
  o.evolution = evolution;
  return o;
}

std::map<std::string, std::string> ExperimentConfig::echo() const {
  std::map<std::string, std::string> out;
  for (const auto& [key, entry] : table()) out[key] = entry.get(*this);
  return out;
}

std::string ExperimentConfig::to_text() const {
  std::string out;
  for (const auto& [key, value] : echo()) out += key + " = " + value + "\n";
  return out;
}

std::vector<std::string> config_keys() {
  std::vector<std::string> keys;
  for (const auto& [key, entry] : table()) keys.push_back(key);
  return keys;
}

std::string suggest_key(const std::string& key) {
  const std::string k = lower(key);
  std::string best;
  std::size_t best_d = std::string::npos;
  auto consider = [&](const std::string& candidate, const std::string& target) {
    const std::size_t d = edit_distance(k, candidate);
    if (d < best_d) {
      best_d = d;
      best = target;
    }
  };
  for (const auto& [name, entry] : table()) {
    consider(name, name);
    const auto dot = name.rfind('.');
    if (dot != std::string::npos) consider(name.substr(dot + 1), name);
  }
  for (const auto& [word, target] : synonyms()) consider(word, target);
  const auto dot = k.rfind('.');
  if (dot != std::string::npos) {
    const std::string leaf = k.substr(dot + 1);
    for (const auto& [word, target] : synonyms()) {
      const std::size_t d = edit_distance(leaf, word);
      if (d < best_d) {
        best_d = d;
        best = target;
      }
    }
  }
  const std::size_t limit = std::max<std::size_t>(2, k.size() / 3);
  return best_d <= limit ? best : std::string();
}

ExperimentConfig parse_config(const std::string& text) {
  ExperimentConfig cfg;
  std::set<std::string> seen;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError("line " + std::to_string(lineno) + ": empty key");
    if (!seen.insert(key).second) throw ConfigError("duplicate key '" + key + "'");
    assign(cfg, key, value);
  }
  validate(cfg);
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read config file " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

void set_config_value(ExperimentConfig& cfg, const std::string& key, const std::string& value) {
  assign(cfg, key, value);
  validate(cfg);
}

}  // namespace steadylab
