#include "config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace ggflow::cli {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) out.push_back(trim(cur));
  return out;
}

double to_double(const std::string& key, const std::string& v) {
  double x = 0.0;
  const auto* end = v.data() + v.size();
  const auto [p, ec] = std::from_chars(v.data(), end, x);
  if (ec != std::errc() || p != end || !std::isfinite(x)) throw UsageError(key + ": not a finite number: '" + v + "'");
  return x;
}

long long to_int(const std::string& key, const std::string& v) {
  long long x = 0;
  const auto* end = v.data() + v.size();
  const auto [p, ec] = std::from_chars(v.data(), end, x);
  if (ec != std::errc() || p != end) throw UsageError(key + ": not an integer: '" + v + "'");
  return x;
}

std::vector<double> to_list(const std::string& key, const std::string& v) {
  std::vector<double> out;
  for (const auto& t : split(v, ',')) {
    if (t.empty()) throw UsageError(key + ": empty list entry");
    out.push_back(to_double(key, t));
  }
  return out;
}

double positive(const std::string& key, double x) {
  if (!(x > 0.0)) throw UsageError(key + " must be positive");
  return x;
}

}  // namespace

std::string to_string(SolverKind s) {
  switch (s) {
    case SolverKind::Builtin:
      return "builtin";
    case SolverKind::Distance:
      return "distance";
    case SolverKind::LaxOleinik:
      return "laxoleinik";
  }
  return "?";
}

std::vector<std::vector<double>> parse_points(const std::string& text, int dim) {
  std::vector<std::vector<double>> pts;
  for (const auto& chunk : split(text, ';')) {
    if (chunk.empty()) continue;
    std::vector<double> c = to_list("point", chunk);
    if (dim == 1) {
      for (const double x : c) pts.push_back({x});
    } else {
      if (c.size() != 2) throw UsageError("2-D point needs two coordinates: '" + chunk + "'");
      pts.push_back(std::move(c));
    }
  }
  return pts;
}

ExperimentConfig parse_config(std::istream& in) {
  ExperimentConfig cfg;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw UsageError("line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string val = trim(line.substr(eq + 1));
    if (key.empty() || val.empty()) throw UsageError("line " + std::to_string(lineno) + ": empty key or value");
    if (cfg.raw.count(key)) throw UsageError("line " + std::to_string(lineno) + ": duplicate key " + key);
    cfg.raw[key] = val;
  }

  // Points need the dimension, which is only known once the potential is loaded.
  for (const auto& [key, val] : cfg.raw) {
    if (key == "potential.name") {
      cfg.potential_name = val;
    } else if (key == "potential.file") {
      cfg.potential_file = val;
    } else if (key == "solver") {
      if (val == "builtin") {
        cfg.solver = SolverKind::Builtin;
      } else if (val == "distance") {
        cfg.solver = SolverKind::Distance;
      } else if (val == "laxoleinik") {
        cfg.solver = SolverKind::LaxOleinik;
      } else {
        throw UsageError("solver must be builtin, distance or laxoleinik");
      }
    } else if (key == "solver.dt") {
      cfg.solver_dt = positive(key, to_double(key, val));
    } else if (key == "solver.max_iter") {
      cfg.solver_max_iter = static_cast<int>(positive(key, static_cast<double>(to_int(key, val))));
    } else if (key == "solver.tol") {
      cfg.solver_tol = positive(key, to_double(key, val));
    } else if (key == "grid.n") {
      cfg.grid_n = static_cast<int>(to_int(key, val));
    } else if (key == "flow.dt") {
      cfg.flow_dt = positive(key, to_double(key, val));
    } else if (key == "flow.t_max") {
      cfg.flow_t_max = positive(key, to_double(key, val));
    } else if (key == "flow.record_every") {
      cfg.flow_record_every = static_cast<int>(positive(key, static_cast<double>(to_int(key, val))));
    } else if (key == "flow.metric") {
      cfg.flow_metric = to_list(key, val);
    } else if (key == "flow.x0" || key == "sweep.x0_list") {
      // Resolved below.
    } else if (key == "schedule") {
      cfg.schedule = to_list(key, val);
    } else if (key == "tol.crit") {
      cfg.tol_crit = positive(key, to_double(key, val));
    } else if (key == "tol.sing") {
      cfg.tol_sing = positive(key, to_double(key, val));
    } else if (key == "tol.gap") {
      cfg.tol_gap = positive(key, to_double(key, val));
    } else if (key == "tol.v") {
      cfg.tol_v = positive(key, to_double(key, val));
    } else if (key == "tol.weak") {
      cfg.tol_weak = positive(key, to_double(key, val));
    } else if (key == "classify.epsilon") {
      cfg.epsilon = positive(key, to_double(key, val));
    } else if (key == "moments.K") {
      cfg.moments_k = static_cast<int>(positive(key, static_cast<double>(to_int(key, val))));
    } else if (key == "moments.normalization") {
      if (val == "lipschitz") {
        cfg.moments_norm = MomentDictionary::Normalization::Lipschitz;
      } else if (val == "unit") {
        cfg.moments_norm = MomentDictionary::Normalization::Unit;
      } else {
        throw UsageError("moments.normalization must be lipschitz or unit");
      }
    } else if (key == "sweep.count") {
      cfg.sweep_count = static_cast<int>(to_int(key, val));
      if (cfg.sweep_count < 0) throw UsageError("sweep.count must be nonnegative");
    } else if (key == "sweep.threads") {
      cfg.sweep_threads = static_cast<int>(to_int(key, val));
      if (cfg.sweep_threads < 0) throw UsageError("sweep.threads must be nonnegative");
    } else if (key == "lemma.cases") {
      cfg.lemma_cases = static_cast<int>(positive(key, static_cast<double>(to_int(key, val))));
    } else if (key == "seed") {
      const long long s = to_int(key, val);
      if (s < 0) throw UsageError("seed must be nonnegative");
      cfg.seed = static_cast<std::uint64_t>(s);
    } else if (key == "output.dir") {
      cfg.output_dir = val;
    } else {
      throw UsageError("unknown key: " + key);
    }
  }

  if (cfg.potential_name.has_value() == cfg.potential_file.has_value()) {
    throw UsageError("exactly one of potential.name and potential.file is required");
  }
  if (cfg.grid_n < 64) throw UsageError("grid.n must be at least 64");
  if (cfg.flow_dt > 0.01) throw UsageError("flow.dt must lie in (0, 0.01]");
  if (cfg.schedule.size() < 3) throw UsageError("schedule needs at least three horizons");
  for (std::size_t i = 0; i < cfg.schedule.size(); ++i) {
    if (!(cfg.schedule[i] > 0.0) || (i > 0 && !(cfg.schedule[i] > cfg.schedule[i - 1]))) {
      throw UsageError("schedule must be positive and increasing");
    }
  }
  if (cfg.flow_metric && cfg.flow_metric->size() != 1 && cfg.flow_metric->size() != 3) {
    throw UsageError("flow.metric takes a11 or a11, a12, a22");
  }
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open config " + path.string());
  return parse_config(in);
}

}  // namespace ggflow::cli
