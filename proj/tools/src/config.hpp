#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "ggflow/measures.hpp"
#include "ggflow/torus_grid.hpp"
#include "ggflow/vec.hpp"

namespace ggflow::cli {

/// Malformed or inconsistent configuration; maps to exit status 2.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class SolverKind { Builtin, Distance, LaxOleinik };

std::string to_string(SolverKind s);

/// Experiment settings read from a flat `key = value` file.
///
///   # comment
///   potential.name = pendulum
///   grid.n = 1024
///   flow.x0 = 0.1, 0.25        # 1-D: ',' or ';' between points
///   flow.x0 = 0.1,0.2; 0.3,0.4 # 2-D: ';' between points
struct ExperimentConfig {
  std::optional<std::string> potential_name;
  std::optional<std::filesystem::path> potential_file;
  SolverKind solver = SolverKind::Builtin;
  double solver_dt = 0.005;
  int solver_max_iter = 20000;
  double solver_tol = 1e-8;
  int grid_n = 1024;

  double flow_dt = 1e-3;
  double flow_t_max = 1.0;
  int flow_record_every = 1;
  std::vector<std::vector<double>> flow_x0;
  /// Constant metric A for the weighted flow: a11[, a12, a22].
  std::optional<std::vector<double>> flow_metric;

  std::vector<double> schedule{10.0, 100.0, 1000.0};
  std::optional<double> tol_crit;
  std::optional<double> tol_sing;
  std::optional<double> tol_gap;
  std::optional<double> tol_v;
  double tol_weak = 1e-3;
  double epsilon = 0.05;
  int moments_k = 8;
  MomentDictionary::Normalization moments_norm = MomentDictionary::Normalization::Lipschitz;

  std::vector<std::vector<double>> sweep_x0;
  int sweep_count = 0;
  int sweep_threads = 0;

  int lemma_cases = 1000;
  std::uint64_t seed = 0;
  std::filesystem::path output_dir = "out";

  /// Keys set in the file, for the manifest.
  std::map<std::string, std::string> raw;
};

/// Throws UsageError with the offending line on any problem.
ExperimentConfig parse_config(std::istream& in);
ExperimentConfig load_config(const std::filesystem::path& path);

/// Points separated by ';' (and by ',' when dim == 1).
std::vector<std::vector<double>> parse_points(const std::string& text, int dim);

}  // namespace ggflow::cli
