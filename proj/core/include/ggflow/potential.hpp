#pragma once

#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ggflow/torus_grid.hpp"
#include "ggflow/vec.hpp"

namespace ggflow {

/// Exact values known in closed form for registered potentials.
struct PotentialMetadata {
  std::optional<double> alpha0;
  std::optional<std::vector<TorusPoint>> argmax;
  std::optional<double> oscillation;
};

/// A C^2 potential V on T^d together with its gradient.
class Potential {
 public:
  using Evaluator = std::function<double(const TorusPoint&)>;
  using GradientFn = std::function<SmallVec(const TorusPoint&)>;

  Potential(std::string name, int dim, Evaluator value, GradientFn gradient,
            PotentialMetadata metadata = {});

  /// "pendulum" (cos 2πx), "degenerate" (-sin² 2πx), "pendulum2d" (cos 2πx₁ + cos 2πx₂).
  static Potential registered(std::string_view name);
  static std::vector<std::string> registered_names();

  static Potential constant(int dim, double c);

  /// Potential given by nodal values, evaluated by multilinear interpolation.
  static Potential tabulated(std::string name, PeriodicGrid values);

  /// Reads `# dim,n` followed by one value per line, row-major.
  static Potential load_csv(const std::filesystem::path& path);

  /// V + c, metadata shifted accordingly.
  Potential shifted(double c) const;

  const std::string& name() const { return name_; }
  int dim() const { return dim_; }
  const PotentialMetadata& metadata() const { return metadata_; }

  double value(const TorusPoint& x) const { return value_(x); }
  SmallVec gradient(const TorusPoint& x) const { return gradient_(x); }

  /// Nodal samples on an n-grid.
  PeriodicGrid sample(int n) const;

 private:
  std::string name_;
  int dim_;
  Evaluator value_;
  GradientFn gradient_;
  PotentialMetadata metadata_;
};

/// α[0] = max V, from a grid scan at resolution n (n ≥ 64) refined by gradient ascent.
double critical_constant(const Potential& v, int n);

/// max V - min V over the refined grid.
double oscillation(const Potential& v, int n);

/// The maximizer set M(V), one representative per cluster.
struct ArgmaxSet {
  std::vector<TorusPoint> points;
  /// Every grid node qualified (V is constant within tolerance).
  bool whole_torus = false;

  double distance(const TorusPoint& x) const;
};

/// Points with V ≥ alpha0 - tol, clustered with radius cluster_cells/n.
/// Throws InternalError when nothing qualifies.
ArgmaxSet argmax_set(const Potential& v, int n, double tol, double alpha0, double cluster_cells = 2.0);

}  // namespace ggflow
