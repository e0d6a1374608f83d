#pragma once

#include <array>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ggflow/potential.hpp"
#include "ggflow/torus_grid.hpp"

namespace ggflow {

enum class Provenance { ClosedForm, DistanceLike, LaxOleinik };

std::string_view to_string(Provenance p);
Provenance provenance_from_string(std::string_view s);

/// Semiconcave candidate solution u sampled on a periodic grid.
///
/// Besides the nodal values, the constructor builds a slope-limited
/// piecewise-quadratic reconstruction along every axis: in each cell the
/// derivative is the cell secant plus a linear correction whose curvature is
/// the minmod of the two adjacent second differences. The limiter drops the
/// correction next to kinks, so one-sided derivatives at a kink node are read
/// from data on that side only. In d = 1 `value_at` and `gradient_at` use this
/// reconstruction (the derivative of `value_at` is exactly `gradient_at`); in
/// d = 2 values are bilinear and gradients are bilinear blends of nodal
/// gradients.
class ValueFunction {
 public:
  ValueFunction(PeriodicGrid grid, Provenance provenance);

  const PeriodicGrid& grid() const { return grid_; }
  int dim() const { return grid_.dim(); }
  int n() const { return grid_.n(); }
  double spacing() const { return grid_.spacing(); }
  Provenance provenance() const { return provenance_; }

  /// Smallest C with u(x-h) + u(x+h) - 2u(x) <= C h² on every axis.
  double semiconcavity_constant() const { return semiconcavity_; }
  /// Largest one-sided derivative magnitude.
  double lipschitz_constant() const { return lipschitz_; }

  double value_at(const TorusPoint& x) const;

  /// Right (forward) one-sided derivative at node k along an axis.
  double right_derivative(std::size_t k, int axis) const;
  /// Left (backward) one-sided derivative at node k along an axis.
  double left_derivative(std::size_t k, int axis) const;

  /// All axes have |left - right| <= threshold.
  bool differentiable_at_node(std::size_t k, double threshold) const;
  /// Mean of the one-sided derivatives.
  SmallVec node_gradient(std::size_t k) const;

  /// Reconstructed gradient at a point where u is treated as differentiable.
  SmallVec gradient_at(const TorusPoint& x) const;

  /// Exact node test: x coincides with a grid node up to 1e-9 cells in every coordinate.
  std::optional<std::size_t> node_at(const TorusPoint& x) const;

  ValueFunction normalized() const;

  /// `# dim,n,provenance` then one value per line, row-major.
  void write_csv(std::ostream& out) const;
  static ValueFunction read_csv(std::istream& in);

 private:
  std::size_t step(std::size_t k, int axis, int delta) const;

  PeriodicGrid grid_;
  Provenance provenance_;
  double semiconcavity_ = 0.0;
  double lipschitz_ = 0.0;
  // Per axis, indexed by the flat index of the cell's lower node.
  std::array<std::vector<double>, 2> slope_;
  std::array<std::vector<double>, 2> curvature_;
};

/// Closed-form solutions: "pendulum", "degenerate", and the separable "pendulum2d".
ValueFunction builtin_solution(std::string_view name, int n);

/// d = 1: u(x) = min over x* in M(V) of the shorter arc integral of sqrt(2(α0 - V)).
ValueFunction solve_distance_like(const Potential& v, double alpha0, int n);

struct LaxOleinikOptions {
  double dt = 0.005;
  int max_iter = 20000;
  double tol = 1e-8;
  /// Initial iterate; zero when absent.
  std::optional<PeriodicGrid> initial;
};

struct LaxOleinikStats {
  int iterations = 0;
  double residual = 0.0;
};

/// Fixed point of u <- min_y [u(y) - ½dt V(y) + |x-y|²/(2dt)] - ½dt V(x) + dt α0, normalized to min u = 0.
/// Throws ConvergenceError when max_iter is exhausted.
ValueFunction solve_lax_oleinik(const Potential& v, double alpha0, int n, const LaxOleinikOptions& opts = {},
                                LaxOleinikStats* stats = nullptr);

struct ViscosityTolerances {
  double tol_eq = 1e-3;
  double tol_sub = 1e-3;
  /// Jump of one-sided derivatives above which a node counts as a kink; 10/n when absent.
  std::optional<double> kink_threshold;
};

struct ViscosityReport {
  /// max |½|Du|² + V - α0| over differentiable nodes.
  double equation_residual = 0.0;
  /// max (½|p|² + V - α0)⁺ over extreme points of D⁺u at kink nodes.
  double subsolution_violation = 0.0;
  double semiconcavity_constant = 0.0;
  std::size_t differentiable_nodes = 0;
  std::size_t kink_nodes = 0;
  /// Kink nodes with a convex corner; a semiconcave solution has none.
  std::size_t convex_kinks = 0;
  bool passed = false;
};

ViscosityReport verify_viscosity(const ValueFunction& u, const Potential& v, double alpha0,
                                 const ViscosityTolerances& tols = {});

}  // namespace ggflow
