#pragma once

#include <cstddef>
#include <iosfwd>
#include <limits>
#include <optional>
#include <vector>

#include "ggflow/semiconcave.hpp"
#include "ggflow/torus_grid.hpp"
#include "ggflow/weak_kam.hpp"

namespace ggflow {

inline constexpr double kInfiniteTime = std::numeric_limits<double>::infinity();

struct FlowOptions {
  double dt = 1e-3;
  double horizon = 1.0;
  /// Keep every k-th accepted step; event samples are always kept.
  int record_every = 1;
  /// When set, integrates ẋ = A(x) p_A(x) instead of ẋ = p₀(x).
  std::optional<MetricField> metric;
  /// Critical threshold for |p|; 10/n when absent.
  std::optional<double> tol_crit;
  /// Local step reductions allowed on a direction reversal (dt / 2^k).
  int max_halvings = 6;
  /// Steps inspected by the stagnation test.
  int stagnation_window = 10;
};

/// Time-stamped samples of the generalized gradient flow.
struct Trajectory {
  std::vector<double> times;
  std::vector<TorusPoint> points;
  /// |p₀| (or |p_A| for the weighted flow) at each sample.
  std::vector<double> p0_norms;
  std::vector<double> u_values;
  /// Right derivative of t -> u(x(t)): |p₀|² or <A p_A, p_A>.
  std::vector<double> rates;

  double dt = 0.0;
  double horizon = 0.0;
  /// Came to rest at non-vanishing speed (finite-time arrival).
  bool absorbed = false;
  double absorption_time = kInfiniteTime;
  /// Came to rest with vanishing speed; the discrete map reached a fixed point.
  bool stalled = false;
  /// Started at a point with |p| <= tol_crit.
  bool stationary_start = false;
  std::size_t steps = 0;

  std::size_t size() const { return times.size(); }
  const TorusPoint& endpoint() const { return points.back(); }
};

/// Explicit forward stepping x ← x + dt·p₀(x). Direction reversals (a kink
/// crossed) or a decrease of u shrink the local step down to dt/2^max_halvings;
/// below that the step lands on the maximizer of u along the segment. The flow
/// stops when it reaches a point with vanishing selection, or when the net
/// displacement over the stagnation window of a chattering run stays below
/// dt·tol_crit; the remaining horizon is then a constant continuation.
/// Throws InvalidInput for bad options, BudgetError when horizon/dt > 1e8,
/// NumericalError on non-finite values.
Trajectory integrate(const ValueFunction& u, const TorusPoint& x0, const FlowOptions& opts);

/// Time at which the flow reaches Crit(u): 0 for a critical start, the refined
/// arrival time for an absorbed trajectory, kInfiniteTime otherwise.
double critical_time(const Trajectory& traj, const ValueFunction& u, const Potential& v, double alpha0,
                     const Tolerances& tols);

/// |u(x(T)) - u(x(0)) - ∫ rate dt| with the trapezoid rule over the samples.
double energy_residual(const Trajectory& traj);

/// Columns t, x_1[, x_2], p0_norm, u, d_crit, d_sing at 12 significant digits.
void write_trajectory_csv(std::ostream& out, const Trajectory& traj, const CriticalSets& sets);

}  // namespace ggflow
