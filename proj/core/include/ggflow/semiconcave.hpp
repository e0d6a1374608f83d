#pragma once

#include <functional>
#include <span>
#include <string_view>
#include <vector>

#include "ggflow/potential.hpp"
#include "ggflow/torus_grid.hpp"
#include "ggflow/vec.hpp"
#include "ggflow/weak_kam.hpp"

namespace ggflow {

/// Convex polytope approximating D⁺u(x). In d = 1 it holds the interval
/// endpoints [u'₊, u'₋] (two vertices, possibly equal).
struct SuperdifferentialPolytope {
  std::vector<SmallVec> vertices;
  int dim = 1;

  double diameter() const;
  bool is_singleton(double tol) const { return diameter() <= tol; }
};

/// Tolerances shared by the point classifier and the flow.
struct Tolerances {
  double crit = 0.0;  ///< |p₀| at or below this counts as critical
  double sing = 0.0;  ///< D⁺u diameter above this counts as non-differentiable
  double gap = 0.0;   ///< singular when ½|p₀|² + V < α0 - gap

  /// 10/n, 20/n and 0.05·δ(V).
  static Tolerances defaults(int n, double oscillation);
};

/// Sampling radius used for 2-D hulls: 3h.
double default_radius(const ValueFunction& u);

/// Estimate of D⁺u(x). d = 1: at a grid node the interval of one-sided
/// derivatives (collapsed to its midpoint if the ends are swapped), elsewhere
/// the reconstructed derivative. d = 2: the reconstructed gradient when every
/// node within `radius` is differentiable, otherwise the hull of the nodal
/// gradients of differentiable nodes within `radius`.
/// Throws InvalidInput when radius < 2h.
SuperdifferentialPolytope superdifferential(const ValueFunction& u, const TorusPoint& x, double radius);

struct MinNormResult {
  SmallVec point;
  int iterations = 0;
  /// min over vertices of <p*, v - p*>; nonnegative up to rounding at the optimum.
  double optimality_gap = 0.0;
};

/// Wolfe's minimum-norm-point algorithm over the convex hull of the points.
/// Throws NumericalError (carrying the best iterate) past the iteration cap.
MinNormResult wolfe_min_norm_point(std::span<const SmallVec> points, int max_iter = 200);

/// Nearest point of the polytope to the origin.
SmallVec min_norm_point(const SuperdifferentialPolytope& p);

/// Minimizer of <A p, p> over the polytope. Throws InvalidInput unless A is positive definite.
SmallVec weighted_min_norm_point(const SuperdifferentialPolytope& p, const SymMatrix& a);

/// p₀(x), the minimal-norm element of D⁺u(x).
SmallVec min_norm_selection(const ValueFunction& u, const TorusPoint& x);

using MetricField = std::function<SymMatrix(const TorusPoint&)>;

/// p_A(x) = argmin over D⁺u(x) of <A(x) p, p>.
SmallVec weighted_min_norm_selection(const ValueFunction& u, const MetricField& a, const TorusPoint& x);

enum class PointKind { RegularNonCritical, RegularCritical, SingularCritical, SingularNonStationary };

std::string_view to_string(PointKind k);

struct PointClass {
  PointKind kind = PointKind::RegularNonCritical;
  double p0_norm = 0.0;
  double diameter = 0.0;
  /// α0 - (½|p₀|² + V(x)); positive on the singular side.
  double hamiltonian_gap = 0.0;

  bool critical() const { return kind == PointKind::RegularCritical || kind == PointKind::SingularCritical; }
  bool singular() const { return kind == PointKind::SingularCritical || kind == PointKind::SingularNonStationary; }
};

PointClass classify_point(const ValueFunction& u, const Potential& v, double alpha0, const TorusPoint& x,
                          const Tolerances& tols);

/// Grid nodes in Crit(u) (|p₀| <= tol.crit) and in Sing(u).
struct CriticalSets {
  std::vector<TorusPoint> critical;
  std::vector<TorusPoint> singular;
};

CriticalSets critical_sets(const ValueFunction& u, const Potential& v, double alpha0, const Tolerances& tols);

}  // namespace ggflow
