#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "ggflow/flow.hpp"
#include "ggflow/potential.hpp"
#include "ggflow/semiconcave.hpp"
#include "ggflow/torus_grid.hpp"
#include "ggflow/weak_kam.hpp"

namespace ggflow {

/// Individual occupational measure μ_x^T as a histogram over the nodes of a
/// periodic grid. Bin k collects the time spent nearest to node k.
struct OccupationalMeasure {
  PeriodicGrid weights{1, 8};
  double horizon = 0.0;
  TorusPoint x0;

  int dim() const { return weights.dim(); }
  int n() const { return weights.n(); }
  double total_mass() const;
};

/// Throws InvalidInput when T exceeds the trajectory horizon or T <= 0.
OccupationalMeasure occupational_measure(const Trajectory& traj, double horizon, int dim, int n);

/// Σ weights·f(bin centers). Throws InvalidInput on a grid mismatch.
double integrate_against(const OccupationalMeasure& mu, const PeriodicGrid& f);

/// Finite dictionary of Fourier test functions used for weak-* comparisons.
/// In d = 1 the modes are cos 2πkx and sin 2πkx for k = 1..K; in d = 2 all
/// frequency pairs (k1, k2) with k1 in 0..K, k2 in -K..K, one from each ± pair.
/// Lipschitz normalization divides mode k by 2π|k| so every test function is
/// 1-Lipschitz; Unit keeps amplitude one.
struct MomentDictionary {
  enum class Normalization { Lipschitz, Unit };

  int modes = 8;
  Normalization normalization = Normalization::Lipschitz;

  std::size_t size(int dim) const;
  /// Moments of a weighted point cloud.
  std::vector<double> moments(std::span<const TorusPoint> points, std::span<const double> weights) const;
  std::vector<double> moments(const OccupationalMeasure& mu) const;
};

std::string_view to_string(MomentDictionary::Normalization n);

double max_abs_difference(std::span<const double> a, std::span<const double> b);

struct LimitOptions {
  MomentDictionary dictionary;
  double tol_weak = 1e-3;
  /// Mass fraction and per-axis bin reach defining a single-cluster limit.
  double cluster_mass = 0.99;
  int cluster_bins = 3;
  /// Integration settings; the horizon is replaced by the last schedule entry.
  FlowOptions flow;
};

struct LimitReport {
  std::vector<double> schedule;
  std::vector<std::vector<double>> moment_trace;
  bool converged = false;
  OccupationalMeasure limit_measure;
  /// Heaviest bin center when the limit measure is concentrated on one cluster.
  std::optional<TorusPoint> dirac_candidate;
  /// Mass within the cluster around the heaviest bin.
  double cluster_mass = 0.0;
};

/// Needs an increasing schedule of at least three horizons.
LimitReport limit_diagnostics(const ValueFunction& u, const TorusPoint& x0, std::span<const double> schedule,
                              const LimitOptions& opts = {});
/// Same, from a trajectory already integrated to the last horizon.
LimitReport limit_diagnostics(const Trajectory& traj, int n, std::span<const double> schedule,
                              const LimitOptions& opts = {});

/// Max-norm moment difference between μ and its pushforward by the flow at time s.
/// Each occupied bin is transported from its center.
double invariance_defect(const OccupationalMeasure& mu, const ValueFunction& u, double s,
                         const MomentDictionary& dict = {}, const FlowOptions& flow = {});

/// Fraction of [0, T] spent at distance >= eps from the set.
double attractor_fraction(const Trajectory& traj, std::span<const TorusPoint> set, double eps, double horizon);

/// Fraction of [0, T] spent at distance >= eps from x̄.
double dirac_test(const Trajectory& traj, const TorusPoint& xbar, double eps, double horizon);

enum class Verdict { ApproachesRegularCritical, EntersSingularSet, StationaryCritical };

std::string_view to_string(Verdict v);

struct ClassifyConfig {
  std::vector<double> schedule{10.0, 100.0, 1000.0};
  double epsilon = 0.05;
  Tolerances tols;
  /// Band around α0 for ∫V dμ.
  double tol_v = 0.0;
  /// Threshold for the maximizer set M(V).
  double argmax_tol = 1e-9;
  FlowOptions flow;

  /// Tolerances from the grid of u and δ(V); tol_v = 0.02·δ(V).
  static ClassifyConfig defaults(const ValueFunction& u, const Potential& v);
};

struct ClassificationReport {
  Verdict verdict = Verdict::StationaryCritical;
  TorusPoint x0;
  double alpha0 = 0.0;
  double tau = kInfiniteTime;
  std::optional<double> t0;
  std::vector<double> schedule;
  std::vector<double> vbar_trace;
  /// Fraction of time at distance >= ε from Crit(u).
  std::vector<double> attractor_trace;
  /// Fraction of time at distance >= ε from M(V).
  std::vector<double> argmax_trace;
  /// Singular case: η = (α0 - ∫V dμ)/3 and the running maximum of the time
  /// fraction with α0 - (½|p₀|² + V) >= η.
  std::optional<double> eta;
  std::vector<double> eta_density_trace;
  double tol_v = 0.0;
  double epsilon = 0.0;
};

/// Throws InconclusiveError (with the ∫V dμ trace) when neither branch applies.
ClassificationReport dichotomy_classify(const ValueFunction& u, const Potential& v, double alpha0,
                                        const TorusPoint& x0, const ClassifyConfig& cfg);

}  // namespace ggflow
