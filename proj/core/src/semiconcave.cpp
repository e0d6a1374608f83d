#include "ggflow/semiconcave.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "ggflow/errors.hpp"

namespace ggflow {

namespace {

constexpr double kDifferentiabilityCells = 5.0;

// Solves a dense system of size <= 4 with partial pivoting. Returns false when a pivot
// falls below 1e-12 of the largest entry.
template <std::size_t N>
bool solve_small(std::array<std::array<double, N>, N> a, std::array<double, N> b, std::size_t m,
                 std::array<double, N>& x) {
  double amax = 0.0;
  for (std::size_t r = 0; r < m; ++r)
    for (std::size_t c = 0; c < m; ++c) amax = std::max(amax, std::fabs(a[r][c]));
  for (std::size_t c = 0; c < m; ++c) {
    std::size_t piv = c;
    for (std::size_t r = c + 1; r < m; ++r)
      if (std::fabs(a[r][c]) > std::fabs(a[piv][c])) piv = r;
    if (std::fabs(a[piv][c]) <= 1e-12 * amax) return false;
    std::swap(a[c], a[piv]);
    std::swap(b[c], b[piv]);
    for (std::size_t r = c + 1; r < m; ++r) {
      const double f = a[r][c] / a[c][c];
      for (std::size_t k = c; k < m; ++k) a[r][k] -= f * a[c][k];
      b[r] -= f * b[c];
    }
  }
  for (std::size_t c = m; c-- > 0;) {
    double s = b[c];
    for (std::size_t k = c + 1; k < m; ++k) s -= a[c][k] * x[k];
    x[c] = s / a[c][c];
  }
  return true;
}

SmallVec combine(const std::vector<SmallVec>& pts, const std::vector<double>& w, int dim) {
  SmallVec x = SmallVec::zero(dim);
  for (std::size_t i = 0; i < pts.size(); ++i) x += w[i] * pts[i];
  return x;
}

double interval_projection(double lo, double hi) { return std::clamp(0.0, lo, hi); }

// Interval [u'₊, u'₋] at a 1-D node, collapsed when the ends are swapped.
std::pair<double, double> node_interval(const ValueFunction& u, std::size_t k) {
  const double right = u.right_derivative(k, 0);
  const double left = u.left_derivative(k, 0);
  if (right <= left) return {right, left};
  const double mid = 0.5 * (right + left);
  return {mid, mid};
}

double min_norm_1d(const ValueFunction& u, const TorusPoint& x) {
  if (const auto k = u.node_at(x)) {
    const auto [lo, hi] = node_interval(u, *k);
    return interval_projection(lo, hi);
  }
  return u.gradient_at(x)[0];
}

}  // namespace

double SuperdifferentialPolytope::diameter() const {
  double d = 0.0;
  for (std::size_t i = 0; i < vertices.size(); ++i)
    for (std::size_t j = i + 1; j < vertices.size(); ++j) d = std::max(d, norm(vertices[i] - vertices[j]));
  return d;
}

Tolerances Tolerances::defaults(int n, double oscillation) {
  return Tolerances{10.0 / n, 20.0 / n, 0.05 * oscillation};
}

double default_radius(const ValueFunction& u) { return 3.0 * u.spacing(); }

SuperdifferentialPolytope superdifferential(const ValueFunction& u, const TorusPoint& x, double radius) {
  if (x.dim() != u.dim()) throw InvalidInput("superdifferential: dimension mismatch");
  const double h = u.spacing();
  if (!(radius >= 2.0 * h * (1.0 - 1e-12))) {
    throw InvalidInput("superdifferential: sampling radius must be at least 2h");
  }
  SuperdifferentialPolytope p;
  p.dim = u.dim();
  if (u.dim() == 1) {
    if (const auto k = u.node_at(x)) {
      const auto [lo, hi] = node_interval(u, *k);
      p.vertices = {SmallVec(lo), SmallVec(hi)};
    } else {
      const double g = u.gradient_at(x)[0];
      p.vertices = {SmallVec(g), SmallVec(g)};
    }
    return p;
  }

  const PeriodicGrid& g = u.grid();
  const int n = g.n();
  const double threshold = kDifferentiabilityCells / n;
  const long i_lo = static_cast<long>(std::floor((x[0] - radius) * n));
  const long i_hi = static_cast<long>(std::ceil((x[0] + radius) * n));
  const long j_lo = static_cast<long>(std::floor((x[1] - radius) * n));
  const long j_hi = static_cast<long>(std::ceil((x[1] + radius) * n));
  bool smooth = true;
  std::vector<SmallVec> grads;
  for (long i = i_lo; i <= i_hi; ++i) {
    for (long j = j_lo; j <= j_hi; ++j) {
      const std::size_t k = g.flat(i, j);
      if (torus_distance(x, g.node(k)) > radius) continue;
      if (u.differentiable_at_node(k, threshold)) {
        grads.push_back(u.node_gradient(k));
      } else {
        smooth = false;
      }
    }
  }
  if (smooth) {
    const SmallVec s = u.gradient_at(x);
    p.vertices = {s};
    return p;
  }
  if (grads.empty()) {
    const std::size_t k = g.nearest_node(x);
    for (int c = 0; c < 4; ++c) {
      SmallVec v = SmallVec::zero(2);
      for (int a = 0; a < 2; ++a) v[a] = ((c >> a) & 1) ? u.left_derivative(k, a) : u.right_derivative(k, a);
      grads.push_back(v);
    }
  }
  p.vertices = std::move(grads);
  return p;
}

MinNormResult wolfe_min_norm_point(std::span<const SmallVec> points, int max_iter) {
  if (points.empty()) throw InvalidInput("min_norm_point: empty polytope");
  const int dim = points.front().dim;
  double scale = 0.0;
  for (const auto& v : points) scale = std::max(scale, norm2(v));
  scale = std::max(scale, 1e-300);

  std::size_t start = 0;
  for (std::size_t i = 1; i < points.size(); ++i)
    if (norm2(points[i]) < norm2(points[start])) start = i;

  std::vector<SmallVec> corral{points[start]};
  std::vector<double> weights{1.0};
  SmallVec x = points[start];
  int it = 0;
  for (; it < max_iter; ++it) {
    std::size_t j = 0;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < points.size(); ++i) {
      const double d = dot(x, points[i]);
      if (d < best) {
        best = d;
        j = i;
      }
    }
    if (norm2(x) - best <= 1e-12 * scale) break;
    const bool already = std::any_of(corral.begin(), corral.end(), [&](const SmallVec& s) {
      return s[0] == points[j][0] && s[1] == points[j][1];
    });
    if (already) break;
    corral.push_back(points[j]);
    weights.push_back(0.0);

    // Minor cycles: move to the affine minimizer of the corral, dropping points as needed.
    for (int minor = 0; minor < 16; ++minor) {
      const std::size_t m = corral.size();
      std::array<std::array<double, 4>, 4> a{};
      std::array<double, 4> rhs{};
      std::array<double, 4> alpha{};
      for (std::size_t r = 0; r < m; ++r) {
        for (std::size_t c = 0; c < m; ++c) a[r][c] = dot(corral[r], corral[c]) / scale + 1.0;
        rhs[r] = 1.0;
      }
      if (!solve_small<4>(a, rhs, m, alpha)) {
        // Affinely dependent corral: discard the oldest point and retry.
        corral.erase(corral.begin());
        weights.erase(weights.begin());
        const double s = std::accumulate(weights.begin(), weights.end(), 0.0);
        for (double& w : weights) w = s > 0.0 ? w / s : 1.0 / static_cast<double>(weights.size());
        continue;
      }
      double total = 0.0;
      for (std::size_t r = 0; r < m; ++r) total += alpha[r];
      for (std::size_t r = 0; r < m; ++r) alpha[r] /= total;
      bool interior = true;
      for (std::size_t r = 0; r < m; ++r)
        if (alpha[r] <= 1e-14) interior = false;
      if (interior) {
        weights.assign(alpha.begin(), alpha.begin() + static_cast<long>(m));
        break;
      }
      double theta = 1.0;
      for (std::size_t r = 0; r < m; ++r) {
        if (alpha[r] <= 1e-14) {
          const double denom = weights[r] - alpha[r];
          if (denom > 0.0) theta = std::min(theta, weights[r] / denom);
        }
      }
      for (std::size_t r = 0; r < m; ++r) weights[r] = theta * alpha[r] + (1.0 - theta) * weights[r];
      for (std::size_t r = m; r-- > 0;) {
        if (weights[r] <= 1e-14) {
          corral.erase(corral.begin() + static_cast<long>(r));
          weights.erase(weights.begin() + static_cast<long>(r));
        }
      }
      const double s = std::accumulate(weights.begin(), weights.end(), 0.0);
      for (double& w : weights) w /= s;
    }
    x = combine(corral, weights, dim);
  }

  MinNormResult out;
  out.point = x;
  out.iterations = it;
  out.optimality_gap = std::numeric_limits<double>::infinity();
  for (const auto& v : points) out.optimality_gap = std::min(out.optimality_gap, dot(x, v - x));
  if (it >= max_iter || out.optimality_gap < -1e-10 * std::max(1.0, scale)) {
    throw NumericalError("min_norm_point: Wolfe iteration did not certify optimality",
                         std::vector<double>{x[0], x[1]});
  }
  return out;
}

SmallVec min_norm_point(const SuperdifferentialPolytope& p) {
  if (p.vertices.empty()) throw InvalidInput("min_norm_point: empty polytope");
  if (p.dim == 1) {
    double lo = p.vertices.front()[0];
    double hi = lo;
    for (const auto& v : p.vertices) {
      lo = std::min(lo, v[0]);
      hi = std::max(hi, v[0]);
    }
    return SmallVec(interval_projection(lo, hi));
  }
  if (p.vertices.size() == 1) return p.vertices.front();
  return wolfe_min_norm_point(p.vertices).point;
}

SmallVec weighted_min_norm_point(const SuperdifferentialPolytope& p, const SymMatrix& a) {
  if (a.dim != p.dim) throw InvalidInput("weighted_min_norm_point: dimension mismatch");
  if (!a.positive_definite()) throw InvalidInput("weighted_min_norm_point: A must be positive definite");
  if (p.dim == 1) return min_norm_point(p);
  // <A p, p> = |Lᵀ p|² with A = L Lᵀ.
  const double l11 = std::sqrt(a.a11);
  const double l21 = a.a12 / l11;
  const double l22 = std::sqrt(a.a22 - l21 * l21);
  SuperdifferentialPolytope q;
  q.dim = 2;
  q.vertices.reserve(p.vertices.size());
  for (const auto& v : p.vertices) q.vertices.emplace_back(l11 * v[0] + l21 * v[1], l22 * v[1]);
  const SmallVec qs = min_norm_point(q);
  const double p2 = qs[1] / l22;
  return SmallVec((qs[0] - l21 * p2) / l11, p2);
}

SmallVec min_norm_selection(const ValueFunction& u, const TorusPoint& x) {
  if (u.dim() == 1) return SmallVec(min_norm_1d(u, x));
  return min_norm_point(superdifferential(u, x, default_radius(u)));
}

SmallVec weighted_min_norm_selection(const ValueFunction& u, const MetricField& a, const TorusPoint& x) {
  return weighted_min_norm_point(superdifferential(u, x, default_radius(u)), a(x));
}

std::string_view to_string(PointKind k) {
  switch (k) {
    case PointKind::RegularNonCritical:
      return "RegularNonCritical";
    case PointKind::RegularCritical:
      return "RegularCritical";
    case PointKind::SingularCritical:
      return "SingularCritical";
    case PointKind::SingularNonStationary:
      return "SingularNonStationary";
  }
  return "Unknown";
}

PointClass classify_point(const ValueFunction& u, const Potential& v, double alpha0, const TorusPoint& x,
                          const Tolerances& tols) {
  const SuperdifferentialPolytope p = superdifferential(u, x, default_radius(u));
  const SmallVec p0 = min_norm_point(p);
  PointClass c;
  c.p0_norm = norm(p0);
  c.diameter = p.diameter();
  c.hamiltonian_gap = alpha0 - (0.5 * norm2(p0) + v.value(x));
  const bool singular = c.hamiltonian_gap > tols.gap;
  const bool critical = c.p0_norm <= tols.crit;
  if (singular) {
    c.kind = critical ? PointKind::SingularCritical : PointKind::SingularNonStationary;
  } else {
    c.kind = critical ? PointKind::RegularCritical : PointKind::RegularNonCritical;
  }
  return c;
}

CriticalSets critical_sets(const ValueFunction& u, const Potential& v, double alpha0, const Tolerances& tols) {
  CriticalSets s;
  for (std::size_t k = 0; k < u.grid().size(); ++k) {
    const TorusPoint x = u.grid().node(k);
    const PointClass c = classify_point(u, v, alpha0, x, tols);
    if (c.critical()) s.critical.push_back(x);
    if (c.singular()) s.singular.push_back(x);
  }
  return s;
}

}  // namespace ggflow
