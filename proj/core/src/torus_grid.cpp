#include "ggflow/torus_grid.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "ggflow/errors.hpp"

namespace ggflow {

namespace {

double reduce_unit(double c) {
  double r = c - std::floor(c);
  // c - floor(c) rounds to 1.0 for tiny negative c.
  if (r >= 1.0) r = 0.0;
  return r;
}

double wrapped_gap(double a, double b) {
  double d = std::fabs(a - b);
  return std::min(d, 1.0 - d);
}

}  // namespace

TorusPoint TorusPoint::wrap(std::span<const double> raw) {
  if (raw.size() != 1 && raw.size() != 2) {
    throw InvalidInput("torus point must have 1 or 2 coordinates, got " + std::to_string(raw.size()));
  }
  TorusPoint p;
  p.dim_ = static_cast<int>(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i) {
    if (!std::isfinite(raw[i])) throw InvalidInput("non-finite torus coordinate");
    p.c_[i] = reduce_unit(raw[i]);
  }
  return p;
}

TorusPoint TorusPoint::wrap(double x) {
  const std::array<double, 1> r{x};
  return wrap(std::span<const double>(r));
}

TorusPoint TorusPoint::wrap(double x1, double x2) {
  const std::array<double, 2> r{x1, x2};
  return wrap(std::span<const double>(r));
}

TorusPoint TorusPoint::moved(const SmallVec& delta) const {
  if (dim_ == 1) return wrap(c_[0] + delta[0]);
  return wrap(c_[0] + delta[0], c_[1] + delta[1]);
}

TorusPoint wrap(std::span<const double> raw) { return TorusPoint::wrap(raw); }

SmallVec torus_delta(const TorusPoint& a, const TorusPoint& b) {
  if (a.dim() != b.dim()) throw InvalidInput("torus_delta: dimension mismatch");
  SmallVec d = SmallVec::zero(a.dim());
  for (int i = 0; i < a.dim(); ++i) {
    double t = b[i] - a[i];
    t -= std::round(t);
    d[i] = t;
  }
  return d;
}

double torus_distance(const TorusPoint& a, const TorusPoint& b) {
  if (a.dim() != b.dim()) throw InvalidInput("torus_distance: dimension mismatch");
  double s = 0.0;
  for (int i = 0; i < a.dim(); ++i) {
    const double g = wrapped_gap(a[i], b[i]);
    s += g * g;
  }
  return std::sqrt(s);
}

double set_distance(const TorusPoint& x, std::span<const TorusPoint> set) {
  if (set.empty()) throw InvalidInput("set_distance: empty set");
  double best = std::numeric_limits<double>::infinity();
  for (const auto& s : set) best = std::min(best, torus_distance(x, s));
  return best;
}

PeriodicGrid::PeriodicGrid(int dim, int n) : PeriodicGrid(dim, n, {}) {}

PeriodicGrid::PeriodicGrid(int dim, int n, std::vector<double> values)
    : dim_(dim), n_(n), values_(std::move(values)) {
  if (dim != 1 && dim != 2) throw InvalidInput("grid dimension must be 1 or 2");
  if (n < 8) throw InvalidInput("grid needs at least 8 cells per dimension");
  const std::size_t expected = dim == 1 ? static_cast<std::size_t>(n)
                                        : static_cast<std::size_t>(n) * static_cast<std::size_t>(n);
  if (values_.empty()) values_.assign(expected, 0.0);
  if (values_.size() != expected) {
    throw InvalidInput("grid expects " + std::to_string(expected) + " values, got " +
                       std::to_string(values_.size()));
  }
}

PeriodicGrid PeriodicGrid::sample(int dim, int n, const std::function<double(const TorusPoint&)>& fn) {
  PeriodicGrid g(dim, n);
  for (std::size_t k = 0; k < g.size(); ++k) g.values_[k] = fn(g.node(k));
  return g;
}

std::array<int, 2> PeriodicGrid::unflat(std::size_t k) const {
  if (dim_ == 1) return {static_cast<int>(k), 0};
  return {static_cast<int>(k / static_cast<std::size_t>(n_)), static_cast<int>(k % static_cast<std::size_t>(n_))};
}

TorusPoint PeriodicGrid::node(std::size_t k) const {
  const auto idx = unflat(k);
  const double h = spacing();
  if (dim_ == 1) return TorusPoint::wrap(idx[0] * h);
  return TorusPoint::wrap(idx[0] * h, idx[1] * h);
}

std::size_t PeriodicGrid::nearest_node(const TorusPoint& x) const {
  if (x.dim() != dim_) throw InvalidInput("nearest_node: dimension mismatch");
  const long i = std::lround(x[0] * n_);
  if (dim_ == 1) return flat(i);
  const long j = std::lround(x[1] * n_);
  return flat(i, j);
}

double interpolate(const PeriodicGrid& g, const TorusPoint& x) {
  if (x.dim() != g.dim()) throw InvalidInput("interpolate: dimension mismatch");
  const int n = g.n();
  const double s0 = x[0] * n;
  const long i0 = static_cast<long>(std::floor(s0));
  const double t0 = s0 - static_cast<double>(i0);
  if (g.dim() == 1) return (1.0 - t0) * g.at(i0) + t0 * g.at(i0 + 1);
  const double s1 = x[1] * n;
  const long j0 = static_cast<long>(std::floor(s1));
  const double t1 = s1 - static_cast<double>(j0);
  const double lo = (1.0 - t1) * g.at(i0, j0) + t1 * g.at(i0, j0 + 1);
  const double hi = (1.0 - t1) * g.at(i0 + 1, j0) + t1 * g.at(i0 + 1, j0 + 1);
  return (1.0 - t0) * lo + t0 * hi;
}

}  // namespace ggflow
