#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "ggflow/vec.hpp"

namespace ggflow {

/// Point of the flat torus T^d (d = 1 or 2); every coordinate lies in [0, 1).
class TorusPoint {
 public:
  TorusPoint() = default;

  /// Reduces raw coordinates modulo 1. Throws InvalidInput on non-finite input
  /// or a dimension other than 1 or 2.
  static TorusPoint wrap(std::span<const double> raw);
  static TorusPoint wrap(double x);
  static TorusPoint wrap(double x1, double x2);

  int dim() const { return dim_; }
  double operator[](int i) const { return c_[static_cast<std::size_t>(i)]; }

  /// Translates by a displacement and wraps.
  TorusPoint moved(const SmallVec& delta) const;

  friend bool operator==(const TorusPoint& a, const TorusPoint& b) {
    return a.dim_ == b.dim_ && a.c_ == b.c_;
  }

 private:
  std::array<double, 2> c_{0.0, 0.0};
  int dim_ = 1;
};

TorusPoint wrap(std::span<const double> raw);

/// Signed shortest displacement from a to b, per coordinate in [-1/2, 1/2].
SmallVec torus_delta(const TorusPoint& a, const TorusPoint& b);

double torus_distance(const TorusPoint& a, const TorusPoint& b);

double set_distance(const TorusPoint& x, std::span<const TorusPoint> set);

/// Uniform periodic grid with n nodes per dimension. Node i sits at i/n.
class PeriodicGrid {
 public:
  PeriodicGrid(int dim, int n);
  PeriodicGrid(int dim, int n, std::vector<double> values);

  /// Samples fn at every node.
  static PeriodicGrid sample(int dim, int n, const std::function<double(const TorusPoint&)>& fn);

  int dim() const { return dim_; }
  int n() const { return n_; }
  double spacing() const { return 1.0 / n_; }
  std::size_t size() const { return values_.size(); }

  const std::vector<double>& values() const { return values_; }
  std::vector<double>& values() { return values_; }

  /// Periodic index reduction.
  int wrap_index(long i) const {
    long r = i % n_;
    return static_cast<int>(r < 0 ? r + n_ : r);
  }

  std::size_t flat(long i) const { return static_cast<std::size_t>(wrap_index(i)); }
  std::size_t flat(long i, long j) const {
    return static_cast<std::size_t>(wrap_index(i)) * static_cast<std::size_t>(n_) +
           static_cast<std::size_t>(wrap_index(j));
  }

  double at(long i) const { return values_[flat(i)]; }
  double at(long i, long j) const { return values_[flat(i, j)]; }

  /// Multi-index of a flat index (row-major, first coordinate is the row).
  std::array<int, 2> unflat(std::size_t k) const;

  /// Coordinates of the node with flat index k.
  TorusPoint node(std::size_t k) const;

  /// Flat index of the node nearest to x.
  std::size_t nearest_node(const TorusPoint& x) const;

  bool same_shape(const PeriodicGrid& o) const { return dim_ == o.dim_ && n_ == o.n_; }

 private:
  int dim_;
  int n_;
  std::vector<double> values_;
};

/// Periodic multilinear interpolation.
double interpolate(const PeriodicGrid& g, const TorusPoint& x);

}  // namespace ggflow
