#pragma once

#include <array>
#include <cmath>

namespace ggflow {

/// Vector of dimension 1 or 2 stored inline. Momenta, gradients and displacements.
struct SmallVec {
  std::array<double, 2> v{0.0, 0.0};
  int dim = 1;

  SmallVec() = default;
  explicit SmallVec(double a) : v{a, 0.0}, dim(1) {}
  SmallVec(double a, double b) : v{a, b}, dim(2) {}

  static SmallVec zero(int d) {
    SmallVec z;
    z.dim = d;
    return z;
  }

  double& operator[](int i) { return v[static_cast<std::size_t>(i)]; }
  double operator[](int i) const { return v[static_cast<std::size_t>(i)]; }

  SmallVec& operator+=(const SmallVec& o) {
    v[0] += o.v[0];
    v[1] += o.v[1];
    return *this;
  }
  SmallVec& operator-=(const SmallVec& o) {
    v[0] -= o.v[0];
    v[1] -= o.v[1];
    return *this;
  }
  SmallVec& operator*=(double s) {
    v[0] *= s;
    v[1] *= s;
    return *this;
  }
};

inline SmallVec operator+(SmallVec a, const SmallVec& b) { return a += b; }
inline SmallVec operator-(SmallVec a, const SmallVec& b) { return a -= b; }
inline SmallVec operator*(double s, SmallVec a) { return a *= s; }
inline SmallVec operator*(SmallVec a, double s) { return a *= s; }

inline double dot(const SmallVec& a, const SmallVec& b) { return a.v[0] * b.v[0] + a.v[1] * b.v[1]; }
inline double norm2(const SmallVec& a) { return dot(a, a); }
inline double norm(const SmallVec& a) { return std::sqrt(norm2(a)); }

/// Symmetric matrix of dimension 1 or 2: [[a11, a12], [a12, a22]].
struct SymMatrix {
  double a11 = 1.0;
  double a12 = 0.0;
  double a22 = 1.0;
  int dim = 1;

  static SymMatrix identity(int d) { return SymMatrix{1.0, 0.0, 1.0, d}; }
  static SymMatrix diagonal(double d1) { return SymMatrix{d1, 0.0, 1.0, 1}; }
  static SymMatrix diagonal(double d1, double d2) { return SymMatrix{d1, 0.0, d2, 2}; }

  SmallVec apply(const SmallVec& p) const {
    if (dim == 1) return SmallVec(a11 * p[0]);
    return SmallVec(a11 * p[0] + a12 * p[1], a12 * p[0] + a22 * p[1]);
  }

  bool positive_definite() const {
    if (!(a11 > 0.0)) return false;
    if (dim == 1) return true;
    return a11 * a22 - a12 * a12 > 0.0;
  }
};

}  // namespace ggflow
