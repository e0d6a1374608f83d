#include "ggflow/weak_kam.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <numbers>
#include <numeric>
#include <ostream>
#include <sstream>

#include "ggflow/errors.hpp"

namespace ggflow {

namespace {

constexpr double kPi = std::numbers::pi;

double minmod(double a, double b) {
  if (a > 0.0 && b > 0.0) return std::min(a, b);
  if (a < 0.0 && b < 0.0) return std::max(a, b);
  return 0.0;
}

// Closed-form pendulum solution: ∫ 2 sin(πy) dy from the nearer integer.
double pendulum_u(double x) {
  return x < 0.5 ? (2.0 / kPi) * (1.0 - std::cos(kPi * x)) : (2.0 / kPi) * (1.0 + std::cos(kPi * x));
}

double degenerate_u(double x) { return std::sqrt(2.0) / (2.0 * kPi) * (1.0 - std::cos(2.0 * kPi * x)); }

}  // namespace

std::string_view to_string(Provenance p) {
  switch (p) {
    case Provenance::ClosedForm:
      return "closed-form";
    case Provenance::DistanceLike:
      return "distance-like";
    case Provenance::LaxOleinik:
      return "lax-oleinik";
  }
  return "unknown";
}

Provenance provenance_from_string(std::string_view s) {
  if (s == "closed-form") return Provenance::ClosedForm;
  if (s == "distance-like") return Provenance::DistanceLike;
  if (s == "lax-oleinik") return Provenance::LaxOleinik;
  throw InvalidInput("unknown provenance '" + std::string(s) + "'");
}

ValueFunction::ValueFunction(PeriodicGrid grid, Provenance provenance)
    : grid_(std::move(grid)), provenance_(provenance) {
  const std::size_t m = grid_.size();
  const double h = grid_.spacing();
  const auto& u = grid_.values();
  for (const double x : u) {
    if (!std::isfinite(x)) throw InvalidInput("value function has non-finite samples");
  }
  for (int a = 0; a < dim(); ++a) {
    std::vector<double> second(m);
    for (std::size_t k = 0; k < m; ++k) {
      second[k] = (u[step(k, a, -1)] + u[step(k, a, 1)] - 2.0 * u[k]) / (h * h);
      semiconcavity_ = std::max(semiconcavity_, second[k]);
    }
    slope_[a].resize(m);
    curvature_[a].resize(m);
    for (std::size_t k = 0; k < m; ++k) {
      const std::size_t next = step(k, a, 1);
      slope_[a][k] = (u[next] - u[k]) / h;
      curvature_[a][k] = minmod(second[k], second[next]);
    }
    for (std::size_t k = 0; k < m; ++k) {
      lipschitz_ = std::max({lipschitz_, std::fabs(right_derivative(k, a)), std::fabs(left_derivative(k, a))});
    }
  }
}

std::size_t ValueFunction::step(std::size_t k, int axis, int delta) const {
  if (dim() == 1) return grid_.flat(static_cast<long>(k) + delta);
  const auto idx = grid_.unflat(k);
  return axis == 0 ? grid_.flat(idx[0] + delta, idx[1]) : grid_.flat(idx[0], idx[1] + delta);
}

double ValueFunction::right_derivative(std::size_t k, int axis) const {
  return slope_[axis][k] - 0.5 * spacing() * curvature_[axis][k];
}

double ValueFunction::left_derivative(std::size_t k, int axis) const {
  const std::size_t prev = step(k, axis, -1);
  return slope_[axis][prev] + 0.5 * spacing() * curvature_[axis][prev];
}

bool ValueFunction::differentiable_at_node(std::size_t k, double threshold) const {
  for (int a = 0; a < dim(); ++a) {
    if (std::fabs(left_derivative(k, a) - right_derivative(k, a)) > threshold) return false;
  }
  return true;
}

SmallVec ValueFunction::node_gradient(std::size_t k) const {
  SmallVec g = SmallVec::zero(dim());
  for (int a = 0; a < dim(); ++a) g[a] = 0.5 * (left_derivative(k, a) + right_derivative(k, a));
  return g;
}

double ValueFunction::value_at(const TorusPoint& x) const {
  if (x.dim() != dim()) throw InvalidInput("value_at: dimension mismatch");
  if (dim() == 2) return interpolate(grid_, x);
  const int nn = n();
  const double h = spacing();
  const double s = x[0] * nn;
  const long i = static_cast<long>(std::floor(s));
  const double theta = s - static_cast<double>(i);
  const std::size_t k = grid_.flat(i);
  return grid_.values()[k] + h * (slope_[0][k] * theta + 0.5 * h * curvature_[0][k] * (theta * theta - theta));
}

SmallVec ValueFunction::gradient_at(const TorusPoint& x) const {
  if (x.dim() != dim()) throw InvalidInput("gradient_at: dimension mismatch");
  const int nn = n();
  const double h = spacing();
  const double s0 = x[0] * nn;
  const long i = static_cast<long>(std::floor(s0));
  const double t0 = s0 - static_cast<double>(i);
  if (dim() == 1) {
    const std::size_t k = grid_.flat(i);
    return SmallVec(slope_[0][k] + (t0 - 0.5) * h * curvature_[0][k]);
  }
  const double s1 = x[1] * nn;
  const long j = static_cast<long>(std::floor(s1));
  const double t1 = s1 - static_cast<double>(j);
  const SmallVec g00 = node_gradient(grid_.flat(i, j));
  const SmallVec g01 = node_gradient(grid_.flat(i, j + 1));
  const SmallVec g10 = node_gradient(grid_.flat(i + 1, j));
  const SmallVec g11 = node_gradient(grid_.flat(i + 1, j + 1));
  return (1.0 - t0) * ((1.0 - t1) * g00 + t1 * g01) + t0 * ((1.0 - t1) * g10 + t1 * g11);
}

std::optional<std::size_t> ValueFunction::node_at(const TorusPoint& x) const {
  if (x.dim() != dim()) throw InvalidInput("node_at: dimension mismatch");
  const double nn = n();
  for (int a = 0; a < dim(); ++a) {
    const double s = x[a] * nn;
    if (std::fabs(s - std::round(s)) > 1e-9) return std::nullopt;
  }
  return grid_.nearest_node(x);
}

ValueFunction ValueFunction::normalized() const {
  PeriodicGrid g = grid_;
  const double lo = *std::min_element(g.values().begin(), g.values().end());
  for (double& x : g.values()) x -= lo;
  return ValueFunction(std::move(g), provenance_);
}

void ValueFunction::write_csv(std::ostream& out) const {
  out << "# " << dim() << ',' << n() << ',' << to_string(provenance_) << '\n';
  char buf[64];
  for (const double x : grid_.values()) {
    std::snprintf(buf, sizeof buf, "%.17g\n", x);
    out << buf;
  }
}

ValueFunction ValueFunction::read_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line.empty() || line[0] != '#') {
    throw InvalidInput("value function csv must start with '# dim,n,provenance'");
  }
  std::string body = line.substr(1);
  std::replace(body.begin(), body.end(), ',', ' ');
  std::istringstream hs(body);
  int d = 0;
  int nn = 0;
  std::string prov;
  if (!(hs >> d >> nn >> prov)) throw InvalidInput("malformed value function header: " + line);
  std::vector<double> values;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    try {
      values.push_back(std::stod(line));
    } catch (const std::exception&) {
      throw InvalidInput("malformed value: " + line);
    }
  }
  return ValueFunction(PeriodicGrid(d, nn, std::move(values)), provenance_from_string(prov));
}

ValueFunction builtin_solution(std::string_view name, int n) {
  if (name == "pendulum") {
    return ValueFunction(PeriodicGrid::sample(1, n, [](const TorusPoint& x) { return pendulum_u(x[0]); }),
                         Provenance::ClosedForm);
  }
  if (name == "degenerate") {
    return ValueFunction(PeriodicGrid::sample(1, n, [](const TorusPoint& x) { return degenerate_u(x[0]); }),
                         Provenance::ClosedForm);
  }
  if (name == "pendulum2d") {
    return ValueFunction(
        PeriodicGrid::sample(2, n, [](const TorusPoint& x) { return pendulum_u(x[0]) + pendulum_u(x[1]); }),
        Provenance::ClosedForm);
  }
  throw InvalidInput("no closed-form solution registered for '" + std::string(name) + "'");
}

ValueFunction solve_distance_like(const Potential& v, double alpha0, int n) {
  if (v.dim() != 1) throw InvalidInput("solve_distance_like supports d = 1 only");
  const double h = 1.0 / n;
  auto speed = [&](double y) {
    const double r = 2.0 * (alpha0 - v.value(TorusPoint::wrap(y)));
    if (r < -1e-12) throw ToleranceError("negative radicand 2(α0 - V) = " + std::to_string(r));
    return std::sqrt(std::max(0.0, r));
  };
  auto simpson = [&](double a, double b) {
    return (b - a) / 6.0 * (speed(a) + 4.0 * speed(0.5 * (a + b)) + speed(b));
  };

  // Cumulative arc length from 0 to every node, two Simpson panels per cell.
  std::vector<double> cum(static_cast<std::size_t>(n) + 1, 0.0);
  for (int i = 0; i < n; ++i) {
    const double a = i * h;
    const double mid = a + 0.5 * h;
    cum[i + 1] = cum[i] + simpson(a, mid) + simpson(mid, a + h);
  }
  const double total = cum[n];
  auto arc_from_zero = [&](double x) {
    const int i = std::min(n - 1, static_cast<int>(std::floor(x * n)));
    return cum[i] + simpson(i * h, x);
  };

  const double tol = 1e-9 * std::max(1.0, std::fabs(alpha0));
  const ArgmaxSet mv = argmax_set(v, std::max(n, 64), tol, alpha0);
  if (mv.whole_torus) {
    return ValueFunction(PeriodicGrid(1, n), Provenance::DistanceLike);
  }
  std::vector<double> anchors;
  for (const auto& p : mv.points) anchors.push_back(arc_from_zero(p[0]));

  PeriodicGrid g(1, n);
  for (int i = 0; i < n; ++i) {
    double best = std::numeric_limits<double>::infinity();
    for (const double a : anchors) {
      double fwd = cum[i] - a;
      if (fwd < 0.0) fwd += total;
      best = std::min({best, fwd, total - fwd});
    }
    g.values()[i] = best;
  }
  return ValueFunction(std::move(g), Provenance::DistanceLike);
}

namespace {

// out[i] = min over |d| <= w of in[i+d] + (d h)² / (2 dt), periodic, along a strided line.
// The discrete minimizer is refined between its neighbours with a parabola;
// without this a stationary node pins its neighbours at h²/(2dt).
void min_convolve_line(const double* in, double* out, int n, std::size_t stride, int w, double h, double dt) {
  const double c = h * h / (2.0 * dt);
  auto cost = [&](int i, int d) {
    int j = (i + d) % n;
    if (j < 0) j += n;
    return in[static_cast<std::size_t>(j) * stride] + c * d * d;
  };
  for (int i = 0; i < n; ++i) {
    double best = std::numeric_limits<double>::infinity();
    int arg = 0;
    for (int d = -w; d <= w; ++d) {
      const double cand = cost(i, d);
      if (cand < best) {
        best = cand;
        arg = d;
      }
    }
    const double fm = cost(i, arg - 1), fp = cost(i, arg + 1);
    const double curv = fm + fp - 2.0 * best;
    if (curv > 0.0) best -= (fp - fm) * (fp - fm) / (8.0 * curv);
    out[static_cast<std::size_t>(i) * stride] = best;
  }
}

double grid_lipschitz(const PeriodicGrid& g) {
  double lip = 0.0;
  const int n = g.n();
  const double inv_h = n;
  for (std::size_t k = 0; k < g.size(); ++k) {
    const auto idx = g.unflat(k);
    if (g.dim() == 1) {
      lip = std::max(lip, std::fabs(g.at(idx[0] + 1) - g.at(idx[0])) * inv_h);
    } else {
      lip = std::max(lip, std::fabs(g.at(idx[0] + 1, idx[1]) - g.at(idx[0], idx[1])) * inv_h);
      lip = std::max(lip, std::fabs(g.at(idx[0], idx[1] + 1) - g.at(idx[0], idx[1])) * inv_h);
    }
  }
  return lip;
}

}  // namespace

ValueFunction solve_lax_oleinik(const Potential& v, double alpha0, int n, const LaxOleinikOptions& opts,
                                LaxOleinikStats* stats) {
  if (!(opts.dt > 0.0 && opts.dt <= 0.5)) throw InvalidInput("lax-oleinik dt must lie in (0, 0.5]");
  if (opts.max_iter < 1) throw InvalidInput("lax-oleinik max_iter must be positive");
  const int dim = v.dim();
  const double h = 1.0 / n;
  const PeriodicGrid vgrid = v.sample(n);
  PeriodicGrid u = opts.initial ? *opts.initial : PeriodicGrid(dim, n);
  if (!u.same_shape(vgrid)) throw InvalidInput("lax-oleinik initial guess has the wrong shape");

  const std::size_t m = u.size();
  std::vector<double> scratch(m);
  std::vector<double> prev_centered(m);
  auto centered = [&](const std::vector<double>& x, std::vector<double>& out) {
    const double mean = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
    for (std::size_t k = 0; k < x.size(); ++k) out[k] = x[k] - mean;
  };
  centered(u.values(), prev_centered);
  std::vector<double> cur_centered(m);

  double residual = std::numeric_limits<double>::infinity();
  int it = 0;
  for (; it < opts.max_iter; ++it) {
    // A minimizer y satisfies |x - y| <= 2 Lip(u) dt, so the window can be clipped.
    const double lip = grid_lipschitz(u);
    const int w = std::min(n / 2, static_cast<int>(std::ceil(2.0 * lip * opts.dt * n)) + 1);
    auto& vals = u.values();
    // Trapezoidal potential term: half of dt·V enters at each end of the step.
    for (std::size_t k = 0; k < m; ++k) vals[k] -= 0.5 * opts.dt * vgrid.values()[k];
    if (dim == 1) {
      min_convolve_line(vals.data(), scratch.data(), n, 1, w, h, opts.dt);
    } else {
      // Squared torus distance is separable: rows, then columns.
      std::vector<double> tmp(m);
      for (int i = 0; i < n; ++i) {
        min_convolve_line(vals.data() + static_cast<std::size_t>(i) * n, tmp.data() + static_cast<std::size_t>(i) * n,
                          n, 1, w, h, opts.dt);
      }
      for (int j = 0; j < n; ++j) {
        min_convolve_line(tmp.data() + j, scratch.data() + j, n, static_cast<std::size_t>(n), w, h, opts.dt);
      }
    }
    for (std::size_t k = 0; k < m; ++k) vals[k] = scratch[k] - 0.5 * opts.dt * vgrid.values()[k] + opts.dt * alpha0;
    centered(vals, cur_centered);
    residual = 0.0;
    for (std::size_t k = 0; k < m; ++k) {
      residual = std::max(residual, std::fabs(cur_centered[k] - prev_centered[k]));
    }
    std::swap(prev_centered, cur_centered);
    if (!std::isfinite(residual)) throw NumericalError("lax-oleinik iterate became non-finite");
    if (residual < opts.tol) {
      ++it;
      break;
    }
  }
  if (stats) {
    stats->iterations = it;
    stats->residual = residual;
  }
  if (!(residual < opts.tol)) {
    throw ConvergenceError("lax-oleinik did not converge in " + std::to_string(opts.max_iter) + " iterations",
                           residual);
  }
  return ValueFunction(std::move(u), Provenance::LaxOleinik).normalized();
}

ViscosityReport verify_viscosity(const ValueFunction& u, const Potential& v, double alpha0,
                                 const ViscosityTolerances& tols) {
  if (u.n() < 64) throw InvalidInput("verify_viscosity needs a grid of resolution >= 64");
  if (u.dim() != v.dim()) throw InvalidInput("verify_viscosity: dimension mismatch");
  const double kink = tols.kink_threshold.value_or(10.0 / u.n());
  const int dim = u.dim();
  ViscosityReport r;
  r.semiconcavity_constant = u.semiconcavity_constant();
  for (std::size_t k = 0; k < u.grid().size(); ++k) {
    const TorusPoint x = u.grid().node(k);
    const double vx = v.value(x);
    if (u.differentiable_at_node(k, kink)) {
      ++r.differentiable_nodes;
      const SmallVec p = u.node_gradient(k);
      r.equation_residual = std::max(r.equation_residual, std::fabs(0.5 * norm2(p) + vx - alpha0));
      continue;
    }
    ++r.kink_nodes;
    for (int a = 0; a < dim; ++a) {
      // Left slope below the right one: a convex corner, where D⁺u is empty.
      if (u.left_derivative(k, a) < u.right_derivative(k, a) - kink) {
        ++r.convex_kinks;
        break;
      }
    }
    // Extreme points of D⁺u: every combination of one-sided derivatives.
    const int corners = dim == 1 ? 2 : 4;
    for (int c = 0; c < corners; ++c) {
      SmallVec p = SmallVec::zero(dim);
      for (int a = 0; a < dim; ++a) {
        p[a] = ((c >> a) & 1) ? u.left_derivative(k, a) : u.right_derivative(k, a);
      }
      r.subsolution_violation = std::max(r.subsolution_violation, 0.5 * norm2(p) + vx - alpha0);
    }
  }
  r.passed = r.equation_residual <= tols.tol_eq && r.subsolution_violation <= tols.tol_sub && r.convex_kinks == 0;
  return r;
}

}  // namespace ggflow
