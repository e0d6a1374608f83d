#include "ggflow/flow.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <ostream>
#include <string>

#include "ggflow/errors.hpp"

namespace ggflow {

namespace {

constexpr double kRestSpeed = 1e-14;
constexpr double kMonotoneSlack = 1e-12;

struct Velocity {
  SmallVec direction;  // ẋ
  double selection_norm = 0.0;
  double rate = 0.0;   // d⁺u/dt
};

class Stepper {
 public:
  Stepper(const ValueFunction& u, const FlowOptions& opts) : u_(u), opts_(opts) {}

  Velocity velocity(const TorusPoint& x) const {
    Velocity v;
    if (opts_.metric) {
      const SymMatrix a = (*opts_.metric)(x);
      const SmallVec p = weighted_min_norm_selection(u_, *opts_.metric, x);
      v.direction = a.apply(p);
      v.selection_norm = norm(p);
      v.rate = dot(v.direction, p);
    } else {
      const SmallVec p = min_norm_selection(u_, x);
      v.direction = p;
      v.selection_norm = norm(p);
      v.rate = norm2(p);
    }
    if (!std::isfinite(v.direction[0]) || !std::isfinite(v.direction[1])) {
      throw NumericalError("non-finite flow velocity");
    }
    return v;
  }

  double value(const TorusPoint& x) const {
    const double val = u_.value_at(x);
    if (!std::isfinite(val)) throw NumericalError("non-finite value of u along the flow");
    return val;
  }

  // Maximizer of u along x + s·d, s in [0, 1]. Returns the parameter s.
  double segment_argmax(const TorusPoint& x, const SmallVec& d) const {
    std::vector<double> cands;
    constexpr int kSamples = 32;
    for (int i = 0; i <= kSamples; ++i) cands.push_back(static_cast<double>(i) / kSamples);
    // Grid-line crossings, where kinks of the reconstruction sit.
    const double n = u_.n();
    for (int a = 0; a < u_.dim(); ++a) {
      if (d[a] == 0.0) continue;
      const double start = x[a] * n;
      const double end = (x[a] + d[a]) * n;
      const long lo = static_cast<long>(std::ceil(std::min(start, end)));
      const long hi = static_cast<long>(std::floor(std::max(start, end)));
      for (long k = lo; k <= hi && k - lo < 64; ++k) {
        cands.push_back((static_cast<double>(k) / n - x[a]) / d[a]);
      }
    }
    double best_s = 0.0;
    double best_u = value(x);
    for (const double s : cands) {
      if (s < 0.0 || s > 1.0) continue;
      const double val = value(point_on(x, d, s));
      if (val > best_u) {
        best_u = val;
        best_s = s;
      }
    }
    return best_s;
  }

  static TorusPoint point_on(const TorusPoint& x, const SmallVec& d, double s) {
    // Land exactly on grid nodes when the parameter was derived from a crossing.
    return x.moved(s * d);
  }

  // Nearest node within the sampling radius whose selection vanishes.
  std::optional<TorusPoint> critical_node_near(const TorusPoint& x, double tol_crit) const {
    const PeriodicGrid& g = u_.grid();
    const double r = default_radius(u_);
    const int n = g.n();
    const long reach = static_cast<long>(std::ceil(r * n));
    const long i0 = std::lround(x[0] * n);
    const long j0 = u_.dim() == 2 ? std::lround(x[1] * n) : 0;
    std::optional<TorusPoint> best;
    double best_d = r;
    for (long i = i0 - reach; i <= i0 + reach; ++i) {
      for (long j = j0 - (u_.dim() == 2 ? reach : 0); j <= j0 + (u_.dim() == 2 ? reach : 0); ++j) {
        const std::size_t k = u_.dim() == 1 ? g.flat(i) : g.flat(i, j);
        const TorusPoint node = g.node(k);
        const double dist = torus_distance(x, node);
        if (dist > best_d) continue;
        if (velocity(node).selection_norm <= tol_crit) {
          best = node;
          best_d = dist;
        }
      }
    }
    return best;
  }

 private:
  const ValueFunction& u_;
  const FlowOptions& opts_;
};

// Snaps a landing parameter onto an exact grid crossing when it came from one.
TorusPoint landing_point(const ValueFunction& u, const TorusPoint& x, const SmallVec& d, double s) {
  TorusPoint y = x.moved(s * d);
  if (u.dim() == 1) {
    const double k = std::round(y[0] * u.n());
    if (std::fabs(y[0] * u.n() - k) < 1e-6) y = TorusPoint::wrap(k / u.n());
  }
  return y;
}

}  // namespace

Trajectory integrate(const ValueFunction& u, const TorusPoint& x0, const FlowOptions& opts) {
  if (x0.dim() != u.dim()) throw InvalidInput("integrate: dimension mismatch");
  if (!(opts.horizon > 0.0)) throw InvalidInput("integrate: horizon must be positive");
  if (!(opts.dt > 0.0 && opts.dt <= 0.01)) throw InvalidInput("integrate: dt must lie in (0, 0.01]");
  if (opts.record_every < 1) throw InvalidInput("integrate: record_every must be positive");
  if (opts.horizon / opts.dt > 1e8) throw BudgetError("integrate: horizon/dt exceeds 1e8 steps");

  const double tol_crit = opts.tol_crit.value_or(10.0 / u.n());
  const Stepper stepper(u, opts);

  Trajectory traj;
  traj.dt = opts.dt;
  traj.horizon = opts.horizon;
  auto record = [&](double t, const TorusPoint& x, const Velocity& v, double ux) {
    if (!traj.times.empty() && t <= traj.times.back()) return;
    traj.times.push_back(t);
    traj.points.push_back(x);
    traj.p0_norms.push_back(v.selection_norm);
    traj.u_values.push_back(ux);
    traj.rates.push_back(v.rate);
  };

  TorusPoint x = x0;
  Velocity vel = stepper.velocity(x);
  double ux = stepper.value(x);
  record(0.0, x, vel, ux);

  if (vel.selection_norm <= tol_crit) {
    traj.stationary_start = true;
    record(opts.horizon, x, vel, ux);
    return traj;
  }

  double t = 0.0;
  double last_speed = norm(vel.direction);
  SmallVec travelled = SmallVec::zero(u.dim());
  std::deque<std::pair<SmallVec, bool>> window;  // cumulative displacement, step was reduced
  const double min_dt = opts.dt / std::ldexp(1.0, opts.max_halvings);
  std::size_t since_record = 0;
  bool resting = false;

  while (opts.horizon - t > 1e-12 * opts.horizon) {
    const double speed = norm(vel.direction);
    if (speed <= kRestSpeed) {
      resting = true;
      break;
    }
    double h = std::min(opts.dt, opts.horizon - t);
    bool reduced = false;
    TorusPoint next;
    Velocity next_vel;
    double next_u = 0.0;
    double advanced = 0.0;
    SmallVec moved = SmallVec::zero(u.dim());
    bool landed = false;
    for (;;) {
      next = x.moved(h * vel.direction);
      next_vel = stepper.velocity(next);
      next_u = stepper.value(next);
      const bool reversal = dot(next_vel.direction, vel.direction) < 0.0 && speed > tol_crit &&
                            norm(next_vel.direction) > tol_crit;
      const bool decrease = next_u < ux - kMonotoneSlack;
      if (!reversal && !decrease) {
        advanced = h;
        moved = h * vel.direction;
        break;
      }
      reduced = true;
      if (h > min_dt * (1.0 + 1e-12)) {
        h *= 0.5;
        continue;
      }
      // Kink inside a minimal step: land on the maximizer of u along the segment.
      const SmallVec d = h * vel.direction;
      const double s = stepper.segment_argmax(x, d);
      next = landing_point(u, x, d, s);
      next_vel = stepper.velocity(next);
      next_u = stepper.value(next);
      advanced = s * h;
      moved = s * d;
      landed = true;
      break;
    }

    if (next == x) {
      // No representable progress: fixed point of the discrete map.
      resting = true;
      break;
    }
    t += advanced;
    x = next;
    vel = next_vel;
    ux = next_u;
    travelled += moved;
    ++traj.steps;
    ++since_record;
    if (landed || since_record >= static_cast<std::size_t>(opts.record_every)) {
      record(t, x, vel, ux);
      since_record = 0;
    }

    if (landed && vel.selection_norm <= tol_crit) {
      traj.absorbed = true;
      traj.absorption_time = t;
      break;
    }

    window.emplace_back(travelled, reduced);
    if (window.size() > static_cast<std::size_t>(opts.stagnation_window)) window.pop_front();
    const bool chattering = std::any_of(window.begin(), window.end(), [](const auto& w) { return w.second; });
    if (chattering && window.size() == static_cast<std::size_t>(opts.stagnation_window) &&
        norm(travelled - window.front().first) < opts.dt * tol_crit) {
      if (const auto node = stepper.critical_node_near(x, tol_crit)) {
        x = *node;
        vel = stepper.velocity(x);
        ux = stepper.value(x);
      }
      traj.absorbed = true;
      traj.absorption_time = t;
      record(t + 0.0, x, vel, ux);
      if (traj.times.back() < t) record(t, x, vel, ux);
      break;
    }
    last_speed = speed;
  }

  if (resting) {
    // Arrival at non-vanishing speed is a finite-time arrival; vanishing speed is asymptotic.
    if (last_speed > tol_crit) {
      traj.absorbed = true;
      traj.absorption_time = t;
    } else {
      traj.stalled = true;
    }
  }
  if (traj.times.back() < t) record(t, x, vel, ux);
  if (traj.times.back() < opts.horizon) {
    Velocity rest = vel;
    if (traj.absorbed || traj.stalled) rest = stepper.velocity(x);
    record(opts.horizon, x, rest, ux);
  }
  return traj;
}

double critical_time(const Trajectory& traj, const ValueFunction& u, const Potential& v, double alpha0,
                     const Tolerances& tols) {
  if (traj.size() == 0) throw InvalidInput("critical_time: empty trajectory");
  if (traj.stationary_start || classify_point(u, v, alpha0, traj.points.front(), tols).critical()) return 0.0;
  if (!traj.absorbed) return kInfiniteTime;

  std::size_t k = 0;
  while (k < traj.size() && traj.times[k] < traj.absorption_time) ++k;
  if (k >= traj.size()) return kInfiniteTime;
  if (!classify_point(u, v, alpha0, traj.points[k], tols).critical()) return kInfiniteTime;
  if (k == 0) return traj.times[0];

  // Bisection on the segment between the bracketing samples.
  const TorusPoint& a = traj.points[k - 1];
  const SmallVec d = torus_delta(a, traj.points[k]);
  double lo = 0.0;
  double hi = 1.0;
  for (int it = 0; it < 60; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (norm(min_norm_selection(u, a.moved(mid * d))) <= tols.crit) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return traj.times[k - 1] + hi * (traj.times[k] - traj.times[k - 1]);
}

double energy_residual(const Trajectory& traj) {
  if (traj.size() < 2) throw InvalidInput("energy_residual needs at least two samples");
  double integral = 0.0;
  for (std::size_t k = 0; k + 1 < traj.size(); ++k) {
    integral += 0.5 * (traj.times[k + 1] - traj.times[k]) * (traj.rates[k] + traj.rates[k + 1]);
  }
  return std::fabs(traj.u_values.back() - traj.u_values.front() - integral);
}

void write_trajectory_csv(std::ostream& out, const Trajectory& traj, const CriticalSets& sets) {
  const int dim = traj.points.empty() ? 1 : traj.points.front().dim();
  out << "t,x_1";
  if (dim == 2) out << ",x_2";
  out << ",p0_norm,u,d_crit,d_sing\n";
  char buf[64];
  auto put = [&](double x, bool last = false) {
    if (std::isinf(x)) {
      out << "inf";
    } else {
      std::snprintf(buf, sizeof buf, "%.12g", x);
      out << buf;
    }
    out << (last ? '\n' : ',');
  };
  for (std::size_t k = 0; k < traj.size(); ++k) {
    const TorusPoint& x = traj.points[k];
    put(traj.times[k]);
    put(x[0]);
    if (dim == 2) put(x[1]);
    put(traj.p0_norms[k]);
    put(traj.u_values[k]);
    put(sets.critical.empty() ? kInfiniteTime : set_distance(x, sets.critical));
    put(sets.singular.empty() ? kInfiniteTime : set_distance(x, sets.singular), true);
  }
}

}  // namespace ggflow
