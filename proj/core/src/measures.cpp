#include "ggflow/measures.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "ggflow/errors.hpp"

namespace ggflow {

namespace {

// Time-weighted pass over the sample intervals [t_k, t_{k+1}) ∩ [0, T].
template <class Fn>
void for_each_interval(const Trajectory& traj, double horizon, Fn&& fn) {
  const std::size_t m = traj.size();
  for (std::size_t k = 0; k < m; ++k) {
    const double a = traj.times[k];
    if (a >= horizon) break;
    const double b = k + 1 < m ? std::min(traj.times[k + 1], horizon) : horizon;
    if (b > a) fn(k, b - a);
  }
}

void check_horizon(const Trajectory& traj, double horizon) {
  if (traj.size() == 0) throw InvalidInput("empty trajectory");
  if (!(horizon > 0.0)) throw InvalidInput("averaging horizon must be positive");
  if (horizon > traj.horizon * (1.0 + 1e-12)) throw InvalidInput("averaging horizon exceeds the trajectory");
}

double time_fraction(const Trajectory& traj, double horizon, const std::function<bool(const TorusPoint&)>& pred) {
  check_horizon(traj, horizon);
  double acc = 0.0;
  for_each_interval(traj, horizon, [&](std::size_t k, double len) {
    if (pred(traj.points[k])) acc += len;
  });
  return std::clamp(acc / horizon, 0.0, 1.0);
}

struct Cluster {
  std::size_t heaviest = 0;
  double mass = 0.0;
};

Cluster heaviest_cluster(const OccupationalMeasure& mu, int reach) {
  const auto& w = mu.weights.values();
  Cluster c;
  c.heaviest = static_cast<std::size_t>(std::max_element(w.begin(), w.end()) - w.begin());
  const auto ij = mu.weights.unflat(c.heaviest);
  const int rj = mu.dim() == 2 ? reach : 0;
  for (int di = -reach; di <= reach; ++di) {
    for (int dj = -rj; dj <= rj; ++dj) {
      c.mass += mu.dim() == 1 ? mu.weights.at(ij[0] + di) : mu.weights.at(ij[0] + di, ij[1] + dj);
    }
  }
  return c;
}

}  // namespace

double OccupationalMeasure::total_mass() const {
  double s = 0.0;
  for (const double w : weights.values()) s += w;
  return s;
}

OccupationalMeasure occupational_measure(const Trajectory& traj, double horizon, int dim, int n) {
  check_horizon(traj, horizon);
  OccupationalMeasure mu{PeriodicGrid(dim, n), horizon, traj.points.front()};
  if (traj.points.front().dim() != dim) throw InvalidInput("occupational_measure: dimension mismatch");
  auto& w = mu.weights.values();
  for_each_interval(traj, horizon, [&](std::size_t k, double len) {
    w[mu.weights.nearest_node(traj.points[k])] += len / horizon;
  });
  // Sum exactly one despite rounding in the interval lengths.
  const double total = mu.total_mass();
  if (!(total > 0.0)) throw InternalError("occupational measure with no mass");
  for (double& x : w) x /= total;
  return mu;
}

double integrate_against(const OccupationalMeasure& mu, const PeriodicGrid& f) {
  if (!f.same_shape(mu.weights)) throw InvalidInput("integrate_against: grid mismatch");
  double acc = 0.0;
  const auto& w = mu.weights.values();
  for (std::size_t k = 0; k < w.size(); ++k) {
    if (w[k] != 0.0) acc += w[k] * f.values()[k];
  }
  return acc;
}

std::size_t MomentDictionary::size(int dim) const {
  const auto k = static_cast<std::size_t>(modes);
  return dim == 1 ? 2 * k : 2 * (k * (2 * k + 1) + k);
}

std::vector<double> MomentDictionary::moments(std::span<const TorusPoint> points,
                                              std::span<const double> weights) const {
  if (points.size() != weights.size()) throw InvalidInput("moments: size mismatch");
  if (modes < 1) throw InvalidInput("moments: need at least one mode");
  if (points.empty()) throw InvalidInput("moments: empty point set");
  const int dim = points.front().dim();
  const double two_pi = 2.0 * std::numbers::pi;
  std::vector<double> out(size(dim), 0.0);
  auto scale = [&](double kn) { return normalization == Normalization::Lipschitz ? 1.0 / (two_pi * kn) : 1.0; };

  for (std::size_t i = 0; i < points.size(); ++i) {
    const double w = weights[i];
    if (w == 0.0) continue;
    const TorusPoint& x = points[i];
    std::size_t slot = 0;
    if (dim == 1) {
      for (int k = 1; k <= modes; ++k) {
        const double ph = two_pi * k * x[0];
        out[slot++] += w * scale(k) * std::cos(ph);
        out[slot++] += w * scale(k) * std::sin(ph);
      }
      continue;
    }
    for (int k1 = 0; k1 <= modes; ++k1) {
      for (int k2 = -modes; k2 <= modes; ++k2) {
        if (k1 == 0 && k2 <= 0) continue;
        const double ph = two_pi * (k1 * x[0] + k2 * x[1]);
        const double s = scale(std::hypot(k1, k2));
        out[slot++] += w * s * std::cos(ph);
        out[slot++] += w * s * std::sin(ph);
      }
    }
  }
  return out;
}

std::vector<double> MomentDictionary::moments(const OccupationalMeasure& mu) const {
  std::vector<TorusPoint> pts;
  std::vector<double> ws;
  const auto& w = mu.weights.values();
  for (std::size_t k = 0; k < w.size(); ++k) {
    if (w[k] == 0.0) continue;
    pts.push_back(mu.weights.node(k));
    ws.push_back(w[k]);
  }
  return moments(pts, ws);
}

std::string_view to_string(MomentDictionary::Normalization n) {
  return n == MomentDictionary::Normalization::Lipschitz ? "lipschitz" : "unit";
}

double max_abs_difference(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw InvalidInput("max_abs_difference: size mismatch");
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::fabs(a[i] - b[i]));
  return m;
}

namespace {

void check_schedule(std::span<const double> schedule) {
  if (schedule.size() < 3) throw InvalidInput("schedule needs at least three horizons");
  for (std::size_t i = 0; i < schedule.size(); ++i) {
    if (!(schedule[i] > 0.0) || (i > 0 && !(schedule[i] > schedule[i - 1]))) {
      throw InvalidInput("schedule must be positive and increasing");
    }
  }
}

}  // namespace

LimitReport limit_diagnostics(const ValueFunction& u, const TorusPoint& x0, std::span<const double> schedule,
                              const LimitOptions& opts) {
  check_schedule(schedule);
  FlowOptions flow = opts.flow;
  flow.horizon = schedule.back();
  const Trajectory traj = integrate(u, x0, flow);
  return limit_diagnostics(traj, u.n(), schedule, opts);
}

LimitReport limit_diagnostics(const Trajectory& traj, int n, std::span<const double> schedule,
                              const LimitOptions& opts) {
  check_schedule(schedule);
  LimitReport rep;
  rep.schedule.assign(schedule.begin(), schedule.end());
  const int dim = traj.points.front().dim();
  for (const double t : schedule) {
    OccupationalMeasure mu = occupational_measure(traj, t, dim, n);
    rep.moment_trace.push_back(opts.dictionary.moments(mu));
    rep.limit_measure = std::move(mu);
  }
  const auto& mt = rep.moment_trace;
  rep.converged = max_abs_difference(mt[mt.size() - 1], mt[mt.size() - 2]) <= opts.tol_weak;

  const Cluster c = heaviest_cluster(rep.limit_measure, opts.cluster_bins);
  rep.cluster_mass = c.mass;
  if (c.mass >= opts.cluster_mass) rep.dirac_candidate = rep.limit_measure.weights.node(c.heaviest);
  return rep;
}

double invariance_defect(const OccupationalMeasure& mu, const ValueFunction& u, double s,
                         const MomentDictionary& dict, const FlowOptions& flow) {
  if (!(s > 0.0)) throw InvalidInput("invariance_defect: push time must be positive");
  if (mu.dim() != u.dim()) throw InvalidInput("invariance_defect: dimension mismatch");
  FlowOptions opts = flow;
  opts.horizon = s;
  opts.record_every = std::max(1, static_cast<int>(s / opts.dt));

  std::vector<TorusPoint> src;
  std::vector<TorusPoint> dst;
  std::vector<double> ws;
  const auto& w = mu.weights.values();
  for (std::size_t k = 0; k < w.size(); ++k) {
    if (w[k] == 0.0) continue;
    const TorusPoint x = mu.weights.node(k);
    src.push_back(x);
    dst.push_back(integrate(u, x, opts).endpoint());
    ws.push_back(w[k]);
  }
  return max_abs_difference(dict.moments(src, ws), dict.moments(dst, ws));
}

double attractor_fraction(const Trajectory& traj, std::span<const TorusPoint> set, double eps, double horizon) {
  if (!(eps > 0.0)) throw InvalidInput("attractor_fraction: eps must be positive");
  if (set.empty()) return 1.0;
  return time_fraction(traj, horizon, [&](const TorusPoint& x) { return set_distance(x, set) >= eps; });
}

double dirac_test(const Trajectory& traj, const TorusPoint& xbar, double eps, double horizon) {
  if (!(eps > 0.0)) throw InvalidInput("dirac_test: eps must be positive");
  return time_fraction(traj, horizon, [&](const TorusPoint& x) { return torus_distance(x, xbar) >= eps; });
}

std::string_view to_string(Verdict v) {
  switch (v) {
    case Verdict::ApproachesRegularCritical:
      return "ApproachesRegularCritical";
    case Verdict::EntersSingularSet:
      return "EntersSingularSet";
    case Verdict::StationaryCritical:
      return "StationaryCritical";
  }
  return "?";
}

ClassifyConfig ClassifyConfig::defaults(const ValueFunction& u, const Potential& v) {
  const double osc = oscillation(v, std::max(u.n(), 64));
  ClassifyConfig cfg;
  cfg.tols = Tolerances::defaults(u.n(), osc);
  cfg.tol_v = 0.02 * osc;
  cfg.flow.tol_crit = cfg.tols.crit;
  return cfg;
}

ClassificationReport dichotomy_classify(const ValueFunction& u, const Potential& v, double alpha0,
                                        const TorusPoint& x0, const ClassifyConfig& cfg) {
  check_schedule(cfg.schedule);
  if (!(cfg.epsilon > 0.0) || !(cfg.tol_v > 0.0)) throw InvalidInput("classify: epsilon and tol_v must be positive");
  if (v.dim() != u.dim()) throw InvalidInput("classify: dimension mismatch");

  ClassificationReport rep;
  rep.x0 = x0;
  rep.alpha0 = alpha0;
  rep.schedule = cfg.schedule;
  rep.tol_v = cfg.tol_v;
  rep.epsilon = cfg.epsilon;

  const PointClass start = classify_point(u, v, alpha0, x0, cfg.tols);
  if (start.critical()) {
    rep.verdict = Verdict::StationaryCritical;
    rep.tau = 0.0;
    if (start.singular()) rep.t0 = 0.0;
    const double vx = v.value(x0);
    rep.vbar_trace.assign(cfg.schedule.size(), vx);
    rep.attractor_trace.assign(cfg.schedule.size(), 0.0);
    const ArgmaxSet mv = argmax_set(v, u.n(), cfg.argmax_tol, alpha0);
    rep.argmax_trace.assign(cfg.schedule.size(), mv.distance(x0) >= cfg.epsilon ? 1.0 : 0.0);
    return rep;
  }

  FlowOptions flow = cfg.flow;
  flow.horizon = cfg.schedule.back();
  if (!flow.tol_crit) flow.tol_crit = cfg.tols.crit;
  const Trajectory traj = integrate(u, x0, flow);
  rep.tau = critical_time(traj, u, v, alpha0, cfg.tols);

  const CriticalSets sets = critical_sets(u, v, alpha0, cfg.tols);
  const ArgmaxSet mv = argmax_set(v, u.n(), cfg.argmax_tol, alpha0);
  const PeriodicGrid vgrid = v.sample(u.n());
  for (const double t : cfg.schedule) {
    const OccupationalMeasure mu = occupational_measure(traj, t, u.dim(), u.n());
    rep.vbar_trace.push_back(integrate_against(mu, vgrid));
    rep.attractor_trace.push_back(attractor_fraction(traj, sets.critical, cfg.epsilon, t));
    rep.argmax_trace.push_back(
        mv.whole_torus ? 0.0 : time_fraction(traj, t, [&](const TorusPoint& x) { return mv.distance(x) >= cfg.epsilon; }));
  }
  const double vbar = rep.vbar_trace.back();

  if (std::fabs(vbar - alpha0) <= cfg.tol_v) {
    const auto& a = rep.argmax_trace;
    bool decays = std::is_sorted(a.rbegin(), a.rend());
    decays = decays && (a.back() == 0.0 || a.back() <= 0.5 * a.front());
    if (!decays) throw InconclusiveError("classify: ∫V dμ is at α0 but the M(V) fraction does not decay", rep.vbar_trace);
    rep.verdict = Verdict::ApproachesRegularCritical;
    return rep;
  }
  if (vbar < alpha0 - cfg.tol_v) {
    // Start of the trailing run of singular samples.
    std::size_t first = traj.size();
    std::vector<double> gaps(traj.size());
    for (std::size_t k = traj.size(); k-- > 0;) {
      const PointClass pc = classify_point(u, v, alpha0, traj.points[k], cfg.tols);
      gaps[k] = pc.hamiltonian_gap;
      if (!pc.singular()) {
        // Keep filling gaps for the η-density evidence.
        for (std::size_t j = k; j-- > 0;) gaps[j] = classify_point(u, v, alpha0, traj.points[j], cfg.tols).hamiltonian_gap;
        break;
      }
      first = k;
    }
    if (first == traj.size()) {
      throw InconclusiveError("classify: ∫V dμ is below α0 but the trajectory does not end in Sing(u)", rep.vbar_trace);
    }
    rep.verdict = Verdict::EntersSingularSet;
    rep.t0 = traj.times[first];
    rep.eta = (alpha0 - vbar) / 3.0;
    double running = 0.0;
    for (const double t : cfg.schedule) {
      double acc = 0.0;
      for_each_interval(traj, t, [&](std::size_t k, double len) {
        if (gaps[k] >= *rep.eta) acc += len;
      });
      running = std::max(running, acc / t);
      rep.eta_density_trace.push_back(running);
    }
    return rep;
  }
  throw InconclusiveError("classify: ∫V dμ above α0 + tol_v", rep.vbar_trace);
}

}  // namespace ggflow
