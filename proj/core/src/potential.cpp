#include "ggflow/potential.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <memory>
#include <numbers>
#include <numeric>
#include <sstream>

#include "ggflow/errors.hpp"

namespace ggflow {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr int kAscentSteps = 200;

// Local ascent with Armijo backtracking; never returns a worse point.
TorusPoint ascend(const Potential& v, TorusPoint x, double sign) {
  double fx = sign * v.value(x);
  double step = 0.05;
  for (int it = 0; it < kAscentSteps; ++it) {
    SmallVec g = sign * v.gradient(x);
    const double g2 = norm2(g);
    if (!(g2 > 0.0)) break;
    bool accepted = false;
    for (int k = 0; k < 60; ++k) {
      const TorusPoint y = x.moved(step * g);
      const double fy = sign * v.value(y);
      if (fy >= fx + 0.5 * step * g2) {
        x = y;
        fx = fy;
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;
    step *= 2.0;
  }
  return x;
}

double refined_extreme(const Potential& v, int n, double sign) {
  if (n < 64) throw InvalidInput("critical_constant needs n >= 64");
  const PeriodicGrid g = v.sample(n);
  std::size_t best = 0;
  for (std::size_t k = 1; k < g.size(); ++k) {
    if (sign * g.values()[k] > sign * g.values()[best]) best = k;
  }
  const TorusPoint x = ascend(v, g.node(best), sign);
  return sign * std::max(sign * v.value(x), sign * g.values()[best]);
}

struct UnionFind {
  std::vector<std::size_t> parent;
  explicit UnionFind(std::size_t m) : parent(m) { std::iota(parent.begin(), parent.end(), 0); }
  std::size_t find(std::size_t a) {
    while (parent[a] != a) a = parent[a] = parent[parent[a]];
    return a;
  }
  void unite(std::size_t a, std::size_t b) { parent[find(a)] = find(b); }
};

SmallVec multilinear_gradient(const PeriodicGrid& g, const TorusPoint& x) {
  const int n = g.n();
  const double s0 = x[0] * n;
  const long i0 = static_cast<long>(std::floor(s0));
  const double t0 = s0 - static_cast<double>(i0);
  if (g.dim() == 1) return SmallVec((g.at(i0 + 1) - g.at(i0)) * n);
  const double s1 = x[1] * n;
  const long j0 = static_cast<long>(std::floor(s1));
  const double t1 = s1 - static_cast<double>(j0);
  const double d0 = (1.0 - t1) * (g.at(i0 + 1, j0) - g.at(i0, j0)) + t1 * (g.at(i0 + 1, j0 + 1) - g.at(i0, j0 + 1));
  const double d1 = (1.0 - t0) * (g.at(i0, j0 + 1) - g.at(i0, j0)) + t0 * (g.at(i0 + 1, j0 + 1) - g.at(i0 + 1, j0));
  return SmallVec(d0 * n, d1 * n);
}

}  // namespace

Potential::Potential(std::string name, int dim, Evaluator value, GradientFn gradient,
                     PotentialMetadata metadata)
    : name_(std::move(name)),
      dim_(dim),
      value_(std::move(value)),
      gradient_(std::move(gradient)),
      metadata_(std::move(metadata)) {
  if (dim_ != 1 && dim_ != 2) throw InvalidInput("potential dimension must be 1 or 2");
  if (!value_ || !gradient_) throw InvalidInput("potential needs an evaluator and a gradient");
}

std::vector<std::string> Potential::registered_names() { return {"pendulum", "degenerate", "pendulum2d"}; }

Potential Potential::registered(std::string_view name) {
  if (name == "pendulum") {
    PotentialMetadata meta{1.0, std::vector<TorusPoint>{TorusPoint::wrap(0.0)}, 2.0};
    return Potential(
        "pendulum", 1, [](const TorusPoint& x) { return std::cos(kTwoPi * x[0]); },
        [](const TorusPoint& x) { return SmallVec(-kTwoPi * std::sin(kTwoPi * x[0])); }, meta);
  }
  if (name == "degenerate") {
    PotentialMetadata meta{0.0, std::vector<TorusPoint>{TorusPoint::wrap(0.0), TorusPoint::wrap(0.5)}, 1.0};
    return Potential(
        "degenerate", 1,
        [](const TorusPoint& x) {
          const double s = std::sin(kTwoPi * x[0]);
          return -s * s;
        },
        // d/dx of -sin²(2πx) = -2π sin(4πx)
        [](const TorusPoint& x) { return SmallVec(-kTwoPi * std::sin(2.0 * kTwoPi * x[0])); }, meta);
  }
  if (name == "pendulum2d") {
    PotentialMetadata meta{2.0, std::vector<TorusPoint>{TorusPoint::wrap(0.0, 0.0)}, 4.0};
    return Potential(
        "pendulum2d", 2,
        [](const TorusPoint& x) { return std::cos(kTwoPi * x[0]) + std::cos(kTwoPi * x[1]); },
        [](const TorusPoint& x) {
          return SmallVec(-kTwoPi * std::sin(kTwoPi * x[0]), -kTwoPi * std::sin(kTwoPi * x[1]));
        },
        meta);
  }
  throw InvalidInput("unknown potential '" + std::string(name) + "'");
}

Potential Potential::constant(int dim, double c) {
  PotentialMetadata meta;
  meta.alpha0 = c;
  meta.oscillation = 0.0;
  return Potential(
      "constant", dim, [c](const TorusPoint&) { return c; },
      [dim](const TorusPoint&) { return SmallVec::zero(dim); }, meta);
}

Potential Potential::tabulated(std::string name, PeriodicGrid values) {
  const int dim = values.dim();
  auto shared = std::make_shared<const PeriodicGrid>(std::move(values));
  return Potential(
      std::move(name), dim, [shared](const TorusPoint& x) { return interpolate(*shared, x); },
      [shared](const TorusPoint& x) { return multilinear_gradient(*shared, x); });
}

Potential Potential::load_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open potential file " + path.string());
  std::string line;
  int dim = 0;
  int n = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line[0] != '#') throw InvalidInput("potential file must start with '# dim,n'");
    std::string body = line.substr(1);
    std::replace(body.begin(), body.end(), ',', ' ');
    std::istringstream hs(body);
    if (!(hs >> dim >> n)) throw InvalidInput("malformed potential header: " + line);
    break;
  }
  std::vector<double> values;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    try {
      std::size_t used = 0;
      values.push_back(std::stod(line, &used));
    } catch (const std::exception&) {
      throw InvalidInput("malformed potential value: " + line);
    }
  }
  return tabulated(path.stem().string(), PeriodicGrid(dim, n, std::move(values)));
}

Potential Potential::shifted(double c) const {
  PotentialMetadata meta = metadata_;
  if (meta.alpha0) *meta.alpha0 += c;
  auto base = value_;
  return Potential(
      name_ + "+c", dim_, [base, c](const TorusPoint& x) { return base(x) + c; }, gradient_, meta);
}

PeriodicGrid Potential::sample(int n) const {
  return PeriodicGrid::sample(dim_, n, [this](const TorusPoint& x) { return value(x); });
}

double critical_constant(const Potential& v, int n) { return refined_extreme(v, n, 1.0); }

double oscillation(const Potential& v, int n) {
  return std::max(0.0, refined_extreme(v, n, 1.0) - refined_extreme(v, n, -1.0));
}

double ArgmaxSet::distance(const TorusPoint& x) const {
  if (whole_torus) return 0.0;
  return set_distance(x, points);
}

ArgmaxSet argmax_set(const Potential& v, int n, double tol, double alpha0, double cluster_cells) {
  const PeriodicGrid g = v.sample(n);
  const std::size_t m = g.size();
  const int dim = g.dim();
  const auto& vals = g.values();

  auto neighbours = [&](std::size_t k, int reach, auto&& visit) {
    const auto idx = g.unflat(k);
    if (dim == 1) {
      for (int d = -reach; d <= reach; ++d)
        if (d != 0) visit(g.flat(idx[0] + d));
    } else {
      for (int a = -reach; a <= reach; ++a)
        for (int b = -reach; b <= reach; ++b)
          if (a != 0 || b != 0) visit(g.flat(idx[0] + a, idx[1] + b));
    }
  };

  // Candidates: qualifying nodes, plus refined grid-local maxima that qualify after ascent.
  std::vector<char> keep(m, 0);
  std::vector<TorusPoint> best_point(m);
  std::vector<double> best_value(m, -std::numeric_limits<double>::infinity());
  std::size_t qualifying = 0;
  for (std::size_t k = 0; k < m; ++k) {
    bool local_max = true;
    neighbours(k, 1, [&](std::size_t j) {
      if (vals[j] > vals[k]) local_max = false;
    });
    TorusPoint p = g.node(k);
    double pv = vals[k];
    if (local_max) {
      const TorusPoint r = ascend(v, p, 1.0);
      const double rv = v.value(r);
      if (rv > pv) {
        p = r;
        pv = rv;
      }
    }
    if (vals[k] >= alpha0 - tol) ++qualifying;
    if (pv >= alpha0 - tol) {
      keep[k] = 1;
      best_point[k] = p;
      best_value[k] = pv;
    }
  }

  ArgmaxSet out;
  if (qualifying == m) {
    out.whole_torus = true;
    return out;
  }

  const int reach = std::max(1, static_cast<int>(std::lround(cluster_cells)));
  UnionFind uf(m);
  for (std::size_t k = 0; k < m; ++k) {
    if (!keep[k]) continue;
    neighbours(k, reach, [&](std::size_t j) {
      if (keep[j]) uf.unite(k, j);
    });
  }
  std::vector<std::size_t> rep(m, m);
  for (std::size_t k = 0; k < m; ++k) {
    if (!keep[k]) continue;
    const std::size_t r = uf.find(k);
    if (rep[r] == m || best_value[k] > best_value[rep[r]]) rep[r] = k;
  }
  for (std::size_t k = 0; k < m; ++k) {
    if (keep[k] && uf.find(k) == k) out.points.push_back(best_point[rep[k]]);
  }
  if (out.points.empty()) throw InternalError("argmax_set: no point reaches alpha0 - tol");
  std::sort(out.points.begin(), out.points.end(), [](const TorusPoint& a, const TorusPoint& b) {
    return a[0] != b[0] ? a[0] < b[0] : a[1] < b[1];
  });
  return out;
}

}  // namespace ggflow
