#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "ggflow/errors.hpp"
#include "ggflow/semiconcave.hpp"
#include "oracles.hpp"

using namespace ggflow;

namespace {

SuperdifferentialPolytope interval(double lo, double hi) {
  SuperdifferentialPolytope p;
  p.dim = 1;
  p.vertices = {SmallVec(lo), SmallVec(hi)};
  return p;
}

}  // namespace

TEST(Superdifferential, PendulumKinkAndRegularPoint) {
  const ValueFunction u = builtin_solution("pendulum", 1024);
  const auto at_kink = superdifferential(u, TorusPoint::wrap(0.5), default_radius(u));
  ASSERT_EQ(at_kink.vertices.size(), 2u);
  EXPECT_NEAR(std::min(at_kink.vertices[0][0], at_kink.vertices[1][0]), -2.0, 1e-5);
  EXPECT_NEAR(std::max(at_kink.vertices[0][0], at_kink.vertices[1][0]), 2.0, 1e-5);
  const auto regular = superdifferential(u, TorusPoint::wrap(0.25), default_radius(u));
  EXPECT_TRUE(regular.is_singleton(1e-6));
  EXPECT_NEAR(regular.vertices[0][0], std::sqrt(2.0), 1e-5);  // O(h²) difference error
  EXPECT_THROW(superdifferential(u, TorusPoint::wrap(0.25), 1.0 / 1024), InvalidInput);
}

TEST(Superdifferential, ConstantFunction) {
  const ValueFunction c(PeriodicGrid::sample(2, 64, [](const TorusPoint&) { return 1.0; }), Provenance::ClosedForm);
  const auto p = superdifferential(c, TorusPoint::wrap(0.3, 0.7), default_radius(c));
  EXPECT_LE(norm(min_norm_point(p)), 1e-14);
  EXPECT_LE(p.diameter(), 1e-14);
}

TEST(Superdifferential, OrderingInOneDimension) {
  const ValueFunction u = builtin_solution("pendulum", 512);
  for (std::size_t k = 0; k < 512; ++k) {
    const auto p = superdifferential(u, u.grid().node(k), default_radius(u));
    ASSERT_EQ(p.vertices.size(), 2u);
    EXPECT_LE(p.vertices[0][0], p.vertices[1][0] + 1e-12);
  }
}

TEST(Superdifferential, TwoDimensionalKinkLine) {
  const ValueFunction u = builtin_solution("pendulum2d", 256);
  // On the kink line x1 = 1/2 the hull spans both one-sided slopes in x1.
  const auto p = superdifferential(u, TorusPoint::wrap(0.5, 0.25), default_radius(u));
  EXPECT_GT(p.diameter(), 3.5);
  const SmallVec p0 = min_norm_point(p);
  EXPECT_NEAR(p0[0], 0.0, 1e-9);
  EXPECT_NEAR(p0[1], std::sqrt(2.0), 0.05);
}

TEST(MinNormPoint, Intervals) {
  EXPECT_EQ(min_norm_point(interval(1.0, 2.0))[0], 1.0);
  EXPECT_EQ(min_norm_point(interval(-1.0, 2.0))[0], 0.0);
  EXPECT_EQ(min_norm_point(interval(-3.0, -0.5))[0], -0.5);
}

TEST(MinNormPoint, WolfeAgainstBruteForce) {
  std::mt19937_64 rng(17);
  std::normal_distribution<double> g(0.0, 1.0);
  std::uniform_int_distribution<int> nv(1, 8);
  for (int c = 0; c < 200; ++c) {
    const double shift = c % 2 == 0 ? 2.0 : 0.3;
    std::vector<SmallVec> pts;
    std::vector<std::array<double, 2>> raw;
    const int m = nv(rng);
    for (int i = 0; i < m; ++i) {
      const double a = g(rng) + shift, b = g(rng);
      pts.emplace_back(a, b);
      raw.push_back({a, b});
    }
    const MinNormResult r = wolfe_min_norm_point(pts);
    const auto ref = oracle::brute_min_norm(raw);
    EXPECT_NEAR(r.point[0], ref[0], 1e-6) << c;
    EXPECT_NEAR(r.point[1], ref[1], 1e-6) << c;
    EXPECT_GE(r.optimality_gap, -1e-10);
    for (const auto& v : pts) EXPECT_LE(norm(r.point), norm(v) + 1e-12);
  }
}

TEST(MinNormPoint, DegenerateInputs) {
  // Repeated and collinear vertices.
  const std::vector<SmallVec> same{SmallVec(1.0, 1.0), SmallVec(1.0, 1.0), SmallVec(1.0, 1.0)};
  EXPECT_NEAR(wolfe_min_norm_point(same).point[0], 1.0, 1e-15);
  const std::vector<SmallVec> line{SmallVec(1.0, -1.0), SmallVec(1.0, 0.0), SmallVec(1.0, 1.0), SmallVec(1.0, 2.0)};
  const SmallVec p = wolfe_min_norm_point(line).point;
  EXPECT_NEAR(p[0], 1.0, 1e-12);
  EXPECT_NEAR(p[1], 0.0, 1e-12);
  // Nearly identical vertices in the style of sampled gradients.
  const std::vector<SmallVec> close{SmallVec(1.7973716882897008, 1.9994227384170813),
                                    SmallVec(1.7973716882897151, 1.9998745047031861),
                                    SmallVec(1.7973716882897151, -1.9998745047031861),
                                    SmallVec(1.7973716882897008, -1.9994227384170813),
                                    SmallVec(1.8382509526370825, 1.9998745047031719)};
  const SmallVec q = wolfe_min_norm_point(close).point;
  EXPECT_NEAR(q[0], 1.7973716882897, 1e-9);
  EXPECT_NEAR(q[1], 0.0, 1e-9);
  EXPECT_THROW(wolfe_min_norm_point(std::vector<SmallVec>{}), InvalidInput);
}

TEST(MinNormPoint, IterationCapReportsBestIterate) {
  const std::vector<SmallVec> pts{SmallVec(1.0, 2.0), SmallVec(2.0, -1.0), SmallVec(3.0, 0.5)};
  try {
    wolfe_min_norm_point(pts, 0);
    FAIL() << "expected NumericalError";
  } catch (const NumericalError& e) {
    ASSERT_TRUE(e.best_iterate().has_value());
    EXPECT_EQ(e.best_iterate()->size(), 2u);
  }
}

TEST(MinNormSelection, PendulumExamples) {
  const ValueFunction u = builtin_solution("pendulum", 1024);
  EXPECT_EQ(min_norm_selection(u, TorusPoint::wrap(0.5))[0], 0.0);
  EXPECT_NEAR(min_norm_selection(u, TorusPoint::wrap(0.25))[0], std::sqrt(2.0), 1e-5);
  // Maximizers of V are critical for every solution.
  const Potential deg = Potential::registered("degenerate");
  for (const ValueFunction& w : {builtin_solution("degenerate", 1024), solve_distance_like(deg, 0.0, 1024)}) {
    EXPECT_LE(norm(min_norm_selection(w, TorusPoint::wrap(0.0))), 1e-9);
    EXPECT_LE(norm(min_norm_selection(w, TorusPoint::wrap(0.5))), 1e-9);
  }
}

TEST(MinNormSelection, SubsolutionInequality) {
  for (const char* name : {"pendulum", "degenerate"}) {
    const ValueFunction u = builtin_solution(name, 1024);
    const Potential v = Potential::registered(name);
    const double a0 = critical_constant(v, 1024);
    for (std::size_t k = 0; k < 1024; ++k) {
      const TorusPoint x = u.grid().node(k);
      EXPECT_LE(0.5 * norm2(min_norm_selection(u, x)) + v.value(x), a0 + 1e-3) << name << ' ' << k;
    }
  }
}

TEST(MinNormSelection, LowerSemicontinuous) {
  const ValueFunction u = builtin_solution("pendulum", 1024);
  for (double x : {0.5, 0.25, 0.0}) {
    double liminf = 1e300;
    for (int j = 16; j <= 30; ++j) {
      liminf = std::min(liminf, norm(min_norm_selection(u, TorusPoint::wrap(x + std::pow(0.5, j)))));
      liminf = std::min(liminf, norm(min_norm_selection(u, TorusPoint::wrap(x - std::pow(0.5, j)))));
    }
    EXPECT_GE(liminf, norm(min_norm_selection(u, TorusPoint::wrap(x))) - 1e-2);
  }
}

TEST(WeightedSelection, Examples) {
  const ValueFunction u = builtin_solution("pendulum", 1024);
  const MetricField id = [](const TorusPoint&) { return SymMatrix::identity(1); };
  EXPECT_NEAR(weighted_min_norm_selection(u, id, TorusPoint::wrap(0.25))[0], std::sqrt(2.0), 1e-5);
  EXPECT_EQ(weighted_min_norm_point(interval(-1.0, 2.0), SymMatrix::diagonal(4.0))[0], 0.0);

  SuperdifferentialPolytope box;
  box.dim = 2;
  box.vertices = {SmallVec(1.0, -1.0), SmallVec(2.0, -1.0), SmallVec(2.0, 1.0), SmallVec(1.0, 1.0)};
  const SmallVec p = weighted_min_norm_point(box, SymMatrix::diagonal(1.0, 100.0));
  EXPECT_NEAR(p[0], 1.0, 1e-12);
  EXPECT_NEAR(p[1], 0.0, 1e-12);
  EXPECT_THROW(weighted_min_norm_point(box, SymMatrix{1.0, 2.0, 1.0, 2}), InvalidInput);
}

TEST(WeightedSelection, CorrelatedMetricMatchesBruteForce) {
  // <A p, p> minimized over a segment by dense sampling.
  SuperdifferentialPolytope seg;
  seg.dim = 2;
  seg.vertices = {SmallVec(1.0, -2.0), SmallVec(1.0, 3.0)};
  const SymMatrix a{2.0, 0.9, 1.0, 2};
  const SmallVec p = weighted_min_norm_point(seg, a);
  double best = 1e300, arg = 0.0;
  for (int i = 0; i <= 1000000; ++i) {
    const double y = -2.0 + 5.0 * i / 1e6;
    const double q = 2.0 + 2 * 0.9 * y + y * y;
    if (q < best) {
      best = q;
      arg = y;
    }
  }
  EXPECT_NEAR(p[0], 1.0, 1e-9);
  EXPECT_NEAR(p[1], arg, 1e-5);
}

TEST(ClassifyPoint, PendulumExamples) {
  const ValueFunction u = builtin_solution("pendulum", 1024);
  const Potential v = Potential::registered("pendulum");
  const Tolerances t = Tolerances::defaults(1024, 2.0);
  EXPECT_EQ(classify_point(u, v, 1.0, TorusPoint::wrap(0.0), t).kind, PointKind::RegularCritical);
  EXPECT_EQ(classify_point(u, v, 1.0, TorusPoint::wrap(0.5), t).kind, PointKind::SingularCritical);
  const PointClass c = classify_point(u, v, 1.0, TorusPoint::wrap(0.25), t);
  EXPECT_EQ(c.kind, PointKind::RegularNonCritical);
  EXPECT_NEAR(c.hamiltonian_gap, 0.0, 1e-5);
}

TEST(ClassifyPoint, SingularStableUnderRefinement) {
  const Potential v = Potential::registered("pendulum");
  for (int n : {256, 512, 1024, 2048}) {
    const ValueFunction u = builtin_solution("pendulum", n);
    EXPECT_EQ(classify_point(u, v, 1.0, TorusPoint::wrap(0.5), Tolerances::defaults(n, 2.0)).kind,
              PointKind::SingularCritical)
        << n;
  }
}

TEST(ClassifyPoint, ClassInvariants) {
  const ValueFunction u = builtin_solution("pendulum", 1024);
  const Potential v = Potential::registered("pendulum");
  const Tolerances t = Tolerances::defaults(1024, 2.0);
  for (std::size_t k = 0; k < 1024; ++k) {
    const PointClass c = classify_point(u, v, 1.0, u.grid().node(k), t);
    if (c.kind == PointKind::RegularCritical) {
      EXPECT_LE(c.p0_norm, t.crit);
      EXPECT_LE(c.diameter, t.sing);
    }
    if (c.kind == PointKind::SingularCritical) EXPECT_GT(c.hamiltonian_gap, t.gap);
  }
}

TEST(CriticalSets, Pendulum) {
  const ValueFunction u = builtin_solution("pendulum", 1024);
  const CriticalSets s = critical_sets(u, Potential::registered("pendulum"), 1.0, Tolerances::defaults(1024, 2.0));
  ASSERT_FALSE(s.singular.empty());
  for (const auto& x : s.singular) EXPECT_LT(torus_distance(x, TorusPoint::wrap(0.5)), 1e-12);
  EXPECT_LT(set_distance(TorusPoint::wrap(0.0), s.critical), 1e-12);
  EXPECT_LT(set_distance(TorusPoint::wrap(0.5), s.critical), 1e-12);
  EXPECT_GT(set_distance(TorusPoint::wrap(0.25), s.critical), 0.2);
}
