#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "ggflow/errors.hpp"
#include "ggflow/potential.hpp"

using namespace ggflow;

TEST(Potential, RegisteredValues) {
  const Potential p = Potential::registered("pendulum");
  EXPECT_DOUBLE_EQ(p.value(TorusPoint::wrap(0.0)), 1.0);
  EXPECT_NEAR(p.value(TorusPoint::wrap(0.5)), -1.0, 1e-15);
  const Potential d = Potential::registered("degenerate");
  EXPECT_NEAR(d.value(TorusPoint::wrap(0.25)), -1.0, 1e-15);
  EXPECT_NEAR(d.value(TorusPoint::wrap(0.5)), 0.0, 1e-15);
  EXPECT_THROW(Potential::registered("nope"), InvalidInput);
}

TEST(Potential, GradientMatchesFiniteDifferences) {
  for (const auto& name : Potential::registered_names()) {
    const Potential v = Potential::registered(name);
    for (double a : {0.1, 0.37, 0.81}) {
      const TorusPoint x = v.dim() == 1 ? TorusPoint::wrap(a) : TorusPoint::wrap(a, 1.0 - a / 2);
      const SmallVec g = v.gradient(x);
      for (int i = 0; i < v.dim(); ++i) {
        SmallVec e = SmallVec::zero(v.dim());
        e[i] = 1e-6;
        const double fd = (v.value(x.moved(e)) - v.value(x.moved(-1.0 * e))) / 2e-6;
        EXPECT_NEAR(g[i], fd, 1e-6) << name;
      }
    }
  }
}

TEST(CriticalConstant, Examples) {
  EXPECT_NEAR(critical_constant(Potential::registered("pendulum"), 1024), 1.0, 1e-9);
  EXPECT_NEAR(critical_constant(Potential::registered("degenerate"), 1024), 0.0, 1e-9);
  EXPECT_NEAR(critical_constant(Potential::registered("pendulum2d"), 128), 2.0, 1e-9);
}

TEST(CriticalConstant, ShiftAndConstant) {
  const Potential p = Potential::registered("pendulum");
  for (double c : {-3.0, 0.5, 7.25}) {
    EXPECT_NEAR(critical_constant(p.shifted(c), 512), 1.0 + c, 1e-9);
  }
  EXPECT_NEAR(critical_constant(Potential::constant(1, 0.3), 64), 0.3, 1e-15);
  EXPECT_THROW(critical_constant(p, 32), InvalidInput);
}

TEST(CriticalConstant, OffGridMaximum) {
  // Maximum at an irrational point; ascent must recover it.
  const double two_pi = 2.0 * std::acos(-1.0);
  const double s = std::sqrt(2.0) / 10.0;
  const Potential v("offgrid", 1, [&](const TorusPoint& x) { return std::cos(two_pi * (x[0] - s)); },
                    [&](const TorusPoint& x) { return SmallVec(-two_pi * std::sin(two_pi * (x[0] - s))); });
  EXPECT_NEAR(critical_constant(v, 64), 1.0, 1e-9);
}

TEST(ArgmaxSet, ExampleSets) {
  const ArgmaxSet m1 = argmax_set(Potential::registered("pendulum"), 1024, 1e-9, 1.0);
  ASSERT_EQ(m1.points.size(), 1u);
  EXPECT_LT(torus_distance(m1.points[0], TorusPoint::wrap(0.0)), 1e-6);
  const ArgmaxSet m2 = argmax_set(Potential::registered("degenerate"), 1024, 1e-9, 0.0);
  ASSERT_EQ(m2.points.size(), 2u);
  EXPECT_LT(m2.distance(TorusPoint::wrap(0.0)), 1e-6);
  EXPECT_LT(m2.distance(TorusPoint::wrap(0.5)), 1e-6);
  EXPECT_NEAR(m2.distance(TorusPoint::wrap(0.2)), 0.2, 1e-6);
  EXPECT_TRUE(argmax_set(Potential::constant(1, 1.0), 64, 1e-9, 1.0).whole_torus);
  EXPECT_THROW(argmax_set(Potential::registered("pendulum"), 256, 1e-9, 5.0), InternalError);
}

TEST(Potential, Oscillation) {
  EXPECT_NEAR(oscillation(Potential::registered("pendulum"), 1024), 2.0, 1e-9);
  EXPECT_NEAR(oscillation(Potential::registered("degenerate"), 1024), 1.0, 1e-9);
}

TEST(Potential, LoadCsv) {
  const auto path = std::filesystem::temp_directory_path() / "ggflow_potential_test.csv";
  {
    std::ofstream out(path);
    out << "# 1,64\n";
    for (int i = 0; i < 64; ++i) out << std::cos(2.0 * std::acos(-1.0) * i / 64.0) << '\n';
  }
  const Potential v = Potential::load_csv(path);
  EXPECT_EQ(v.dim(), 1);
  EXPECT_NEAR(critical_constant(v, 64), 1.0, 1e-12);
  {
    std::ofstream out(path);
    out << "# 1,64\n1\n2\n";
  }
  EXPECT_THROW(Potential::load_csv(path), InvalidInput);
  std::filesystem::remove(path);
}
