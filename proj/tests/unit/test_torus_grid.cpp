#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include "ggflow/errors.hpp"
#include "ggflow/torus_grid.hpp"

using namespace ggflow;

TEST(Wrap, ReducesModuloOne) {
  EXPECT_DOUBLE_EQ(TorusPoint::wrap(1.25)[0], 0.25);
  EXPECT_NEAR(TorusPoint::wrap(-0.1)[0], 0.9, 1e-15);
  const TorusPoint p = TorusPoint::wrap(0.5, 2.0);
  EXPECT_EQ(p.dim(), 2);
  EXPECT_DOUBLE_EQ(p[0], 0.5);
  EXPECT_DOUBLE_EQ(p[1], 0.0);
}

TEST(Wrap, StaysInHalfOpenInterval) {
  for (double x : {-1e-18, -0.0, 1.0, 3.0, -2.0, 1.0 - 1e-17, -1e-300}) {
    const double c = TorusPoint::wrap(x)[0];
    EXPECT_GE(c, 0.0) << x;
    EXPECT_LT(c, 1.0) << x;
  }
}

TEST(Wrap, Idempotent) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> d(-10.0, 10.0);
  for (int i = 0; i < 1000; ++i) {
    const TorusPoint a = TorusPoint::wrap(d(rng), d(rng));
    const std::vector<double> raw{a[0], a[1]};
    EXPECT_EQ(wrap(raw), a);
  }
}

TEST(Wrap, RejectsNonFinite) {
  EXPECT_THROW(TorusPoint::wrap(std::numeric_limits<double>::quiet_NaN()), InvalidInput);
  EXPECT_THROW(TorusPoint::wrap(0.1, std::numeric_limits<double>::infinity()), InvalidInput);
  const std::vector<double> three{0.1, 0.2, 0.3};
  EXPECT_THROW(wrap(three), InvalidInput);
}

TEST(TorusDistance, Examples) {
  EXPECT_NEAR(torus_distance(TorusPoint::wrap(0.1), TorusPoint::wrap(0.9)), 0.2, 1e-15);
  EXPECT_EQ(torus_distance(TorusPoint::wrap(0.3), TorusPoint::wrap(0.3)), 0.0);
  EXPECT_NEAR(torus_distance(TorusPoint::wrap(0.0, 0.0), TorusPoint::wrap(0.5, 0.5)), std::sqrt(0.5), 1e-15);
  EXPECT_THROW(torus_distance(TorusPoint::wrap(0.1), TorusPoint::wrap(0.1, 0.1)), InvalidInput);
}

TEST(TorusDistance, SymmetricAndTriangle) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> d(0.0, 1.0);
  for (int dim : {1, 2}) {
    for (int i = 0; i < 1000; ++i) {
      auto draw = [&] { return dim == 1 ? TorusPoint::wrap(d(rng)) : TorusPoint::wrap(d(rng), d(rng)); };
      const TorusPoint a = draw(), b = draw(), c = draw();
      EXPECT_EQ(torus_distance(a, b), torus_distance(b, a));
      EXPECT_LE(torus_distance(a, c), torus_distance(a, b) + torus_distance(b, c) + 1e-15);
    }
  }
}

TEST(SetDistance, Examples) {
  const std::vector<TorusPoint> s{TorusPoint::wrap(0.0), TorusPoint::wrap(0.5)};
  EXPECT_NEAR(set_distance(TorusPoint::wrap(0.3), s), 0.2, 1e-15);
  EXPECT_EQ(set_distance(TorusPoint::wrap(0.5), s), 0.0);
  const std::vector<TorusPoint> z{TorusPoint::wrap(0.0)};
  EXPECT_NEAR(set_distance(TorusPoint::wrap(0.9), z), 0.1, 1e-15);
  EXPECT_THROW(set_distance(TorusPoint::wrap(0.9), std::vector<TorusPoint>{}), InvalidInput);
}

TEST(PeriodicGrid, RequiresEightCells) {
  EXPECT_THROW(PeriodicGrid(1, 7), InvalidInput);
  EXPECT_THROW(PeriodicGrid(3, 16), InvalidInput);
  EXPECT_NO_THROW(PeriodicGrid(2, 8));
}

TEST(PeriodicGrid, IndexingIsPeriodic) {
  PeriodicGrid g = PeriodicGrid::sample(2, 8, [](const TorusPoint& x) { return 10 * x[0] + x[1]; });
  EXPECT_EQ(g.at(-1, 0), g.at(7, 0));
  EXPECT_EQ(g.at(8, 9), g.at(0, 1));
  EXPECT_EQ(g.flat(3, -8), g.flat(3, 0));
  const auto ij = g.unflat(g.flat(5, 6));
  EXPECT_EQ(ij[0], 5);
  EXPECT_EQ(ij[1], 6);
  EXPECT_EQ(g.nearest_node(TorusPoint::wrap(0.99, 0.01)), g.flat(0, 0));
}

TEST(Interpolate, Examples) {
  PeriodicGrid g(1, 8);
  g.values()[3] = 0.0;
  g.values()[4] = 1.0;
  EXPECT_DOUBLE_EQ(interpolate(g, TorusPoint::wrap(3.5 / 8)), 0.5);
  EXPECT_DOUBLE_EQ(interpolate(g, g.node(4)), 1.0);
  const PeriodicGrid c = PeriodicGrid::sample(2, 16, [](const TorusPoint&) { return 2.5; });
  EXPECT_DOUBLE_EQ(interpolate(c, TorusPoint::wrap(0.123, 0.987)), 2.5);
}

TEST(Interpolate, NodalExactAndBounded) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  PeriodicGrid g(2, 16);
  for (double& v : g.values()) v = d(rng);
  for (std::size_t k = 0; k < g.size(); ++k) EXPECT_EQ(interpolate(g, g.node(k)), g.values()[k]);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 2000; ++i) {
    const TorusPoint x = TorusPoint::wrap(u(rng), u(rng));
    const long i0 = static_cast<long>(std::floor(x[0] * 16)), j0 = static_cast<long>(std::floor(x[1] * 16));
    const double corners[] = {g.at(i0, j0), g.at(i0 + 1, j0), g.at(i0, j0 + 1), g.at(i0 + 1, j0 + 1)};
    const double v = interpolate(g, x);
    EXPECT_GE(v, *std::min_element(std::begin(corners), std::end(corners)) - 1e-15);
    EXPECT_LE(v, *std::max_element(std::begin(corners), std::end(corners)) + 1e-15);
  }
}

TEST(Interpolate, TrigonometricAccuracy) {
  const double two_pi = 2.0 * std::acos(-1.0);
  auto f = [&](const TorusPoint& x) { return std::cos(two_pi * x[0]) + std::sin(two_pi * x[1]); };
  const PeriodicGrid g = PeriodicGrid::sample(2, 1024, f);
  const PeriodicGrid g1 = PeriodicGrid::sample(1, 1024, [&](const TorusPoint& x) { return std::sin(two_pi * x[0]); });
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double err = 0.0;
  for (int i = 0; i < 10000; ++i) {
    const TorusPoint x = TorusPoint::wrap(u(rng), u(rng));
    err = std::max(err, std::fabs(interpolate(g, x) - f(x)));
    const TorusPoint y = TorusPoint::wrap(u(rng));
    err = std::max(err, std::fabs(interpolate(g1, y) - std::sin(two_pi * y[0])));
  }
  EXPECT_LE(err, 1e-4);
}
