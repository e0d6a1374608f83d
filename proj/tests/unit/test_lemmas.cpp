#include <gtest/gtest.h>

#include <vector>

#include "ggflow/errors.hpp"
#include "ggflow/lemmas.hpp"

using namespace ggflow;

TEST(LemmaA1, ConstantFunction) {
  const double c = 1.5;
  const std::vector<double> f(100, c);
  const LemmaA1Result r = lemma_a1_check(f, 2.0, c);
  EXPECT_NEAR(r.hypothesis, c, 1e-12);
  EXPECT_TRUE(r.hypothesis_holds);
  EXPECT_NEAR(r.measure, 2.0, 1e-12);
  EXPECT_NEAR(r.bound, 0.0, 1e-15);
  EXPECT_TRUE(r.conclusion_holds);
}

TEST(LemmaA1, ZeroFunction) {
  for (double horizon : {0.5, 4.0, 30.0}) {
    const std::vector<double> f(64, 0.0);
    const LemmaA1Result r = lemma_a1_check(f, horizon, 0.1);
    EXPECT_TRUE(r.hypothesis_holds);
    EXPECT_NEAR(r.measure, horizon, 1e-12);
    EXPECT_TRUE(r.conclusion_holds);
  }
}

TEST(LemmaA1, HypothesisFailureIsVacuous) {
  const std::vector<double> f(10, 5.0);
  const LemmaA1Result r = lemma_a1_check(f, 10.0, 1.0);
  EXPECT_FALSE(r.hypothesis_holds);
  EXPECT_TRUE(r.conclusion_holds);
}

TEST(LemmaA1, Errors) {
  EXPECT_THROW(lemma_a1_check(std::vector<double>{1.0, -0.1}, 1.0, 1.0), InvalidInput);
  EXPECT_THROW(lemma_a1_check(std::vector<double>{1.0}, 0.0, 1.0), InvalidInput);
  EXPECT_THROW(lemma_a1_check(std::vector<double>{1.0}, 1.0, 0.0), InvalidInput);
}

TEST(LemmaA1, RandomSuite) {
  const LemmaSuiteResult r = lemma_a1_suite(1000, 42);
  EXPECT_EQ(r.cases, 1000);
  EXPECT_EQ(r.hypothesis_held, 1000);
  EXPECT_EQ(r.violations, 0);
}

TEST(LemmaA2, ConstantAtMean) {
  const std::vector<double> f(50, 0.4);
  const LemmaA2Result r = lemma_a2_check(f, 3.0, 1.0, 0.4, 0.2);
  EXPECT_EQ(r.fraction, 1.0);
  EXPECT_TRUE(r.conclusion_holds);
}

TEST(LemmaA2, IndicatorSweep) {
  // f = δ on [0, ρT/δ): fraction ρ/δ for every λ in (0, ρ).
  const double delta = 2.0, rho = 0.5;
  std::vector<double> f(400, 0.0);
  for (std::size_t i = 0; i < 100; ++i) f[i] = delta;
  for (int j = 1; j < 50; ++j) {
    const double lambda = rho * j / 50.0;
    const LemmaA2Result r = lemma_a2_check(f, 10.0, delta, rho, lambda);
    EXPECT_NEAR(r.fraction, rho / delta, 1e-15);
    EXPECT_NEAR(r.bound, (rho - lambda) / (delta - lambda), 1e-15);
    EXPECT_TRUE(r.conclusion_holds);
  }
}

TEST(LemmaA2, Errors) {
  const std::vector<double> f(10, 0.5);
  EXPECT_THROW(lemma_a2_check(f, 1.0, 1.0, 0.6, 0.1), InvalidInput);  // mean below ρ
  EXPECT_THROW(lemma_a2_check(f, 1.0, 1.0, 0.4, 0.5), InvalidInput);  // λ ≥ ρ
  EXPECT_THROW(lemma_a2_check(f, 1.0, 0.4, 0.3, 0.1), InvalidInput);  // f > δ
}

TEST(LemmaA2, RandomSuite) {
  const LemmaSuiteResult r = lemma_a2_suite(1000, 43);
  EXPECT_EQ(r.cases, 1000);
  EXPECT_EQ(r.violations, 0);
  EXPECT_GE(r.min_slack, -1e-12);
}
