#pragma once

#include <cstdint>
#include <span>

namespace ggflow {

// f is piecewise constant: sample i holds on [iΔ, (i+1)Δ), Δ = T/N.

struct LemmaA1Result {
  /// (1/T) ∫ (T - s) f(s) ds
  double hypothesis = 0.0;
  bool hypothesis_holds = false;
  /// |{s : f(s) <= C}|
  double measure = 0.0;
  /// T/2 - 1
  double bound = 0.0;
  /// Vacuously true when the hypothesis fails.
  bool conclusion_holds = true;
};

/// Throws InvalidInput on a negative or non-finite sample, T <= 0 or C <= 0.
LemmaA1Result lemma_a1_check(std::span<const double> f, double horizon, double c);

struct LemmaA2Result {
  double mean = 0.0;
  /// (1/T) |{t : f(t) >= λ}|
  double fraction = 0.0;
  /// (ρ - λ)/(δ - λ)
  double bound = 0.0;
  bool conclusion_holds = false;
};

/// Throws InvalidInput unless 0 <= f <= δ, 0 < λ < ρ < δ and mean(f) >= ρ.
LemmaA2Result lemma_a2_check(std::span<const double> f, double horizon, double delta, double rho, double lambda);

struct LemmaSuiteResult {
  int cases = 0;
  int hypothesis_held = 0;
  int violations = 0;
  /// Smallest (left side - bound) over the cases where the hypothesis held.
  double min_slack = 0.0;
};

/// Random piecewise-constant f rescaled so the hypothesis holds.
LemmaSuiteResult lemma_a1_suite(int cases, std::uint64_t seed);
/// Random admissible f with ρ = mean f and λ drawn in (0, ρ).
LemmaSuiteResult lemma_a2_suite(int cases, std::uint64_t seed);

}  // namespace ggflow
