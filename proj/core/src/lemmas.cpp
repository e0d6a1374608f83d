#include "ggflow/lemmas.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include "ggflow/errors.hpp"

namespace ggflow {

namespace {

constexpr double kSlack = 1e-12;

void check_samples(std::span<const double> f, double horizon) {
  if (f.empty()) throw InvalidInput("lemma check: no samples");
  if (!(horizon > 0.0) || !std::isfinite(horizon)) throw InvalidInput("lemma check: T must be positive");
  for (const double x : f) {
    if (!std::isfinite(x) || x < 0.0) throw InvalidInput("lemma check: samples must be finite and nonnegative");
  }
}

// (1/T) ∫ (T - s) f(s) ds, exact for piecewise-constant f.
double weighted_average(std::span<const double> f, double horizon) {
  const double d = horizon / static_cast<double>(f.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) acc += f[i] * d * (horizon - (static_cast<double>(i) + 0.5) * d);
  return acc / horizon;
}

// Piecewise-constant profiles with plateaus, spikes and zero runs.
std::vector<double> random_profile(std::mt19937_64& rng, std::size_t n, double top) {
  std::uniform_int_distribution<int> kind(0, 3);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<double> f(n);
  switch (kind(rng)) {
    case 0:
      for (double& x : f) x = top * unit(rng);
      break;
    case 1:
      for (double& x : f) x = unit(rng) < 0.5 ? 0.0 : top;
      break;
    case 2: {
      const auto cut = static_cast<std::size_t>(unit(rng) * static_cast<double>(n));
      for (std::size_t i = 0; i < n; ++i) f[i] = (i < cut) == (unit(rng) < 0.9) ? top * unit(rng) : 0.0;
      break;
    }
    default: {
      std::exponential_distribution<double> ex(1.0);
      for (double& x : f) x = std::min(top, top * 0.25 * ex(rng));
      break;
    }
  }
  return f;
}

}  // namespace

LemmaA1Result lemma_a1_check(std::span<const double> f, double horizon, double c) {
  check_samples(f, horizon);
  if (!(c > 0.0) || !std::isfinite(c)) throw InvalidInput("lemma A.1: C must be positive");
  LemmaA1Result r;
  r.hypothesis = weighted_average(f, horizon);
  r.hypothesis_holds = r.hypothesis <= c * (1.0 + kSlack);
  const double d = horizon / static_cast<double>(f.size());
  r.measure = d * static_cast<double>(std::count_if(f.begin(), f.end(), [c](double x) { return x <= c; }));
  r.bound = horizon / 2.0 - 1.0;
  if (r.hypothesis_holds) r.conclusion_holds = r.measure >= r.bound - kSlack * std::max(1.0, horizon);
  return r;
}

LemmaA2Result lemma_a2_check(std::span<const double> f, double horizon, double delta, double rho, double lambda) {
  check_samples(f, horizon);
  if (!(0.0 < lambda && lambda < rho && rho < delta)) throw InvalidInput("lemma A.2: need 0 < λ < ρ < δ");
  if (std::any_of(f.begin(), f.end(), [delta](double x) { return x > delta; })) {
    throw InvalidInput("lemma A.2: samples exceed δ");
  }
  LemmaA2Result r;
  double s = 0.0;
  for (const double x : f) s += x;
  r.mean = s / static_cast<double>(f.size());
  if (r.mean < rho * (1.0 - kSlack)) throw InvalidInput("lemma A.2: mean of f is below ρ");
  const auto hits = std::count_if(f.begin(), f.end(), [lambda](double x) { return x >= lambda; });
  r.fraction = static_cast<double>(hits) / static_cast<double>(f.size());
  r.bound = (rho - lambda) / (delta - lambda);
  r.conclusion_holds = r.fraction >= r.bound - kSlack;
  return r;
}

LemmaSuiteResult lemma_a1_suite(int cases, std::uint64_t seed) {
  if (cases < 1) throw InvalidInput("lemma suite: need at least one case");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> horizon_d(0.5, 20.0);
  std::uniform_real_distribution<double> c_d(0.05, 5.0);
  std::uniform_real_distribution<double> fill_d(0.05, 1.0);
  std::uniform_int_distribution<std::size_t> n_d(8, 400);
  LemmaSuiteResult out;
  out.min_slack = std::numeric_limits<double>::infinity();
  for (int i = 0; i < cases; ++i) {
    const double horizon = horizon_d(rng);
    const double c = c_d(rng);
    std::vector<double> f = random_profile(rng, n_d(rng), 1.0);
    // Rescale so that the hypothesis integral equals a random fraction of C.
    const double h = weighted_average(f, horizon);
    if (h > 0.0) {
      const double k = fill_d(rng) * c / h;
      for (double& x : f) x *= k;
    }
    const LemmaA1Result r = lemma_a1_check(f, horizon, c);
    ++out.cases;
    if (!r.hypothesis_holds) continue;
    ++out.hypothesis_held;
    if (!r.conclusion_holds) ++out.violations;
    out.min_slack = std::min(out.min_slack, r.measure - r.bound);
  }
  return out;
}

LemmaSuiteResult lemma_a2_suite(int cases, std::uint64_t seed) {
  if (cases < 1) throw InvalidInput("lemma suite: need at least one case");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> horizon_d(0.5, 20.0);
  std::uniform_real_distribution<double> delta_d(0.5, 5.0);
  std::uniform_real_distribution<double> open_d(0.0, 1.0);
  std::uniform_int_distribution<std::size_t> n_d(8, 400);
  LemmaSuiteResult out;
  out.min_slack = std::numeric_limits<double>::infinity();
  while (out.cases < cases) {
    const double horizon = horizon_d(rng);
    const double delta = delta_d(rng);
    const std::vector<double> f = random_profile(rng, n_d(rng), delta);
    double s = 0.0;
    for (const double x : f) s += x;
    const double rho = s / static_cast<double>(f.size());
    if (!(rho > 0.0 && rho < delta)) continue;
    double lambda = 0.0;
    while (!(lambda > 0.0 && lambda < rho)) lambda = rho * open_d(rng);
    const LemmaA2Result r = lemma_a2_check(f, horizon, delta, rho, lambda);
    ++out.cases;
    ++out.hypothesis_held;
    if (!r.conclusion_holds) ++out.violations;
    out.min_slack = std::min(out.min_slack, r.fraction - r.bound);
  }
  return out;
}

}  // namespace ggflow
