#include <catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "tailadapt/adaptive.hpp"
#include "tailadapt/laws.hpp"
#include "tailadapt/quantiles.hpp"
#include "tailadapt/random.hpp"

using namespace tailadapt;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {
Sample draw(const Law& law, std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  return draw_sample(law, n, rng);
}
}  // namespace

TEST_CASE("Sample-quantile branch uses the integer part of n(1-p)") {
  std::vector<double> x;
  for (int i = 1; i <= 10; ++i) x.push_back(static_cast<double>(i));
  const Sample s(x);
  CHECK(quantile_fixed_k(s, 2, 0.5) == s.order_stat(5));
  CHECK(detail::sample_quantile_rank(1000, 0.997) == 3);
  CHECK(detail::sample_quantile_rank(1000, 0.1) == 900);
}

TEST_CASE("Weissman branch at the branch point returns X_{n,k}") {
  const Sample s = draw(CauchyLaw(), 1000, 2);
  for (std::size_t k : {2, 10, 100, 999}) {
    const double p = 1.0 - static_cast<double>(k) / 1000.0;
    CHECK_THAT(quantile_fixed_k(s, k, p), WithinRel(s.order_stat(k), 1e-12));
  }
}

TEST_CASE("Plug-in Pareto quantile grid extrapolates to the true quantile") {
  std::vector<double> x;
  for (int i = 1; i <= 1000; ++i) x.push_back(1.0 / (1.0 - (i - 0.5) / 1000.0));
  const Sample s(x);
  CHECK_THAT(quantile_fixed_k(s, 50, 0.9999), WithinRel(1e4, 0.1));
}

TEST_CASE("quantile_fixed_k validates its arguments") {
  const Sample s = draw(ParetoLaw(), 20, 3);
  CHECK_THROWS_AS(quantile_fixed_k(s, 1, 0.9), argument_error);
  CHECK_THROWS_AS(quantile_fixed_k(s, 21, 0.9), argument_error);
  CHECK_THROWS_AS(quantile_fixed_k(s, 5, 1.0), argument_error);
  CHECK_THROWS_AS(quantile_fixed_k(s, 5, 0.0), argument_error);
  CHECK_NOTHROW(quantile_fixed_k(s, 20, 0.99));
}

TEST_CASE("Quantiles are monotone in p and scale equivariant") {
  std::mt19937_64 gen(4);
  for (int trial = 0; trial < 50; ++trial) {
    const Sample s = draw(HallLaw(), 200, 100 + trial);
    const std::size_t k = 2 + gen() % 198;
    double prev = 0.0;
    for (int j = 1; j < 400; ++j) {
      const double p = j / 400.0;
      const double q = quantile_fixed_k(s, k, p);
      CHECK(q >= prev);
      prev = q;
    }
    std::vector<double> scaled;
    for (double v : s.values()) scaled.push_back(4.0 * v);
    const Sample sc(scaled);
    for (double p : {0.3, 0.9, 0.999}) {
      CHECK_THAT(quantile_fixed_k(sc, k, p), WithinRel(4.0 * quantile_fixed_k(s, k, p), 1e-12));
    }
  }
}

TEST_CASE("Adaptive quantile equals the fixed-k estimator at k_hat") {
  const Sample s = draw(ChangePointParetoLaw(3.0, 1.0, 1000.0), 1000, 5);
  const auto sel = select(s, AdaptiveConfig{});
  REQUIRE(sel.rejected);
  for (double p : {0.5, 0.9, 0.99, 0.999, 0.999999}) {
    CHECK(quantile_adaptive(s, sel, p) == quantile_fixed_k(s, sel.k_hat, p));
  }
  const double p_low = 1.0 - 0.9;
  CHECK(quantile_adaptive(s, sel, p_low) == s.order_stat(900));
}

TEST_CASE("Adaptive quantile without rejection extrapolates from the minimum") {
  AdaptiveConfig c;
  c.critical_value = CriticalValue::fixed(1e9);
  const Sample s = draw(ParetoLaw(), 1000, 6);
  const auto sel = select(s, c);
  for (double p : {0.01, 0.5, 0.99}) {
    const double expected = s.order_stat(1000) * std::pow(1.0 / (1.0 - p), hill(s, 999));
    CHECK_THAT(quantile_adaptive(s, sel, p), WithinRel(expected, 1e-12));
  }
}

TEST_CASE("Adaptive quantile rejects a selection from another sample") {
  const Sample a = draw(ParetoLaw(), 1000, 7), b = draw(ParetoLaw(), 999, 8);
  const auto sel = select(a, AdaptiveConfig{});
  CHECK_THROWS_AS(quantile_adaptive(b, sel, 0.99), argument_error);
}
