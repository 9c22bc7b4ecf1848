#include <catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>

#include "tailadapt/adaptive.hpp"
#include "tailadapt/changepoint.hpp"
#include "tailadapt/divergence.hpp"
#include "tailadapt/laws.hpp"
#include "tailadapt/random.hpp"

using namespace tailadapt;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {
const double e = std::exp(1.0);

Sample draw(const Law& law, std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  return draw_sample(law, n, rng);
}

Sample powered(const Sample& s, double c) {
  std::vector<double> x;
  for (double v : s.values()) x.push_back(std::pow(v, c));
  return Sample(std::move(x));
}

// x - log(1 + x) evaluated directly; fine away from 0
double g_direct(double x) { return x - std::log1p(x); }
}  // namespace

TEST_CASE("t_pair reference value") {
  const Sample s({e * e, e, 1.0});
  const auto p = t_pair(s, 1.0, e);
  CHECK_THAT(p.t1, WithinAbs(g_direct(1.0 / 3.0), 1e-14));
  CHECK_THAT(p.t2, WithinAbs(g_direct(-1.0 / 3.0), 1e-14));
  CHECK(p.total == p.t1 + p.t2);
  CHECK_THAT(p.total, WithinAbs(0.1178, 5e-5));
  CHECK_THROWS_AS(t_pair(s, 2.0, 2.0), argument_error);
}

TEST_CASE("t_pair vanishes when the three estimates agree") {
  // band, tail and full estimates are all 1 at t = 1, tau = e
  const Sample s({e * e, std::exp(0.5), std::exp(0.5), 1.0});
  const auto p = t_pair(s, 1.0, e);
  CHECK_THAT(p.t1, WithinAbs(0.0, 1e-20));
  CHECK_THAT(p.t2, WithinAbs(0.0, 1e-20));
  CHECK_THAT(p.total, WithinAbs(0.0, 1e-20));
}

TEST_CASE("t_pair_at_ranks agrees with t_pair at order statistics") {
  const Sample s = draw(ParetoLaw(1.0), 300, 21);
  for (std::size_t m : {20, 100, 250}) {
    for (std::size_t k = m / 4 + 1; k < m; k += 7) {
      const auto a = t_pair_at_ranks(s, m, k);
      const auto b = t_pair(s, s.order_stat(m), s.order_stat(k));
      CHECK_THAT(a.total, WithinRel(b.total, 1e-9) || WithinAbs(b.total, 1e-12));
      CHECK(a.t1 >= 0.0);
      CHECK(a.t2 >= 0.0);
      CHECK(a.total == a.t1 + a.t2);
    }
  }
}

TEST_CASE("t_pair matches the change-point likelihood ratio at its maximum") {
  const Sample s = draw(ParetoLaw(1.0), 200, 22);
  const double t = 1.5, tau = 6.0;
  const double th_t = theta_local(s, t), th_tau = theta_local(s, tau), th_b = theta_band(s, t, tau);
  const double lr = changepoint_loglik_ratio(s, t, tau, th_b, th_tau, th_t);
  CHECK_THAT(t_pair(s, t, tau).total, WithinRel(lr, 1e-10));
}

TEST_CASE("Statistics are invariant under power transforms") {
  const Sample s = draw(ParetoLaw(1.0), 400, 23);
  for (double c : {0.3, 2.0, 7.5}) {
    const Sample p = powered(s, c);
    for (std::size_t k : {30, 60, 90}) {
      const auto a = t_pair_at_ranks(s, 120, k), b = t_pair_at_ranks(p, 120, k);
      CHECK_THAT(b.t1, WithinAbs(a.t1, 1e-12 * std::fmax(1.0, a.t1)));
      CHECK_THAT(b.t2, WithinAbs(a.t2, 1e-12 * std::fmax(1.0, a.t2)));
    }
  }
}

TEST_CASE("Window bounds and singleton window") {
  CHECK(window_bounds(200, 0.25, 0.05) == std::pair<std::size_t, std::size_t>{50, 190});
  CHECK(window_bounds(20, 0.25, 0.05) == std::pair<std::size_t, std::size_t>{5, 19});
  // m = 4, rho = delta = 1/3: ceil(4/3) = 2 = floor(8/3)
  const Sample s = draw(ParetoLaw(1.0), 10, 24);
  const auto w = t_window(s, 4, 1.0 / 3.0, 1.0 / 3.0, true);
  REQUIRE(w.k_lo == 2);
  REQUIRE(w.k_hi == 2);
  CHECK(w.best_k == 2);
  CHECK(w.t_max == t_pair_at_ranks(s, 4, 2).total);
  CHECK_THROWS_AS(t_window(s, 1, 0.25, 0.05), config_error);
  CHECK_THROWS_AS(t_window(s, 5, 0.5, 0.05), config_error);
}

TEST_CASE("Window maximum and arg max agree with the trace") {
  const Sample s = draw(ChangePointParetoLaw(3.0, 1.0, 1000.0), 1000, 25);
  const auto w = t_window(s, 400, 0.25, 0.05, true);
  REQUIRE(w.per_k);
  double mx = 0.0, best2 = -1.0;
  std::size_t arg = 0;
  for (const auto& [k, p] : *w.per_k) {
    mx = std::fmax(mx, p.total);
    if (p.t2 > best2) {
      best2 = p.t2;
      arg = k;
    }
  }
  CHECK(w.t_max == mx);
  CHECK(w.best_k == arg);
  CHECK(w.k_lo <= w.best_k);
  CHECK(w.best_k <= w.k_hi);
}

TEST_CASE("Widening the window never lowers the maximum") {
  const Sample s = draw(ParetoLaw(1.0), 500, 26);
  for (std::size_t m : {40, 200, 480}) {
    const double narrow = t_window(s, m, 0.3, 0.2).t_max;
    CHECK(t_window(s, m, 0.25, 0.05).t_max >= narrow);
    CHECK(t_window(s, m, 0.1, 0.01).t_max >= t_window(s, m, 0.25, 0.05).t_max);
  }
}

TEST_CASE("Null statistic rarely exceeds the critical value") {
  std::size_t below = 0;
  const std::size_t reps = 300;
  for (std::size_t j = 0; j < reps; ++j) {
    Rng rng = Rng::stream(27, j);
    below += t_window(draw_sample(ParetoLaw(1.0), 1000, rng), 200, 0.25, 0.05).t_max < 10.0;
  }
  CHECK(static_cast<double>(below) / reps >= 0.99);
}

TEST_CASE("Change point is located by the tail component") {
  const ChangePointParetoLaw law(3.0, 1.0, 1000.0);
  std::vector<double> ks;
  for (std::size_t j = 0; j < 200; ++j) {
    Rng rng = Rng::stream(28, j);
    ks.push_back(static_cast<double>(t_window(draw_sample(law, 1000, rng), 400, 0.25, 0.05).best_k));
  }
  std::nth_element(ks.begin(), ks.begin() + 100, ks.end());
  CHECK(std::fabs(ks[100] - 100.0) <= 30.0);
}

TEST_CASE("build_grid reference values") {
  const auto g = build_grid(7, 3);
  REQUIRE(g.size() == 3);
  CHECK(g[0].rank == 2);
  CHECK(g[1].rank == 4);
  CHECK(g[2].rank == 7);
  const auto g5 = build_grid(1000, 200);
  REQUIRE(g5.size() == 200);
  for (const auto& p : g5) CHECK(p.rank == 5 * p.index);
  const auto g1 = build_grid(1000, 1000);
  for (const auto& p : g1) CHECK(p.rank == p.index);
  const auto dup = build_grid(5, 5);
  CHECK(dup.size() == 5);
  const auto small = build_grid(3, 2);
  CHECK(small.back().rank == 3);
  CHECK_THROWS_AS(build_grid(10, 11), config_error);
  CHECK_THROWS_AS(build_grid(10, 0), config_error);
}

TEST_CASE("Feasibility validation") {
  AdaptiveConfig c;
  CHECK(is_feasible(c, 1000));
  CHECK_THROWS_AS(validate(c, 10), config_error);
  c.rho = 0.5;
  CHECK_FALSE(is_feasible(c, 1000));
  c = AdaptiveConfig{};
  c.k0 = 1;
  CHECK_FALSE(is_feasible(c, 1000));
  const auto d = config_for_sample_size(200);
  CHECK(is_feasible(d, 200));
  CHECK(d.k0 >= 10);
  CHECK(config_for_sample_size(1000).k0 == 50);
  CHECK(CriticalValue::mu_log_n(2.0).resolve(100) == 2.0 * std::log(100.0));
}

TEST_CASE("select on a small sample is a configuration error") {
  const Sample s = draw(ParetoLaw(1.0), 10, 29);
  CHECK_THROWS_AS(select(s, AdaptiveConfig{}), config_error);
}

TEST_CASE("select without rejection uses the whole sample") {
  AdaptiveConfig c;
  c.critical_value = CriticalValue::fixed(1e9);
  const Sample s = draw(ParetoLaw(1.0), 1000, 30);
  const auto sel = select(s, c);
  CHECK_FALSE(sel.rejected);
  CHECK(sel.k_hat == 1000);
  CHECK(sel.m_hat == 1000);
  CHECK(sel.tau_hat == s.order_stat(1000));
  CHECK(sel.theta_hat == hill(s, 999));
  CHECK(sel.trace.size() == 151);
}

TEST_CASE("select after a rejection") {
  const Sample s = draw(ChangePointParetoLaw(3.0, 1.0, 1000.0), 1000, 31);
  const auto sel = select(s, AdaptiveConfig{});
  REQUIRE(sel.rejected);
  const auto [lo, hi] = window_bounds(sel.m_hat, 0.25, 0.05);
  CHECK(lo <= sel.k_hat);
  CHECK(sel.k_hat <= hi);
  CHECK(sel.tau_hat == s.order_stat(sel.k_hat));
  CHECK(sel.theta_hat == hill(s, sel.k_hat));
  CHECK(sel.trace.back().first == sel.m_hat);
  CHECK(sel.trace.back().second > 10.0);
  for (std::size_t i = 0; i + 1 < sel.trace.size(); ++i) CHECK(sel.trace[i].second <= 10.0);
}

TEST_CASE("Change-point selection recovers the change rank") {
  const ChangePointParetoLaw law(3.0, 1.0, 1000.0);
  std::vector<double> ks;
  std::size_t rejected = 0;
  for (std::size_t j = 0; j < 500; ++j) {
    Rng rng = Rng::stream(32, j);
    const auto sel = select(draw_sample(law, 1000, rng), AdaptiveConfig{});
    rejected += sel.rejected;
    ks.push_back(static_cast<double>(sel.k_hat));
  }
  std::nth_element(ks.begin(), ks.begin() + 250, ks.end());
  CHECK(rejected >= 450);
  CHECK(ks[250] >= 70.0);
  CHECK(ks[250] <= 130.0);
}

TEST_CASE("Raising the critical value never moves the first rejection earlier") {
  for (std::uint64_t seed = 40; seed < 50; ++seed) {
    const Sample s = draw(*make_law("hall"), 1000, seed);
    std::size_t prev = 0;
    for (double z : {2.0, 5.0, 8.0, 10.0, 15.0, 30.0}) {
      AdaptiveConfig c;
      c.critical_value = CriticalValue::fixed(z);
      const auto sel = select(s, c);
      CHECK(sel.m_hat >= prev);
      prev = sel.m_hat;
    }
  }
}

TEST_CASE("select is power-transform invariant and deterministic") {
  for (std::uint64_t seed = 60; seed < 70; ++seed) {
    const Sample s = draw(CauchyLaw(), 1000, seed);
    const auto a = select(s, AdaptiveConfig{});
    const auto again = select(s, AdaptiveConfig{});
    CHECK(a.k_hat == again.k_hat);
    CHECK(a.theta_hat == again.theta_hat);
    for (double c : {0.5, 3.0}) {
      const auto b = select(powered(s, c), AdaptiveConfig{});
      CHECK(b.m_hat == a.m_hat);
      CHECK(b.k_hat == a.k_hat);
      CHECK(b.rejected == a.rejected);
      CHECK_THAT(b.theta_hat, WithinRel(c * a.theta_hat, 1e-10));
    }
  }
}

TEST_CASE("max_statistic dominates every visited window") {
  const Sample s = draw(ParetoLaw(1.0), 1000, 33);
  AdaptiveConfig c;
  c.critical_value = CriticalValue::fixed(1e9);
  const auto sel = select(s, c);
  double mx = 0.0;
  for (const auto& [r, t] : sel.trace) mx = std::fmax(mx, t);
  CHECK(max_statistic(s, c) == mx);
}
