#include <catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include <boost/multiprecision/cpp_bin_float.hpp>

#include "tailadapt/divergence.hpp"
#include "tailadapt/excess_divergence.hpp"
#include "tailadapt/laws.hpp"
#include "tailadapt/tail_functionals.hpp"

using namespace tailadapt;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

TEST_CASE("kl_pareto reference values") {
  CHECK(kl_pareto(1.0, 1.0) == 0.0);
  CHECK_THAT(kl_pareto(2.0, 1.0), WithinAbs(1.0 - std::log(2.0), 1e-15));
  CHECK(kl_pareto(0.0, 1.0) == kInfinity);
  CHECK(kl_pareto(1.0, 0.0) == kInfinity);
  CHECK_THAT(kl_pareto(0.5, 1.0), WithinAbs(-0.5 - std::log(0.5), 1e-15));
  CHECK_THROWS_AS(kl_pareto(-1.0, 1.0), domain_error);
  CHECK_THROWS_AS(kl_pareto(std::nan(""), 1.0), domain_error);
}

TEST_CASE("g_function is accurate near zero") {
  using big = boost::multiprecision::cpp_bin_float_50;
  for (double x : {1e-12, -3e-9, 5e-7, -9.9e-5, 1.01e-4, 2e-3, -0.5, 3.0}) {
    const big xb = x;
    const double ref = static_cast<double>(xb - boost::multiprecision::log1p(xb));
    CHECK_THAT(g_function(x), WithinRel(ref, 1e-12));
  }
  CHECK_THROWS(g_function(-1.0));
}

TEST_CASE("kl_pareto depends only on the ratio") {
  std::mt19937_64 gen(3);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  for (int i = 0; i < 200; ++i) {
    const double a = std::exp(u(gen)), b = std::exp(u(gen)), c = std::exp2(std::round(u(gen)));
    CHECK_THAT(kl_pareto(c * a, c * b), WithinRel(kl_pareto(a, b), 1e-12));
  }
}

TEST_CASE("rho_star reference values") {
  CHECK(rho_star(1.0, 1.0) == 0.0);
  CHECK_THAT(rho_star(2.0, 1.0), WithinAbs(std::log(2.0), 1e-15));
  CHECK_THAT(rho_star(0.5, 2.0), WithinAbs(1.5, 1e-15));
}

TEST_CASE("Chain bound for square-root divergences") {
  std::mt19937_64 gen(11);
  std::uniform_real_distribution<double> step(-0.08, 0.08);
  int checked = 0;
  for (int trial = 0; trial < 2000; ++trial) {
    std::vector<double> th{std::exp(step(gen) * 20)};
    const int m = 2 + static_cast<int>(gen() % 6);
    for (int i = 0; i < m; ++i) th.push_back(th.back() * std::exp(step(gen)));
    double s = 0.0;
    for (std::size_t i = 0; i + 1 < th.size(); ++i) s += std::sqrt(kl_pareto(th[i], th[i + 1]));
    if (s > 1.0 / 3.0) continue;
    ++checked;
    CHECK(std::sqrt(kl_pareto(th.front(), th.back())) <= 1.5 * s + 1e-15);
  }
  CHECK(checked > 1000);
}

TEST_CASE("Excess divergences vanish for an exact Pareto law") {
  CHECK_THAT(kl_excess_vs_pareto(ParetoLaw(1.0), 5.0, 1.0), WithinAbs(0.0, 1e-8));
  CHECK_THAT(chi2_excess_vs_pareto(ParetoLaw(2.0), 3.0, 2.0), WithinAbs(0.0, 1e-8));
}

TEST_CASE("Fitted index minimises the excess KL divergence") {
  const GpdLaw gpd;
  const double t = 10.0;
  // independent closed form of the fitted index for this law
  const double theta_t = (1.0 + t) * std::log1p(1.0 / t);
  CHECK_THAT(theta_fit(gpd, t), WithinAbs(theta_t, 1e-9));
  const double k0 = kl_excess_vs_pareto(gpd, t, theta_t);
  for (double d : {-0.2, -0.05, -0.01, -1e-3, 1e-3, 0.01, 0.05, 0.2}) {
    CHECK(kl_excess_vs_pareto(gpd, t, theta_t + d) >= k0 - 1e-8);
  }
}

TEST_CASE("Log-perturbed Pareto KL decreases along growing thresholds") {
  const LogPerturbedParetoLaw law;
  const double e = std::exp(1.0);
  const double a = kl_excess_vs_pareto(law, e * e, 1.0);
  const double b = kl_excess_vs_pareto(law, std::pow(e, 4), 1.0);
  const double c = kl_excess_vs_pareto(law, std::pow(e, 8), 1.0);
  CHECK(a > 0.0);
  CHECK(std::isfinite(a));
  CHECK(a > b);
  CHECK(b > c);
}

TEST_CASE("KL and chi-square are sandwiched") {
  for (const auto& name : law_names()) {
    const auto law = make_law(name);
    for (double t : {5.0, 20.0, 300.0}) {
      const double th = theta_fit(*law, t);
      for (double theta : {th, 0.9 * th, 1.3 * th}) {
        const auto chi = chi2_excess_vs_pareto_detailed(*law, t, theta);
        if (chi.diverged) continue;
        const double kl = kl_excess_vs_pareto(*law, t, theta);
        CHECK(kl >= 0.0);
        CHECK(kl <= std::log1p(chi.value) + 2e-8);
      }
    }
  }
  const HallLaw hall;
  const double th = theta_fit(hall, 20.0);
  CHECK(std::log1p(chi2_excess_vs_pareto(hall, 20.0, th)) >= kl_excess_vs_pareto(hall, 20.0, th));
}

TEST_CASE("Chi-square reports divergence for a too light Pareto reference") {
  // f_t^2 / p decays like x^{-2 + 1/theta - ...}; theta = 0.4 against a unit tail diverges
  const auto r = chi2_excess_vs_pareto_detailed(CauchyLaw(), 5.0, 0.4);
  CHECK(r.diverged);
  CHECK(r.value == kInfinity);
  CHECK_FALSE(r.diagnostic.empty());
}

TEST_CASE("Chi-square is bounded by the hazard-shape proximity bound") {
  const LogPerturbedParetoLaw law;
  for (double t : {20.0, 100.0, 1e3, 1e5, 1e8}) {
    const auto p = tail_proximity(law, t, theta_fit(law, t));
    if (t >= 100.0) CHECK(std::isfinite(p.bound));
    CHECK(p.chi2 <= p.bound);
  }
}

TEST_CASE("Excess divergences validate their arguments") {
  CHECK_THROWS_AS(kl_excess_vs_pareto(ParetoLaw(), 0.5, 1.0), domain_error);
  CHECK_THROWS_AS(kl_excess_vs_pareto(ParetoLaw(), 2.0, 0.0), domain_error);
  CHECK_THROWS_AS(chi2_excess_vs_pareto(ParetoLaw(), 2.0, -1.0), domain_error);
}
