#pragma once

#include <cmath>
#include <cstddef>
#include <string>

#include "tailadapt/divergence.hpp"
#include "tailadapt/errors.hpp"
#include "tailadapt/excess_divergence.hpp"
#include "tailadapt/laws.hpp"
#include "tailadapt/numeric.hpp"
#include "tailadapt/sample.hpp"

namespace tailadapt {

/// Hazard shape alpha_F(x) = (1 - F(x)) / (x f(x)).
inline double alpha_F(const Law& law, double x) {
  if (!(x > law.support_left())) {
    throw domain_error("alpha_F: x = " + std::to_string(x) + " outside the open support of " + law.name());
  }
  if (!(law.sf(x) > 0.0)) throw domain_error("alpha_F: no mass above x");
  return law.alpha(x);
}

/// Fitted Pareto index as the mean log excess, int_1^inf log x F_t(dx),
/// computed as int_1^inf (1 - F_t(x)) / x dx.
inline double theta_fit_quadrature(const Law& law, double t) {
  detail::check_threshold(law, t, "theta_fit");
  const double log_sf_t = law.log_sf(t);
  const auto r = numeric::integrate_half_line(
      [&](double x) { return std::exp(law.log_sf(t * x) - log_sf_t) / x; }, detail::excess_breaks(law, t));
  if (!detail::within_tolerance(r)) {
    throw numeric_error("theta_fit: quadrature did not converge for " + law.name() + " at t = " + std::to_string(t),
                        r.error);
  }
  return r.value;
}

/// Fitted Pareto index as the F_t-mean of alpha_F over [t, inf).
inline double theta_fit_mean_alpha(const Law& law, double t) {
  detail::check_threshold(law, t, "theta_fit_mean_alpha");
  const double log_sf_t = law.log_sf(t);
  const auto r = numeric::integrate_half_line([&](double x) {
    const double lf = detail::log_excess_pdf(law, t, log_sf_t, x);
    if (lf == -kInfinity) return 0.0;
    return law.alpha(t * x) * std::exp(lf);
  }, detail::excess_breaks(law, t));
  if (!detail::within_tolerance(r)) {
    throw numeric_error("theta_fit_mean_alpha: quadrature did not converge", r.error);
  }
  return r.value;
}

/// Index of the Pareto law closest to the excess law F_t in
/// Kullback-Leibler divergence. Closed form where the law has one.
inline double theta_fit(const Law& law, double t) {
  detail::check_threshold(law, t, "theta_fit");
  if (auto closed = law.theta_fit_closed(t)) return *closed;
  return theta_fit_quadrature(law, t);
}

/// (1/k) sum_{i<=k} alpha_F(X_{n,i}): plug-in approximation of the fitted
/// index at X_{n,k} for a sample drawn from a known law.
inline double theta_fit_empirical(const Sample& sample, std::size_t k, const Law& law) {
  if (k < 1 || k > sample.size()) throw argument_error("theta_fit_empirical: k outside [1, n]");
  // running mean, exact when all terms are equal
  double mean = 0.0;
  for (std::size_t i = 1; i <= k; ++i) mean += (alpha_F(law, sample.order_stat(i)) - mean) / static_cast<double>(i);
  return mean;
}

struct Decomposition {
  double total = 0.0;     ///< K(F_t, P_theta)
  double bias = 0.0;      ///< K(F_t, P_{theta_t(F)})
  double parametric = 0.0;///< K(theta_t(F), theta)
  double theta_t = 0.0;
};

/// Splits K(F_t, P_theta) into the approximation error of the best Pareto
/// fit and the divergence between Pareto indices. The first entry equals
/// the sum of the other two up to quadrature error.
inline Decomposition decomposition_check(const Law& law, double t, double theta) {
  Decomposition d;
  d.theta_t = theta_fit(law, t);
  d.total = kl_excess_vs_pareto(law, t, theta);
  d.bias = kl_excess_vs_pareto(law, t, d.theta_t);
  d.parametric = kl_pareto(d.theta_t, theta);
  return d;
}

/// Numeric check of how close F_t is to P_theta in hazard shape.
struct TailProximity {
  double rho_t = 0.0;   ///< sup_{x >= t} rho_star(alpha_F(x), theta)
  double eps1 = 0.0;    ///< int (1 + log x)^2 x^{rho_t} F_t(dx)
  double bound = 0.0;   ///< eps1 * exp(rho_t) * rho_t^2, an upper bound on chi2
  double chi2 = 0.0;    ///< chi2(F_t, P_theta)
};

inline TailProximity tail_proximity(const Law& law, double t, double theta) {
  detail::check_threshold(law, t, "tail_proximity");
  TailProximity out;
  // alpha_F is evaluated on a log grid out to t * 2^60 and at its limit
  double sup = rho_star(law.tail_index(), theta);
  for (int j = 0; j <= 480; ++j) {
    const double x = t * std::exp2(j / 8.0) * (j == 0 ? (1.0 + 1e-12) : 1.0);
    if (!(x > law.support_left())) continue;
    const double a = law.alpha(x);
    if (std::isfinite(a) && a > 0.0) sup = std::fmax(sup, rho_star(a, theta));
  }
  out.rho_t = sup;
  const double log_sf_t = law.log_sf(t);
  const auto r = numeric::integrate_half_line([&](double x) {
    const double lf = detail::log_excess_pdf(law, t, log_sf_t, x);
    if (lf == -kInfinity) return 0.0;
    const double l = 1.0 + std::log(x);
    return l * l * std::exp(lf + sup * std::log(x));
  }, detail::excess_breaks(law, t));
  out.eps1 = r.converged && r.finite ? r.value : kInfinity;
  out.bound = out.eps1 * std::exp(out.rho_t) * out.rho_t * out.rho_t;
  out.chi2 = chi2_excess_vs_pareto(law, t, theta);
  return out;
}

/// chi2(F_t, P_{theta_t(F)}) relative to the stochastic error
/// log n / (n (1 - F(t))); bounded values along a sequence of thresholds
/// mark an admissible choice.
inline double admissibility_ratio(const Law& law, std::size_t n, double t) {
  const double chi2 = chi2_excess_vs_pareto(law, t, theta_fit(law, t));
  const double nd = static_cast<double>(n);
  return chi2 / (std::log(nd) / (nd * law.sf(t)));
}

}  // namespace tailadapt
