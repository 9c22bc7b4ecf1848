#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "tailadapt/divergence.hpp"
#include "tailadapt/errors.hpp"
#include "tailadapt/laws.hpp"
#include "tailadapt/numeric.hpp"

namespace tailadapt {

namespace detail {

inline void check_threshold(const Law& law, double t, const char* who) {
  if (!(t >= law.support_left()) || !(t > 0.0)) {
    throw domain_error(std::string(who) + ": threshold " + std::to_string(t) + " is left of the support of " +
                       law.name());
  }
  if (!(law.sf(t) > 0.0)) {
    throw domain_error(std::string(who) + ": no mass above threshold " + std::to_string(t));
  }
}

/// log density of the excess law F_t at x >= 1.
inline double log_excess_pdf(const Law& law, double t, double log_sf_t, double x) {
  return std::log(t) + law.log_pdf(t * x) - log_sf_t;
}

inline double log_pareto_pdf(double theta, double x) { return -std::log(theta) - (1.0 / theta + 1.0) * std::log(x); }

/// Density breakpoints of the excess law over t, in units of t.
inline std::vector<double> excess_breaks(const Law& law, double t) {
  std::vector<double> out;
  for (double c : law.breakpoints()) {
    if (c / t > 1.0) out.push_back(c / t);
  }
  std::sort(out.begin(), out.end());
  return out;
}

inline bool within_tolerance(const numeric::IntegralResult& r) {
  return r.converged && r.error <= numeric::kQuadAbsTol + numeric::kQuadRelTol * std::fabs(r.value);
}

}  // namespace detail

/// Kullback-Leibler divergence K(F_t, P_theta) between the excess law of
/// `law` over t and the Pareto law with index theta, by quadrature.
inline double kl_excess_vs_pareto(const Law& law, double t, double theta) {
  detail::check_threshold(law, t, "kl_excess_vs_pareto");
  if (!(theta > 0.0)) throw domain_error("kl_excess_vs_pareto: theta must be positive");
  const double log_sf_t = law.log_sf(t);
  const auto r = numeric::integrate_half_line([&](double x) {
    const double lf = detail::log_excess_pdf(law, t, log_sf_t, x);
    if (lf == -kInfinity) return 0.0;
    return std::exp(lf) * (lf - detail::log_pareto_pdf(theta, x));
  }, detail::excess_breaks(law, t));
  if (!detail::within_tolerance(r)) {
    throw numeric_error("kl_excess_vs_pareto: quadrature did not converge for " + law.name() + " at t = " +
                            std::to_string(t),
                        r.error);
  }
  return std::fmax(r.value, 0.0);
}

struct DivergenceResult {
  double value = 0.0;
  double error = 0.0;
  bool diverged = false;
  std::string diagnostic;
};

/// chi-square divergence of F_t from P_theta with divergence detection.
///
/// Integrates (f_t - p)^2 / p, which avoids the cancellation in
/// int f_t^2 / p - 1. When the truncated integrals keep growing after the
/// allowed number of doublings the divergence is reported as +inf.
inline DivergenceResult chi2_excess_vs_pareto_detailed(const Law& law, double t, double theta) {
  detail::check_threshold(law, t, "chi2_excess_vs_pareto");
  if (!(theta > 0.0)) throw domain_error("chi2_excess_vs_pareto: theta must be positive");
  const double log_sf_t = law.log_sf(t);
  const auto r = numeric::integrate_half_line([&](double x) {
    const double lp = detail::log_pareto_pdf(theta, x);
    const double lf = detail::log_excess_pdf(law, t, log_sf_t, x);
    const double d = std::expm1(lf - lp);
    return std::exp(lp) * d * d;
  }, detail::excess_breaks(law, t));
  DivergenceResult out;
  out.error = r.error;
  if (!r.finite) {
    out.value = kInfinity;
    out.diverged = true;
    out.diagnostic = "integrand overflow: likelihood ratio unbounded";
  } else if (!r.converged) {
    out.value = kInfinity;
    out.diverged = true;
    out.diagnostic = "truncated integrals still growing after " + std::to_string(r.segments) + " doublings";
  } else {
    out.value = std::fmax(r.value, 0.0);
  }
  return out;
}

inline double chi2_excess_vs_pareto(const Law& law, double t, double theta) {
  return chi2_excess_vs_pareto_detailed(law, t, theta).value;
}

}  // namespace tailadapt
