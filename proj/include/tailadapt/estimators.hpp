#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "tailadapt/divergence.hpp"
#include "tailadapt/errors.hpp"
#include "tailadapt/sample.hpp"

namespace tailadapt {

/// Hill estimator built on the k largest observations:
/// (1/k) * sum_{i<=k} log(X_{n,i} / X_{n,k+1}), 1 <= k <= n-1.
inline double hill(const Sample& sample, std::size_t k) {
  const std::size_t n = sample.size();
  if (k < 1 || k + 1 > n) {
    throw argument_error("hill: k = " + std::to_string(k) + " outside [1, " + std::to_string(n - 1) + "]");
  }
  const auto x = sample.descending();
  const double base = x[k];
  double acc = 0.0;
  for (std::size_t i = 0; i < k; ++i) acc += std::log(x[i] / base);
  return acc / static_cast<double>(k);
}

/// All Hill estimates h_{n,k}, k = 1..n-1, from cached prefix sums.
/// Element k-1 holds h_{n,k}.
inline std::vector<double> hill_curve(const Sample& sample) {
  const std::size_t n = sample.size();
  std::vector<double> out(n > 0 ? n - 1 : 0);
  for (std::size_t k = 1; k < n; ++k) {
    out[k - 1] = sample.log_sum_top(k) / static_cast<double>(k) - sample.log_order_stat(k + 1);
  }
  return out;
}

/// Number of observations strictly above `t`.
inline std::size_t count_exceed(const Sample& sample, double t) { return sample.count_above(t); }

/// Threshold-local maximum quasi-likelihood estimate of the Pareto index:
/// mean of log(X_i / t) over the observations exceeding t; 0 when none do.
inline double theta_local(const Sample& sample, double t) {
  if (!(t > 0.0)) throw argument_error("theta_local: threshold must be positive");
  const std::size_t count = sample.count_above(t);
  if (count == 0) return 0.0;
  const auto x = sample.descending();
  double acc = 0.0;
  for (std::size_t i = 0; i < count; ++i) acc += std::log(x[i] / t);
  return acc / static_cast<double>(count);
}

/// Maximum likelihood estimate of the band index in the two-segment Pareto
/// model with change point `tau`: the band (t, tau] carries its own index,
/// observations above tau are treated as censored at tau.
inline double theta_band(const Sample& sample, double t, double tau) {
  if (!(t > 0.0)) throw argument_error("theta_band: threshold must be positive");
  if (tau < t) throw argument_error("theta_band: tau must not be smaller than t");
  const std::size_t n_t = sample.count_above(t);
  const std::size_t n_tau = sample.count_above(tau);
  const std::size_t n_band = n_t - n_tau;
  if (n_band == 0) return 0.0;
  const double s_t = static_cast<double>(n_t) * theta_local(sample, t);
  const double s_tau = static_cast<double>(n_tau) * theta_local(sample, tau);
  return (s_t - s_tau) / static_cast<double>(n_band);
}

/// Log of the local likelihood ratio of P_{theta_alt} against
/// P_{theta_null}, evaluated on the excesses over t.
namespace detail {

// per-observation log(theta_null / theta_alt) + (1/theta_null - 1/theta_alt) * mean_log,
// rearranged as g(x) + x (mean_log - theta_alt) / theta_alt with x = theta_alt / theta_null - 1
// so that nearly equal indices do not cancel
inline double pareto_llr_term(double theta_alt, double theta_null, double mean_log) {
  const double x = (theta_alt - theta_null) / theta_null;
  return g_function(x) + x * ((mean_log - theta_alt) / theta_alt);
}

}  // namespace detail

inline double loglik_ratio(const Sample& sample, double t, double theta_alt, double theta_null) {
  if (!(t > 0.0)) throw argument_error("loglik_ratio: threshold must be positive");
  if (!(theta_alt > 0.0) || !(theta_null > 0.0)) {
    throw domain_error("loglik_ratio: indices must be positive");
  }
  const std::size_t count = sample.count_above(t);
  if (count == 0) return 0.0;
  const double estimate = theta_local(sample, t);
  return static_cast<double>(count) * detail::pareto_llr_term(theta_alt, theta_null, estimate);
}

/// Log of the local likelihood ratio of the change-point Pareto model
/// (index `theta_band` on (t, tau], `theta_tail` above tau) against
/// P_{theta_null}.
inline double changepoint_loglik_ratio(const Sample& sample, double t, double tau, double theta_band_index,
                                       double theta_tail_index, double theta_null) {
  if (!(t > 0.0) || tau < t) throw argument_error("changepoint_loglik_ratio: need 0 < t <= tau");
  if (!(theta_band_index > 0.0) || !(theta_tail_index > 0.0) || !(theta_null > 0.0)) {
    throw domain_error("changepoint_loglik_ratio: indices must be positive");
  }
  const std::size_t n_t = sample.count_above(t);
  const std::size_t n_tau = sample.count_above(tau);
  const std::size_t n_band = n_t - n_tau;
  double out = 0.0;
  if (n_band > 0) {
    const double band = theta_band(sample, t, tau);
    out += static_cast<double>(n_band) * detail::pareto_llr_term(theta_band_index, theta_null, band);
  }
  if (n_tau > 0) {
    const double tail = theta_local(sample, tau);
    out += static_cast<double>(n_tau) * detail::pareto_llr_term(theta_tail_index, theta_null, tail);
  }
  return out;
}

}  // namespace tailadapt
