#pragma once

#include <cmath>
#include <cstddef>
#include <string>

#include "tailadapt/adaptive.hpp"
#include "tailadapt/errors.hpp"
#include "tailadapt/estimators.hpp"
#include "tailadapt/sample.hpp"

namespace tailadapt {

namespace detail {

inline void check_level(double p) {
  if (!(p > 0.0 && p < 1.0)) throw argument_error("quantile level p must lie in (0, 1)");
}

/// Rank [n(1-p)] of the empirical quantile, clamped to [1, n]. The small
/// guard stops 1000 * (1 - 0.997) from flooring to 2.
inline std::size_t sample_quantile_rank(std::size_t n, double p) {
  const double v = std::floor(static_cast<double>(n) * (1.0 - p) + 1e-9);
  if (v < 1.0) return 1;
  if (v > static_cast<double>(n)) return n;
  return static_cast<std::size_t>(v);
}

/// Sample quantile below the tail, Weissman extrapolation from X_{n,k} with
/// index `exponent` at and beyond it.
inline double tail_quantile(const Sample& sample, std::size_t k, double exponent, double p) {
  const std::size_t n = sample.size();
  const double nd = static_cast<double>(n);
  if (p < 1.0 - static_cast<double>(k) / nd) return sample.order_stat(sample_quantile_rank(n, p));
  // the base is at least 1 on this branch; rounding of 1 - p must not push it below
  const double base = std::fmax(1.0, static_cast<double>(k) / (nd * (1.0 - p)));
  return sample.order_stat(k) * std::pow(base, exponent);
}

}  // namespace detail

/// Quantile estimate of level p from the k largest observations: empirical
/// quantile when p < 1 - k/n, otherwise X_{n,k} (k / (n(1-p)))^{h_{n,k}}.
/// For k = n the exponent is h_{n,n-1}.
inline double quantile_fixed_k(const Sample& sample, std::size_t k, double p) {
  const std::size_t n = sample.size();
  if (k < 2 || k > n) {
    throw argument_error("quantile_fixed_k: k = " + std::to_string(k) + " outside [2, " + std::to_string(n) + "]");
  }
  detail::check_level(p);
  return detail::tail_quantile(sample, k, hill(sample, k < n ? k : n - 1), p);
}

/// Quantile estimate using the adaptively selected tail (k_hat, theta_hat).
inline double quantile_adaptive(const Sample& sample, const TailSelection& selection, double p) {
  if (selection.n != sample.size()) {
    throw argument_error("quantile_adaptive: selection was computed on a sample of size " +
                         std::to_string(selection.n) + ", not " + std::to_string(sample.size()));
  }
  if (selection.k_hat < 1 || selection.k_hat > sample.size()) {
    throw argument_error("quantile_adaptive: selection has k_hat outside [1, n]");
  }
  detail::check_level(p);
  return detail::tail_quantile(sample, selection.k_hat, selection.theta_hat, p);
}

}  // namespace tailadapt
