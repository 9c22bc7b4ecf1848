#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "tailadapt/divergence.hpp"
#include "tailadapt/errors.hpp"
#include "tailadapt/estimators.hpp"
#include "tailadapt/sample.hpp"

namespace tailadapt {

/// Likelihood-ratio lack-of-fit statistic of one Pareto index against a
/// two-segment (change point) alternative, split into its band and tail
/// components. All values in nats.
struct TestStatPair {
  double t1 = 0.0;
  double t2 = 0.0;
  double total = 0.0;
};

namespace detail {

// n * K(a, b) with the empty-count term dropped. A zero estimate against a
// positive count stays +inf so degenerate windows are visible.
inline double weighted_kl(std::size_t count, double a, double b) {
  if (count == 0) return 0.0;
  return static_cast<double>(count) * kl_pareto(a, b);
}

inline TestStatPair make_pair(std::size_t n_t, double sum_t, std::size_t n_tau, double sum_tau) {
  // sum_x = n_x * theta_x, i.e. the total log excess over the threshold x
  const double theta_t = n_t > 0 ? sum_t / static_cast<double>(n_t) : 0.0;
  const double theta_tau = n_tau > 0 ? sum_tau / static_cast<double>(n_tau) : 0.0;
  const std::size_t n_band = n_t - n_tau;
  const double theta_b = n_band > 0 ? (sum_t - sum_tau) / static_cast<double>(n_band) : 0.0;
  TestStatPair out;
  out.t1 = weighted_kl(n_band, theta_b, theta_t);
  out.t2 = weighted_kl(n_tau, theta_tau, theta_t);
  out.total = out.t1 + out.t2;
  return out;
}

}  // namespace detail

/// T(t, tau) for arbitrary thresholds 0 < t < tau.
inline TestStatPair t_pair(const Sample& sample, double t, double tau) {
  if (!(t > 0.0)) throw argument_error("t_pair: threshold must be positive");
  if (!(tau > t)) throw argument_error("t_pair: tau must exceed t");
  const std::size_t n_t = sample.count_above(t);
  const std::size_t n_tau = sample.count_above(tau);
  return detail::make_pair(n_t, static_cast<double>(n_t) * theta_local(sample, t), n_tau,
                           static_cast<double>(n_tau) * theta_local(sample, tau));
}

/// T(X_{n,m}, X_{n,k}) from the cached prefix sums, k <= m. Ties between
/// the two order statistics give an empty band and a zero statistic.
inline TestStatPair t_pair_at_ranks(const Sample& sample, std::size_t m, std::size_t k) {
  const std::size_t n_t = sample.count_above_rank(m);
  const std::size_t n_tau = sample.count_above_rank(k);
  const double sum_t = sample.log_sum_top(n_t) - static_cast<double>(n_t) * sample.log_order_stat(m);
  const double sum_tau = sample.log_sum_top(n_tau) - static_cast<double>(n_tau) * sample.log_order_stat(k);
  return detail::make_pair(n_t, sum_t, n_tau, sum_tau);
}

/// Integer window ceil(rho*m) <= k <= floor((1-delta)*m). A 1e-9 guard keeps
/// products such as 0.95*20 from rounding across an integer.
inline std::pair<std::size_t, std::size_t> window_bounds(std::size_t m, double rho, double delta) {
  const double md = static_cast<double>(m);
  const double lo = std::ceil(rho * md - 1e-9);
  const double hi = std::floor((1.0 - delta) * md + 1e-9);
  return {static_cast<std::size_t>(std::fmax(lo, 1.0)), static_cast<std::size_t>(std::fmax(hi, 0.0))};
}

inline void check_window_constants(double rho, double delta) {
  if (!(rho > 0.0 && rho <= 1.0 / 3.0) || !(delta > 0.0 && delta <= 1.0 / 3.0)) {
    throw config_error("window constants must satisfy 0 < rho, delta <= 1/3 (rho = " + std::to_string(rho) +
                       ", delta = " + std::to_string(delta) + ")");
  }
}

struct WindowResult {
  std::size_t m = 0;
  std::size_t k_lo = 0;
  std::size_t k_hi = 0;
  std::size_t best_k = 0;  ///< smallest argmax of the tail component
  double t_max = 0.0;      ///< max of the total statistic over the window
  std::optional<std::vector<std::pair<std::size_t, TestStatPair>>> per_k;
};

/// Windowed maximum T_{n,m} = max_k T(X_{n,m}, X_{n,k}) over the integer
/// window, together with the change-point location argmax_k T^(2).
inline WindowResult t_window(const Sample& sample, std::size_t m, double rho, double delta, bool trace = false) {
  check_window_constants(rho, delta);
  if (m < 1 || m > sample.size()) {
    throw config_error("t_window: m = " + std::to_string(m) + " outside [1, n]");
  }
  const auto [lo, hi] = window_bounds(m, rho, delta);
  if (lo > hi) {
    throw config_error("t_window: empty window for m = " + std::to_string(m) + ", rho = " + std::to_string(rho) +
                       ", delta = " + std::to_string(delta));
  }
  WindowResult out;
  out.m = m;
  out.k_lo = lo;
  out.k_hi = hi;
  out.best_k = lo;
  out.t_max = -1.0;
  double best_t2 = -1.0;
  if (trace) out.per_k.emplace();
  for (std::size_t k = lo; k <= hi; ++k) {
    const TestStatPair s = t_pair_at_ranks(sample, m, k);
    if (s.total > out.t_max) out.t_max = s.total;
    if (s.t2 > best_t2) {
      best_t2 = s.t2;
      out.best_k = k;
    }
    if (trace) out.per_k->emplace_back(k, s);
  }
  return out;
}

}  // namespace tailadapt
