#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "tailadapt/changepoint.hpp"
#include "tailadapt/errors.hpp"
#include "tailadapt/estimators.hpp"
#include "tailadapt/sample.hpp"

namespace tailadapt {

/// Rejection threshold of the lack-of-fit test: either a fixed value or
/// mu * log(n).
struct CriticalValue {
  enum class Kind { fixed, mu_log_n };
  Kind kind = Kind::fixed;
  double value = 10.0;

  static CriticalValue fixed(double z) { return {Kind::fixed, z}; }
  static CriticalValue mu_log_n(double mu) { return {Kind::mu_log_n, mu}; }

  double resolve(std::size_t n) const {
    return kind == Kind::fixed ? value : value * std::log(static_cast<double>(n));
  }
};

struct AdaptiveConfig {
  double rho = 0.25;
  double delta = 0.05;
  std::size_t k0 = 50;           ///< first tested grid index (1-based)
  std::size_t grid_length = 200; ///< K_n
  CriticalValue critical_value = CriticalValue::fixed(10.0);
  std::uint64_t seed = 0;
};

struct GridPoint {
  std::size_t index;  ///< i, 1-based
  std::size_t rank;   ///< r_i = floor(i n / K_n)
};

/// Uniform grid r_i = floor(i n / K_n), i = 1..K_n. Repeated ranks keep
/// only their first grid index.
inline std::vector<GridPoint> build_grid(std::size_t n, std::size_t grid_length) {
  if (grid_length < 1 || grid_length > n) {
    throw config_error("build_grid: grid length K_n = " + std::to_string(grid_length) + " must lie in [1, n = " +
                       std::to_string(n) + "]");
  }
  std::vector<GridPoint> grid;
  grid.reserve(grid_length);
  for (std::size_t i = 1; i <= grid_length; ++i) {
    const std::size_t r = static_cast<std::size_t>((static_cast<unsigned __int128>(i) * n) / grid_length);
    if (!grid.empty() && grid.back().rank == r) continue;
    grid.push_back({i, r});
  }
  return grid;
}

namespace detail {

inline std::size_t grid_rank(std::size_t i, std::size_t n, std::size_t grid_length) {
  return static_cast<std::size_t>((static_cast<unsigned __int128>(i) * n) / grid_length);
}

// Returns an empty string when feasible, otherwise a description of the
// first violated condition.
inline std::string feasibility_violation(std::size_t n, const AdaptiveConfig& c) {
  if (!(c.rho > 0.0 && c.rho <= 1.0 / 3.0) || !(c.delta > 0.0 && c.delta <= 1.0 / 3.0)) {
    return "window constants must satisfy 0 < rho, delta <= 1/3";
  }
  if (c.grid_length < 1 || c.grid_length > n) {
    return "grid length K_n = " + std::to_string(c.grid_length) + " must lie in [1, n = " + std::to_string(n) + "]";
  }
  if (c.k0 < 2 || c.k0 > c.grid_length) {
    return "starting grid index k0 = " + std::to_string(c.k0) + " must lie in [2, K_n = " +
           std::to_string(c.grid_length) + "]";
  }
  const std::size_t r1 = grid_rank(1, n, c.grid_length);
  const std::size_t rk0 = grid_rank(c.k0, n, c.grid_length);
  if (c.rho * static_cast<double>(rk0) < static_cast<double>(r1) - 1e-9) {
    return "start condition rho * r_k0 >= r_1 fails (rho * r_k0 = " + std::to_string(c.rho * rk0) +
           ", r_1 = " + std::to_string(r1) + ")";
  }
  for (std::size_t i = c.k0; i <= c.grid_length; ++i) {
    const std::size_t ri = grid_rank(i, n, c.grid_length);
    const std::size_t prev = grid_rank(i - 1, n, c.grid_length);
    if ((1.0 - c.delta) * static_cast<double>(ri) > static_cast<double>(prev) + 1e-9) {
      return "grid spacing condition (1 - delta) r_i <= r_{i-1} fails at i = " + std::to_string(i) +
             " (r_i = " + std::to_string(ri) + ", r_{i-1} = " + std::to_string(prev) + ")";
    }
    const auto [lo, hi] = window_bounds(ri, c.rho, c.delta);
    if (lo > hi) return "empty test window at m = r_" + std::to_string(i) + " = " + std::to_string(ri);
  }
  return {};
}

}  // namespace detail

/// Throws config_error naming the violated condition.
inline void validate(const AdaptiveConfig& config, std::size_t n) {
  if (auto why = detail::feasibility_violation(n, config); !why.empty()) {
    throw config_error("infeasible adaptive configuration for n = " + std::to_string(n) + ": " + why);
  }
}

inline bool is_feasible(const AdaptiveConfig& config, std::size_t n) {
  return detail::feasibility_violation(n, config).empty();
}

/// Configuration whose starting index is round(k0_fraction * n), moved up
/// to the nearest grid index that satisfies the feasibility conditions.
inline AdaptiveConfig config_for_sample_size(std::size_t n, double k0_fraction = 1.0 / 20.0, double rho = 0.25,
                                             double delta = 0.05, std::size_t grid_length = 200,
                                             CriticalValue z = CriticalValue::fixed(10.0)) {
  AdaptiveConfig c;
  c.rho = rho;
  c.delta = delta;
  c.grid_length = std::min(grid_length, n);
  c.critical_value = z;
  const double wanted = std::round(k0_fraction * static_cast<double>(n));
  c.k0 = static_cast<std::size_t>(std::fmax(wanted, 2.0));
  if (c.k0 > c.grid_length) c.k0 = c.grid_length;
  while (c.k0 < c.grid_length && !is_feasible(c, n)) ++c.k0;
  validate(c, n);
  return c;
}

struct TailSelection {
  std::size_t n = 0;
  std::size_t m_hat = 0;
  std::size_t k_hat = 0;
  double tau_hat = 0.0;
  double theta_hat = 0.0;
  bool rejected = false;
  std::vector<std::pair<std::size_t, double>> trace;  ///< (r_i, T_{n,r_i}) visited
};

/// Stagewise adaptive choice of the tail location.
///
/// Tests grid points r_{k0}, r_{k0+1}, ... in turn and stops at the first
/// rejection; k_hat is then the change point of that window. Without any
/// rejection k_hat = n and theta_hat = hill(n - 1).
inline TailSelection select(const Sample& sample, const AdaptiveConfig& config) {
  const std::size_t n = sample.size();
  validate(config, n);
  const double z = config.critical_value.resolve(n);
  TailSelection out;
  out.n = n;
  for (const GridPoint& g : build_grid(n, config.grid_length)) {
    if (g.index < config.k0) continue;
    const WindowResult w = t_window(sample, g.rank, config.rho, config.delta);
    out.trace.emplace_back(g.rank, w.t_max);
    if (w.t_max > z) {
      out.rejected = true;
      out.m_hat = g.rank;
      out.k_hat = w.best_k;
      break;
    }
  }
  if (!out.rejected) {
    out.m_hat = detail::grid_rank(config.grid_length, n, config.grid_length);
    out.k_hat = n;
  }
  out.tau_hat = sample.order_stat(out.k_hat);
  out.theta_hat = hill(sample, out.k_hat < n ? out.k_hat : n - 1);
  return out;
}

/// max over the grid points i = k0..K_n of T_{n,r_i}, without early exit.
inline double max_statistic(const Sample& sample, const AdaptiveConfig& config) {
  validate(config, sample.size());
  double best = 0.0;
  for (const GridPoint& g : build_grid(sample.size(), config.grid_length)) {
    if (g.index < config.k0) continue;
    best = std::fmax(best, t_window(sample, g.rank, config.rho, config.delta).t_max);
  }
  return best;
}

}  // namespace tailadapt
