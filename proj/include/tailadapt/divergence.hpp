#pragma once

#include <cmath>
#include <limits>
#include <string>

#include "tailadapt/errors.hpp"

namespace tailadapt {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// G(x) = x - log(1 + x), x > -1.
///
/// Near zero the difference cancels catastrophically, so a short Taylor
/// series is used for |x| < 1e-4.
inline double g_function(double x) {
  if (!(x > -1.0)) {
    throw domain_error("g_function: argument must exceed -1, got " + std::to_string(x));
  }
  if (std::fabs(x) < 1e-2) {
    // sum_{k>=2} (-1)^k x^k / k, Horner form through k = 10
    double acc = 0.0;
    for (int k = 10; k >= 2; --k) acc = 1.0 / k - x * acc;
    return x * x * acc;
  }
  return x - std::log1p(x);
}

/// Kullback-Leibler divergence between the Pareto laws with indices
/// `theta1` and `theta2` (nats). Infinite when either index is zero.
inline double kl_pareto(double theta1, double theta2) {
  if (theta1 < 0.0 || theta2 < 0.0 || std::isnan(theta1) || std::isnan(theta2)) {
    throw domain_error("kl_pareto: indices must be non-negative");
  }
  if (theta1 == 0.0 || theta2 == 0.0) return kInfinity;
  return g_function((theta1 - theta2) / theta2);
}

/// max(|log(x/y)|, |1/x - 1/y|), the distance used to compare hazard
/// shapes of two tails.
inline double rho_star(double x, double y) {
  if (!(x > 0.0) || !(y > 0.0)) {
    throw domain_error("rho_star: arguments must be positive");
  }
  return std::fmax(std::fabs(std::log(x / y)), std::fabs(1.0 / x - 1.0 / y));
}

}  // namespace tailadapt
