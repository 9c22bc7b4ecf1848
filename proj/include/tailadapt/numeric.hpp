#pragma once

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/roots.hpp>

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <utility>
#include <vector>

#include "tailadapt/errors.hpp"

namespace tailadapt::numeric {

/// Absolute and relative targets shared by every tail integral.
inline constexpr double kQuadAbsTol = 1e-9;
inline constexpr double kQuadRelTol = 1e-8;
/// Number of dyadic segments [2^{j-1}, 2^j] tried before giving up.
inline constexpr int kMaxDoublings = 60;

struct IntegralResult {
  double value = 0.0;
  double error = 0.0;     ///< quadrature error estimate plus last segment
  bool converged = false;
  int segments = 0;
  bool finite = true;     ///< false if the integrand produced inf/nan
};

/// Integral of `f` over [1, inf) as a sum over the dyadic segments
/// [2^{j-1}, 2^j]. Segment j of the half line in x corresponds to
/// [2^{-j}, 2^{1-j}] for u = 1/x, so the truncation at 2^J is the integral
/// over u in [2^{-J}, 1].
///
/// Each segment is a finite-range adaptive Gauss-Kronrod problem. Summation
/// stops once a segment contributes less than the tolerance while the
/// contributions are shrinking. Integrands with power-law decay give
/// geometric segment contributions; once the ratio of consecutive
/// contributions has settled the remaining tail is summed as a geometric
/// series. Discontinuities of the integrand listed in `breaks` are used as
/// segment boundaries, and summation never stops before the last of them.
inline IntegralResult integrate_half_line(const std::function<double(double)>& f,
                                          const std::vector<double>& breaks = {}, double abs_tol = 1e-13,
                                          double rel_tol = 1e-12) {
  using boost::math::quadrature::gauss_kronrod;
  IntegralResult out;
  double previous = std::numeric_limits<double>::infinity();
  double ratio_prev = 2.0, ratio_prev2 = 2.0;
  double tail = 0.0, tail_err = std::numeric_limits<double>::infinity();
  double last_break = 1.0;
  for (double c : breaks) last_break = std::fmax(last_break, c);
  double a = 1.0;
  for (int j = 1; j <= kMaxDoublings; ++j) {
    const double b = 2.0 * a;
    // a jump in the integrand further out invalidates both stopping rules
    const bool past_breaks = b >= last_break;
    double err = 0.0;
    double piece = 0.0;
    double lo = a;
    for (double c : breaks) {
      if (c > lo && c < b) {
        double e = 0.0;
        piece += gauss_kronrod<double, 31>::integrate(f, lo, c, 12, 1e-13, &e);
        err += e;
        lo = c;
      }
    }
    {
      double e = 0.0;
      piece += gauss_kronrod<double, 31>::integrate(f, lo, b, 12, 1e-13, &e);
      err += e;
    }
    out.segments = j;
    if (!std::isfinite(piece)) {
      out.finite = false;
      out.value = std::numeric_limits<double>::infinity();
      out.error = std::numeric_limits<double>::infinity();
      return out;
    }
    out.value += piece;
    out.error += err;
    const double size = std::fabs(piece);
    if (past_breaks && j >= 4 && size <= abs_tol + rel_tol * std::fabs(out.value) && size <= previous) {
      out.error += size;
      out.converged = true;
      return out;
    }
    const double ratio = std::isfinite(previous) && previous > 0.0 ? size / previous : 2.0;
    const double drift = std::fabs(ratio - ratio_prev) + std::fabs(ratio_prev - ratio_prev2);
    if (past_breaks && j >= 8 && ratio < 0.95 && drift < 1e-3) {
      tail = piece * ratio / (1.0 - ratio);
      tail_err = std::fabs(tail) * drift / (1.0 - ratio);
      if (tail_err <= abs_tol + rel_tol * std::fabs(out.value)) {
        out.value += tail;
        out.error += tail_err;
        out.converged = true;
        return out;
      }
    } else {
      tail_err = std::numeric_limits<double>::infinity();
    }
    ratio_prev2 = ratio_prev;
    ratio_prev = ratio;
    previous = size;
    a = b;
  }
  if (tail_err <= kQuadAbsTol + kQuadRelTol * std::fabs(out.value)) {
    out.value += tail;
    out.error += tail_err;
    out.converged = true;
    return out;
  }
  out.error += previous;
  return out;
}

/// Solves sf(x) = s for a decreasing survival function on [x_lo, inf) by
/// Newton iteration on y = log x, safeguarded by bisection inside a bracket.
/// `log_sf_and_slope(y)` returns (log sf(e^y), d/dy log sf(e^y)).
inline double invert_log_survival(const std::function<std::pair<double, double>(double)>& log_sf_and_slope,
                                  double log_s, double y_lo, double y_guess) {
  auto g = [&](double y) {
    auto [v, d] = log_sf_and_slope(y);
    return std::make_pair(v - log_s, d);
  };
  double y_hi = std::fmax(y_guess, y_lo + 1.0);
  int expansions = 0;
  while (g(y_hi).first > 0.0) {
    y_hi = y_lo + 2.0 * (y_hi - y_lo);
    if (++expansions > 200) throw numeric_error("invert_log_survival: could not bracket the root", log_s);
  }
  const double guess = std::fmin(std::fmax(y_guess, y_lo), y_hi);
  std::uintmax_t iterations = 200;
  const double y = boost::math::tools::newton_raphson_iterate(g, guess, y_lo, y_hi, 42, iterations);
  if (iterations >= 200) throw numeric_error("invert_log_survival: no convergence in 200 iterations", log_s);
  return std::exp(y);
}

}  // namespace tailadapt::numeric
