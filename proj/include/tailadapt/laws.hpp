#pragma once

#include <boost/math/special_functions/gamma.hpp>

#include <cmath>
#include <limits>
#include <map>
#include <memory>
#include <numbers>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "tailadapt/errors.hpp"
#include "tailadapt/numeric.hpp"
#include "tailadapt/random.hpp"
#include "tailadapt/sample.hpp"

namespace tailadapt {

using LawParams = std::map<std::string, double>;

/// Analytic distribution on [x0, inf) with a strictly positive density.
///
/// Implementations supply the survival function and density; quantiles
/// default to monotone numeric inversion and the hazard shape alpha_F to
/// sf / (x pdf). Laws that admit closed forms override them.
class Law {
 public:
  virtual ~Law() = default;

  virtual std::string name() const = 0;
  virtual LawParams params() const = 0;
  virtual double support_left() const = 0;
  /// Index of regular variation gamma of the tail.
  virtual double tail_index() const = 0;

  /// 1 - F(x).
  virtual double sf(double x) const = 0;
  virtual double pdf(double x) const = 0;

  virtual double log_sf(double x) const { return std::log(sf(x)); }
  virtual double log_pdf(double x) const { return std::log(pdf(x)); }
  double cdf(double x) const { return 1.0 - sf(x); }

  /// x with sf(x) = s, 0 < s < 1. Accurate for s far below machine epsilon.
  virtual double upper_quantile(double s) const {
    check_survival_level(s);
    const double x0 = support_left();
    const double y_lo = std::log(std::fmax(x0, 1e-300));
    return numeric::invert_log_survival(
        [this](double y) {
          const double x = std::exp(y);
          return std::make_pair(log_sf(x), -x * pdf(x) / sf(x));
        },
        std::log(s), y_lo, y_lo + 1.0);
  }

  double quantile(double p) const {
    if (!(p > 0.0 && p < 1.0)) throw domain_error(name() + ": quantile level must lie in (0, 1)");
    return upper_quantile(1.0 - p);
  }

  /// sf(x) / (x f(x)), the reciprocal of x times the hazard rate.
  virtual double alpha(double x) const { return sf(x) / (x * pdf(x)); }

  /// Fitted Pareto index at threshold t when the law has a closed form.
  virtual std::optional<double> theta_fit_closed(double /*t*/) const { return std::nullopt; }
  /// Points where the density is discontinuous.
  virtual std::vector<double> breakpoints() const { return {}; }

  virtual double draw(Rng& rng) const { return upper_quantile(rng.uniform()); }

 protected:
  void check_survival_level(double s) const {
    if (!(s > 0.0 && s < 1.0)) throw domain_error(name() + ": survival level must lie in (0, 1)");
  }
};

using LawPtr = std::shared_ptr<const Law>;

/// Pareto law P_theta: sf(x) = x^{-1/theta}, x >= 1.
class ParetoLaw final : public Law {
 public:
  explicit ParetoLaw(double theta = 1.0) : theta_(theta) {
    if (!(theta > 0.0)) throw config_error("pareto: theta must be positive");
  }
  std::string name() const override { return "pareto"; }
  LawParams params() const override { return {{"theta", theta_}}; }
  double support_left() const override { return 1.0; }
  double tail_index() const override { return theta_; }
  double sf(double x) const override { return x <= 1.0 ? 1.0 : std::pow(x, -1.0 / theta_); }
  double pdf(double x) const override { return x < 1.0 ? 0.0 : std::pow(x, -1.0 / theta_ - 1.0) / theta_; }
  double log_sf(double x) const override { return x <= 1.0 ? 0.0 : -std::log(x) / theta_; }
  double log_pdf(double x) const override {
    return x < 1.0 ? -numeric_infinity() : -std::log(theta_) - (1.0 / theta_ + 1.0) * std::log(x);
  }
  double upper_quantile(double s) const override {
    check_survival_level(s);
    return std::pow(s, -theta_);
  }
  double alpha(double x) const override {
    if (!(x > 1.0)) throw domain_error("pareto: alpha_F needs x > 1");
    return theta_;
  }
  std::optional<double> theta_fit_closed(double) const override { return theta_; }
  double theta() const { return theta_; }

 private:
  static double numeric_infinity() { return std::numeric_limits<double>::infinity(); }
  double theta_;
};

/// Pareto change-point law on [1, inf): index theta1 on [1, tau), theta2
/// from tau on.
class ChangePointParetoLaw final : public Law {
 public:
  ChangePointParetoLaw(double theta1, double theta2, double tau) : theta1_(theta1), theta2_(theta2), tau_(tau) {
    if (!(theta1 > 0.0) || !(theta2 > 0.0)) throw config_error("changepoint_pareto: indices must be positive");
    if (!(tau >= 1.0)) throw config_error("changepoint_pareto: tau must be at least 1");
    log_sf_tau_ = -std::log(tau_) / theta1_;
  }
  std::string name() const override { return "changepoint_pareto"; }
  LawParams params() const override { return {{"theta1", theta1_}, {"theta2", theta2_}, {"tau", tau_}}; }
  double support_left() const override { return 1.0; }
  double tail_index() const override { return theta2_; }
  double log_sf(double x) const override {
    if (x <= 1.0) return 0.0;
    if (x < tau_) return -std::log(x) / theta1_;
    return log_sf_tau_ - std::log(x / tau_) / theta2_;
  }
  double sf(double x) const override { return std::exp(log_sf(x)); }
  double pdf(double x) const override {
    if (x < 1.0) return 0.0;
    return sf(x) / (x * (x < tau_ ? theta1_ : theta2_));
  }
  double upper_quantile(double s) const override {
    check_survival_level(s);
    const double ls = std::log(s);
    if (ls >= log_sf_tau_) return std::exp(-theta1_ * ls);
    return tau_ * std::exp(-theta2_ * (ls - log_sf_tau_));
  }
  std::vector<double> breakpoints() const override { return {tau_}; }
  double alpha(double x) const override {
    if (!(x > 1.0)) throw domain_error("changepoint_pareto: alpha_F needs x > 1");
    return x < tau_ ? theta1_ : theta2_;
  }
  std::optional<double> theta_fit_closed(double t) const override {
    if (t >= tau_) return theta2_;
    const double st = std::pow(t, -1.0 / theta1_);
    const double stau = std::exp(log_sf_tau_);
    return (theta1_ * (st - stau) + theta2_ * stau) / st;
  }

 private:
  double theta1_, theta2_, tau_, log_sf_tau_;
};

/// Positive part of the Cauchy law: F(x) = (2/pi) arctan x, x >= 0.
class CauchyLaw final : public Law {
 public:
  std::string name() const override { return "cauchy"; }
  LawParams params() const override { return {}; }
  double support_left() const override { return 0.0; }
  double tail_index() const override { return 1.0; }
  double sf(double x) const override { return x <= 0.0 ? 1.0 : 2.0 / std::numbers::pi * std::atan(1.0 / x); }
  double pdf(double x) const override { return x < 0.0 ? 0.0 : 2.0 / std::numbers::pi / (1.0 + x * x); }
  double log_pdf(double x) const override {
    if (x > 1.0) return std::log(2.0 / std::numbers::pi) - 2.0 * std::log(x) - std::log1p(1.0 / (x * x));
    return std::log(2.0 / std::numbers::pi) - std::log1p(x * x);
  }
  double upper_quantile(double s) const override {
    check_survival_level(s);
    return 1.0 / std::tan(std::numbers::pi / 2.0 * s);
  }
  double alpha(double x) const override {
    if (!(x > 0.0)) throw domain_error("cauchy: alpha_F needs x > 0");
    return sf(x) / (x * pdf(x));
  }
};

/// Log-gamma law: log X ~ Gamma(shape, rate), X >= 1.
class LogGammaLaw final : public Law {
 public:
  explicit LogGammaLaw(double rate = 1.0, double shape = 2.0) : rate_(rate), shape_(shape) {
    if (!(rate > 0.0) || !(shape > 0.0)) throw config_error("loggamma: rate and shape must be positive");
    log_norm_ = shape_ * std::log(rate_) - std::lgamma(shape_);
  }
  std::string name() const override { return "loggamma"; }
  LawParams params() const override { return {{"rate", rate_}, {"shape", shape_}}; }
  double support_left() const override { return 1.0; }
  double tail_index() const override { return 1.0 / rate_; }
  double sf(double x) const override {
    return x <= 1.0 ? 1.0 : boost::math::gamma_q(shape_, rate_ * std::log(x));
  }
  double log_pdf(double x) const override {
    if (x <= 1.0) return -std::numeric_limits<double>::infinity();
    const double y = std::log(x);
    return log_norm_ + (shape_ - 1.0) * std::log(y) - rate_ * y - y;
  }
  double pdf(double x) const override { return x <= 1.0 ? 0.0 : std::exp(log_pdf(x)); }
  double upper_quantile(double s) const override {
    check_survival_level(s);
    return std::exp(boost::math::gamma_q_inv(shape_, s) / rate_);
  }
  double alpha(double x) const override {
    if (!(x > 1.0)) throw domain_error("loggamma: alpha_F needs x > 1");
    return sf(x) / (x * pdf(x));
  }

 private:
  double rate_, shape_, log_norm_;
};

/// Log-perturbed Pareto law: sf(x) = c x^{-1/beta} log x on [x0, inf) with
/// c = x0^{1/beta} / log x0 so that F(x0) = 0. Needs log x0 >= max(1, beta).
class LogPerturbedParetoLaw final : public Law {
 public:
  explicit LogPerturbedParetoLaw(double beta = 1.0, double x0 = std::numbers::e) : beta_(beta), x0_(x0) {
    if (!(beta > 0.0)) throw config_error("logperturbed_pareto: beta must be positive");
    if (!(std::log(x0) >= std::fmax(1.0, beta) - 1e-12)) {
      throw config_error("logperturbed_pareto: need log(x0) >= max(1, beta) for a monotone d.f.");
    }
    log_c_ = std::log(x0_) / beta_ - std::log(std::log(x0_));
  }
  std::string name() const override { return "logperturbed_pareto"; }
  LawParams params() const override { return {{"beta", beta_}, {"x0", x0_}}; }
  double support_left() const override { return x0_; }
  double tail_index() const override { return beta_; }
  double log_sf(double x) const override {
    if (x <= x0_) return 0.0;
    const double y = std::log(x);
    return log_c_ - y / beta_ + std::log(y);
  }
  double sf(double x) const override { return std::exp(log_sf(x)); }
  double pdf(double x) const override {
    if (x < x0_) return 0.0;
    const double y = std::log(x);
    return std::exp(log_c_ - (1.0 / beta_ + 1.0) * y) * (y / beta_ - 1.0);
  }
  double alpha(double x) const override {
    if (!(x > x0_)) throw domain_error("logperturbed_pareto: alpha_F needs x > x0");
    return beta_ / (1.0 - beta_ / std::log(x));
  }
  std::optional<double> theta_fit_closed(double t) const override { return beta_ * (1.0 + beta_ / std::log(t)); }
  double upper_quantile(double s) const override {
    check_survival_level(s);
    const double y_lo = std::log(x0_);
    // sf ~ s at y ~ beta * (log c + log y - log s); one fixed-point step is a good start
    const double y_guess = std::fmax(y_lo, beta_ * (log_c_ - std::log(s) + std::log(std::fmax(y_lo, 1.0))));
    return numeric::invert_log_survival(
        [this](double y) { return std::make_pair(log_c_ - y / beta_ + std::log(y), 1.0 / y - 1.0 / beta_); },
        std::log(s), y_lo, y_guess);
  }

 private:
  double beta_, x0_, log_c_;
};

/// Two-term power tail sf(x) = c_beta x^{-1/beta} + c_gamma x^{-1/gamma},
/// beta > gamma > 0, on [x0, inf) where x0 is the largest solution of
/// sf(x0) = 1. c_gamma may be negative as long as F increases on [x0, inf).
class HallLaw final : public Law {
 public:
  HallLaw(double beta = 1.0, double gamma = 0.4, double c_beta = 2.0, double c_gamma = -1.0)
      : beta_(beta), gamma_(gamma), c_beta_(c_beta), c_gamma_(c_gamma) {
    if (!(beta > gamma) || !(gamma > 0.0)) throw config_error("hall: need beta > gamma > 0");
    if (!(c_beta > 0.0)) throw config_error("hall: c_beta must be positive");
    // sf is decreasing beyond x_peak (the zero of the density when c_gamma < 0)
    double x_peak = 0.0;
    if (c_gamma_ < 0.0) {
      const double ratio = (-c_gamma_ / gamma_) / (c_beta_ / beta_);
      x_peak = std::pow(ratio, 1.0 / (1.0 / gamma_ - 1.0 / beta_));
      if (raw_sf(x_peak) < 1.0) throw config_error("hall: survival function never reaches 1");
    }
    // bisection on [lo, hi] with raw_sf(lo) >= 1 > raw_sf(hi)
    double lo = x_peak > 0.0 ? x_peak : 1e-12;
    double hi = std::fmax(2.0 * lo, 1.0);
    while (raw_sf(hi) >= 1.0) hi *= 2.0;
    if (x_peak == 0.0) {
      while (raw_sf(lo) < 1.0) lo *= 0.5;
    }
    for (int i = 0; i < 200 && hi - lo > 1e-15 * hi; ++i) {
      const double mid = 0.5 * (lo + hi);
      (raw_sf(mid) >= 1.0 ? lo : hi) = mid;
    }
    x0_ = hi;
  }
  std::string name() const override { return "hall"; }
  LawParams params() const override {
    return {{"beta", beta_}, {"gamma", gamma_}, {"c_beta", c_beta_}, {"c_gamma", c_gamma_}};
  }
  double support_left() const override { return x0_; }
  double tail_index() const override { return beta_; }
  double sf(double x) const override { return x <= x0_ ? 1.0 : raw_sf(x); }
  double pdf(double x) const override {
    if (x < x0_) return 0.0;
    return c_beta_ / beta_ * std::pow(x, -1.0 / beta_ - 1.0) + c_gamma_ / gamma_ * std::pow(x, -1.0 / gamma_ - 1.0);
  }
  double log_sf(double x) const override {
    if (x <= x0_) return 0.0;
    // c_beta x^{-1/beta} (1 + (c_gamma/c_beta) x^{1/beta - 1/gamma})
    return std::log(c_beta_) - std::log(x) / beta_ +
           std::log1p(c_gamma_ / c_beta_ * std::pow(x, 1.0 / beta_ - 1.0 / gamma_));
  }
  double log_pdf(double x) const override {
    if (x < x0_) return -std::numeric_limits<double>::infinity();
    const double lead = std::log(c_beta_ / beta_) - (1.0 / beta_ + 1.0) * std::log(x);
    return lead + std::log1p((c_gamma_ / gamma_) / (c_beta_ / beta_) * std::pow(x, 1.0 / beta_ - 1.0 / gamma_));
  }
  double alpha(double x) const override {
    if (!(x > x0_)) throw domain_error("hall: alpha_F needs x > x0");
    const double a = c_beta_ * std::pow(x, -1.0 / beta_);
    const double b = c_gamma_ * std::pow(x, -1.0 / gamma_);
    return (a + b) / (a / beta_ + b / gamma_);
  }
  std::optional<double> theta_fit_closed(double t) const override {
    const double a = c_beta_ * std::pow(t, -1.0 / beta_);
    const double b = c_gamma_ * std::pow(t, -1.0 / gamma_);
    return (beta_ * a + gamma_ * b) / (a + b);
  }
  double upper_quantile(double s) const override {
    check_survival_level(s);
    const double y_lo = std::log(x0_);
    const double y_guess = std::fmax(y_lo, beta_ * (std::log(c_beta_) - std::log(s)));
    return numeric::invert_log_survival(
        [this](double y) {
          const double x = std::exp(y);
          return std::make_pair(log_sf(x), -1.0 / alpha_or_edge(x));
        },
        std::log(s), y_lo, y_guess);
  }

 private:
  double raw_sf(double x) const { return c_beta_ * std::pow(x, -1.0 / beta_) + c_gamma_ * std::pow(x, -1.0 / gamma_); }
  double alpha_or_edge(double x) const { return x > x0_ ? alpha(x) : alpha(x0_ * (1.0 + 1e-12)); }

  double beta_, gamma_, c_beta_, c_gamma_;
  double x0_ = 0.0;
};

/// Generalised Pareto law with shape xi and unit scale:
/// sf(x) = (1 + xi x)^{-1/xi}, x >= 0.
class GpdLaw final : public Law {
 public:
  explicit GpdLaw(double xi = 1.0) : xi_(xi) {
    if (!(xi > 0.0)) throw config_error("gpd: xi must be positive");
  }
  std::string name() const override { return "gpd"; }
  LawParams params() const override { return {{"xi", xi_}}; }
  double support_left() const override { return 0.0; }
  double tail_index() const override { return xi_; }
  double log_sf(double x) const override { return x <= 0.0 ? 0.0 : -std::log1p(xi_ * x) / xi_; }
  double sf(double x) const override { return std::exp(log_sf(x)); }
  double log_pdf(double x) const override {
    if (x < 0.0) return -std::numeric_limits<double>::infinity();
    return -(1.0 / xi_ + 1.0) * std::log1p(xi_ * x);
  }
  double pdf(double x) const override { return x < 0.0 ? 0.0 : std::exp(log_pdf(x)); }
  double upper_quantile(double s) const override {
    check_survival_level(s);
    return std::expm1(-xi_ * std::log(s)) / xi_;
  }
  double alpha(double x) const override {
    if (!(x > 0.0)) throw domain_error("gpd: alpha_F needs x > 0");
    return (1.0 + xi_ * x) / x;
  }

 private:
  double xi_;
};

/// Names accepted by make_law.
inline const std::vector<std::string>& law_names() {
  static const std::vector<std::string> names{"pareto", "changepoint_pareto", "cauchy", "loggamma",
                                              "logperturbed_pareto", "hall", "gpd"};
  return names;
}

/// Builds a law from its name and a parameter map; omitted parameters take
/// their defaults (the standard test instances), unknown ones are rejected.
inline LawPtr make_law(const std::string& name, const LawParams& params = {}) {
  auto take = [&](std::initializer_list<std::pair<const char*, double>> known) {
    std::set<std::string> allowed;
    std::map<std::string, double> out;
    for (const auto& [key, fallback] : known) {
      allowed.insert(key);
      auto it = params.find(key);
      out[key] = it == params.end() ? fallback : it->second;
    }
    for (const auto& [key, value] : params) {
      if (!allowed.count(key)) throw config_error("law '" + name + "' has no parameter '" + key + "'");
    }
    return out;
  };
  if (name == "pareto") {
    auto p = take({{"theta", 1.0}});
    return std::make_shared<ParetoLaw>(p["theta"]);
  }
  if (name == "changepoint_pareto") {
    auto p = take({{"theta1", 3.0}, {"theta2", 1.0}, {"tau", 1000.0}});
    return std::make_shared<ChangePointParetoLaw>(p["theta1"], p["theta2"], p["tau"]);
  }
  if (name == "cauchy") {
    take({});
    return std::make_shared<CauchyLaw>();
  }
  if (name == "loggamma") {
    auto p = take({{"rate", 1.0}, {"shape", 2.0}});
    return std::make_shared<LogGammaLaw>(p["rate"], p["shape"]);
  }
  if (name == "logperturbed_pareto") {
    auto p = take({{"beta", 1.0}, {"x0", std::numbers::e}});
    return std::make_shared<LogPerturbedParetoLaw>(p["beta"], p["x0"]);
  }
  if (name == "hall") {
    auto p = take({{"beta", 1.0}, {"gamma", 0.4}, {"c_beta", 2.0}, {"c_gamma", -1.0}});
    return std::make_shared<HallLaw>(p["beta"], p["gamma"], p["c_beta"], p["c_gamma"]);
  }
  if (name == "gpd") {
    auto p = take({{"xi", 1.0}});
    return std::make_shared<GpdLaw>(p["xi"]);
  }
  throw config_error("unknown law '" + name + "'");
}

/// n i.i.d. draws from `law`.
inline Sample draw_sample(const Law& law, std::size_t n, Rng& rng) {
  std::vector<double> x(n);
  for (auto& v : x) v = law.draw(rng);
  return Sample(std::move(x));
}

}  // namespace tailadapt
