#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "tailadapt/adaptive.hpp"
#include "tailadapt/errors.hpp"
#include "tailadapt/parallel.hpp"
#include "tailadapt/random.hpp"
#include "tailadapt/sample.hpp"

namespace tailadapt {

/// Below this many replications a calibration is flagged as imprecise.
inline constexpr std::size_t kMinPreciseReplications = 100;

struct CalibrationResult {
  double z = 0.0;
  double level = 0.0;
  std::size_t n = 0;
  std::size_t n_rep = 0;
  AdaptiveConfig config;      ///< critical_value is not part of the result
  std::vector<double> ecdf;   ///< sorted simulated maxima T_n
  std::uint64_t seed = 0;
  std::vector<std::string> warnings;
};

struct CalibrationOptions {
  double pareto_theta = 1.0;  ///< index of the simulated Pareto null
  std::size_t workers = 0;    ///< 0 = hardware concurrency
};

namespace detail {

/// 1-based index ceil(level * n_rep) of the calibrated order statistic.
inline std::size_t calibration_rank(double level, std::size_t n_rep) {
  const double v = std::ceil(level * static_cast<double>(n_rep) - 1e-9);
  return static_cast<std::size_t>(std::clamp(v, 1.0, static_cast<double>(n_rep)));
}

}  // namespace detail

/// Standard Pareto sample of size n for replication `rep`, as u^{-theta}.
/// Every theta uses the same uniforms, so the statistics are coupled across
/// theta.
inline Sample null_sample(std::size_t n, std::uint64_t seed, std::uint64_t rep, double theta = 1.0) {
  Rng rng = Rng::stream(seed, rep);
  std::vector<double> x(n);
  for (auto& v : x) v = std::pow(rng.uniform(), -theta);
  return Sample(std::move(x));
}

/// Empirical `level` quantile of the maximal test statistic under the
/// Pareto null.
inline CalibrationResult calibrate(std::size_t n, const AdaptiveConfig& config, std::size_t n_rep, double level,
                                   std::uint64_t seed, const CalibrationOptions& options = {}) {
  validate(config, n);
  if (!(level > 0.0 && level < 1.0)) throw argument_error("calibrate: level must lie in (0, 1)");
  if (n_rep < 1) throw argument_error("calibrate: at least one replication is required");
  if (!(options.pareto_theta > 0.0)) throw argument_error("calibrate: Pareto index must be positive");

  CalibrationResult out;
  out.level = level;
  out.n = n;
  out.n_rep = n_rep;
  out.config = config;
  out.config.critical_value = CriticalValue::fixed(0.0);
  out.seed = seed;
  if (n_rep < kMinPreciseReplications) {
    out.warnings.push_back("low-precision calibration: " + std::to_string(n_rep) + " replications (at least " +
                           std::to_string(kMinPreciseReplications) + " recommended)");
  }
  out.ecdf.assign(n_rep, 0.0);
  parallel_for(n_rep, options.workers, [&](std::size_t j) {
    out.ecdf[j] = max_statistic(null_sample(n, seed, j, options.pareto_theta), config);
  });
  std::sort(out.ecdf.begin(), out.ecdf.end());
  out.z = out.ecdf[detail::calibration_rank(level, n_rep) - 1];
  return out;
}

/// Critical value at another level from an existing ecdf.
inline double calibrated_value(const CalibrationResult& result, double level) {
  if (!(level > 0.0 && level < 1.0)) throw argument_error("calibrated_value: level must lie in (0, 1)");
  if (result.ecdf.empty()) throw argument_error("calibrated_value: result holds no ecdf");
  return result.ecdf[detail::calibration_rank(level, result.ecdf.size()) - 1];
}

inline nlohmann::ordered_json to_json(const CalibrationResult& r, bool with_ecdf = true) {
  nlohmann::ordered_json j;
  j["z"] = r.z;
  j["level"] = r.level;
  j["n"] = r.n;
  j["n_rep"] = r.n_rep;
  j["config"] = {{"rho", r.config.rho},
                 {"delta", r.config.delta},
                 {"k0", r.config.k0},
                 {"grid_length", r.config.grid_length}};
  if (with_ecdf) j["ecdf"] = r.ecdf;
  j["seed"] = r.seed;
  return j;
}

inline CalibrationResult calibration_from_json(const nlohmann::json& j) {
  CalibrationResult r;
  try {
    r.z = j.at("z").get<double>();
    r.level = j.at("level").get<double>();
    r.n = j.at("n").get<std::size_t>();
    r.n_rep = j.at("n_rep").get<std::size_t>();
    const auto& c = j.at("config");
    r.config.rho = c.at("rho").get<double>();
    r.config.delta = c.at("delta").get<double>();
    r.config.k0 = c.at("k0").get<std::size_t>();
    r.config.grid_length = c.at("grid_length").get<std::size_t>();
    r.config.critical_value = CriticalValue::fixed(r.z);
    if (j.contains("ecdf")) r.ecdf = j.at("ecdf").get<std::vector<double>>();
    r.seed = j.at("seed").get<std::uint64_t>();
  } catch (const nlohmann::json::exception& e) {
    throw argument_error(std::string("calibration file: ") + e.what());
  }
  if (!(r.z > 0.0)) throw argument_error("calibration file: z must be positive");
  return r;
}

inline void save_calibration(const CalibrationResult& r, const std::string& path, bool with_ecdf = true) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw argument_error("cannot write calibration file " + path);
  f << to_json(r, with_ecdf).dump(2) << '\n';
  if (!f) throw argument_error("failed writing calibration file " + path);
}

inline CalibrationResult load_calibration(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw argument_error("cannot read calibration file " + path);
  nlohmann::json j;
  try {
    f >> j;
  } catch (const nlohmann::json::exception& e) {
    throw argument_error("calibration file " + path + ": " + e.what());
  }
  return calibration_from_json(j);
}

}  // namespace tailadapt
