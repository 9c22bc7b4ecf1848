#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "tailadapt/adaptive.hpp"
#include "tailadapt/errors.hpp"
#include "tailadapt/estimators.hpp"
#include "tailadapt/laws.hpp"
#include "tailadapt/parallel.hpp"
#include "tailadapt/quantiles.hpp"
#include "tailadapt/random.hpp"
#include "tailadapt/sample.hpp"

namespace tailadapt {

inline constexpr const char* kVersion = "0.1.0";

/// sqrt(mean log^2(estimate / truth)). Non-positive or non-finite estimates
/// are skipped and counted in `excluded`.
inline double relmse(const std::vector<double>& estimates, double truth, std::size_t* excluded = nullptr) {
  if (estimates.empty()) throw argument_error("relmse: empty list of estimates");
  if (!(truth > 0.0) || !std::isfinite(truth)) throw argument_error("relmse: truth must be positive and finite");
  double acc = 0.0;
  std::size_t used = 0, skipped = 0;
  for (double e : estimates) {
    if (!(e > 0.0) || !std::isfinite(e)) {
      ++skipped;
      continue;
    }
    const double l = std::log(e / truth);
    acc += l * l;
    ++used;
  }
  if (excluded) *excluded = skipped;
  if (used == 0) throw argument_error("relmse: every estimate was excluded");
  return std::sqrt(acc / static_cast<double>(used));
}

/// Named numeric matrix with labelled columns. NaN marks a cell that could
/// not be computed; the reason is recorded in the report warnings.
struct Table {
  std::string name;
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;

  std::size_t column(const std::string& label) const {
    const auto it = std::find(columns.begin(), columns.end(), label);
    if (it == columns.end()) throw argument_error("table " + name + " has no column " + label);
    return static_cast<std::size_t>(it - columns.begin());
  }
};

struct ExperimentReport {
  std::string experiment;
  std::string law;
  LawParams law_params;
  std::size_t n = 0;
  std::size_t n_rep = 0;
  AdaptiveConfig config;
  std::uint64_t seed = 0;
  std::vector<Table> tables;
  std::map<std::string, double> scalars;
  std::vector<std::string> warnings;
  std::string version = kVersion;

  const Table& table(const std::string& name) const {
    for (const auto& t : tables) {
      if (t.name == name) return t;
    }
    throw argument_error("report has no table " + name);
  }
};

/// Levels 1 - 10^{-j}, j = 1..10.
inline std::vector<double> default_p_grid() {
  std::vector<double> p;
  for (int j = 1; j <= 10; ++j) p.push_back(1.0 - std::pow(10.0, -j));
  return p;
}

struct StudyPlan {
  std::vector<double> p_grid;          ///< quantile-ratio levels; empty = skip
  std::vector<std::size_t> k_levels;   ///< sample-quantile comparison ranks; empty = skip
  std::optional<double> gamma;         ///< true tail index for the RMSE study
  std::size_t k_stride = 1;            ///< stride of the fixed-k scan over 2..n-1
  std::size_t workers = 0;
  std::size_t block_size = 25;         ///< replications per reduction block
};

struct StudyResult {
  std::optional<ExperimentReport> quantile_ratio;
  std::optional<ExperimentReport> sample_quantile;
  std::optional<ExperimentReport> gamma_rmse;
};

namespace detail {

struct Accumulator {
  std::vector<double> adaptive_sq;   // per p
  std::vector<double> fixed_sq;      // per (p, k)
  std::vector<std::size_t> excluded; // per p, adaptive
  std::vector<double> raw_sq;        // per k level
  std::vector<double> adaptive_k_sq; // per k level
  std::vector<double> theta_sq;      // scalar
  std::vector<double> hill_sq;       // per k = 1..n-1
  std::size_t wiring_violations = 0;

  void add(const Accumulator& o) {
    auto plus = [](std::vector<double>& a, const std::vector<double>& b) {
      for (std::size_t i = 0; i < a.size(); ++i) a[i] += b[i];
    };
    plus(adaptive_sq, o.adaptive_sq);
    plus(fixed_sq, o.fixed_sq);
    for (std::size_t i = 0; i < excluded.size(); ++i) excluded[i] += o.excluded[i];
    plus(raw_sq, o.raw_sq);
    plus(adaptive_k_sq, o.adaptive_k_sq);
    plus(theta_sq, o.theta_sq);
    plus(hill_sq, o.hill_sq);
    wiring_violations += o.wiring_violations;
  }
};

inline double sq_log_ratio(double e, double truth) {
  const double l = std::log(e / truth);
  return l * l;
}

inline ExperimentReport report_header(const std::string& experiment, const Law& law, std::size_t n,
                                      std::size_t n_rep, const AdaptiveConfig& config, std::uint64_t seed) {
  ExperimentReport r;
  r.experiment = experiment;
  r.law = law.name();
  r.law_params = law.params();
  r.n = n;
  r.n_rep = n_rep;
  r.config = config;
  r.seed = seed;
  if (n_rep < 100) r.warnings.push_back("low-precision: only " + std::to_string(n_rep) + " replications");
  return r;
}

}  // namespace detail

/// Runs the requested experiments on one set of Monte Carlo samples.
///
/// Replication j draws its sample from Rng::stream(seed, j). Replications
/// are grouped in fixed blocks whose partial sums are added in block order,
/// so the result is bit-identical for any number of workers.
inline StudyResult run_study(const Law& law, std::size_t n, std::size_t n_rep, const AdaptiveConfig& config,
                             std::uint64_t seed, const StudyPlan& plan) {
  if (n < 3) throw argument_error("run_study: n must be at least 3");
  if (n_rep < 1) throw argument_error("run_study: at least one replication is required");
  if (plan.k_stride < 1 || plan.block_size < 1) throw argument_error("run_study: stride and block size must be positive");
  validate(config, n);
  for (double p : plan.p_grid) detail::check_level(p);
  for (std::size_t k : plan.k_levels) {
    if (k < 1 || k > n) throw argument_error("run_study: k level " + std::to_string(k) + " outside [1, n]");
  }
  if (plan.gamma && !(*plan.gamma > 0.0)) throw argument_error("run_study: gamma must be positive");

  std::vector<std::string> warnings;

  // true quantiles; a failed inversion disables that level only
  const std::size_t np = plan.p_grid.size();
  std::vector<double> q_true(np, std::numeric_limits<double>::quiet_NaN());
  std::vector<double> q_residual(np, std::numeric_limits<double>::quiet_NaN());
  for (std::size_t i = 0; i < np; ++i) {
    try {
      const double s = 1.0 - plan.p_grid[i];
      q_true[i] = law.quantile(plan.p_grid[i]);
      q_residual[i] = std::fabs(law.sf(q_true[i]) / s - 1.0);
      if (!std::isfinite(q_true[i]) || !(q_true[i] > 0.0)) throw numeric_error("non-finite quantile", 0.0);
    } catch (const std::exception& e) {
      q_true[i] = std::numeric_limits<double>::quiet_NaN();
      warnings.push_back("p = " + std::to_string(plan.p_grid[i]) + ": true quantile unavailable (" + e.what() + ")");
    }
  }
  const std::size_t nk_levels = plan.k_levels.size();
  std::vector<double> qk_true(nk_levels);
  for (std::size_t i = 0; i < nk_levels; ++i) {
    qk_true[i] = law.quantile(1.0 - static_cast<double>(plan.k_levels[i]) / static_cast<double>(n));
  }

  std::vector<std::size_t> k_grid;
  if (np > 0) {
    for (std::size_t k = 2; k <= n - 1; k += plan.k_stride) k_grid.push_back(k);
  }
  const std::size_t nk = k_grid.size();
  const bool want_gamma = plan.gamma.has_value();
  const double gamma = want_gamma ? *plan.gamma : 0.0;

  auto fresh = [&] {
    detail::Accumulator a;
    a.adaptive_sq.assign(np, 0.0);
    a.fixed_sq.assign(np * nk, 0.0);
    a.excluded.assign(np, 0);
    a.raw_sq.assign(nk_levels, 0.0);
    a.adaptive_k_sq.assign(nk_levels, 0.0);
    a.theta_sq.assign(want_gamma ? 1 : 0, 0.0);
    a.hill_sq.assign(want_gamma ? n - 1 : 0, 0.0);
    return a;
  };

  const std::size_t n_blocks = (n_rep + plan.block_size - 1) / plan.block_size;
  std::vector<detail::Accumulator> blocks(n_blocks);
  parallel_for(n_blocks, plan.workers, [&](std::size_t b) {
    detail::Accumulator acc = fresh();
    const std::size_t first = b * plan.block_size;
    const std::size_t last = std::min(n_rep, first + plan.block_size);
    for (std::size_t j = first; j < last; ++j) {
      Rng rng = Rng::stream(seed, j);
      const Sample sample = draw_sample(law, n, rng);
      const TailSelection sel = select(sample, config);
      const bool need_curve = nk > 0 || want_gamma;
      const std::vector<double> curve = need_curve ? hill_curve(sample) : std::vector<double>{};

      for (std::size_t i = 0; i < np; ++i) {
        if (std::isnan(q_true[i])) continue;
        const double p = plan.p_grid[i];
        const double qa = quantile_adaptive(sample, sel, p);
        if (sel.k_hat >= 2 && qa != quantile_fixed_k(sample, sel.k_hat, p)) ++acc.wiring_violations;
        if (qa > 0.0 && std::isfinite(qa)) {
          acc.adaptive_sq[i] += detail::sq_log_ratio(qa, q_true[i]);
        } else {
          ++acc.excluded[i];
        }
        double* row = acc.fixed_sq.data() + i * nk;
        for (std::size_t c = 0; c < nk; ++c) {
          const std::size_t k = k_grid[c];
          row[c] += detail::sq_log_ratio(detail::tail_quantile(sample, k, curve[k - 1], p), q_true[i]);
        }
      }
      for (std::size_t i = 0; i < nk_levels; ++i) {
        const std::size_t k = plan.k_levels[i];
        const double p = 1.0 - static_cast<double>(k) / static_cast<double>(n);
        acc.raw_sq[i] += detail::sq_log_ratio(sample.order_stat(k), qk_true[i]);
        acc.adaptive_k_sq[i] += detail::sq_log_ratio(quantile_adaptive(sample, sel, p), qk_true[i]);
      }
      if (want_gamma) {
        acc.theta_sq[0] += (sel.theta_hat - gamma) * (sel.theta_hat - gamma);
        for (std::size_t k = 1; k <= n - 1; ++k) {
          const double d = curve[k - 1] - gamma;
          acc.hill_sq[k - 1] += d * d;
        }
      }
    }
    blocks[b] = std::move(acc);
  });
  detail::Accumulator total = fresh();
  for (const auto& b : blocks) total.add(b);
  if (total.wiring_violations > 0) {
    throw numeric_error("run_study: adaptive and fixed-k quantiles disagree at k_hat in " +
                            std::to_string(total.wiring_violations) + " cases",
                        static_cast<double>(total.wiring_violations));
  }

  const double reps = static_cast<double>(n_rep);
  const double nan = std::numeric_limits<double>::quiet_NaN();
  StudyResult out;

  if (np > 0) {
    ExperimentReport r = detail::report_header("table1", law, n, n_rep, config, seed);
    r.warnings.insert(r.warnings.end(), warnings.begin(), warnings.end());
    Table ratio{"ratio", {"p", "q_true", "inversion_residual", "sigma_adaptive", "min_sigma_fixed", "argmin_k",
                          "ratio", "excluded"}, {}};
    Table curves{"fixed_k", {"k"}, {}};
    for (double p : plan.p_grid) curves.columns.push_back("sigma_p" + std::to_string(p));
    curves.rows.assign(nk, std::vector<double>(np + 1, nan));
    for (std::size_t c = 0; c < nk; ++c) curves.rows[c][0] = static_cast<double>(k_grid[c]);
    for (std::size_t i = 0; i < np; ++i) {
      if (std::isnan(q_true[i])) {
        ratio.rows.push_back({plan.p_grid[i], nan, nan, nan, nan, nan, nan, nan});
        continue;
      }
      const double used = reps - static_cast<double>(total.excluded[i]);
      const double sa = used > 0 ? std::sqrt(total.adaptive_sq[i] / used) : nan;
      double best = std::numeric_limits<double>::infinity();
      std::size_t best_k = 0;
      for (std::size_t c = 0; c < nk; ++c) {
        const double s = std::sqrt(total.fixed_sq[i * nk + c] / reps);
        curves.rows[c][i + 1] = s;
        if (s < best) {
          best = s;
          best_k = k_grid[c];
        }
      }
      ratio.rows.push_back({plan.p_grid[i], q_true[i], q_residual[i], sa, best, static_cast<double>(best_k),
                            sa / best, static_cast<double>(total.excluded[i])});
    }
    r.tables.push_back(std::move(ratio));
    r.tables.push_back(std::move(curves));
    out.quantile_ratio = std::move(r);
  }

  if (nk_levels > 0) {
    ExperimentReport r = detail::report_header("table2", law, n, n_rep, config, seed);
    Table t{"ratio", {"k", "p", "q_true", "sigma_sample", "sigma_adaptive", "ratio"}, {}};
    for (std::size_t i = 0; i < nk_levels; ++i) {
      const double ss = std::sqrt(total.raw_sq[i] / reps);
      const double sa = std::sqrt(total.adaptive_k_sq[i] / reps);
      t.rows.push_back({static_cast<double>(plan.k_levels[i]),
                        1.0 - static_cast<double>(plan.k_levels[i]) / static_cast<double>(n), qk_true[i], ss, sa,
                        ss / sa});
    }
    r.tables.push_back(std::move(t));
    out.sample_quantile = std::move(r);
  }

  if (want_gamma) {
    ExperimentReport r = detail::report_header("gamma_rmse", law, n, n_rep, config, seed);
    Table t{"hill_rmse", {"k", "sigma_hill"}, {}};
    double best = std::numeric_limits<double>::infinity();
    std::size_t best_k = 0;
    for (std::size_t k = 1; k <= n - 1; ++k) {
      const double s = std::sqrt(total.hill_sq[k - 1] / reps);
      t.rows.push_back({static_cast<double>(k), s});
      if (s < best) {
        best = s;
        best_k = k;
      }
    }
    const double sa = std::sqrt(total.theta_sq[0] / reps);
    r.scalars = {{"gamma", gamma},
                 {"sigma_adaptive", sa},
                 {"min_sigma_hill", best},
                 {"argmin_k", static_cast<double>(best_k)},
                 {"ratio", sa / best}};
    r.tables.push_back(std::move(t));
    out.gamma_rmse = std::move(r);
  }
  return out;
}

/// Ratio of the adaptive quantile RelMSE to the best fixed-k RelMSE per level.
inline ExperimentReport quantile_ratio_experiment(const Law& law, std::size_t n, std::size_t n_rep,
                                                  const std::vector<double>& p_grid, const AdaptiveConfig& config,
                                                  std::uint64_t seed, std::size_t k_stride = 1,
                                                  std::size_t workers = 0) {
  if (p_grid.empty()) throw argument_error("quantile_ratio_experiment: empty p grid");
  StudyPlan plan;
  plan.p_grid = p_grid;
  plan.k_stride = k_stride;
  plan.workers = workers;
  return *run_study(law, n, n_rep, config, seed, plan).quantile_ratio;
}

/// RelMSE of the order statistic X_{n,k} against the adaptive quantile at
/// level 1 - k/n.
inline ExperimentReport sample_quantile_comparison(const Law& law, std::size_t n, std::size_t n_rep,
                                                   const std::vector<std::size_t>& k_grid,
                                                   const AdaptiveConfig& config, std::uint64_t seed,
                                                   std::size_t workers = 0) {
  if (k_grid.empty()) throw argument_error("sample_quantile_comparison: empty k grid");
  StudyPlan plan;
  plan.k_levels = k_grid;
  plan.workers = workers;
  return *run_study(law, n, n_rep, config, seed, plan).sample_quantile;
}

/// RMSE of the adaptive index estimate against the Hill curve k -> h_{n,k}.
inline ExperimentReport gamma_rmse_experiment(const Law& law, double gamma, std::size_t n, std::size_t n_rep,
                                              const AdaptiveConfig& config, std::uint64_t seed,
                                              std::size_t workers = 0) {
  StudyPlan plan;
  plan.gamma = gamma;
  plan.workers = workers;
  return *run_study(law, n, n_rep, config, seed, plan).gamma_rmse;
}

/// Distribution of |theta_hat - gamma| over replications, with the adaptive
/// choice (k_hat, rejected) of every replication.
inline ExperimentReport consistency_experiment(const Law& law, double gamma, std::size_t n, std::size_t n_rep,
                                               const AdaptiveConfig& config, std::uint64_t seed,
                                               std::size_t workers = 0) {
  validate(config, n);
  if (n_rep < 1) throw argument_error("consistency_experiment: at least one replication is required");
  ExperimentReport r = detail::report_header("consistency", law, n, n_rep, config, seed);
  Table t{"replications", {"rep", "theta_hat", "abs_error", "k_hat", "rejected"}, {}};
  t.rows.assign(n_rep, {});
  parallel_for(n_rep, workers, [&](std::size_t j) {
    Rng rng = Rng::stream(seed, j);
    const TailSelection sel = select(draw_sample(law, n, rng), config);
    t.rows[j] = {static_cast<double>(j), sel.theta_hat, std::fabs(sel.theta_hat - gamma),
                 static_cast<double>(sel.k_hat), sel.rejected ? 1.0 : 0.0};
  });
  std::vector<double> err(n_rep);
  double accepted = 0.0;
  for (std::size_t j = 0; j < n_rep; ++j) {
    err[j] = t.rows[j][2];
    accepted += 1.0 - t.rows[j][4];
  }
  std::sort(err.begin(), err.end());
  const double median = n_rep % 2 ? err[n_rep / 2] : 0.5 * (err[n_rep / 2 - 1] + err[n_rep / 2]);
  r.scalars = {{"gamma", gamma}, {"median_abs_error", median}, {"accepted_fraction", accepted / n_rep}};
  r.tables.push_back(std::move(t));
  return r;
}

inline std::vector<std::size_t> default_k_levels(std::size_t n) {
  std::vector<std::size_t> k;
  for (std::size_t i = 1; i <= std::min<std::size_t>(500, n - 1); ++i) k.push_back(i);
  return k;
}

}  // namespace tailadapt
