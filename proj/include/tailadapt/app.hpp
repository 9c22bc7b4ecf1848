#pragma once

#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "CLI11.hpp"
#include "tailadapt/adaptive.hpp"
#include "tailadapt/calibration.hpp"
#include "tailadapt/errors.hpp"
#include "tailadapt/estimators.hpp"
#include "tailadapt/harness.hpp"
#include "tailadapt/io.hpp"
#include "tailadapt/laws.hpp"
#include "tailadapt/quantiles.hpp"
#include "tailadapt/tail_functionals.hpp"

namespace tailadapt::app {

using ojson = nlohmann::ordered_json;

/// Usage errors exit with status 2, everything else with status 1.
struct usage_error : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct RunConfig {
  std::string command;      ///< estimate, calibrate, simulate, analyze, generate
  std::string experiment;   ///< simulate only
  std::optional<std::string> input_path;
  std::optional<std::string> law;
  LawParams law_params;
  double rho = 0.25;
  double delta = 0.05;
  double k0_frac = 1.0 / 20.0;
  std::size_t grid_length = 200;
  CriticalValue z = CriticalValue::fixed(10.0);
  std::optional<std::string> calibration_file;
  std::vector<double> p_levels;
  std::uint64_t seed = 1;
  std::string output_dir = ".";
  std::size_t n_rep = 2000;
  std::size_t n = 1000;
  double level = 0.99;
  std::size_t workers = 0;
  std::size_t k_stride = 1;
  double gamma = 1.0;
  bool with_ecdf = true;
  std::optional<double> t_min;
  double t_max = 1e6;
  std::size_t t_points = 25;
  std::ostream* log = &std::cerr;

  AdaptiveConfig adaptive_for(std::size_t sample_size) const {
    return config_for_sample_size(sample_size, k0_frac, rho, delta, std::min(grid_length, sample_size), z);
  }
};

/// "10", "mu_log_n(2.5)" or "mu_log_n:2.5".
inline CriticalValue parse_critical_value(const std::string& text) {
  auto number = [&](const std::string& s) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(s, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != s.size() || !(v > 0.0)) throw usage_error("invalid critical value '" + text + "'");
    return v;
  };
  const std::string prefix = "mu_log_n";
  if (text.rfind(prefix, 0) == 0) {
    std::string rest = text.substr(prefix.size());
    if (rest.size() >= 2 && rest.front() == '(' && rest.back() == ')') return CriticalValue::mu_log_n(number(rest.substr(1, rest.size() - 2)));
    if (!rest.empty() && rest.front() == ':') return CriticalValue::mu_log_n(number(rest.substr(1)));
    throw usage_error("invalid critical value '" + text + "'");
  }
  return CriticalValue::fixed(number(text));
}

inline std::string critical_value_text(const CriticalValue& z) {
  return z.kind == CriticalValue::Kind::fixed ? io::format_double(z.value)
                                              : "mu_log_n(" + io::format_double(z.value) + ")";
}

inline LawParams parse_law_params(const std::vector<std::string>& items) {
  LawParams out;
  for (const auto& item : items) {
    const auto eq = item.find('=');
    if (eq == std::string::npos || eq == 0) throw usage_error("law parameter '" + item + "' is not key=value");
    try {
      out[item.substr(0, eq)] = std::stod(item.substr(eq + 1));
    } catch (const std::exception&) {
      throw usage_error("law parameter '" + item + "' has a non-numeric value");
    }
  }
  return out;
}

/// Fields present in `j` override `c`. Keys follow the long option names
/// with dashes replaced by underscores.
inline void apply_config_json(RunConfig& c, const nlohmann::json& j) {
  try {
    if (j.contains("input")) c.input_path = j.at("input").get<std::string>();
    if (j.contains("law")) c.law = j.at("law").get<std::string>();
    if (j.contains("law_params")) c.law_params = j.at("law_params").get<LawParams>();
    if (j.contains("rho")) c.rho = j.at("rho").get<double>();
    if (j.contains("delta")) c.delta = j.at("delta").get<double>();
    if (j.contains("k0_frac")) c.k0_frac = j.at("k0_frac").get<double>();
    if (j.contains("grid")) c.grid_length = j.at("grid").get<std::size_t>();
    if (j.contains("z")) {
      c.z = j.at("z").is_number() ? CriticalValue::fixed(j.at("z").get<double>())
                                  : parse_critical_value(j.at("z").get<std::string>());
    }
    if (j.contains("calibration_file")) c.calibration_file = j.at("calibration_file").get<std::string>();
    if (j.contains("p")) c.p_levels = j.at("p").get<std::vector<double>>();
    if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("out")) c.output_dir = j.at("out").get<std::string>();
    if (j.contains("reps")) c.n_rep = j.at("reps").get<std::size_t>();
    if (j.contains("n")) c.n = j.at("n").get<std::size_t>();
    if (j.contains("level")) c.level = j.at("level").get<double>();
    if (j.contains("workers")) c.workers = j.at("workers").get<std::size_t>();
    if (j.contains("k_stride")) c.k_stride = j.at("k_stride").get<std::size_t>();
    if (j.contains("gamma")) c.gamma = j.at("gamma").get<double>();
    if (j.contains("ecdf")) c.with_ecdf = j.at("ecdf").get<bool>();
    if (j.contains("t_min")) c.t_min = j.at("t_min").get<double>();
    if (j.contains("t_max")) c.t_max = j.at("t_max").get<double>();
    if (j.contains("t_points")) c.t_points = j.at("t_points").get<std::size_t>();
  } catch (const nlohmann::json::exception& e) {
    throw usage_error(std::string("config file: ") + e.what());
  }
}

namespace detail {

inline LawPtr resolve_law(const RunConfig& c, const char* who) {
  if (!c.law) throw usage_error(std::string(who) + " requires --law (one of " + [] {
    std::string s;
    for (const auto& n : law_names()) s += (s.empty() ? "" : ", ") + n;
    return s;
  }() + ")");
  try {
    return make_law(*c.law, c.law_params);
  } catch (const config_error& e) {
    throw usage_error(e.what());
  }
}

inline void ensure_dir(const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw argument_error("cannot create output directory " + dir + ": " + ec.message());
}

inline std::string path_in(const std::string& dir, const std::string& file) {
  return (std::filesystem::path(dir) / file).string();
}

inline ojson config_json(const AdaptiveConfig& a, std::size_t n) {
  return {{"rho", a.rho},
          {"delta", a.delta},
          {"k0", a.k0},
          {"grid_length", a.grid_length},
          {"critical_value", critical_value_text(a.critical_value)},
          {"z", a.critical_value.resolve(n)}};
}

inline void check_levels(const std::vector<double>& p) {
  for (double v : p) {
    if (!(v > 0.0 && v < 1.0)) throw usage_error("quantile level " + io::format_double(v) + " outside (0, 1)");
  }
}

inline void warn(const RunConfig& c, const std::string& msg) {
  if (c.log) *c.log << "warning: " << msg << '\n';
}

}  // namespace detail

/// Adaptive estimate on observed data: estimate.json and hill.csv.
inline std::vector<std::string> cmd_estimate(const RunConfig& c) {
  if (!c.input_path) throw usage_error("estimate requires --input");
  detail::check_levels(c.p_levels);
  const Sample sample(io::read_observations(*c.input_path));
  const std::size_t n = sample.size();
  if (n < 3) throw argument_error("estimate needs at least 3 observations, got " + std::to_string(n));
  AdaptiveConfig config = c.adaptive_for(n);
  if (c.calibration_file) {
    const CalibrationResult cal = load_calibration(*c.calibration_file);
    if (cal.n != n) {
      detail::warn(c, "calibration was computed for n = " + std::to_string(cal.n) + ", data has n = " +
                          std::to_string(n));
    }
    config.critical_value = CriticalValue::fixed(cal.z);
  }
  const TailSelection sel = select(sample, config);

  ojson q = ojson::object();
  for (double p : c.p_levels) q[io::format_double(p)] = quantile_adaptive(sample, sel, p);
  ojson trace = ojson::array();
  for (const auto& [m, t] : sel.trace) trace.push_back({{"m", m}, {"T", t}});
  ojson out;
  out["n"] = n;
  out["m_hat"] = sel.m_hat;
  out["k_hat"] = sel.k_hat;
  out["tau_hat"] = sel.tau_hat;
  out["theta_hat"] = sel.theta_hat;
  out["rejected"] = sel.rejected;
  out["quantiles"] = q;
  out["config"] = detail::config_json(config, n);
  out["trace"] = trace;

  Table hills{"hill", {"k", "hill"}, {}};
  const auto curve = hill_curve(sample);
  for (std::size_t k = 1; k <= curve.size(); ++k) hills.rows.push_back({static_cast<double>(k), curve[k - 1]});

  detail::ensure_dir(c.output_dir);
  const std::string json_path = detail::path_in(c.output_dir, "estimate.json");
  const std::string csv_path = detail::path_in(c.output_dir, "hill.csv");
  io::write_text(json_path, out.dump(2) + "\n");
  io::write_text(csv_path, io::table_csv(hills));
  return {json_path, csv_path};
}

inline std::vector<std::string> cmd_calibrate(const RunConfig& c) {
  const AdaptiveConfig config = c.adaptive_for(c.n);
  CalibrationOptions opt;
  opt.workers = c.workers;
  const CalibrationResult r = calibrate(c.n, config, c.n_rep, c.level, c.seed, opt);
  for (const auto& w : r.warnings) detail::warn(c, w);
  detail::ensure_dir(c.output_dir);
  const std::string path = detail::path_in(c.output_dir, "calibration_n" + std::to_string(c.n) + ".json");
  save_calibration(r, path, c.with_ecdf);
  return {path};
}

inline ojson report_manifest(const ExperimentReport& r, const std::vector<std::string>& files) {
  ojson j;
  j["experiment"] = r.experiment;
  j["law"] = r.law;
  j["law_params"] = r.law_params;
  j["n"] = r.n;
  j["n_rep"] = r.n_rep;
  j["config"] = detail::config_json(r.config, r.n);
  j["seed"] = r.seed;
  j["scalars"] = r.scalars;
  j["warnings"] = r.warnings;
  j["files"] = files;
  // SOURCE_DATE_EPOCH pins the timestamp for reproducible manifests
  std::time_t now = std::time(nullptr);
  if (const char* epoch = std::getenv("SOURCE_DATE_EPOCH")) now = static_cast<std::time_t>(std::atoll(epoch));
  char stamp[32];
  std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
  j["provenance"] = {{"software", "tailadapt"}, {"version", r.version}, {"generated_at", stamp}};
  return j;
}

/// Writes `{law}_{n}_{experiment}.csv` (the scalar summary if the report has
/// one, else its first table), one `_{table}` CSV per remaining table and a
/// JSON manifest.
inline std::vector<std::string> write_report(const ExperimentReport& r, const std::string& dir) {
  detail::ensure_dir(dir);
  const std::string base = r.law + "_" + std::to_string(r.n) + "_" + r.experiment;
  std::vector<std::string> files;
  std::size_t first_extra = 0;
  if (!r.scalars.empty()) {
    std::string s = "metric,value\n";
    for (const auto& [k, v] : r.scalars) s += k + "," + io::format_double(v) + "\n";
    files.push_back(detail::path_in(dir, base + ".csv"));
    io::write_text(files.back(), s);
  } else if (!r.tables.empty()) {
    files.push_back(detail::path_in(dir, base + ".csv"));
    io::write_text(files.back(), io::table_csv(r.tables[0]));
    first_extra = 1;
  }
  for (std::size_t i = first_extra; i < r.tables.size(); ++i) {
    files.push_back(detail::path_in(dir, base + "_" + r.tables[i].name + ".csv"));
    io::write_text(files.back(), io::table_csv(r.tables[i]));
  }
  std::vector<std::string> names;
  for (const auto& f : files) names.push_back(std::filesystem::path(f).filename().string());
  const std::string manifest = detail::path_in(dir, base + ".json");
  io::write_text(manifest, report_manifest(r, names).dump(2) + "\n");
  files.push_back(manifest);
  return files;
}

inline std::vector<std::string> experiment_names() { return {"table1", "table2", "gamma_rmse", "consistency"}; }

inline std::vector<std::string> cmd_simulate(const RunConfig& c) {
  const LawPtr law = detail::resolve_law(c, "simulate");
  const AdaptiveConfig config = c.adaptive_for(c.n);
  ExperimentReport r;
  if (c.experiment == "table1") {
    detail::check_levels(c.p_levels);
    r = quantile_ratio_experiment(*law, c.n, c.n_rep, c.p_levels.empty() ? default_p_grid() : c.p_levels, config,
                                  c.seed, c.k_stride, c.workers);
  } else if (c.experiment == "table2") {
    r = sample_quantile_comparison(*law, c.n, c.n_rep, default_k_levels(c.n), config, c.seed, c.workers);
  } else if (c.experiment == "gamma_rmse") {
    r = gamma_rmse_experiment(*law, c.gamma, c.n, c.n_rep, config, c.seed, c.workers);
  } else if (c.experiment == "consistency") {
    r = consistency_experiment(*law, c.gamma, c.n, c.n_rep, config, c.seed, c.workers);
  } else {
    throw usage_error("unknown experiment '" + c.experiment + "' (table1, table2, gamma_rmse, consistency)");
  }
  for (const auto& w : r.warnings) detail::warn(c, w);
  return write_report(r, c.output_dir);
}

/// Fitted index, alpha_F and chi-square distance on a log-spaced threshold
/// grid. Rows whose numerics fail carry the reason in the status column.
inline std::vector<std::string> cmd_analyze(const RunConfig& c) {
  const LawPtr law = detail::resolve_law(c, "analyze");
  const double t_lo = c.t_min.value_or(std::fmax(2.0, 2.0 * law->support_left()));
  if (!(t_lo > 0.0) || !(c.t_max > t_lo) || c.t_points < 2) {
    throw usage_error("analyze needs 0 < t_min < t_max and at least 2 grid points");
  }
  std::string csv = "t,theta_t,alpha_F,chi2,status\n";
  for (std::size_t i = 0; i < c.t_points; ++i) {
    const double t = t_lo * std::pow(c.t_max / t_lo, static_cast<double>(i) / static_cast<double>(c.t_points - 1));
    std::string theta = "error", alpha = "error", chi2 = "error", status = "ok";
    try {
      const double th = theta_fit(*law, t);
      theta = io::format_double(th);
      alpha = io::format_double(alpha_F(*law, t));
      const DivergenceResult d = chi2_excess_vs_pareto_detailed(*law, t, th);
      chi2 = io::format_double(d.value);
      if (d.diverged) status = d.diagnostic;
    } catch (const std::exception& e) {
      status = e.what();
    }
    for (char& ch : status) {
      if (ch == ',' || ch == '\n') ch = ';';
    }
    csv += io::format_double(t) + "," + theta + "," + alpha + "," + chi2 + "," + status + "\n";
  }
  detail::ensure_dir(c.output_dir);
  const std::string path = detail::path_in(c.output_dir, "analyze_" + law->name() + ".csv");
  io::write_text(path, csv);
  return {path};
}

/// Draws n observations from a law into sample.csv.
inline std::vector<std::string> cmd_generate(const RunConfig& c) {
  const LawPtr law = detail::resolve_law(c, "generate");
  Rng rng(c.seed);
  std::string s = "x\n";
  for (std::size_t i = 0; i < c.n; ++i) s += io::format_double(law->draw(rng)) + "\n";
  detail::ensure_dir(c.output_dir);
  const std::string path = detail::path_in(c.output_dir, "sample.csv");
  io::write_text(path, s);
  return {path};
}

inline std::vector<std::string> run(const RunConfig& c) {
  if (c.command == "estimate") return cmd_estimate(c);
  if (c.command == "calibrate") return cmd_calibrate(c);
  if (c.command == "simulate") return cmd_simulate(c);
  if (c.command == "analyze") return cmd_analyze(c);
  if (c.command == "generate") return cmd_generate(c);
  throw usage_error("unknown command '" + c.command + "'");
}

/// Parses argv into a RunConfig: CLI flags override the --config file,
/// which overrides the defaults. Returns nullopt when CLI11 handled the
/// request itself (help); `exit_code` then holds its status.
inline std::optional<RunConfig> parse_args(const std::vector<std::string>& args, int& exit_code,
                                           std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App cli{"Adaptive tail-index and extreme-quantile estimation"};
  cli.require_subcommand(1);
  cli.set_version_flag("--version", std::string(kVersion));

  struct Raw {
    std::string input, law, z, calibration_file, out, config, experiment;
    std::vector<std::string> law_params;
    double rho = 0, delta = 0, k0_frac = 0, level = 0, gamma = 0, t_min = 0, t_max = 0;
    std::size_t grid = 0, reps = 0, n = 0, workers = 0, k_stride = 0, t_points = 0;
    std::uint64_t seed = 0;
    std::vector<double> p;
    bool no_ecdf = false;
  } raw;

  std::vector<std::pair<std::string, CLI::Option*>> given;
  auto add_common = [&](CLI::App* sub) {
    given.emplace_back("config", sub->add_option("--config", raw.config, "JSON file with default settings"));
    given.emplace_back("rho", sub->add_option("--rho", raw.rho, "window start fraction rho"));
    given.emplace_back("delta", sub->add_option("--delta", raw.delta, "window end fraction delta"));
    given.emplace_back("k0_frac", sub->add_option("--k0-frac", raw.k0_frac, "first tested rank as a fraction of n"));
    given.emplace_back("grid", sub->add_option("--grid", raw.grid, "grid length K_n"));
    given.emplace_back("z", sub->add_option("--z", raw.z, "critical value: number or mu_log_n(mu)"));
    given.emplace_back("seed", sub->add_option("--seed", raw.seed, "random seed"));
    given.emplace_back("workers", sub->add_option("--workers", raw.workers, "worker threads (0 = all cores)"));
    given.emplace_back("out", sub->add_option("--out", raw.out, "output directory"));
  };
  auto add_law = [&](CLI::App* sub) {
    given.emplace_back("law", sub->add_option("--law", raw.law, "law name"));
    given.emplace_back("law_params", sub->add_option("--law-param", raw.law_params, "law parameter key=value"));
  };
  auto add_mc = [&](CLI::App* sub) {
    given.emplace_back("n", sub->add_option("--n", raw.n, "sample size"));
    given.emplace_back("reps", sub->add_option("--reps", raw.reps, "Monte Carlo replications"));
  };

  auto* est = cli.add_subcommand("estimate", "adaptive estimate on a data file");
  add_common(est);
  given.emplace_back("input", est->add_option("--input", raw.input, "data file, one observation per line"));
  given.emplace_back("p", est->add_option("--p", raw.p, "quantile levels")->delimiter(','));
  given.emplace_back("calibration_file", est->add_option("--calibration-file", raw.calibration_file,
                                                         "calibration JSON providing the critical value"));

  auto* cal = cli.add_subcommand("calibrate", "Monte Carlo critical value under the Pareto null");
  add_common(cal);
  add_mc(cal);
  given.emplace_back("level", cal->add_option("--level", raw.level, "confidence level"));
  given.emplace_back("no_ecdf", cal->add_flag("--no-ecdf", raw.no_ecdf, "omit the simulated maxima"));

  auto* sim = cli.add_subcommand("simulate", "simulation experiments");
  add_common(sim);
  add_law(sim);
  add_mc(sim);
  sim->add_option("experiment", raw.experiment, "table1, table2, gamma_rmse or consistency")->required();
  given.emplace_back("p", sim->add_option("--p", raw.p, "quantile levels (table1)")->delimiter(','));
  given.emplace_back("k_stride", sim->add_option("--k-stride", raw.k_stride, "stride of the fixed-k scan"));
  given.emplace_back("gamma", sim->add_option("--gamma", raw.gamma, "true tail index"));

  auto* ana = cli.add_subcommand("analyze", "fitted index and chi-square distance over thresholds");
  add_common(ana);
  add_law(ana);
  given.emplace_back("t_min", ana->add_option("--t-min", raw.t_min, "smallest threshold"));
  given.emplace_back("t_max", ana->add_option("--t-max", raw.t_max, "largest threshold"));
  given.emplace_back("t_points", ana->add_option("--t-points", raw.t_points, "number of thresholds"));

  auto* gen = cli.add_subcommand("generate", "draw a sample from a law");
  add_common(gen);
  add_law(gen);
  given.emplace_back("n", gen->add_option("--n", raw.n, "sample size"));

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    cli.parse(reversed);
  } catch (const CLI::ParseError& e) {
    exit_code = cli.exit(e, out, err);
    return std::nullopt;
  }

  RunConfig c;
  c.command = cli.get_subcommands().front()->get_name();
  c.experiment = raw.experiment;
  auto was_given = [&](const std::string& key) {
    for (const auto& [k, opt] : given) {
      if (k == key && opt->count() > 0) return true;
    }
    return false;
  };
  if (was_given("config")) {
    std::ifstream f(raw.config);
    if (!f) throw usage_error("cannot read config file " + raw.config);
    nlohmann::json j;
    try {
      f >> j;
    } catch (const nlohmann::json::exception& e) {
      throw usage_error("config file " + raw.config + ": " + e.what());
    }
    apply_config_json(c, j);
  }
  if (was_given("input")) c.input_path = raw.input;
  if (was_given("law")) c.law = raw.law;
  if (was_given("law_params")) c.law_params = parse_law_params(raw.law_params);
  if (was_given("rho")) c.rho = raw.rho;
  if (was_given("delta")) c.delta = raw.delta;
  if (was_given("k0_frac")) c.k0_frac = raw.k0_frac;
  if (was_given("grid")) c.grid_length = raw.grid;
  if (was_given("z")) c.z = parse_critical_value(raw.z);
  if (was_given("calibration_file")) c.calibration_file = raw.calibration_file;
  if (was_given("p")) c.p_levels = raw.p;
  if (was_given("seed")) c.seed = raw.seed;
  if (was_given("out")) c.output_dir = raw.out;
  if (was_given("reps")) c.n_rep = raw.reps;
  if (was_given("n")) c.n = raw.n;
  if (was_given("level")) c.level = raw.level;
  if (was_given("workers")) c.workers = raw.workers;
  if (was_given("k_stride")) c.k_stride = raw.k_stride;
  if (was_given("gamma")) c.gamma = raw.gamma;
  if (was_given("no_ecdf")) c.with_ecdf = !raw.no_ecdf;
  if (was_given("t_min")) c.t_min = raw.t_min;
  if (was_given("t_max")) c.t_max = raw.t_max;
  if (was_given("t_points")) c.t_points = raw.t_points;
  if (c.command == "estimate" && c.p_levels.empty()) c.p_levels = {0.99, 0.999};
  exit_code = 0;
  return c;
}

/// Entry point shared by the executable and the golden verifier. Prints the
/// written artifacts on `out`; returns 0 iff all of them were written.
inline int main_with_args(const std::vector<std::string>& args, std::ostream& out = std::cout,
                          std::ostream& err = std::cerr) {
  int code = 0;
  try {
    const auto config = parse_args(args, code, out, err);
    if (!config) return code;
    RunConfig c = *config;
    c.log = &err;
    for (const auto& f : run(c)) out << f << '\n';
    return 0;
  } catch (const usage_error& e) {
    err << "usage error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace tailadapt::app
