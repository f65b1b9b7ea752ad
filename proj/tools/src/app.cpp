// Copyright 2026 The cascade-gamma Authors
// SPDX-License-Identifier: Apache-2.0
#include "app.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <cmath>
#include <fstream>
#include <json.hpp>
#include <limits>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>

#include "cascade/continuum.hpp"
#include "cascade/discrete.hpp"
#include "cascade/error.hpp"
#include "cascade/simulate.hpp"
#include "report.hpp"

namespace cascade::cli {

namespace {

using Json = nlohmann::ordered_json;

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr std::uint64_t kMaxTableRows = 50'000'000;

struct Options {
  double p = kNaN;
  discrete::Count m = 0;
  double x_min = 1.0;
  double x_max = kNaN;
  std::uint64_t steps = 100;
  discrete::Count n_max = 0;
  double tail_tol = discrete::kDefaultTailTolerance;
  std::uint64_t trials = 100'000;
  std::uint64_t seed = 0;
  unsigned workers = 1;
  double cap = 1e6;
  double epsilon = 1e-9;
  std::string mode = "continuous";
  double abs_tol = kNaN;
  std::string format;
  std::string out = "-";
  std::string hist_out;
  std::string config;
};

/// Rendered report plus the exit code it implies.
struct Outcome {
  std::string text;
  int code = kSuccess;
};

std::string render(const Json& j) { return j.dump(2) + "\n"; }

void write_output(const std::string& path, const std::string& text, std::ostream& out) {
  if (path == "-") {
    out << text;
    out.flush();
    return;
  }
  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file) throw ConfigError("cannot open output file '" + path + "'");
  file << text;
  if (!file.flush()) throw ConfigError("failed writing output file '" + path + "'");
}

Outcome density_command(const Options& o) {
  const ModelParams params(o.p);
  if (!(std::isfinite(o.x_min) && o.x_min >= 1.0)) throw ConfigError("--x-min must be >= 1");
  if (!(std::isfinite(o.x_max) && o.x_max > o.x_min)) throw ConfigError("--x-max must exceed --x-min");
  if (o.steps < 2 || o.steps > kMaxTableRows) throw ConfigError("--steps must lie in [2, 5e7]");

  Table table({"x", "density", "asymptotic"});
  const double span = o.x_max - o.x_min;
  const double last = static_cast<double>(o.steps - 1);
  for (std::uint64_t i = 0; i < o.steps; ++i) {
    const double x = i + 1 == o.steps ? o.x_max : o.x_min + span * (static_cast<double>(i) / last);
    table.add_row({x, continuum::density(params, x),
                   std::exp(continuum::asymptotic_log_density(params, x))});
  }
  if (o.format == "csv") return {table.to_csv()};

  Json j;
  j["command"] = "density";
  j["params"] = {{"p", o.p}, {"x_min", o.x_min}, {"x_max", o.x_max}, {"steps", o.steps}};
  const auto tail = continuum::asymptotic_tail(params);
  j["asymptotic_tail"] = {{"log_prefactor", tail.log_prefactor}, {"decay_rate", tail.decay_rate}};
  Json rows = Json::array();
  for (const auto& r : table.rows()) {
    rows.push_back({{"x", std::get<double>(r[0])},
                    {"density", std::get<double>(r[1])},
                    {"asymptotic", std::get<double>(r[2])}});
  }
  j["rows"] = std::move(rows);
  return {render(j)};
}

Outcome pmf_command(const Options& o, const CLI::App& sub) {
  const discrete::DiscretizationParams params(o.p, o.m);
  const bool explicit_n_max = sub.count("--n-max") > 0;
  if (explicit_n_max) {
    if (o.n_max < o.m) throw ConfigError("--n-max must be >= --m");
    if (o.n_max - o.m >= kMaxTableRows) throw ConfigError("--n-max - --m must be below 5e7");
  }
  if (!(o.tail_tol > 0.0 && o.tail_tol < 1.0)) throw ConfigError("--tail-tol must lie in (0, 1)");

  const auto pmf = explicit_n_max ? discrete::cascade_pmf_table(params, o.m, o.n_max)
                                  : discrete::cascade_pmf_auto(params, o.m, o.tail_tol);
  Table table({"n", "pmf", "rescaled_density", "cumulative"});
  numerics::CompensatedSum cumulative;
  for (discrete::Count n = pmf.m_start; n <= pmf.n_max(); ++n) {
    const double prob = pmf.probability(n);
    cumulative.add(prob);
    table.add_row({static_cast<std::uint64_t>(n), prob, prob / params.delta(), cumulative.value()});
  }
  if (o.format == "csv") return {table.to_csv()};

  Json j;
  j["command"] = "pmf";
  j["params"] = {{"p", o.p},           {"m", o.m},
                 {"delta", params.delta()}, {"r_star", params.r_star()},
                 {"q_star", params.q_star()}, {"n_max", pmf.n_max()}};
  j["total_mass"] = cumulative.value();
  j["tail_bound"] = pmf.tail_bound;
  j["truncated"] = pmf.truncated;
  Json rows = Json::array();
  for (const auto& r : table.rows()) {
    rows.push_back({{"n", std::get<std::uint64_t>(r[0])},
                    {"pmf", std::get<double>(r[1])},
                    {"rescaled_density", std::get<double>(r[2])},
                    {"cumulative", std::get<double>(r[3])}});
  }
  j["rows"] = std::move(rows);
  return {render(j)};
}

Outcome moments_command(const Options& o, const CLI::App& sub) {
  const ModelParams params(o.p);
  const double tol = std::isnan(o.abs_tol) ? numerics::kDefaultQuadratureTolerance : o.abs_tol;
  if (!(tol > 0.0 && tol < 1.0)) throw ConfigError("--abs-tol must lie in (0, 1)");
  const bool with_lattice = sub.count("--m") > 0;
  std::optional<discrete::DiscretizationParams> lattice;
  if (with_lattice) lattice.emplace(o.p, o.m);

  const auto closed = continuum::moments(params);
  const auto quad = continuum::quadrature_moments(params, tol);

  Table table({"source", "mean", "variance"});
  table.add_row({std::string("closed_form"), closed.mean, closed.variance});
  table.add_row({std::string("quadrature"), quad.mean, quad.variance});
  if (lattice) {
    const auto dm = discrete::discrete_moments(*lattice);
    table.add_row({std::string("lattice"), dm.aggregate.mean, dm.aggregate.variance});
    table.add_row({std::string("lattice_per_unit"), dm.per_individual.mean, dm.per_individual.variance});
  }
  if (o.format == "csv") return {table.to_csv()};

  Json j;
  j["command"] = "moments";
  j["params"] = {{"p", o.p}, {"abs_tol", tol}};
  if (lattice) j["params"]["m"] = o.m;
  for (const auto& r : table.rows()) {
    j[std::get<std::string>(r[0])] = {{"mean", std::get<double>(r[1])}, {"variance", std::get<double>(r[2])}};
  }
  j["relative_difference"] = {{"mean", quad.mean / closed.mean - 1.0},
                              {"variance", quad.variance / closed.variance - 1.0}};
  return {render(j)};
}

Outcome extinction_command(const Options& o, const CLI::App& sub) {
  const ModelParams params(o.p);
  const bool with_lattice = sub.count("--m") > 0;
  std::optional<discrete::DiscretizationParams> lattice;
  if (with_lattice) lattice.emplace(o.p, o.m);

  const auto report = continuum::extinction(params);
  const double x_root = continuum::extinction_exponent_by_root(params);

  std::vector<std::string> columns = {"p", "x_of_p", "chi", "prob_finite", "x_of_p_root"};
  std::vector<Cell> row = {o.p, report.x_of_p, report.chi, report.prob_finite, x_root};
  double alpha = 1.0;
  double lattice_prob = 1.0;
  if (lattice) {
    if (params.supercritical()) alpha = discrete::martingale_alpha(*lattice);
    lattice_prob = discrete::discrete_prob_finite(*lattice);
    columns.insert(columns.end(), {"m", "alpha2", "lattice_prob_finite"});
    row.insert(row.end(), {static_cast<std::uint64_t>(o.m), alpha, lattice_prob});
  }
  if (o.format == "csv") {
    Table table(columns);
    table.add_row(row);
    return {table.to_csv()};
  }

  Json j;
  j["command"] = "extinction";
  j["params"] = {{"p", o.p}};
  j["x_of_p"] = report.x_of_p;
  j["chi"] = report.chi;
  j["prob_finite"] = report.prob_finite;
  j["x_of_p_root"] = x_root;
  j["route_difference"] = std::abs(report.x_of_p - x_root);
  if (lattice) {
    j["params"]["m"] = o.m;
    j["lattice"] = {{"delta", lattice->delta()},
                    {"alpha2", alpha},
                    {"scaled_gap", (1.0 - alpha) / lattice->delta()},
                    {"prob_finite", lattice_prob}};
  }
  return {render(j)};
}

Outcome verify_command(const Options& o, const CLI::App&) {
  const ModelParams params(o.p);
  const double abs_tol = std::isnan(o.abs_tol) ? 1e-6 : o.abs_tol;
  if (!(abs_tol > 0.0 && abs_tol < 1.0)) throw ConfigError("--abs-tol must lie in (0, 1)");

  const double lambert_target = continuum::extinction(params).prob_finite;
  const double root_target = std::exp(-continuum::extinction_exponent_by_root(params));

  Json j;
  j["command"] = "verify";
  j["params"] = {{"p", o.p}, {"abs_tol", abs_tol}};
  j["lambert_target"] = lambert_target;
  j["root_target"] = root_target;

  // The quadrature gets a tighter budget so that its own error cannot use up
  // the tolerance being checked.
  int code = kSuccess;
  std::string failure;
  continuum::NormalizationCheck check;
  try {
    check = continuum::verify_normalization(params, abs_tol / 100.0);
  } catch (const numerics::QuadratureToleranceNotMet& e) {
    failure = e.what();
    check.quadrature = e.best_estimate();
    check.integral = kNaN;
  }
  const double residual_lambert = std::abs(check.integral - lambert_target);
  const double residual_root = std::abs(check.integral - root_target);
  const bool pass = failure.empty() && residual_lambert <= abs_tol && residual_root <= abs_tol;
  if (!pass) code = kNumerical;

  if (o.format == "csv") {
    Table table({"p", "integral", "lambert_target", "root_target", "residual_lambert", "residual_root",
                 "upper_limit", "tail", "pass"});
    table.add_row({o.p, check.integral, lambert_target, root_target, residual_lambert, residual_root,
                   check.upper_limit, check.tail, std::string(pass ? "true" : "false")});
    return {table.to_csv(), code};
  }
  j["integral"] = check.integral;
  j["residuals"] = {{"lambert", residual_lambert}, {"root", residual_root}};
  j["upper_limit"] = check.upper_limit;
  j["tail"] = check.tail;
  j["quadrature"] = {{"abs_error_estimate", check.quadrature.abs_error_estimate},
                     {"evaluations", check.quadrature.evaluations}};
  j["pass"] = pass;
  if (!failure.empty()) j["error"] = failure;
  return {render(j), code};
}

std::string histogram_csv(const sim::Histogram& h) {
  Table table({"lower", "upper", "count"});
  for (std::size_t k = 0; k < h.bin_count(); ++k) {
    table.add_row({h.edge(k), h.edge(k + 1), h.counts()[k]});
  }
  table.add_row({static_cast<double>(h.upper()), std::numeric_limits<double>::infinity(), h.overflow()});
  return table.to_csv();
}

Outcome simulate_command(const Options& o, const CLI::App&, std::ostream& out) {
  sim::SimConfig config;
  const auto mode = sim::parse_mode(o.mode);
  if (!mode) throw ConfigError("--mode must be continuous, discrete or walk");
  config.mode = *mode;
  config.p = o.p;
  config.m = o.m;
  config.trials = o.trials;
  config.seed = o.seed;
  config.cap = o.cap;
  config.epsilon = o.epsilon;
  config.workers = o.workers;
  config.validate();
  if (!o.hist_out.empty() && o.hist_out == o.out) {
    throw ConfigError("--hist-out and --out must differ");
  }

  const auto summary = sim::run_campaign(config);

  // Reference values the estimates should reproduce.
  double reference_prob = 1.0;
  double reference_mean = kNaN;
  if (config.mode == sim::Mode::continuous) {
    reference_prob = continuum::extinction(ModelParams(o.p)).prob_finite;
    if (o.p < 0.5) reference_mean = continuum::moments(ModelParams(o.p)).mean;
  } else {
    const discrete::DiscretizationParams lattice(o.p, o.m);
    reference_prob = discrete::discrete_prob_finite(lattice);
    if (o.p < 0.5) reference_mean = discrete::discrete_moments(lattice).aggregate.mean;
  }

  if (!o.hist_out.empty()) write_output(o.hist_out, histogram_csv(summary.histogram()), out);

  if (o.format == "csv") {
    Table table({"mode", "p", "m", "trials", "seed", "workers", "cap", "epsilon", "n_finite", "n_censored",
                 "mean", "mean_standard_error", "variance", "finite_fraction",
                 "finite_fraction_standard_error"});
    table.add_row({o.mode, o.p, static_cast<std::uint64_t>(o.m), o.trials, o.seed,
                   static_cast<std::uint64_t>(o.workers), o.cap, o.epsilon, summary.n_finite(),
                   summary.n_censored(), summary.mean(), summary.mean_standard_error(), summary.variance(),
                   summary.finite_fraction(), summary.finite_fraction_standard_error()});
    return {table.to_csv()};
  }

  Json j;
  j["command"] = "simulate";
  j["params"] = {{"mode", o.mode},  {"p", o.p},         {"m", o.m},
                 {"trials", o.trials}, {"seed", o.seed}, {"workers", o.workers},
                 {"cap", o.cap},    {"epsilon", o.epsilon}};
  j["trials"] = summary.trials();
  j["n_finite"] = summary.n_finite();
  j["n_censored"] = summary.n_censored();
  j["sum"] = summary.sum();
  j["sum_sq"] = summary.sum_sq();
  j["mean"] = summary.mean();
  j["mean_standard_error"] = summary.mean_standard_error();
  j["variance"] = summary.variance();
  j["finite_fraction"] = summary.finite_fraction();
  j["finite_fraction_standard_error"] = summary.finite_fraction_standard_error();
  j["reference"] = {{"mean", reference_mean}, {"prob_finite", reference_prob}};
  const auto& h = summary.histogram();
  j["histogram"] = {{"lower", h.lo()},
                    {"upper", h.upper()},
                    {"bin_width", h.bin_width()},
                    {"overflow", h.overflow()},
                    {"counts", std::vector<std::uint64_t>(h.counts().begin(), h.counts().end() - 1)}};
  return {render(j)};
}

std::string trim(std::string s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

/// Value following `--flag` (or given as `--flag=value`) on the command line.
std::optional<std::string> flag_value(const std::vector<std::string>& args, const std::string& flag) {
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == flag) return i + 1 < args.size() ? args[i + 1] : std::string();
    if (args[i].rfind(flag + "=", 0) == 0) return args[i].substr(flag.size() + 1);
  }
  return std::nullopt;
}

/// Appends the entries of the --config file to `args`. A key that is also
/// given as a flag must carry the same text, otherwise it is an error.
std::vector<std::string> splice_config(std::vector<std::string> args) {
  const auto path = flag_value(args, "--config");
  if (!path) return args;
  if (path->empty()) throw ConfigError("--config needs a path");
  for (const auto& [key, value] : read_config_file(*path)) {
    const std::string flag = "--" + key;
    if (key == "config") throw ConfigError("--config files cannot nest");
    if (const auto given = flag_value(args, flag)) {
      if (*given != value) {
        throw ConfigError("conflict for " + flag + ": '" + *given + "' on the command line, '" + value +
                          "' in " + *path);
      }
      continue;
    }
    args.push_back(flag);
    args.push_back(value);
  }
  return args;
}

}  // namespace

std::vector<std::pair<std::string, std::string>> read_config_file(const std::string& path) {
  std::ifstream file(path);
  if (!file) throw ConfigError("cannot read config file '" + path + "'");
  std::vector<std::pair<std::string, std::string>> entries;
  std::map<std::string, std::string> seen;
  std::string line;
  int line_no = 0;
  while (std::getline(file, line)) {
    ++line_no;
    line = trim(line);
    if (line.empty() || line.front() == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(path + ":" + std::to_string(line_no) + ": expected key=value");
    }
    std::string key = trim(line.substr(0, eq));
    std::replace(key.begin(), key.end(), '_', '-');
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty()) {
      throw ConfigError(path + ":" + std::to_string(line_no) + ": empty key or value");
    }
    if (!seen.emplace(key, value).second) {
      throw ConfigError(path + ":" + std::to_string(line_no) + ": duplicate key '" + key + "'");
    }
    entries.emplace_back(key, value);
  }
  return entries;
}

int run(const std::vector<std::string>& raw_args, std::ostream& out, std::ostream& err) {
  Options o;
  CLI::App app{"Total-size distribution of the Gamma(2, p) branching cascade", "cascade-gamma"};
  app.require_subcommand(1);

  const auto add_common = [&o](CLI::App* sub) {
    sub->add_option("--p", o.p, "Gamma scale p (offspring mean 2p)")->required();
    sub->add_option("--format", o.format, "Output format")
        ->check(CLI::IsMember({"csv", "json"}))
        ->capture_default_str();
    sub->add_option("--out", o.out, "Output path, - for standard output")->capture_default_str();
    sub->add_option("--config", o.config, "Flat key=value file of further flags");
  };

  auto* density = app.add_subcommand("density", "Tabulate g(x) and its large-x form");
  density->add_option("--x-min", o.x_min, "First grid point (>= 1)")->capture_default_str();
  density->add_option("--x-max", o.x_max, "Last grid point")->required();
  density->add_option("--steps", o.steps, "Number of grid points (>= 2)")->capture_default_str();

  auto* pmf = app.add_subcommand("pmf", "Lattice pmf of the total size started from m units");
  pmf->add_option("--m", o.m, "Units per unit mass (delta = 1/m)")->required();
  pmf->add_option("--n-max", o.n_max, "Last n to tabulate (default: until the tail is below --tail-tol)");
  pmf->add_option("--tail-tol", o.tail_tol, "Tail mass bound for the automatic table")->capture_default_str();

  auto* moments = app.add_subcommand("moments", "Mean and variance, closed form against quadrature");
  moments->add_option("--m", o.m, "Also report the lattice moments at delta = 1/m");
  moments->add_option("--abs-tol", o.abs_tol, "Quadrature tolerance");

  auto* extinction = app.add_subcommand("extinction", "Probability that the cascade is finite");
  extinction->add_option("--m", o.m, "Also report the lattice value at delta = 1/m");

  auto* verify = app.add_subcommand("verify", "Check the total mass of g against P{Z < inf}");
  verify->add_option("--abs-tol", o.abs_tol, "Pass threshold for both residuals (default 1e-6)");

  auto* simulate = app.add_subcommand("simulate", "Monte Carlo campaign");
  simulate->add_option("--mode", o.mode, "continuous, discrete or walk")
      ->check(CLI::IsMember({"continuous", "discrete", "walk"}))
      ->capture_default_str();
  simulate->add_option("--m", o.m, "Units per unit mass (discrete and walk modes)");
  simulate->add_option("--trials", o.trials, "Number of trials")->capture_default_str();
  simulate->add_option("--seed", o.seed, "RNG seed")->capture_default_str();
  simulate->add_option("--workers", o.workers, "Worker threads")->capture_default_str();
  simulate->add_option("--cap", o.cap, "Censoring threshold on the total size")->capture_default_str();
  simulate->add_option("--epsilon", o.epsilon, "Generation size treated as extinct")->capture_default_str();
  simulate->add_option("--hist-out", o.hist_out, "Also write the histogram as CSV to this path");

  add_common(density);
  add_common(pmf);
  add_common(moments);
  add_common(extinction);
  add_common(verify);
  add_common(simulate);

  std::vector<std::string> args;
  try {
    args = splice_config(raw_args);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  }

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    app.exit(e, out, err);
    return kSuccess;
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e, out, err);
    return rc == 0 ? kSuccess : kUsage;
  }

  // The default format depends on the command.
  CLI::App* chosen = app.get_subcommands().front();
  if (chosen->count("--format") == 0) {
    o.format = (chosen == density || chosen == pmf) ? "csv" : "json";
  }

  try {
    Outcome outcome;
    if (chosen == density) {
      outcome = density_command(o);
    } else if (chosen == pmf) {
      outcome = pmf_command(o, *chosen);
    } else if (chosen == moments) {
      outcome = moments_command(o, *chosen);
    } else if (chosen == extinction) {
      outcome = extinction_command(o, *chosen);
    } else if (chosen == verify) {
      outcome = verify_command(o, *chosen);
    } else {
      outcome = simulate_command(o, *chosen, out);
    }
    write_output(o.out, outcome.text, out);
    if (outcome.code == kNumerical) err << "error: check failed, see the report\n";
    return outcome.code;
  } catch (const DomainError& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kNumerical;
  }
}

}  // namespace cascade::cli
