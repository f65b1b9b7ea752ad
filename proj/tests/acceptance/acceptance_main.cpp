// Copyright 2026 The cascade-gamma Authors
// SPDX-License-Identifier: Apache-2.0
//
// Acceptance run: one PASS/FAIL line per criterion, with the measured values.
// Exit status is the number of failed criteria.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <json.hpp>
#include <sstream>
#include <string>
#include <vector>

#include "app.hpp"
#include "cascade/continuum.hpp"
#include "cascade/discrete.hpp"
#include "cascade/simulate.hpp"
#include "oracles.hpp"

using namespace cascade;
using discrete::Count;
using discrete::DiscretizationParams;

namespace {

// Every Monte Carlo criterion uses this seed; it was fixed before any run.
constexpr std::uint64_t kSeed = 1;

struct Verdict {
  bool pass = false;
  std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(const char* format, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, format, args...);
  return buf;
}

nlohmann::json run_cli_json(const std::vector<std::string>& args, int& code) {
  std::ostringstream out;
  std::ostringstream err;
  code = cli::run(args, out, err);
  return nlohmann::json::parse(out.str());
}

/// Integral of g over [1, upper] by graded fixed-grid Simpson in long double.
long double oracle_mass(long double p, long double upper) {
  const auto g = [p](long double x) { return oracle::gamma_cascade_density(p, x); };
  return oracle::simpson(g, 1.0L, 2.0L, 200000) + oracle::simpson(g, 2.0L, 50.0L, 200000) +
         oracle::simpson(g, 50.0L, upper, 400000);
}

/// Positive root of x = 2 ln(1 + p x) by bisection.
long double oracle_x_of_p(long double p) {
  return oracle::bisect([p](long double x) { return 2.0L * std::log1p(p * x) - x; }, 1e-6L, 50.0L);
}

/// Root alpha in (0, 1) of E(alpha^{V - 1}) = 1 for V ~ NB(r, q), written as
/// a function of eps = 1 - alpha.
long double oracle_martingale_gap(long double r, long double q) {
  const auto h = [r, q](long double eps) {
    return r * (std::log1p(-q) - std::log1p(-q * (1.0L - eps))) - std::log1p(-eps);
  };
  // h ~ (1 - E V) eps < 0 near eps = 0 in the supercritical case; h -> +inf at 1.
  return oracle::bisect(h, 1e-12L, 1.0L - 1e-15L, 400);
}

Verdict normalization_subcritical() {
  bool pass = true;
  std::string detail;
  for (const double p : {0.1, 0.2, 0.3, 0.4}) {
    const auto t0 = std::chrono::steady_clock::now();
    int code = 0;
    const auto report = run_cli_json({"verify", "--p", std::to_string(p)}, code);
    const double elapsed = seconds_since(t0);
    const double residual = report["residuals"]["lambert"].get<double>();
    const double oracle = static_cast<double>(oracle_mass(p, 2000.0L));
    const double agreement = std::abs(report["integral"].get<double>() - oracle);
    pass = pass && code == 0 && residual <= 1e-6 && agreement <= 1e-6 && elapsed < 5.0;
    detail += fmt(" p=%.2g: |I-1|=%.2e oracle_diff=%.1e t=%.3fs;", p, residual, agreement, elapsed);
  }
  return {pass, detail};
}

Verdict normalization_supercritical() {
  bool pass = true;
  std::string detail;
  for (const double p : {0.55, 0.6, 0.75}) {
    int code = 0;
    const auto report = run_cli_json({"verify", "--p", std::to_string(p)}, code);
    const ModelParams params(p);
    const double x_lambert = continuum::extinction(params).x_of_p;
    const double x_root = continuum::extinction_exponent_by_root(params);
    const double routes = std::abs(x_lambert - x_root);
    const long double x_oracle = oracle_x_of_p(p);
    // Independent Lambert route: x = -2 W(-e^{-1/(2p)}/(2p)) - 1/p.
    const long double w_oracle = oracle::lambert_w_m1(-std::exp(-1.0L / (2.0L * p)) / (2.0L * p));
    const long double x_w_oracle = -2.0L * w_oracle - 1.0L / p;
    const double oracle_diff = static_cast<double>(std::max(std::abs(x_lambert - x_oracle),
                                                            std::abs(x_lambert - x_w_oracle)));
    const double residual = report["residuals"]["lambert"].get<double>();
    const double mass_oracle = static_cast<double>(oracle_mass(p, 8000.0L));
    const double mass_diff = std::abs(report["integral"].get<double>() - mass_oracle);
    pass = pass && code == 0 && residual <= 1e-6 && routes <= 1e-10 && oracle_diff <= 1e-10 &&
           mass_diff <= 1e-6;
    detail += fmt(" p=%.2g: |I-e^chi|=%.2e routes=%.1e x_oracle_diff=%.1e mass_oracle_diff=%.1e;", p,
                  residual, routes, oracle_diff, mass_diff);
  }
  return {pass, detail};
}

Verdict moments() {
  bool pass = true;
  std::string detail;
  for (const double p : {0.1, 0.25, 0.4}) {
    const auto quad = continuum::quadrature_moments(ModelParams(p));
    const double mean = 1.0 / (1.0 - 2.0 * p);
    const double var = 2.0 * p * p / std::pow(1.0 - 2.0 * p, 3);
    const double rel_mean = std::abs(quad.mean / mean - 1.0);
    const double rel_var = std::abs(quad.variance / var - 1.0);
    pass = pass && rel_mean <= 1e-4 && rel_var <= 1e-4;
    detail += fmt(" p=%.2g: rel_mean=%.1e rel_var=%.1e;", p, rel_mean, rel_var);
  }
  return {pass, detail};
}

/// sup over x = k/20 in [lo, hi] of |m P{n = floor(x m)} - f(x)|, with the
/// floor taken in integers.
double sup_lattice_error(Count m, int k_lo, int k_hi, const std::function<double(Count)>& log_mass,
                         const std::function<double(double)>& f) {
  double worst = 0.0;
  for (int k = k_lo; k <= k_hi; ++k) {
    const Count n = static_cast<Count>(k) * m / 20;
    const double x = k / 20.0;
    worst = std::max(worst, std::abs(static_cast<double>(m) * std::exp(log_mass(n)) - f(x)));
  }
  return worst;
}

Verdict lattice_to_continuum() {
  const double p = 0.3;
  bool decreasing = true;
  double previous = INFINITY;
  std::string detail;
  for (const Count m : {10u, 20u, 50u, 100u}) {
    const DiscretizationParams d(p, m);
    const double err = sup_lattice_error(
        m, 30, 400, [&](Count n) { return discrete::cascade_log_pmf(d, m, n); },
        [p](double x) { return static_cast<double>(oracle::gamma_cascade_density(p, x)); });
    decreasing = decreasing && err < previous;
    previous = err;
    detail += fmt(" delta=%.2g: sup=%.4e;", 1.0 / m, err);
  }
  return {decreasing, detail + fmt(" final=%.4e", previous)};
}

Verdict nb_to_gamma() {
  const double theta = 0.4;
  bool decreasing = true;
  double previous = INFINITY;
  std::string detail;
  for (const Count m : {10u, 20u, 50u, 100u}) {
    const auto nb = discrete::match_gamma(2.0, theta, 1.0 / m);
    const double err = sup_lattice_error(
        m, 2, 60, [&](Count n) { return discrete::nb_log_pmf(n, nb.r, nb.q); },
        [theta](double x) { return x * std::exp(-x / theta) / (theta * theta); });
    decreasing = decreasing && err < previous;
    previous = err;
    detail += fmt(" delta=%.2g: sup=%.4e;", 1.0 / m, err);
  }
  return {decreasing, detail + fmt(" final=%.4e", previous)};
}

Verdict pmf_consistency() {
  const DiscretizationParams d(0.3, 10);
  constexpr Count kN = 30;
  const double r = d.r_star();
  const double q = d.q_star();

  // p1[n] = P{Z(1) = n}; convolution powers give P{Z(k) = n}.
  std::vector<long double> p1(kN + 1, 0.0L);
  for (Count n = 1; n <= kN; ++n) p1[n] = std::exp(static_cast<long double>(discrete::cascade_log_pmf(d, 1, n)));
  std::vector<std::vector<long double>> power(kN + 1, std::vector<long double>(kN + 1, 0.0L));
  power[0][0] = 1.0L;
  for (Count k = 1; k <= kN; ++k) {
    for (Count n = 0; n <= kN; ++n) {
      for (Count j = 1; j <= n; ++j) power[k][n] += p1[j] * power[k - 1][n - j];
    }
  }

  // Z(1) = 1 + Z(Y), Y ~ NB(r*, q*).
  double worst_rec = 0.0;
  for (Count n = 1; n <= kN; ++n) {
    long double rhs = 0.0L;
    for (Count k = 0; k + 1 <= n; ++k) rhs += oracle::nb_pmf(k, r, q) * power[k][n - 1];
    worst_rec = std::max(worst_rec, static_cast<double>(std::abs(rhs - p1[n]) / p1[n]));
  }

  // m-additivity: P{Z(k) = n} from the closed form against the convolution power.
  double worst_add = 0.0;
  for (Count k = 2; k <= 12; ++k) {
    for (Count n = k; n <= kN; ++n) {
      const long double direct = std::exp(static_cast<long double>(discrete::cascade_log_pmf(d, k, n)));
      worst_add = std::max(worst_add, static_cast<double>(std::abs(direct - power[k][n]) / power[k][n]));
    }
  }

  // Brute-force enumeration of the branching process itself.
  const auto enumerated = oracle::progeny_by_enumeration(r, q, 10, kN);
  double worst_enum = 0.0;
  for (Count n = 10; n <= kN; ++n) {
    const long double direct = std::exp(static_cast<long double>(discrete::cascade_log_pmf(d, 10, n)));
    worst_enum = std::max(worst_enum, static_cast<double>(std::abs(direct - enumerated[n]) / enumerated[n]));
  }

  const bool pass = worst_rec <= 1e-10 && worst_add <= 1e-10 && worst_enum <= 1e-10;
  return {pass, fmt(" n<=30 relative: recursion=%.1e additivity=%.1e enumeration=%.1e", worst_rec, worst_add,
                    worst_enum)};
}

Verdict martingale_root() {
  const long double x_target = oracle_x_of_p(0.6L);
  double previous = INFINITY;
  bool approaching = true;
  double worst_root = 0.0;
  double gap = 0.0;
  std::string detail;
  for (const Count m : {100u, 1000u, 10000u}) {
    const DiscretizationParams d(0.6, m);
    const double scaled = (1.0 - discrete::martingale_alpha(d)) / d.delta();
    const long double oracle_gap = oracle_martingale_gap(d.r_star(), d.q_star());
    worst_root = std::max(worst_root, static_cast<double>(std::abs(discrete::martingale_gap(d) - oracle_gap) / oracle_gap));
    gap = std::abs(scaled - static_cast<double>(x_target));
    approaching = approaching && gap < previous;
    previous = gap;
    detail += fmt(" delta=%.0e: (1-a2)/delta=%.8f;", 1.0 / m, scaled);
  }
  const bool pass = approaching && gap <= 1e-2 && worst_root <= 1e-8;
  return {pass, detail + fmt(" x(0.6)=%.8f final_gap=%.2e root_vs_oracle=%.1e", static_cast<double>(x_target),
                             gap, worst_root)};
}

sim::SimConfig config(sim::Mode mode, double p, Count m, std::uint64_t trials) {
  sim::SimConfig c;
  c.mode = mode;
  c.p = p;
  c.m = m;
  c.trials = trials;
  c.seed = kSeed;
  return c;
}

Verdict monte_carlo_subcritical() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto summary = sim::run_campaign(config(sim::Mode::continuous, 0.3, 0, 100000));
  const double elapsed = seconds_since(t0);
  const auto& h = summary.histogram();
  std::vector<double> edges;
  for (std::size_t k = 1; k <= h.bin_count(); ++k) edges.push_back(h.edge(k));
  const auto cdf = continuum::cumulative_distribution(ModelParams(0.3), edges);
  const double ks = sim::ks_distance(h, cdf);
  const double n = static_cast<double>(summary.trials());
  const double ks_limit = 1.95 / std::sqrt(n) * 1.5;
  const double z = (summary.mean() - 2.5) / summary.mean_standard_error();
  const bool pass = std::abs(z) <= 4.0 && ks <= ks_limit && elapsed < 60.0 && summary.n_censored() == 0;
  return {pass, fmt(" mean=%.5f se=%.5f z=%.2f KS=%.5f (limit %.5f) censored=%llu t=%.2fs", summary.mean(),
                    summary.mean_standard_error(), z, ks, ks_limit,
                    static_cast<unsigned long long>(summary.n_censored()), elapsed)};
}

Verdict monte_carlo_supercritical() {
  const double target = std::exp(-static_cast<double>(oracle_x_of_p(0.6L)));
  const auto cont = sim::run_campaign(config(sim::Mode::continuous, 0.6, 0, 100000));
  const double z_cont = (cont.finite_fraction() - target) / cont.finite_fraction_standard_error();

  // Walk engine on delta = 0.1. A cap of 200 keeps the run short; the finite
  // mass beyond it is of order 1e-5, far below one standard error.
  const DiscretizationParams d(0.6, 10);
  const long double oracle_gap = oracle_martingale_gap(d.r_star(), d.q_star());
  const double walk_target = static_cast<double>(std::pow(1.0L - oracle_gap, 10.0L));
  auto wc = config(sim::Mode::walk, 0.6, 10, 100000);
  wc.cap = 200.0;
  const auto walk = sim::run_campaign(wc);
  const double z_walk = (walk.finite_fraction() - walk_target) / walk.finite_fraction_standard_error();

  const bool pass = std::abs(z_cont) <= 4.0 && std::abs(z_walk) <= 4.0;
  return {pass, fmt(" continuous: f=%.5f target e^chi=%.5f z=%.2f; walk(delta=0.1): f=%.5f target a2^(1/delta)=%.5f z=%.2f",
                    cont.finite_fraction(), target, z_cont, walk.finite_fraction(), walk_target, z_walk)};
}

Verdict engine_equivalence() {
  const auto branching = sim::run_campaign(config(sim::Mode::discrete, 0.3, 10, 1000000));
  const auto walk = sim::run_campaign(config(sim::Mode::walk, 0.3, 10, 1000000));
  const double tv = sim::total_variation(branching.histogram(), walk.histogram());

  // Context: each engine against the analytic pmf.
  const DiscretizationParams d(0.3, 10);
  const auto pmf = discrete::cascade_pmf_auto(d, 10, 1e-13);
  const auto& h = branching.histogram();
  std::vector<double> probs(h.counts().size(), 0.0);
  double inside = 0.0;
  for (Count n = pmf.m_start; n <= pmf.n_max(); ++n) {
    const auto k = h.index_of_lattice(n, 10);
    if (k == h.bin_count()) continue;
    probs[k] += pmf.probability(n);
    inside += pmf.probability(n);
  }
  probs.back() = 1.0 - inside;
  const double tv_branching = sim::total_variation(branching.histogram(), probs);
  const double tv_walk = sim::total_variation(walk.histogram(), probs);
  return {tv <= 0.005, fmt(" TV(branching, walk)=%.5f (limit 0.005); TV to pmf: branching=%.5f walk=%.5f", tv,
                           tv_branching, tv_walk)};
}

Verdict power_law() {
  const ModelParams params(0.5);
  constexpr int kPoints = 121;
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  long double ox = 0.0L, oy = 0.0L, oxx = 0.0L, oxy = 0.0L;
  for (int i = 0; i < kPoints; ++i) {
    const double lx = std::log(1e3) + (std::log(1e6) - std::log(1e3)) * i / (kPoints - 1);
    const double x = std::exp(lx);
    const double ly = continuum::log_density(params, x);
    sx += lx, sy += ly, sxx += lx * lx, sxy += lx * ly;
    const long double oly = std::log(oracle::gamma_cascade_density(0.5L, x));
    ox += lx, oy += oly, oxx += static_cast<long double>(lx) * lx, oxy += lx * oly;
  }
  const double slope = (kPoints * sxy - sx * sy) / (kPoints * sxx - sx * sx);
  const double oracle_slope = static_cast<double>((kPoints * oxy - ox * oy) / (kPoints * oxx - ox * ox));
  const bool pass = std::abs(slope + 1.5) <= 0.01 && std::abs(slope - oracle_slope) <= 1e-6;
  return {pass, fmt(" slope=%.6f oracle_slope=%.6f", slope, oracle_slope)};
}

std::string slurp(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  std::ostringstream s;
  s << f.rdbuf();
  return s.str();
}

Verdict reproducibility() {
  const auto dir = std::filesystem::temp_directory_path() / "cascade_acceptance_repro";
  std::filesystem::create_directories(dir);
  bool pass = true;
  std::string detail;
  const std::vector<std::vector<std::string>> cases = {
      {"--mode", "continuous", "--p", "0.6", "--trials", "20000", "--workers", "4"},
      {"--mode", "discrete", "--p", "0.3", "--m", "10", "--trials", "50000", "--workers", "3"},
      {"--mode", "walk", "--p", "0.45", "--m", "20", "--trials", "20000", "--workers", "1", "--format", "csv"},
  };
  for (const auto& flags : cases) {
    std::vector<std::string> contents;
    for (const char* run : {"a", "b"}) {
      std::vector<std::string> args = {"simulate", "--seed", std::to_string(kSeed)};
      args.insert(args.end(), flags.begin(), flags.end());
      const auto out = dir / (std::string(run) + ".out");
      const auto hist = dir / (std::string(run) + ".hist.csv");
      args.insert(args.end(), {"--out", out.string(), "--hist-out", hist.string()});
      std::ostringstream sink;
      pass = pass && cli::run(args, sink, sink) == 0;
      contents.push_back(slurp(out) + slurp(hist));
    }
    const bool same = contents[0] == contents[1] && !contents[0].empty();
    pass = pass && same;
    detail += fmt(" %s:%s;", flags[1].c_str(), same ? "identical" : "DIFFERENT");
  }
  std::filesystem::remove_all(dir);
  return {pass, detail};
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    Verdict (*check)();
  };
  const Criterion criteria[] = {
      {"normalization-subcritical", normalization_subcritical},
      {"normalization-supercritical", normalization_supercritical},
      {"moments", moments},
      {"lattice-to-continuum", lattice_to_continuum},
      {"negative-binomial-to-gamma", nb_to_gamma},
      {"pmf-consistency", pmf_consistency},
      {"martingale-root", martingale_root},
      {"monte-carlo-subcritical", monte_carlo_subcritical},
      {"monte-carlo-supercritical", monte_carlo_supercritical},
      {"engine-equivalence", engine_equivalence},
      {"critical-power-law", power_law},
      {"reproducibility", reproducibility},
  };
  int failures = 0;
  int id = 0;
  for (const auto& c : criteria) {
    ++id;
    Verdict v;
    try {
      v = c.check();
    } catch (const std::exception& e) {
      v = {false, std::string(" exception: ") + e.what()};
    }
    failures += v.pass ? 0 : 1;
    std::cout << (v.pass ? "PASS" : "FAIL") << " " << id << " " << c.name << ":" << v.detail << std::endl;
  }
  return failures;
}
