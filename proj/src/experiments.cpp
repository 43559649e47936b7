#include "eqatlas/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <mutex>
#include <numbers>
#include <sstream>

#include <json.hpp>

namespace eqatlas::experiments {

namespace {

namespace law = eqatlas::analytic;
namespace mc = eqatlas::ensemble;
namespace num = eqatlas::numerics;

constexpr double kPi = std::numbers::pi;

// frozen reference values; each was computed from its independent oracle
// (high-precision quadrature / root finding / closed forms), not from the
// implementation under test
constexpr double kPhiEqAt2Tau05 = 0.62058643436647532;
constexpr double kPsiRAt17Tau05 = 0.041303656552344618;
constexpr double kSigmaEqAt05 = 0.31814718055994531;
constexpr double kFoldedNormalX07 = 1.1326081325415507;  // E|X-0.7|, X~N(0,1.5)

std::uint64_t derive_seed(std::uint64_t base, long tag) {
  return mc::stream_key(base, tag);
}

CheckResult eval_check(const CheckSpec& spec, double predicted, double measured,
                       std::string note = "") {
  CheckResult r;
  r.id = spec.id;
  r.anchor = spec.anchor;
  r.predicted = predicted;
  r.measured = measured;
  r.tolerance = spec.tolerance;
  r.note = std::move(note);
  if (!(spec.tolerance > 0.0)) {
    r.pass = false;
    r.note = "tolerance unsatisfiable";
    return r;
  }
  if (!r.note.empty()) {
    r.pass = false;  // reason-coded diagnostics never pass silently
    return r;
  }
  if (!std::isfinite(measured)) {
    r.pass = false;
    r.note = "measured value not finite";
    return r;
  }
  r.pass = std::fabs(measured - predicted) <= spec.tolerance;
  return r;
}

const CheckSpec& need_check(const Scenario& s, const std::string& id) {
  for (const auto& c : s.checks)
    if (c.id == id) return c;
  throw std::logic_error("scenario " + s.id + " lacks check " + id);
}

double knob(const Scenario& s, const std::string& key) {
  auto it = s.params.find(key);
  if (it == s.params.end())
    throw std::logic_error("scenario " + s.id + " lacks parameter " + key);
  return it->second;
}

double fit_slope(const std::vector<double>& xs, const std::vector<double>& ys) {
  const std::size_t n = xs.size();
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= double(n);
  my /= double(n);
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sxy += (xs[i] - mx) * (ys[i] - my);
    sxx += (xs[i] - mx) * (xs[i] - mx);
  }
  return sxy / sxx;
}

// The three semicircle-family scenarios share one ensemble pass; results are
// memoized per exact request so reruns inside a process reuse the pass. The
// values are deterministic, so the cache is observationally transparent.
struct EmpiricalKey {
  int n;
  double tau;
  long trials;
  std::uint64_t seed;
  int bins;
  bool frames;
  int workers;  // values are worker-independent, but determinism runs must recompute
  auto operator<=>(const EmpiricalKey&) const = default;
};

const mc::EmpiricalDensities& shared_empirical(const mc::SamplerConfig& cfg,
                                               const mc::DensityRequest& req) {
  static std::mutex mu;
  static std::map<EmpiricalKey, mc::EmpiricalDensities> cache;
  EmpiricalKey key{cfg.n,        cfg.tau,         req.trials, cfg.base_seed,
                   req.bins,     req.keep_frames, req.workers};
  std::scoped_lock lock(mu);
  auto it = cache.find(key);
  if (it == cache.end()) it = cache.emplace(key, mc::empirical_densities(cfg, req)).first;
  return it->second;
}

// -- scenario runners --------------------------------------------------------

std::vector<CheckResult> run_analytic_invariants(const Scenario& s, std::uint64_t,
                                                 int, bool, RunManifest&) {
  std::vector<CheckResult> out;

  double worst_gap = 0.0, worst_edge = 0.0, worst_zero = 0.0;
  double min_increment = std::numeric_limits<double>::infinity();
  for (int ti = 0; ti <= 9; ++ti) {
    const double tau = 0.1 * ti;
    const double edge = 1.0 + tau;
    const double h = 1e-11 * edge;
    worst_gap = std::max(worst_gap,
                         std::fabs(law::phi_eq(edge - h, tau) - law::phi_eq(edge + h, tau)));
    worst_edge = std::max(worst_edge, std::fabs(law::phi_eq(edge, tau) - 0.5 * tau));
    worst_zero = std::max(worst_zero, std::fabs(law::psi_r(edge, tau)));
    double prev = law::psi_r(edge, tau);
    for (int k = 1; k <= 100; ++k) {
      const double x = edge + 0.015 * k;
      const double cur = law::psi_r(x, tau);
      min_increment = std::min(min_increment, cur - prev);
      prev = cur;
    }
  }
  out.push_back(eval_check(need_check(s, "phi-eq-edge-continuity"), 0.0, worst_gap));
  out.push_back(eval_check(need_check(s, "phi-eq-edge-value"), 0.0, worst_edge));
  out.push_back(eval_check(need_check(s, "psi-r-edge-zero"), 0.0, worst_zero));
  out.push_back(eval_check(need_check(s, "psi-r-strictly-increasing"), 1.0,
                           min_increment > 0.0 ? 1.0 : 0.0));

  double worst_st = 0.0, worst_alpha0 = 0.0;
  for (int i = 1; i <= 50; ++i) {
    const double m = i / 51.0;
    const double tau = 0.02 + 0.96 * (i - 1) / 49.0;
    worst_st = std::max(worst_st,
                        std::fabs(law::sigma_st(m, tau) - law::sigma_st_from_sigma_eq(m, tau)));
    worst_alpha0 = std::max(
        worst_alpha0, std::fabs(law::sigma_st_alpha(m, tau, 0.0) - law::sigma_st(m, tau)));
  }
  out.push_back(eval_check(need_check(s, "sigma-st-two-forms"), 0.0, worst_st));
  out.push_back(eval_check(need_check(s, "sigma-st-alpha-reduces"), 0.0, worst_alpha0));

  const double ep = std::max({std::fabs(law::m_alpha(0.0) - 1.0),
                              std::fabs(law::m_alpha(0.5)),
                              std::fabs(law::m_alpha(1.0) + 1.0)});
  out.push_back(eval_check(need_check(s, "m-alpha-endpoints"), 0.0, ep));

  double worst_rt = 0.0;
  for (int i = 0; i <= 40; ++i) {
    const double alpha = i / 40.0;
    worst_rt = std::max(worst_rt, std::fabs(law::alpha_m(law::m_alpha(alpha)) - alpha));
  }
  out.push_back(eval_check(need_check(s, "alpha-m-roundtrip"), 0.0, worst_rt));
  return out;
}

std::vector<CheckResult> run_index_density_norm(const Scenario& s, std::uint64_t, int,
                                                bool, RunManifest& man) {
  std::vector<CheckResult> out;
  const int n = int(knob(s, "n"));
  const double taus[2] = {0.8, 0.05};
  const double ms[4] = {0.9, 0.8, 0.7, 0.6};
  num::QuadratureSpec spec{1e-9, 1e-9, 44};
  for (double tau : taus) {
    for (double m : ms) {
      law::ModelParams p{m, tau, n};
      const double peak = law::alpha_m(m);
      const double width =
          std::sqrt(p.tau / (double(n) * (1.0 + tau))) * (2.0 / kPi) * std::sqrt(1.0 - m * m);
      std::vector<double> hints{peak, peak - 6.0 * width, peak + 6.0 * width};
      const double integral = num::integrate(
          [&p](double a) { return law::nu_density(a, p); }, 0.0, 1.0, spec, hints);
      char id[64];
      std::snprintf(id, sizeof id, "normalization-tau%.2f-m%.1f", tau, m);
      out.push_back(eval_check(need_check(s, id), 1.0, integral));
    }
  }
  // one representative density curve per tau family
  for (double tau : taus) {
    law::ModelParams p{0.6, tau, n};
    Curve c{"alpha", "nu", {}, {}, "analytic"};
    for (int i = 0; i <= 800; ++i) {
      const double a = i / 800.0;
      c.x.push_back(a);
      c.y.push_back(law::nu_density(a, p));
    }
    char nm[64];
    std::snprintf(nm, sizeof nm, "nu_density_tau%.2f_m0.6", tau);
    man.curves.emplace_back(nm, std::move(c));
  }
  return out;
}

std::vector<CheckResult> run_energy_functional(const Scenario& s, std::uint64_t,
                                               int workers, bool, RunManifest&) {
  std::vector<CheckResult> out;
  const int cells = int(knob(s, "cells"));
  for (double tau : {0.0, 0.5}) {
    const mc::AtomicMeasure grid = mc::elliptic_law_grid(tau, cells);
    const double j = mc::j_tau(grid, tau, workers);
    char id[32];
    std::snprintf(id, sizeof id, "j-min-tau%.1f", tau);
    out.push_back(eval_check(need_check(s, id), 0.0, std::fabs(j)));
  }
  return out;
}

mc::DensityRequest semicircle_request(const Scenario& s, int workers, bool frames) {
  mc::DensityRequest req;
  req.trials = long(knob(s, "trials"));
  req.bins = int(knob(s, "bins"));
  req.bin_lo = -2.5;
  req.bin_hi = 2.5;
  req.mu_h_alpha = 0.25;
  req.workers = workers;
  req.keep_frames = frames;
  return req;
}

std::vector<CheckResult> run_real_eig_density(const Scenario& s, std::uint64_t seed,
                                              int workers, bool frames, RunManifest& man) {
  std::vector<CheckResult> out;

  // part a: mean number of real eigenvalues at tau=0
  {
    const int n = int(knob(s, "n_a"));
    mc::SamplerConfig cfg{n, 0.0, derive_seed(seed, 640)};
    mc::DensityRequest req;
    req.trials = long(knob(s, "trials_a"));
    req.bins = 50;
    req.bin_lo = -2.5;
    req.bin_hi = 2.5;
    req.workers = workers;
    const auto& dens = shared_empirical(cfg, req);
    const double predicted = std::sqrt(2.0 * double(n) / kPi);
    out.push_back(eval_check(need_check(s, "mean-real-count"), predicted,
                             dens.real_count.mean));
  }

  // part b: flat bulk density of real eigenvalues at tau=0.5
  {
    const int n = int(knob(s, "n_b"));
    mc::SamplerConfig cfg{n, 0.5, derive_seed(seed, 400)};
    const auto req = semicircle_request(s, workers, frames);
    const auto& dens = shared_empirical(cfg, req);
    // 0.1-wide bins: [-1,1) is exactly bins 15..34
    double count = 0.0;
    for (int b = 15; b < 35; ++b) count += double(dens.real_hist.counts[b]);
    const double measured = count / (double(dens.trials) * 2.0);
    out.push_back(
        eval_check(need_check(s, "bulk-density"), law::p_real_bulk(n, 0.5), measured));

    Curve emp{"x", "real_eig_density", {}, {}, "monte_carlo"};
    for (int b = 0; b < dens.real_hist.bins(); ++b) {
      emp.x.push_back(dens.real_hist.bin_center(b));
      emp.y.push_back(dens.real_hist.density(b, dens.trials));
    }
    man.curves.emplace_back("real_eig_density", std::move(emp));
  }
  return out;
}

std::vector<CheckResult> run_semicircle(const Scenario& s, std::uint64_t seed,
                                        int workers, bool frames, RunManifest& man) {
  std::vector<CheckResult> out;
  const int n = int(knob(s, "n"));
  mc::SamplerConfig cfg{n, 0.5, derive_seed(seed, 400)};
  const auto req = semicircle_request(s, workers, frames);
  const auto& dens = shared_empirical(cfg, req);
  if (frames) man.frames = dens.frames;

  Curve emp{"x", "projection_density", {}, {}, "monte_carlo"};
  Curve pred{"x", "projection_density", {}, {}, "analytic"};
  double l1 = 0.0;
  for (int b = 0; b < dens.proj_hist.bins(); ++b) {
    const double x = dens.proj_hist.bin_center(b);
    const double de = dens.proj_hist.density(b, dens.trials);
    const double dp = law::p_complex_bulk(x, n, 0.5);
    l1 += std::fabs(de - dp) * dens.proj_hist.bin_width();
    emp.x.push_back(x);
    emp.y.push_back(de);
    pred.x.push_back(x);
    pred.y.push_back(dp);
  }
  out.push_back(eval_check(need_check(s, "l1-per-n"), 0.0, l1 / double(n)));
  man.curves.emplace_back("projection_density_empirical", std::move(emp));
  man.curves.emplace_back("projection_density_predicted", std::move(pred));
  return out;
}

std::vector<CheckResult> run_mu_h(const Scenario& s, std::uint64_t seed, int workers,
                                  bool frames, RunManifest&) {
  std::vector<CheckResult> out;
  const int n = int(knob(s, "n"));
  mc::SamplerConfig cfg{n, 0.5, derive_seed(seed, 400)};
  const auto req = semicircle_request(s, workers, frames);
  const auto& dens = shared_empirical(cfg, req);
  double mean = 0.0;
  for (double v : dens.mu_h_samples) mean += v;
  mean /= double(dens.mu_h_samples.size());
  out.push_back(eval_check(need_check(s, "mean-mu-h"), 0.25, mean));
  return out;
}

std::vector<CheckResult> run_xmax_slope(const Scenario& s, std::uint64_t seed,
                                        int workers, bool, RunManifest& man) {
  std::vector<CheckResult> out;
  const double x0 = knob(s, "x");
  const double tau = knob(s, "tau");
  const long trials = long(knob(s, "trials"));
  const std::vector<int> dims{int(knob(s, "n1")), int(knob(s, "n2")), int(knob(s, "n3"))};

  std::vector<double> ns, neglogp;
  std::string note;
  Curve tail{"n", "neg_ln_tail_prob", {}, {}, "monte_carlo"};
  for (int n : dims) {
    mc::SamplerConfig cfg{n, tau, derive_seed(seed, 1700 + n)};
    mc::DensityRequest req;
    req.trials = trials;
    req.bins = 50;
    req.bin_lo = -2.5;
    req.bin_hi = 2.5;
    req.workers = workers;
    const auto dens = mc::empirical_densities(cfg, req);
    long hits = 0;
    for (double v : dens.xmax_samples)
      if (v > x0) ++hits;
    if (hits == 0) {
      note = "no tail exceedances at n=" + std::to_string(n);
      break;
    }
    const double p = double(hits) / double(trials);
    ns.push_back(double(n));
    neglogp.push_back(-std::log(p));
    tail.x.push_back(double(n));
    tail.y.push_back(-std::log(p));
  }
  const double slope = note.empty() ? fit_slope(ns, neglogp)
                                    : std::numeric_limits<double>::quiet_NaN();
  out.push_back(eval_check(need_check(s, "tail-slope"), kPsiRAt17Tau05, slope, note));
  man.curves.emplace_back("xmax_tail", std::move(tail));
  return out;
}

std::vector<CheckResult> run_kac_rice(const Scenario& s, std::uint64_t seed, int workers,
                                      bool, RunManifest&) {
  std::vector<CheckResult> out;

  {  // n=1 reduces to a folded normal with sigma^2 = 1+tau
    mc::SamplerConfig cfg{1, 0.5, derive_seed(seed, 1)};
    const auto est = mc::estimate_D(0.7, cfg, mc::ThetaMode::Unconstrained, 0.0,
                                    long(knob(s, "trials_n1")), workers);
    out.push_back(eval_check(need_check(s, "folded-normal"), kFoldedNormalX07,
                             std::exp(est.log_mean)));
  }
  {  // (1/n) ln D at x outside the support approaches the log-potential
    mc::SamplerConfig cfg{64, 0.5, derive_seed(seed, 64)};
    const auto est = mc::estimate_D(2.0, cfg, mc::ThetaMode::Unconstrained, 0.0,
                                    long(knob(s, "trials_n64")), workers);
    out.push_back(eval_check(need_check(s, "log-potential-n64"), kPhiEqAt2Tau05,
                             est.log_mean / 64.0));
  }
  {  // (1/n) ln <N_eq> approaches sigma_eq(m) for m < 1
    law::ModelParams p{0.5, 0.5, 16};
    const auto est = mc::estimate_N_counts(p, mc::ThetaMode::Unconstrained, 0.0,
                                           long(knob(s, "trials_n16")), 21,
                                           derive_seed(seed, 16), workers);
    out.push_back(eval_check(need_check(s, "counts-exponent-n16"), kSigmaEqAt05,
                             est.log_count / 16.0));
  }
  {  // <N_eq> -> 1 for m > 1
    law::ModelParams p{2.0, 0.5, 8};
    const auto est = mc::estimate_N_counts(p, mc::ThetaMode::Unconstrained, 0.0,
                                           long(knob(s, "trials_n8")), 21,
                                           derive_seed(seed, 8), workers);
    out.push_back(eval_check(need_check(s, "counts-unit-n8"), 0.0, est.log_count));
  }
  return out;
}

std::vector<CheckResult> run_edge_crossover(const Scenario& s, std::uint64_t, int, bool,
                                            RunManifest& man) {
  std::vector<CheckResult> out;
  const int n = 100;
  const double tau = 0.5;

  const double bulk = law::p_real_bulk(n, tau);
  out.push_back(eval_check(need_check(s, "real-bulk-match"), 1.0,
                           law::p_real_edge(-6.0, n, tau) / bulk));
  const double dt4 = 4.0 * std::sqrt((1.0 + tau) / (1.0 - tau));
  const double tail_asym = bulk / std::sqrt(2.0) * std::exp(-dt4 * dt4);
  out.push_back(eval_check(need_check(s, "real-tail-match"), 1.0,
                           law::p_real_edge(4.0, n, tau) / tail_asym));

  auto pos_asym = [&](double d) {
    return std::pow(double(n), 0.75) * (1.0 - tau) / (4.0 * kPi * (1.0 + tau) * (1.0 + tau)) *
           std::pow(d, -1.5) * std::exp(-2.0 * (1.0 + tau) / (1.0 - tau) * d * d);
  };
  auto neg_asym = [&](double d) {
    return std::pow(2.0, 1.5) * std::pow(double(n), 0.75) / (kPi * (1.0 + tau)) *
           std::sqrt(d);
  };
  out.push_back(eval_check(need_check(s, "complex-pos-d3"), 1.0,
                           law::p_complex_edge(3.0, n, tau) / pos_asym(3.0)));
  out.push_back(eval_check(need_check(s, "complex-pos-d5"), 1.0,
                           law::p_complex_edge(5.0, n, tau) / pos_asym(5.0)));
  out.push_back(eval_check(need_check(s, "complex-neg-d3"), 1.0,
                           law::p_complex_edge(-3.0, n, tau) / neg_asym(3.0)));
  out.push_back(eval_check(need_check(s, "complex-neg-d5"), 1.0,
                           law::p_complex_edge(-5.0, n, tau) / neg_asym(5.0)));

  Curve c{"delta", "p_real_edge", {}, {}, "analytic"};
  for (int i = -60; i <= 60; ++i) {
    const double d = i / 10.0;
    c.x.push_back(d);
    c.y.push_back(law::p_real_edge(d, n, tau));
  }
  man.curves.emplace_back("real_edge_crossover", std::move(c));
  return out;
}

std::vector<CheckResult> run_igamma_limits(const Scenario& s, std::uint64_t, int, bool,
                                           RunManifest&) {
  std::vector<CheckResult> out;
  const int n = int(knob(s, "n"));
  out.push_back(eval_check(need_check(s, "below-one"), 1.0, num::igamma_ratio(n, 0.9)));
  out.push_back(eval_check(need_check(s, "above-one"), 0.0, num::igamma_ratio(n, 1.1)));
  out.push_back(eval_check(need_check(s, "at-one"), 0.5, num::igamma_ratio(n, 1.0)));
  return out;
}

std::vector<CheckResult> run_laplace_sanity(const Scenario& s, std::uint64_t, int, bool,
                                            RunManifest& man) {
  std::vector<CheckResult> out;
  const double n = knob(s, "n");
  const LaplaceCase cases[3] = {
      {1.0, -1.0, 4.0, 2.0, 0.5}, {1.0, 1.0, 4.0, 2.0, 0.5}, {1.0, 0.0, 2.0, 1.0, 0.5}};
  const char* ids[3] = {"damped", "competing", "gaussian"};
  for (int i = 0; i < 3; ++i) {
    const auto rows = laplace_sanity(cases[i], {n / 4.0, n / 2.0, n});
    out.push_back(eval_check(need_check(s, ids[i]), 0.0,
                             std::fabs(rows.back().normalized_log)));
    Curve c{"n", "normalized_log_integral", {}, {}, "analytic"};
    for (const auto& r : rows) {
      c.x.push_back(r.n);
      c.y.push_back(r.normalized_log);
    }
    man.curves.emplace_back(std::string("laplace_") + ids[i], std::move(c));
  }
  return out;
}

using Runner = std::vector<CheckResult> (*)(const Scenario&, std::uint64_t, int, bool,
                                            RunManifest&);

const std::map<std::string, Runner>& runner_registry() {
  static const std::map<std::string, Runner> reg = {
      {"analytic-invariants", run_analytic_invariants},
      {"index-density-norm", run_index_density_norm},
      {"energy-functional-min", run_energy_functional},
      {"real-eig-bulk-density", run_real_eig_density},
      {"complex-proj-semicircle", run_semicircle},
      {"mu-h-concentration", run_mu_h},
      {"xmax-ld-slope", run_xmax_slope},
      {"kac-rice-determinant", run_kac_rice},
      {"edge-crossover", run_edge_crossover},
      {"igamma-limits", run_igamma_limits},
      {"laplace-sanity", run_laplace_sanity},
  };
  return reg;
}

std::string iso_timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  char buf[32];
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace

std::vector<Scenario> scenario_catalog() {
  std::vector<Scenario> cat;

  cat.push_back(Scenario{
      "analytic-invariants",
      "closed-form identities: edge continuity, rate-function behavior, two-form "
      "equalities, index inversions",
      {},
      {
          {"phi-eq-edge-continuity", "log-potential-two-branch", 1e-10},
          {"phi-eq-edge-value", "log-potential-edge-value", 1e-18},
          {"psi-r-edge-zero", "xmax-tail-rate", 1e-12},
          {"psi-r-strictly-increasing", "xmax-tail-rate", 0.5},
          {"sigma-st-two-forms", "stable-exponent-identity", 1e-12},
          {"sigma-st-alpha-reduces", "alpha-stable-exponent", 1e-12},
          {"m-alpha-endpoints", "index-inversion", 1e-10},
          {"alpha-m-roundtrip", "index-inversion", 1e-10},
      }});

  cat.push_back(Scenario{
      "index-density-norm",
      "index density integrates to one across the figure parameter family",
      {{"n", 625}},
      {
          {"normalization-tau0.80-m0.9", "index-density-prefactor", 1e-3},
          {"normalization-tau0.80-m0.8", "index-density-prefactor", 1e-3},
          {"normalization-tau0.80-m0.7", "index-density-prefactor", 1e-3},
          {"normalization-tau0.80-m0.6", "index-density-prefactor", 1e-3},
          {"normalization-tau0.05-m0.9", "index-density-prefactor", 1e-3},
          {"normalization-tau0.05-m0.8", "index-density-prefactor", 1e-3},
          {"normalization-tau0.05-m0.7", "index-density-prefactor", 1e-3},
          {"normalization-tau0.05-m0.6", "index-density-prefactor", 1e-3},
      }});

  cat.push_back(Scenario{"energy-functional-min",
                         "energy functional vanishes on the limiting law",
                         {{"cells", 200}},
                         {
                             {"j-min-tau0.0", "energy-functional", 0.02},
                             {"j-min-tau0.5", "energy-functional", 0.02},
                         }});

  cat.push_back(Scenario{
      "real-eig-bulk-density",
      "real-eigenvalue count and flat bulk density",
      {{"n_a", 64}, {"trials_a", 2000}, {"n_b", 400}, {"trials", 100}, {"bins", 50}},
      {
          {"mean-real-count", "real-density-bulk", 0.31915444435121457},  // 5%
          {"bulk-density", "real-density-bulk", 0.92131773192356128},     // 10%
      }});

  cat.push_back(Scenario{"complex-proj-semicircle",
                         "projected spectrum matches the semicircle marginal",
                         {{"n", 400}, {"trials", 100}, {"bins", 50}},
                         {
                             {"l1-per-n", "complex-projection-bulk", 0.05},
                         }});

  cat.push_back(Scenario{"mu-h-concentration",
                         "eigenvalue fraction right of x(alpha) concentrates at alpha",
                         {{"n", 400}, {"trials", 100}, {"bins", 50}},
                         {
                             {"mean-mu-h", "index-abscissa", 0.01},
                         }});

  cat.push_back(Scenario{
      "xmax-ld-slope",
      "large-deviation decay rate of the rightmost real part",
      {{"tau", 0.5}, {"x", 1.7}, {"trials", 10000}, {"n1", 20}, {"n2", 40}, {"n3", 80}},
      {
          {"tail-slope", "xmax-tail-rate", 0.0082607313104689236},  // 20%
      }});

  cat.push_back(Scenario{
      "kac-rice-determinant",
      "determinant averages against their closed-form limits",
      {{"trials_n1", 1000000}, {"trials_n64", 2000}, {"trials_n16", 10000},
       {"trials_n8", 20000}},
      {
          {"folded-normal", "determinant-average-1d", 0.011326081325415507},  // 1%
          {"log-potential-n64", "determinant-average-limit", 0.03},
          {"counts-exponent-n16", "count-exponent-total", 0.10},
          {"counts-unit-n8", "count-single-equilibrium", 0.33647223662121289},  // ln 1.4
      }});

  cat.push_back(Scenario{"edge-crossover",
                         "edge profiles match bulk and tail asymptotes",
                         {},
                         {
                             {"real-bulk-match", "real-density-edge", 0.005},
                             {"real-tail-match", "real-density-edge", 0.02},
                             {"complex-pos-d3", "complex-projection-edge", 0.20},
                             {"complex-pos-d5", "complex-projection-edge", 0.10},
                             {"complex-neg-d3", "complex-projection-edge", 0.20},
                             {"complex-neg-d5", "complex-projection-edge", 0.10},
                         }});

  cat.push_back(Scenario{"igamma-limits",
                         "incomplete-gamma ratio step and its crossover value",
                         {{"n", 2000}},
                         {
                             {"below-one", "igamma-step", 1e-3},
                             {"above-one", "igamma-step", 1e-3},
                             {"at-one", "igamma-crossover", 0.02},
                         }});

  cat.push_back(Scenario{"laplace-sanity",
                         "sub-exponential growth of the boundary-layer integral",
                         {{"n", 1000}},
                         {
                             {"damped", "laplace-integral", 0.01},
                             {"competing", "laplace-integral", 0.01},
                             {"gaussian", "laplace-integral", 0.01},
                         }});

  return cat;
}

std::optional<Scenario> find_scenario(const std::string& id) {
  for (auto& s : scenario_catalog())
    if (s.id == id) return s;
  return std::nullopt;
}

RunManifest run_scenario(const Scenario& s, std::uint64_t base_seed, int workers,
                         const std::filesystem::path& out_root, bool persist_frames,
                         const std::string& config_echo) {
  const auto& reg = runner_registry();
  auto it = reg.find(s.id);
  if (it == reg.end()) throw std::invalid_argument("unknown scenario: " + s.id);

  RunManifest m;
  m.scenario = s.id;
  m.seed = base_seed;
  m.workers = workers;
  m.params = s.params;
  m.versions = {{"eqatlas", "0.1.0"}, {"manifest_schema", "1"}};
  m.config_echo = config_echo;
  m.checks = it->second(s, base_seed, workers, persist_frames, m);
  m.verdict = std::all_of(m.checks.begin(), m.checks.end(),
                          [](const CheckResult& c) { return c.pass; });
  m.timestamp = iso_timestamp();

  if (!out_root.empty()) {
    namespace fs = std::filesystem;
    const fs::path dir = out_root / "runs" / s.id / std::to_string(base_seed);
    fs::create_directories(dir / "curves");
    for (const auto& [name, curve] : m.curves)
      write_curve_csv(dir / "curves" / (name + ".csv"), curve);
    if (!m.frames.empty()) write_frames(dir / "frames" / "spectra.bin", m.frames);
    write_manifest(dir / "manifest.json", m);
  }
  return m;
}

std::vector<LaplaceRow> laplace_sanity(const LaplaceCase& cs,
                                       const std::vector<double>& n_grid,
                                       const numerics::QuadratureSpec& spec) {
  if (!(cs.a > 0.0) || !(cs.p > 0.0) || !(cs.q > 0.0) || !(cs.eps > 0.0))
    throw std::domain_error("laplace_sanity: a, p, q, eps must be positive");
  std::vector<LaplaceRow> rows;
  for (double n : n_grid) {
    auto f = [&cs, n](double t) {
      return std::exp(-cs.a * n * n * std::pow(t, cs.p) + cs.c * n * std::pow(t, cs.q));
    };
    const double scale = std::pow(n, -2.0 / cs.p);  // integrand support scale
    const std::vector<double> hints{scale, 4.0 * scale, 16.0 * scale};
    const double integral = num::integrate(f, 0.0, cs.eps, spec, hints);
    rows.push_back({n, integral, std::log(integral) / n});
  }
  return rows;
}

std::vector<std::pair<std::string, Curve>> figure_curves() {
  std::vector<std::pair<std::string, Curve>> out;

  {
    Curve c{"x", "sigma_eq_profile", {}, {}, "analytic"};
    law::ModelParams p{0.3, 0.5, 1};
    for (int i = -220; i <= 220; ++i) {
      const double x = i / 100.0;
      c.x.push_back(x);
      c.y.push_back(law::sigma_eq_profile(x, p));
    }
    out.emplace_back("sigma_eq_profile_m0.3_tau0.5", std::move(c));
  }
  {
    Curve c{"alpha", "m_alpha", {}, {}, "analytic"};
    for (int i = 0; i <= 500; ++i) {
      const double a = i / 500.0;
      c.x.push_back(a);
      c.y.push_back(law::m_alpha(a));
    }
    out.emplace_back("m_alpha", std::move(c));
  }
  for (double tau : {0.8, 0.05}) {
    for (double m : {0.9, 0.8, 0.7, 0.6}) {
      Curve c{"alpha", "nu", {}, {}, "analytic"};
      law::ModelParams p{m, tau, 625};
      for (int i = 0; i <= 800; ++i) {
        const double a = i / 800.0;
        c.x.push_back(a);
        c.y.push_back(law::nu_density(a, p));
      }
      char nm[64];
      std::snprintf(nm, sizeof nm, "nu_index_density_n625_tau%.2f_m%.1f", tau, m);
      out.emplace_back(nm, std::move(c));
    }
  }
  {
    Curve c{"m", "tau0", {}, {}, "analytic"};
    for (int i = 1; i < 400; ++i) {
      const double m = i / 400.0;
      c.x.push_back(m);
      c.y.push_back(law::tau0(m));
    }
    out.emplace_back("tau0", std::move(c));
  }
  for (double alpha : {0.1, 0.01, 0.001, 0.0001}) {
    Curve c{"m", "tau0_alpha", {}, {}, "analytic"};
    const double ma = law::m_alpha(alpha);
    for (int i = 1; i <= 300; ++i) {
      const double m = ma * i / 301.0;
      c.x.push_back(m);
      c.y.push_back(law::tau0_alpha(m, alpha));
    }
    char nm[48];
    std::snprintf(nm, sizeof nm, "tau0_alpha_a%g", alpha);
    out.emplace_back(nm, std::move(c));
  }
  return out;
}

HeatMap alpha_heatmap(int m_cells, int tau_cells, bool log_scale) {
  if (m_cells < 2 || tau_cells < 2)
    throw std::invalid_argument("alpha_heatmap: need at least 2 cells per axis");
  HeatMap h;
  for (int i = 0; i < m_cells; ++i) {
    const double m = (i + 0.5) / double(m_cells);
    const double t0 = law::tau0(m);
    const double am = law::alpha_m(m);
    for (int j = 0; j < tau_cells; ++j) {
      const double tau = (j + 0.5) / double(tau_cells);
      double alpha = 0.0;
      if (tau < t0) {
        // the boundary level tau0_alpha(m, .) falls from tau0(m) to 0 on
        // (0, alpha_m(m)); invert it at this tau
        alpha = num::find_root(
            [m, tau](double a) { return law::tau0_alpha(m, a) - tau; },
            {1e-12, am - 1e-12}, 1e-11);
      }
      h.m.push_back(m);
      h.tau.push_back(tau);
      if (log_scale)
        h.value.push_back(alpha > 0.0 ? std::log(alpha)
                                      : std::numeric_limits<double>::quiet_NaN());
      else
        h.value.push_back(alpha);
    }
  }
  return h;
}

// -- persistence --------------------------------------------------------------

namespace {

void write_atomic(const std::filesystem::path& path, const std::string& payload) {
  namespace fs = std::filesystem;
  fs::create_directories(path.parent_path());
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open " + tmp.string());
    os << payload;
  }
  fs::rename(tmp, path);
}

std::string format_double(double v) {
  if (std::isnan(v)) return "";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

void write_curve_csv(const std::filesystem::path& path, const Curve& c) {
  std::ostringstream os;
  os << c.xlabel << "," << c.ylabel << ",provenance\n";
  for (std::size_t i = 0; i < c.x.size(); ++i)
    os << format_double(c.x[i]) << "," << format_double(c.y[i]) << "," << c.provenance
       << "\n";
  write_atomic(path, os.str());
}

void write_heatmap_csv(const std::filesystem::path& path, const HeatMap& h,
                       const std::string& value_label) {
  std::ostringstream os;
  os << "m,tau," << value_label << "\n";
  for (std::size_t i = 0; i < h.value.size(); ++i)
    os << format_double(h.m[i]) << "," << format_double(h.tau[i]) << ","
       << format_double(h.value[i]) << "\n";
  write_atomic(path, os.str());
}

void write_curve_svg(const std::filesystem::path& path, const Curve& c) {
  constexpr int kW = 640, kH = 420, kPad = 50;
  double xmin = c.x.empty() ? 0 : c.x.front(), xmax = xmin;
  double ymin = 0, ymax = 1;
  if (!c.y.empty()) {
    ymin = ymax = c.y.front();
    for (std::size_t i = 0; i < c.x.size(); ++i) {
      xmin = std::min(xmin, c.x[i]);
      xmax = std::max(xmax, c.x[i]);
      if (std::isfinite(c.y[i])) {
        ymin = std::min(ymin, c.y[i]);
        ymax = std::max(ymax, c.y[i]);
      }
    }
  }
  if (xmax == xmin) xmax = xmin + 1;
  if (ymax == ymin) ymax = ymin + 1;
  auto sx = [&](double x) { return kPad + (x - xmin) / (xmax - xmin) * (kW - 2 * kPad); };
  auto sy = [&](double y) { return kH - kPad - (y - ymin) / (ymax - ymin) * (kH - 2 * kPad); };

  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kW << "\" height=\"" << kH
     << "\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
     << "<rect x=\"" << kPad << "\" y=\"" << kPad << "\" width=\"" << kW - 2 * kPad
     << "\" height=\"" << kH - 2 * kPad << "\" fill=\"none\" stroke=\"black\"/>\n"
     << "<text x=\"" << kW / 2 << "\" y=\"" << kH - 12 << "\" text-anchor=\"middle\">"
     << c.xlabel << "</text>\n"
     << "<text x=\"14\" y=\"" << kH / 2 << "\" transform=\"rotate(-90 14 " << kH / 2
     << ")\" text-anchor=\"middle\">" << c.ylabel << "</text>\n<polyline fill=\"none\" "
     << "stroke=\"steelblue\" stroke-width=\"1.2\" points=\"";
  for (std::size_t i = 0; i < c.x.size(); ++i) {
    if (!std::isfinite(c.y[i])) continue;
    os << sx(c.x[i]) << "," << sy(c.y[i]) << " ";
  }
  os << "\"/>\n</svg>\n";
  write_atomic(path, os.str());
}

std::string manifest_to_json(const RunManifest& m) {
  nlohmann::ordered_json j;
  j["scenario"] = m.scenario;
  j["seed"] = m.seed;
  j["workers"] = m.workers;
  j["params"] = m.params;
  j["checks"] = nlohmann::ordered_json::array();
  for (const auto& c : m.checks) {
    nlohmann::ordered_json jc;
    jc["id"] = c.id;
    jc["paper_anchor"] = c.anchor;
    jc["predicted"] = c.predicted;
    jc["measured"] = c.measured;
    jc["tolerance"] = c.tolerance;
    jc["pass"] = c.pass;
    if (!c.note.empty()) jc["note"] = c.note;
    j["checks"].push_back(jc);
  }
  j["verdict"] = m.verdict;
  j["timestamp"] = m.timestamp;
  if (!m.config_echo.empty()) j["config"] = m.config_echo;
  j["versions"] = m.versions;
  return j.dump(2) + "\n";
}

void write_manifest(const std::filesystem::path& path, const RunManifest& m) {
  write_atomic(path, manifest_to_json(m));
}

void write_frames(const std::filesystem::path& path,
                  const std::vector<std::vector<std::complex<double>>>& frames) {
  namespace fs = std::filesystem;
  fs::create_directories(path.parent_path());
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open " + tmp.string());
    auto put_f64 = [&os](double v) {
      static_assert(sizeof(double) == 8);
      os.write(reinterpret_cast<const char*>(&v), 8);  // little-endian host
    };
    for (std::size_t t = 0; t < frames.size(); ++t) {
      const auto& f = frames[t];
      const std::uint64_t payload = 8ull * (2 + 2 * f.size());
      os.write(reinterpret_cast<const char*>(&payload), 8);
      put_f64(double(t));
      put_f64(double(f.size()));
      for (const auto& z : f) {
        put_f64(z.real());
        put_f64(z.imag());
      }
    }
  }
  fs::rename(tmp, path);
}

void emit_figures(const std::filesystem::path& dir, bool svg) {
  namespace fs = std::filesystem;
  const fs::path figdir = dir / "figures";
  fs::create_directories(figdir);
  for (const auto& [name, curve] : figure_curves()) {
    write_curve_csv(figdir / (name + ".csv"), curve);
    if (svg) write_curve_svg(figdir / (name + ".svg"), curve);
  }
  write_heatmap_csv(figdir / "alpha_heatmap.csv", alpha_heatmap(120, 120, false), "alpha");
  write_heatmap_csv(figdir / "ln_alpha_heatmap.csv", alpha_heatmap(120, 120, true),
                    "ln_alpha");
}

}  // namespace eqatlas::experiments
