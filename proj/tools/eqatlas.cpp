// Command-line front end: closed-form evaluation, phase-diagram sweeps,
// density curves, Monte Carlo runs, and the validation suite.
//
// Exit codes: 0 ok, 1 validation failure, 2 usage, 3 domain error,
// 4 branch-point error, 5 infrastructure failure.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "eqatlas/analytic.hpp"
#include "eqatlas/ensemble.hpp"
#include "eqatlas/experiments.hpp"
#include "eqatlas/numerics.hpp"

namespace law = eqatlas::analytic;
namespace mc = eqatlas::ensemble;
namespace num = eqatlas::numerics;
namespace xp = eqatlas::experiments;
namespace fs = std::filesystem;

namespace {

struct BranchPointError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct GlobalOpts {
  std::uint64_t seed = 1;
  int workers = 1;
  std::string out_dir = "out";
  std::string format = "csv";
  bool svg = false;
};

std::string fmt15(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.15g", v);
  return buf;
}

// named parameters shared by every eval formula
struct EvalArgs {
  double m = 0.5, tau = 0.5, alpha = 0.0, x = 0.0, y = 0.0, delta = 0.0, gamma = 0.0,
         a = 0.0;
  int n = 100;
};

using EvalFn = std::function<std::string(const EvalArgs&)>;

const std::map<std::string, EvalFn>& eval_registry() {
  auto scalar = [](auto fn) {
    return EvalFn([fn](const EvalArgs& e) { return fmt15(fn(e)); });
  };
  static const std::map<std::string, EvalFn> reg = {
      {"erf", scalar([](const EvalArgs& e) { return num::erf(e.x); })},
      {"erfc_scaled_tail",
       scalar([](const EvalArgs& e) { return num::erfc_scaled_tail(e.y, e.n, e.tau); })},
      {"igamma_ratio", scalar([](const EvalArgs& e) { return num::igamma_ratio(e.n, e.a); })},
      {"rho_eq", scalar([](const EvalArgs& e) { return law::rho_eq(e.x, e.y, e.tau); })},
      {"phi_eq", scalar([](const EvalArgs& e) { return law::phi_eq(e.x, e.tau); })},
      {"phi_eq_prime",
       scalar([](const EvalArgs& e) { return law::phi_eq_prime(e.x, e.tau); })},
      {"psi_r", scalar([](const EvalArgs& e) { return law::psi_r(e.x, e.tau); })},
      {"q_r", scalar([](const EvalArgs& e) { return law::q_r(e.x, e.tau, e.n); })},
      {"p_real_bulk", scalar([](const EvalArgs& e) { return law::p_real_bulk(e.n, e.tau); })},
      {"p_real_edge",
       scalar([](const EvalArgs& e) { return law::p_real_edge(e.delta, e.n, e.tau); })},
      {"p_complex_bulk",
       scalar([](const EvalArgs& e) { return law::p_complex_bulk(e.x, e.n, e.tau); })},
      {"p_complex_tail",
       scalar([](const EvalArgs& e) { return law::p_complex_tail(e.x, e.n, e.tau); })},
      {"p_complex_edge",
       scalar([](const EvalArgs& e) { return law::p_complex_edge(e.delta, e.n, e.tau); })},
      {"sigma_eq", scalar([](const EvalArgs& e) { return law::sigma_eq(e.m); })},
      {"sigma_eq_profile", scalar([](const EvalArgs& e) {
         return law::sigma_eq_profile(e.x, {e.m, e.tau, e.n});
       })},
      {"sigma_st", scalar([](const EvalArgs& e) { return law::sigma_st(e.m, e.tau); })},
      {"tau0", scalar([](const EvalArgs& e) { return law::tau0(e.m); })},
      {"m_alpha", scalar([](const EvalArgs& e) { return law::m_alpha(e.alpha); })},
      {"alpha_m", scalar([](const EvalArgs& e) { return law::alpha_m(e.m); })},
      {"x_of_alpha",
       scalar([](const EvalArgs& e) { return law::x_of_alpha(e.alpha, e.tau); })},
      {"sigma_st_alpha",
       scalar([](const EvalArgs& e) { return law::sigma_st_alpha(e.m, e.tau, e.alpha); })},
      {"tau0_alpha",
       scalar([](const EvalArgs& e) { return law::tau0_alpha(e.m, e.alpha); })},
      {"nu_density", scalar([](const EvalArgs& e) {
         return law::nu_density(e.alpha, {e.m, e.tau, e.n});
       })},
      {"ln_p_st_annealed", scalar([](const EvalArgs& e) {
         return law::ln_p_st_annealed({e.m, e.tau, e.n});
       })},
      {"sigma_gamma", scalar([](const EvalArgs& e) {
         return law::sigma_gamma(e.gamma, e.delta, e.tau, e.n);
       })},
      {"classify_phase", EvalFn([](const EvalArgs& e) -> std::string {
         const auto c = law::classify_phase({e.m, e.tau, e.n});
         std::string name = c.region == law::PhaseRegion::AbsoluteStability
                                ? "absolute-stability"
                            : c.region == law::PhaseRegion::RelativeInstability
                                ? "relative-instability"
                                : "absolute-instability";
         return c.near_boundary ? name + " (boundary)" : name;
       })},
  };
  return reg;
}

fs::path resolved_out_dir(const GlobalOpts& g) {
  if (const char* env = std::getenv("EQ_ATLAS_OUT"); env && *env) return fs::path(env);
  return fs::path(g.out_dir);
}

void write_rows_csv(const fs::path& path, const std::string& header,
                    const std::vector<std::vector<std::string>>& rows) {
  fs::create_directories(path.parent_path());
  std::ostringstream os;
  os << header << "\n";
  for (const auto& r : rows) {
    for (std::size_t i = 0; i < r.size(); ++i) os << (i ? "," : "") << r[i];
    os << "\n";
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + path.string());
  f << os.str();
}

void write_rows_json(const fs::path& path, const std::vector<std::string>& cols,
                     const std::vector<std::vector<std::string>>& rows) {
  fs::create_directories(path.parent_path());
  nlohmann::ordered_json j = nlohmann::ordered_json::array();
  for (const auto& r : rows) {
    nlohmann::ordered_json o;
    for (std::size_t i = 0; i < cols.size() && i < r.size(); ++i) o[cols[i]] = r[i];
    j.push_back(o);
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + path.string());
  f << j.dump(1) << "\n";
}

void write_rows(const GlobalOpts& g, const fs::path& base, const std::string& header,
                const std::vector<std::vector<std::string>>& rows) {
  std::vector<std::string> cols;
  std::stringstream ss(header);
  for (std::string c; std::getline(ss, c, ',');) cols.push_back(c);
  if (g.format == "json")
    write_rows_json(fs::path(base.string() + ".json"), cols, rows);
  else
    write_rows_csv(fs::path(base.string() + ".csv"), header, rows);
}

std::vector<double> make_grid(double lo, double hi, int steps) {
  if (steps < 1) throw std::domain_error("grid needs at least 1 step");
  std::vector<double> g;
  if (steps == 1) {
    g.push_back(lo);
    return g;
  }
  for (int i = 0; i < steps; ++i) g.push_back(lo + (hi - lo) * i / double(steps - 1));
  return g;
}

// ---------------------------------------------------------------------------

int cmd_eval(const GlobalOpts& g, const std::string& formula, const EvalArgs& args) {
  const auto& reg = eval_registry();
  auto it = reg.find(formula);
  if (it == reg.end()) {
    std::cerr << "unknown formula '" << formula << "'. registry:\n";
    for (const auto& [k, v] : reg) std::cerr << "  " << k << "\n";
    return 2;
  }
  const std::string value = it->second(args);
  if (g.format == "json")
    std::cout << "{\"formula\":\"" << formula << "\",\"value\":\"" << value << "\"}\n";
  else
    std::cout << value << "\n";
  return 0;
}

int cmd_phase_diagram(const GlobalOpts& g, int m_steps, int tau_steps,
                      const std::vector<double>& alphas) {
  const fs::path out = resolved_out_dir(g) / "phase_diagram";
  std::vector<std::vector<std::string>> rows;
  std::string header = "m,tau,sigma_st,region,boundary,tau0";
  for (double a : alphas) {
    header += ",sigma_st_alpha_" + fmt15(a);
    header += ",tau0_alpha_" + fmt15(a);
  }
  for (int i = 0; i < m_steps; ++i) {
    const double m = (i + 0.5) / double(m_steps);
    for (int j = 0; j < tau_steps; ++j) {
      const double tau = (j + 0.5) / double(tau_steps);
      std::vector<std::string> row{fmt15(m), fmt15(tau)};
      const auto phase = law::classify_phase({m, tau, 1});
      row.push_back(fmt15(law::sigma_st(m, tau)));
      row.push_back(phase.region == law::PhaseRegion::AbsoluteStability
                        ? "absolute-stability"
                    : phase.region == law::PhaseRegion::RelativeInstability
                        ? "relative-instability"
                        : "absolute-instability");
      row.push_back(phase.near_boundary ? "1" : "0");
      row.push_back(fmt15(law::tau0(m)));
      for (double a : alphas) {
        row.push_back(fmt15(law::sigma_st_alpha(m, tau, a)));
        // the alpha boundary only exists left of m_alpha
        std::string t0a = "";
        if (m <= law::m_alpha(a)) t0a = fmt15(law::tau0_alpha(m, a));
        row.push_back(t0a);
      }
      rows.push_back(std::move(row));
    }
  }
  write_rows(g, out, header, rows);
  std::cout << "phase diagram written under " << resolved_out_dir(g).string() << "\n";
  return 0;
}

int cmd_density(const GlobalOpts& g, const std::string& kind, const std::string& piece,
                const EvalArgs& p, double grid_lo, double grid_hi, int grid_steps) {
  const fs::path out = resolved_out_dir(g) / ("density_" + kind +
                                              (piece.empty() ? "" : "_" + piece));
  std::vector<std::vector<std::string>> rows;
  const double edge = 1.0 + p.tau;

  auto straddles = [&](double lo, double hi) { return lo < edge && hi > edge; };

  if (kind == "index") {
    const auto grid = make_grid(grid_lo, grid_hi, grid_steps);
    for (double a : grid)
      rows.push_back({fmt15(a), fmt15(law::nu_density(a, {p.m, p.tau, p.n})),
                      "index-density"});
    write_rows(g, out, "alpha,nu,formula", rows);
  } else if (kind == "real_eig") {
    if (piece.empty())
      throw BranchPointError("real_eig requires --piece bulk|edge|tail (branch point at x=" +
                             fmt15(edge) + ")");
    if (piece == "edge") {
      for (double d : make_grid(grid_lo, grid_hi, grid_steps))
        rows.push_back({fmt15(d), fmt15(law::p_real_edge(d, p.n, p.tau)), "real-edge"});
      write_rows(g, out, "delta,density,formula", rows);
    } else if (piece == "bulk") {
      if (straddles(grid_lo, grid_hi) || grid_hi > edge)
        throw BranchPointError("bulk grid crosses the branch point x=" + fmt15(edge));
      for (double x : make_grid(grid_lo, grid_hi, grid_steps))
        rows.push_back({fmt15(x), fmt15(law::p_real_bulk(p.n, p.tau)), "real-bulk"});
      write_rows(g, out, "x,density,formula", rows);
    } else {
      if (grid_lo <= edge)
        throw BranchPointError("tail grid crosses the branch point x=" + fmt15(edge));
      for (double x : make_grid(grid_lo, grid_hi, grid_steps))
        rows.push_back({fmt15(x),
                        fmt15(law::q_r(x, p.tau, p.n) *
                              std::exp(-double(p.n) * law::psi_r(x, p.tau))),
                        "real-tail"});
      write_rows(g, out, "x,density,formula", rows);
    }
  } else if (kind == "complex_proj") {
    if (piece.empty())
      throw BranchPointError(
          "complex_proj requires --piece bulk|edge|tail (branch point at x=" + fmt15(edge) +
          ")");
    if (piece == "edge") {
      for (double d : make_grid(grid_lo, grid_hi, grid_steps))
        rows.push_back({fmt15(d), fmt15(law::p_complex_edge(d, p.n, p.tau)), "complex-edge"});
      write_rows(g, out, "delta,density,formula", rows);
    } else if (piece == "bulk") {
      if (straddles(grid_lo, grid_hi) || grid_hi > edge)
        throw BranchPointError("bulk grid crosses the branch point x=" + fmt15(edge));
      for (double x : make_grid(grid_lo, grid_hi, grid_steps))
        rows.push_back(
            {fmt15(x), fmt15(law::p_complex_bulk(x, p.n, p.tau)), "complex-bulk"});
      write_rows(g, out, "x,density,formula", rows);
    } else {
      if (grid_lo <= edge)
        throw BranchPointError("tail grid crosses the branch point x=" + fmt15(edge));
      for (double x : make_grid(grid_lo, grid_hi, grid_steps))
        rows.push_back(
            {fmt15(x), fmt15(law::p_complex_tail(x, p.n, p.tau)), "complex-tail"});
      write_rows(g, out, "x,density,formula", rows);
    }
  } else if (kind == "xmax_tail") {
    if (grid_lo <= edge)
      throw BranchPointError("xmax_tail grid must start above x=" + fmt15(edge));
    for (double x : make_grid(grid_lo, grid_hi, grid_steps)) {
      const double lnd = std::log(law::q_r(x, p.tau, p.n)) - double(p.n) * law::psi_r(x, p.tau);
      rows.push_back({fmt15(x), fmt15(std::exp(lnd)), fmt15(lnd), "xmax-tail"});
    }
    write_rows(g, out, "x,density,ln_density,formula", rows);
  } else {
    std::cerr << "unknown density kind '" << kind << "'\n";
    return 2;
  }
  std::cout << "density curve written under " << resolved_out_dir(g).string() << "\n";
  return 0;
}

int cmd_mc(const GlobalOpts& g, const std::string& task, const EvalArgs& p, long trials,
           const std::string& mode_name, const std::string& config_echo) {
  const fs::path out_root = resolved_out_dir(g);
  const fs::path dir = out_root / "runs" / ("mc-" + task) / std::to_string(g.seed);
  fs::create_directories(dir / "curves");

  mc::ThetaMode mode = mc::ThetaMode::Unconstrained;
  if (mode_name == "stable")
    mode = mc::ThetaMode::Stable;
  else if (mode_name == "alpha_stable")
    mode = mc::ThetaMode::AlphaStable;
  else if (mode_name != "unconstrained") {
    std::cerr << "unknown mode '" << mode_name << "'\n";
    return 2;
  }

  xp::RunManifest man;
  man.scenario = "mc-" + task;
  man.seed = g.seed;
  man.workers = g.workers;
  man.config_echo = config_echo;
  man.versions = {{"eqatlas", "0.1.0"}, {"manifest_schema", "1"}};
  man.params = {{"n", double(p.n)},     {"tau", p.tau},     {"m", p.m},
                {"trials", double(trials)}, {"alpha", p.alpha}, {"x", p.x}};

  mc::SamplerConfig cfg{p.n, p.tau, g.seed};
  if (task == "densities") {
    mc::DensityRequest req;
    req.trials = trials;
    req.workers = g.workers;
    req.bin_lo = -(2.0 + p.tau + 0.5);
    req.bin_hi = 2.0 + p.tau + 0.5;
    req.bins = 56;
    req.mu_h_alpha = p.alpha > 0 ? p.alpha : 0.25;
    const auto dens = mc::empirical_densities(cfg, req);
    xp::Curve real{"x", "real_eig_density", {}, {}, "monte_carlo"};
    xp::Curve proj{"x", "projection_density", {}, {}, "monte_carlo"};
    for (int b = 0; b < dens.real_hist.bins(); ++b) {
      real.x.push_back(dens.real_hist.bin_center(b));
      real.y.push_back(dens.real_hist.density(b, trials));
      proj.x.push_back(dens.proj_hist.bin_center(b));
      proj.y.push_back(dens.proj_hist.density(b, trials));
    }
    man.curves.emplace_back("real_eig_density", real);
    man.curves.emplace_back("projection_density", proj);
    std::cout << "mean real eigenvalues per trial: " << fmt15(dens.real_count.mean)
              << "\n";
  } else if (task == "xmax") {
    mc::DensityRequest req;
    req.trials = trials;
    req.workers = g.workers;
    req.bin_lo = -(2.0 + p.tau + 0.5);
    req.bin_hi = 2.0 + p.tau + 0.5;
    req.bins = 56;
    const auto dens = mc::empirical_densities(cfg, req);
    std::vector<double> sorted = dens.xmax_samples;
    std::sort(sorted.begin(), sorted.end());
    xp::Curve samples{"trial", "xmax", {}, {}, "monte_carlo"};
    for (std::size_t i = 0; i < dens.xmax_samples.size(); ++i) {
      samples.x.push_back(double(i));
      samples.y.push_back(dens.xmax_samples[i]);
    }
    man.curves.emplace_back("xmax_samples", samples);
    // empirical upper tail -ln P(xmax > x) on the sorted sample grid
    xp::Curve tail{"x", "neg_ln_tail_prob", {}, {}, "monte_carlo"};
    const long t = long(sorted.size());
    for (long i = 0; i < t; ++i) {
      const long exceed = t - 1 - i;
      if (exceed == 0) break;
      tail.x.push_back(sorted[i]);
      tail.y.push_back(-std::log(double(exceed) / double(t)));
    }
    man.curves.emplace_back("xmax_tail_empirical", tail);
    std::cout << "median xmax: " << fmt15(sorted[t / 2]) << "\n";
  } else if (task == "counts") {
    const auto est = mc::estimate_N_counts({p.m, p.tau, p.n}, mode, p.alpha, trials, 21,
                                           g.seed, g.workers);
    if (!est.reliable) {
      std::cerr << "estimate unreliable: a quadrature node accepted < 30 trials\n";
      return 5;
    }
    xp::Curve nodes{"x", "log_d_mean", {}, {}, "monte_carlo"};
    for (const auto& nd : est.nodes) {
      nodes.x.push_back(nd.x);
      nodes.y.push_back(nd.log_d_mean);
    }
    man.curves.emplace_back("counts_nodes", nodes);
    man.params["log_count"] = est.log_count;
    std::cout << "ln estimate: " << fmt15(est.log_count) << "\n";
  } else if (task == "mu_h") {
    mc::DensityRequest req;
    req.trials = trials;
    req.workers = g.workers;
    req.bin_lo = -(2.0 + p.tau + 0.5);
    req.bin_hi = 2.0 + p.tau + 0.5;
    req.bins = 56;
    req.mu_h_alpha = p.alpha;
    const auto dens = mc::empirical_densities(cfg, req);
    double mean = 0;
    for (double v : dens.mu_h_samples) mean += v;
    mean /= double(dens.mu_h_samples.size());
    xp::Curve c{"trial", "mu_h", {}, {}, "monte_carlo"};
    for (std::size_t i = 0; i < dens.mu_h_samples.size(); ++i) {
      c.x.push_back(double(i));
      c.y.push_back(dens.mu_h_samples[i]);
    }
    man.curves.emplace_back("mu_h_samples", c);
    man.params["mu_h_mean"] = mean;
    std::cout << "mean mu_H(x(" << fmt15(p.alpha) << ")): " << fmt15(mean) << "\n";
  } else {
    std::cerr << "unknown mc task '" << task << "'\n";
    return 2;
  }

  man.verdict = true;
  for (const auto& [name, curve] : man.curves)
    xp::write_curve_csv(dir / "curves" / (name + ".csv"), curve);
  xp::write_manifest(dir / "manifest.json", man);
  std::cout << "results under " << dir.string() << "\n";
  return 0;
}

int cmd_validate(const GlobalOpts& g, std::vector<std::string> ids,
                 const std::string& config_echo) {
  const auto catalog = xp::scenario_catalog();
  std::vector<xp::Scenario> todo;
  if (ids.empty() || (ids.size() == 1 && ids[0] == "all")) {
    todo = catalog;
  } else {
    for (const auto& id : ids) {
      auto s = xp::find_scenario(id);
      if (!s) {
        std::cerr << "unknown scenario '" << id << "'. available:\n";
        for (const auto& c : catalog) std::cerr << "  " << c.id << "\n";
        return 2;
      }
      todo.push_back(*s);
    }
  }

  bool all_pass = true;
  const fs::path out_root = resolved_out_dir(g);
  for (const auto& s : todo) {
    const auto man = xp::run_scenario(s, g.seed, g.workers, out_root, false, config_echo);
    for (const auto& c : man.checks) {
      std::printf("%-4s %-24s %-28s predicted=%- .10g measured=%- .10g tol=%.3g%s%s\n",
                  c.pass ? "ok" : "FAIL", s.id.c_str(), c.id.c_str(), c.predicted,
                  c.measured, c.tolerance, c.note.empty() ? "" : "  note: ",
                  c.note.c_str());
      all_pass = all_pass && c.pass;
    }
  }
  std::printf("verdict: %s\n", all_pass ? "pass" : "fail");
  return all_pass ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"eqatlas: equilibria counting in large random dynamical systems"};
  app.set_config("--config", "", "key-value config file; command-line flags override");

  GlobalOpts g;
  app.add_option("--seed", g.seed, "base seed for all random streams")->capture_default_str();
  app.add_option("--workers", g.workers, "worker threads for trial execution")
      ->capture_default_str();
  app.add_option("--out-dir", g.out_dir,
                 "output directory (EQ_ATLAS_OUT overrides when set)")
      ->capture_default_str();
  app.add_option("--format", g.format, "table format: csv or json")
      ->check(CLI::IsMember({"csv", "json"}))
      ->capture_default_str();
  app.add_flag("--svg", g.svg, "also render SVG plots for figure curves");

  // eval
  EvalArgs e;
  auto* eval = app.add_subcommand("eval", "evaluate one closed-form quantity");
  std::string formula;
  eval->add_option("formula", formula, "formula name (see registry on error)")->required();
  eval->add_option("--m", e.m);
  eval->add_option("--tau", e.tau);
  eval->add_option("--n", e.n);
  eval->add_option("--alpha", e.alpha);
  eval->add_option("--x", e.x);
  eval->add_option("--y", e.y);
  eval->add_option("--delta", e.delta);
  eval->add_option("--gamma", e.gamma);
  eval->add_option("--a", e.a);

  // phase-diagram
  auto* phase = app.add_subcommand("phase-diagram", "sweep the (m,tau) plane");
  int m_steps = 200, tau_steps = 200;
  std::vector<double> alphas{0.0, 0.1, 0.01};
  phase->add_option("--m-steps", m_steps)->capture_default_str();
  phase->add_option("--tau-steps", tau_steps)->capture_default_str();
  phase->add_option("--alphas", alphas, "alpha levels for the alpha-stable sweep")
      ->capture_default_str();

  // density
  auto* density = app.add_subcommand("density", "tabulate one density curve");
  std::string kind, piece;
  double grid_lo = 0.0, grid_hi = 1.0;
  int grid_steps = 101;
  density->add_option("--kind", kind, "index | real_eig | complex_proj | xmax_tail")
      ->required();
  density->add_option("--piece", piece, "bulk | edge | tail (crossovers never stitch)");
  density->add_option("--grid-lo", grid_lo)->capture_default_str();
  density->add_option("--grid-hi", grid_hi)->capture_default_str();
  density->add_option("--grid-steps", grid_steps)->capture_default_str();
  density->add_option("--m", e.m);
  density->add_option("--tau", e.tau);
  density->add_option("--n", e.n);

  // mc
  auto* mccmd = app.add_subcommand("mc", "Monte Carlo runs over the ensemble");
  std::string task, mode_name = "unconstrained";
  long trials = 1000;
  mccmd->add_option("--task", task, "densities | counts | xmax | mu_h")->required();
  mccmd->add_option("--trials", trials)->capture_default_str();
  mccmd->add_option("--mode", mode_name, "unconstrained | stable | alpha_stable")
      ->capture_default_str();
  mccmd->add_option("--m", e.m);
  mccmd->add_option("--tau", e.tau);
  mccmd->add_option("--n", e.n);
  mccmd->add_option("--alpha", e.alpha);
  mccmd->add_option("--x", e.x);

  // validate
  auto* validate = app.add_subcommand("validate", "run validation scenarios");
  std::vector<std::string> ids;
  validate->add_option("scenarios", ids, "scenario ids, or 'all'");

  // figures
  auto* figures = app.add_subcommand("figures", "emit the figure data set as CSV");

  app.require_subcommand(0, 1);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& err) {
    const int rc = app.exit(err);
    return rc == 0 ? 0 : 2;
  }

  try {
    const std::string config_echo = app.config_to_str(true, false);
    if (eval->parsed()) return cmd_eval(g, formula, e);
    if (phase->parsed()) return cmd_phase_diagram(g, m_steps, tau_steps, alphas);
    if (density->parsed())
      return cmd_density(g, kind, piece, e, grid_lo, grid_hi, grid_steps);
    if (mccmd->parsed()) return cmd_mc(g, task, e, trials, mode_name, config_echo);
    if (validate->parsed()) return cmd_validate(g, ids, config_echo);
    if (figures->parsed()) {
      xp::emit_figures(resolved_out_dir(g), g.svg);
      std::cout << "figures under " << (resolved_out_dir(g) / "figures").string() << "\n";
      return 0;
    }
    std::cout << app.help();
    return 2;
  } catch (const BranchPointError& err) {
    std::cerr << "branch-point error: " << err.what() << "\n";
    return 4;
  } catch (const std::domain_error& err) {
    std::cerr << "domain error: " << err.what() << "\n";
    return 3;
  } catch (const std::invalid_argument& err) {
    std::cerr << "usage error: " << err.what() << "\n";
    return 2;
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 5;
  }
}
