#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "eqatlas/ensemble.hpp"

// Named, reproducible validation scenarios binding closed-form predictions
// to Monte Carlo measurements, with persisted manifests and curves.

namespace eqatlas::experiments {

/// Pre-registered tolerance and anchor of one scenario check. The runner
/// computes predicted and measured values; the catalog carries only data.
struct CheckSpec {
  std::string id;
  std::string anchor;  // which formula the check pins down
  double tolerance;
};

struct Scenario {
  std::string id;
  std::string description;
  std::map<std::string, double> params;  // trial counts, dims, grid knobs
  std::vector<CheckSpec> checks;
};

struct CheckResult {
  std::string id;
  std::string anchor;
  double predicted = 0.0;
  double measured = 0.0;
  double tolerance = 0.0;
  bool pass = false;
  std::string note;  // reason code on failure ("tolerance unsatisfiable", ...)
};

struct Curve {
  std::string xlabel;
  std::string ylabel;
  std::vector<double> x;
  std::vector<double> y;
  std::string provenance;  // "analytic" or "monte_carlo"
};

struct RunManifest {
  std::string scenario;
  std::uint64_t seed = 0;
  int workers = 1;
  std::map<std::string, double> params;
  std::vector<CheckResult> checks;
  bool verdict = false;
  std::string timestamp;
  std::string config_echo;  // fully resolved CLI/config-file settings
  std::map<std::string, std::string> versions;
  std::vector<std::pair<std::string, Curve>> curves;  // name -> curve
  std::vector<std::vector<std::complex<double>>> frames;  // raw spectra, opt-in
};

/// All registered scenarios with their default parameters and the
/// pre-registered tolerances.
std::vector<Scenario> scenario_catalog();

/// Looks a scenario up by id; empty when unknown.
std::optional<Scenario> find_scenario(const std::string& id);

/// Runs all checks of a scenario. Deterministic per (scenario, seed): the
/// measured values are bit-identical across runs and worker counts. When
/// out_root is non-empty, persists out_root/runs/<id>/<seed>/manifest.json
/// plus curves/*.csv (and frames/*.bin when persist_frames is set).
RunManifest run_scenario(const Scenario& s, std::uint64_t base_seed, int workers,
                         const std::filesystem::path& out_root = {},
                         bool persist_frames = false,
                         const std::string& config_echo = {});

/// Rows of the Laplace-integral sanity table: I(n) = int_0^eps
/// exp(-a n^2 t^p + c n t^q) dt and its (1/n) log.
struct LaplaceCase {
  double a, c, p, q, eps;
};
struct LaplaceRow {
  double n;
  double integral;
  double normalized_log;  // (1/n) ln I
};
std::vector<LaplaceRow> laplace_sanity(const LaplaceCase& cs, const std::vector<double>& n_grid,
                                       const numerics::QuadratureSpec& spec = {});

/// The paper-figure data set as named CSV-able curves: the exponent profile,
/// m_alpha, the index-density families, the phase-boundary curves, and the
/// alpha(m,tau) heat maps (heat maps emitted as long-format tables).
std::vector<std::pair<std::string, Curve>> figure_curves();

/// Heat-map table of alpha(m,tau): the index at which the alpha-stability
/// boundary passes through (m,tau); zero above the tau0 curve.
struct HeatMap {
  std::vector<double> m;
  std::vector<double> tau;
  std::vector<double> value;  // long format, row per (m,tau)
};
HeatMap alpha_heatmap(int m_cells, int tau_cells, bool log_scale);

// -- persistence ------------------------------------------------------------

void write_curve_csv(const std::filesystem::path& path, const Curve& c);
void write_heatmap_csv(const std::filesystem::path& path, const HeatMap& h,
                       const std::string& value_label);
void write_curve_svg(const std::filesystem::path& path, const Curve& c);

/// Serializes the manifest (atomically: temp file + rename).
void write_manifest(const std::filesystem::path& path, const RunManifest& m);
std::string manifest_to_json(const RunManifest& m);

/// Length-prefixed binary frames: per frame a u64 little-endian payload
/// length, then little-endian f64s (trial_index, n, then re/im per
/// eigenvalue).
void write_frames(const std::filesystem::path& path,
                  const std::vector<std::vector<std::complex<double>>>& frames);

/// Emits every figure curve (CSV, optionally SVG) under dir/figures.
void emit_figures(const std::filesystem::path& dir, bool svg = false);

}  // namespace eqatlas::experiments
