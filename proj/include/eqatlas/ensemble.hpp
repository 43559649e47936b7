#pragma once

#include <complex>
#include <cstdint>
#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "eqatlas/analytic.hpp"
#include "eqatlas/numerics.hpp"

// Sampling the real elliptic ensemble, spectral statistics, and the Monte
// Carlo estimators the validation scenarios run on. Trials are independent
// tasks keyed by (base_seed, trial_index); results are reproducible
// bit-for-bit for any worker count because per-trial accumulators are always
// folded in trial order.

namespace eqatlas::ensemble {

struct SamplerConfig {
  int n = 1;
  double tau = 0.0;
  std::uint64_t base_seed = 0;

  void validate() const;
};

// --------------------------------------------------------------------------
// Deterministic random streams.
//
// Stream derivation rule: a per-trial key is
//     key(trial) = splitmix64(splitmix64(base_seed) ^ (trial * 0xD2B74407B1CE6E93)),
// and the k-th Gaussian of a trial comes from the Philox2x64-10 block at
// counter k/2 under that key (Box-Muller pair, k%2 selects the member).
// Draws are therefore a pure function of (base_seed, trial, k).
// --------------------------------------------------------------------------

std::uint64_t stream_key(std::uint64_t base_seed, long trial);

/// k-th Gaussian draw of the stream identified by `key` (stateless access).
double gaussian_at(std::uint64_t key, std::uint64_t draw_index);

/// Sequential view of the same stream; next() == gaussian_at(key, k) for the
/// k-th call, with the Box-Muller pair cached.
class GaussianStream {
 public:
  explicit GaussianStream(std::uint64_t key) : key_(key) {}
  double next();

 private:
  std::uint64_t key_;
  std::uint64_t index_ = 0;
  double cached_ = 0.0;
};

/// One matrix of the real elliptic ensemble: entries Gaussian, mean zero,
/// cov <X_ij X_nm> = (delta_in delta_jm + tau delta_jn delta_im)/n.
/// Built as a*(G+G^T)/sqrt2 + b*(G-G^T)/sqrt2 from iid G with entry variance
/// 1/n, a = sqrt((1+tau)/2), b = sqrt((1-tau)/2). G is filled row-major, so
/// the matrix is a pure function of (base_seed, trial).
Eigen::MatrixXd sample_elliptic(const SamplerConfig& cfg, long trial);

// --------------------------------------------------------------------------
// Spectra.
// --------------------------------------------------------------------------

/// Thrown when the Schur iteration fails to converge; carries the diagonal
/// of the partially reduced matrix as approximate eigenvalue locations.
class SchurError : public std::runtime_error {
 public:
  SchurError(const std::string& what, std::vector<double> partial_diagonal)
      : std::runtime_error(what), partial_(std::move(partial_diagonal)) {}
  const std::vector<double>& partial_diagonal() const { return partial_; }

 private:
  std::vector<double> partial_;
};

struct Spectrum {
  std::vector<std::complex<double>> eigenvalues;  // conjugate-paired
  std::vector<double> real_eigs;                  // from 1x1 Schur blocks
  std::vector<double> ordered_real_parts;         // descending

  int n() const { return static_cast<int>(eigenvalues.size()); }
};

/// Eigenvalues via the real Schur form. Real eigenvalues come from 1x1
/// diagonal blocks (the deflated subdiagonal entry is exactly zero, no
/// imaginary-part threshold); 2x2 blocks yield exact conjugate pairs.
Spectrum spectrum(const Eigen::MatrixXd& x);

/// Largest real part, x_1 of the descending order.
double x_max(const Spectrum& s);

/// x_k of the descending order x_1 >= x_2 >= ...; k is 1-based.
double kth_real_part(const Spectrum& s, int k);

/// Fraction of eigenvalues with Re z >= x (ties on the closed side).
double mu_h(const Spectrum& s, double x);

/// ln|det(X - shift*I)| by LU with partial pivoting, accumulating logs of
/// pivot magnitudes; exactly -inf for singular shifts.
double log_abs_det(const Eigen::MatrixXd& x, double shift);

// --------------------------------------------------------------------------
// Atomic measures and the large-deviation energy functional.
// --------------------------------------------------------------------------

struct AtomicMeasure {
  std::vector<double> x;
  std::vector<double> y;
  std::vector<double> w;
  bool symmetric = false;  // closed under conjugation, weight-matched

  std::size_t size() const { return x.size(); }
  void validate() const;  // weights >= 0 and summing to 1 within 1e-12
};

/// Cell-centered discretization of the limiting elliptic law on a
/// cells_per_axis^2 bounding-box grid; atoms at cell centers inside the
/// ellipse, uniform weights.
AtomicMeasure elliptic_law_grid(double tau, int cells_per_axis);

AtomicMeasure measure_from_spectrum(const Spectrum& s);

/// Large-deviation energy of a measure: quadratic confinement minus the
/// pairwise log kernel minus 3/8. The diagonal is excluded, which biases
/// n-point uniform discretizations by O(log n / n); acceptable for the
/// >= 4e4-point grids this is used on. Coincident atoms with nonzero weight
/// make the kernel -inf and the energy +inf. Deterministic for any worker
/// count (row sums reduced in index order).
double j_tau(const AtomicMeasure& mu, double tau, int workers = 1);

// --------------------------------------------------------------------------
// Trial accumulation.
// --------------------------------------------------------------------------

struct Histogram {
  double lo = 0.0;
  double hi = 1.0;
  std::vector<long> counts;
  long below = 0;
  long above = 0;

  Histogram() = default;
  Histogram(double lo_, double hi_, int bins);
  int bins() const { return static_cast<int>(counts.size()); }
  double bin_width() const { return (hi - lo) / bins(); }
  double bin_center(int i) const { return lo + (i + 0.5) * bin_width(); }
  void add(double v);
  void merge(const Histogram& o);
  /// counts / (trials * bin width): density-per-unit-x scaled by n when fed
  /// n values per trial.
  double density(int i, long trials) const;
};

/// Streaming mean/variance; add() is merge with a singleton, so any ordered
/// fold of singletons reproduces the single-pass result bit-for-bit.
struct RunningStat {
  long n = 0;
  double mean = 0.0;
  double m2 = 0.0;

  void add(double v) { merge(RunningStat{1, v, 0.0}); }
  void merge(const RunningStat& o);
  double variance() const { return n > 1 ? m2 / double(n - 1) : 0.0; }
  double std_error() const;
};

/// Order-independent, mergeable statistics over trials. merge() is
/// associative, and because every element-wise merge is the same operation
/// add() uses, folding per-trial accumulators in trial order is bit-identical
/// to a single serial pass.
struct TrialAccumulator {
  long trials = 0;
  std::vector<numerics::LogSumExp> log_sums;
  std::vector<long> counters;
  std::vector<Histogram> hists;
  std::vector<RunningStat> stats;
  std::vector<double> samples;  // raw per-trial records, concatenated in trial order

  void merge(const TrialAccumulator& o);  // shapes must be congruent
};

/// Runs `task` for trials 0..trials-1 on `workers` threads and folds the
/// per-trial accumulators in trial index order, so the result does not
/// depend on the worker count. A failing trial is retried once; a second
/// failure aborts the run naming the trial.
TrialAccumulator run_trials_parallel(long trials, int workers,
                                     const std::function<TrialAccumulator(long)>& task);

// --------------------------------------------------------------------------
// Monte Carlo estimators.
// --------------------------------------------------------------------------

enum class ThetaMode { Unconstrained, Stable, AlphaStable };

struct DetAverage {
  double log_mean;       // log of the MC mean of theta * |det(X - xI)|
  double log_std_error;  // jackknife standard error of log_mean
  long trials = 0;
  long accepted = 0;
  long rejected = 0;
  bool reliable = true;  // false when a constrained mode accepted < 30 trials
};

/// Log-domain MC average of Theta * |det(X - xI)|. Unconstrained mode drops
/// Theta; Stable requires x_max < x; AlphaStable requires mu_H(x) <= alpha.
/// All trials rejected leaves log_mean = -inf with the rejection count as
/// the diagnostic.
DetAverage estimate_D(double x, const SamplerConfig& cfg, ThetaMode mode,
                      double alpha, long trials, int workers);

struct CountsNode {
  double x;
  double log_quad_weight;  // ln(w_k / sqrt(pi)) of the Hermite rule
  double log_d_mean;
  long accepted;
};

struct CountsEstimate {
  double log_count;  // ln of the estimated expected number of equilibria
  std::vector<CountsNode> nodes;
  long trials = 0;
  bool reliable = true;
};

/// ln of m^{-n} * integral of D(x) against the Gaussian x-weight, with the
/// integral done on Gauss-Hermite nodes matched to the weight (the weight
/// width sqrt(tau/n) is far narrower than the D curve). Matrices are shared
/// across nodes within a trial.
CountsEstimate estimate_N_counts(const analytic::ModelParams& params, ThetaMode mode,
                                 double alpha, long trials, int min_nodes,
                                 std::uint64_t base_seed, int workers);

struct DensityRequest {
  long trials = 100;
  double bin_lo = -2.5;
  double bin_hi = 2.5;
  int bins = 60;
  double mu_h_alpha = 0.25;  // alpha for the mu_H(x(alpha)) sample set
  bool keep_frames = false;
  int workers = 1;
};

struct EmpiricalDensities {
  long trials = 0;
  int n = 0;
  double tau = 0.0;
  Histogram real_hist;  // real eigenvalues
  Histogram proj_hist;  // real parts of complex eigenvalues
  std::vector<double> xmax_samples;
  std::vector<double> mu_h_samples;
  double mu_h_x = 0.0;  // abscissa used for mu_h_samples
  RunningStat real_count;
  std::vector<std::vector<std::complex<double>>> frames;  // when requested
};

/// One pass over the ensemble collecting the real-eigenvalue histogram, the
/// complex-projection histogram, x_max and mu_H(x(alpha)) samples, all
/// mergeable and seed-reproducible.
EmpiricalDensities empirical_densities(const SamplerConfig& cfg, const DensityRequest& req);

}  // namespace eqatlas::ensemble
