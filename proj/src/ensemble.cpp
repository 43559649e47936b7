#include "eqatlas/ensemble.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numbers>
#include <thread>

namespace eqatlas::ensemble {

namespace {

constexpr double kPi = std::numbers::pi;

inline std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ull;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

// Philox2x64-10 block cipher; counter in c0, zero tweak in c1.
inline void philox2x64(std::uint64_t key, std::uint64_t counter, std::uint64_t& out0,
                       std::uint64_t& out1) {
  constexpr std::uint64_t kMul = 0xD2B74407B1CE6E93ull;
  constexpr std::uint64_t kWeyl = 0x9E3779B97F4A7C15ull;
  std::uint64_t c0 = counter, c1 = 0, k = key;
  for (int round = 0; round < 10; ++round) {
    const unsigned __int128 prod = static_cast<unsigned __int128>(kMul) * c0;
    const std::uint64_t hi = static_cast<std::uint64_t>(prod >> 64);
    const std::uint64_t lo = static_cast<std::uint64_t>(prod);
    c0 = hi ^ k ^ c1;
    c1 = lo;
    k += kWeyl;
  }
  out0 = c0;
  out1 = c1;
}

inline double unit_open(std::uint64_t v) {  // (0, 1]
  return double((v >> 11) + 1) * 0x1.0p-53;
}
inline double unit_half(std::uint64_t v) {  // [0, 1)
  return double(v >> 11) * 0x1.0p-53;
}

inline void gaussian_pair(std::uint64_t key, std::uint64_t pair_index, double& z0,
                          double& z1) {
  std::uint64_t r0, r1;
  philox2x64(key, pair_index, r0, r1);
  const double radius = std::sqrt(-2.0 * std::log(unit_open(r0)));
  const double angle = 2.0 * kPi * unit_half(r1);
  z0 = radius * std::cos(angle);
  z1 = radius * std::sin(angle);
}

}  // namespace

void SamplerConfig::validate() const {
  if (n < 1) throw std::domain_error("SamplerConfig: n must be >= 1");
  if (!(tau >= 0.0 && tau < 1.0))
    throw std::domain_error("SamplerConfig: tau must lie in [0,1)");
}

std::uint64_t stream_key(std::uint64_t base_seed, long trial) {
  return splitmix64(splitmix64(base_seed) ^
                    (static_cast<std::uint64_t>(trial) * 0xD2B74407B1CE6E93ull));
}

double gaussian_at(std::uint64_t key, std::uint64_t draw_index) {
  double z0, z1;
  gaussian_pair(key, draw_index >> 1, z0, z1);
  return (draw_index & 1) ? z1 : z0;
}

double GaussianStream::next() {
  if (index_ & 1) {
    ++index_;
    return cached_;
  }
  double z0;
  gaussian_pair(key_, index_ >> 1, z0, cached_);
  ++index_;
  return z0;
}

Eigen::MatrixXd sample_elliptic(const SamplerConfig& cfg, long trial) {
  cfg.validate();
  const int n = cfg.n;
  GaussianStream stream(stream_key(cfg.base_seed, trial));
  Eigen::MatrixXd g(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) g(i, j) = stream.next();
  const double a = std::sqrt(0.5 * (1.0 + cfg.tau));
  const double b = std::sqrt(0.5 * (1.0 - cfg.tau));
  const double p = (a + b) / std::sqrt(2.0);
  const double q = (a - b) / std::sqrt(2.0);
  const double scale = 1.0 / std::sqrt(double(n));
  return scale * (p * g + q * g.transpose());
}

// --------------------------------------------------------------------------
// Spectra.
// --------------------------------------------------------------------------

Spectrum spectrum(const Eigen::MatrixXd& x) {
  if (x.rows() != x.cols()) throw std::invalid_argument("spectrum: matrix must be square");
  if (!x.allFinite()) throw std::domain_error("spectrum: non-finite entries");

  Eigen::RealSchur<Eigen::MatrixXd> schur;
  schur.compute(x, /*computeU=*/false);
  const auto& t = schur.matrixT();
  if (schur.info() != Eigen::Success) {
    std::vector<double> diag(t.rows());
    for (int i = 0; i < t.rows(); ++i) diag[i] = t(i, i);
    throw SchurError("spectrum: QR iteration cap exceeded", std::move(diag));
  }

  const int n = int(t.rows());
  Spectrum s;
  s.eigenvalues.reserve(n);
  int i = 0;
  while (i < n) {
    // deflation zeroes the subdiagonal exactly, so this test is exact
    if (i == n - 1 || t(i + 1, i) == 0.0) {
      s.real_eigs.push_back(t(i, i));
      s.eigenvalues.emplace_back(t(i, i), 0.0);
      ++i;
      continue;
    }
    const double mean = 0.5 * (t(i, i) + t(i + 1, i + 1));
    const double half_diff = 0.5 * (t(i, i) - t(i + 1, i + 1));
    const double disc = half_diff * half_diff + t(i + 1, i) * t(i, i + 1);
    if (disc >= 0.0) {
      // standardized Schur blocks carry complex pairs only; kept for safety
      const double r = std::sqrt(disc);
      s.real_eigs.push_back(mean + r);
      s.real_eigs.push_back(mean - r);
      s.eigenvalues.emplace_back(mean + r, 0.0);
      s.eigenvalues.emplace_back(mean - r, 0.0);
    } else {
      const double im = std::sqrt(-disc);
      s.eigenvalues.emplace_back(mean, im);
      s.eigenvalues.emplace_back(mean, -im);
    }
    i += 2;
  }

  s.ordered_real_parts.reserve(n);
  for (const auto& z : s.eigenvalues) s.ordered_real_parts.push_back(z.real());
  std::sort(s.ordered_real_parts.begin(), s.ordered_real_parts.end(),
            std::greater<double>());
  return s;
}

double x_max(const Spectrum& s) {
  if (s.ordered_real_parts.empty()) throw std::invalid_argument("x_max: empty spectrum");
  return s.ordered_real_parts.front();
}

double kth_real_part(const Spectrum& s, int k) {
  if (k < 1 || k > s.n()) throw std::out_of_range("kth_real_part: k outside 1..n");
  return s.ordered_real_parts[k - 1];
}

double mu_h(const Spectrum& s, double x) {
  if (s.ordered_real_parts.empty()) throw std::invalid_argument("mu_h: empty spectrum");
  long count = 0;
  for (double r : s.ordered_real_parts) {
    if (r >= x)
      ++count;
    else
      break;  // descending order
  }
  return double(count) / double(s.n());
}

double log_abs_det(const Eigen::MatrixXd& x, double shift) {
  if (x.rows() != x.cols())
    throw std::invalid_argument("log_abs_det: matrix must be square");
  if (!x.allFinite() || !std::isfinite(shift))
    throw std::domain_error("log_abs_det: non-finite input");

  Eigen::MatrixXd a = x;
  const int n = int(a.rows());
  a.diagonal().array() -= shift;

  double acc = 0.0;
  for (int k = 0; k < n; ++k) {
    int piv = k;
    double best = std::fabs(a(k, k));
    for (int i = k + 1; i < n; ++i) {
      const double v = std::fabs(a(i, k));
      if (v > best) {
        best = v;
        piv = i;
      }
    }
    if (best == 0.0) return numerics::kNegInf;
    if (piv != k) a.row(piv).swap(a.row(k));
    acc += std::log(best);
    const int tail = n - k - 1;
    if (tail > 0) {
      const double inv = 1.0 / a(k, k);
      for (int i = k + 1; i < n; ++i) {
        const double f = a(i, k) * inv;
        if (f != 0.0) a.row(i).tail(tail) -= f * a.row(k).tail(tail);
      }
    }
  }
  return acc;
}

// --------------------------------------------------------------------------
// Atomic measures and the energy functional.
// --------------------------------------------------------------------------

void AtomicMeasure::validate() const {
  if (x.size() != y.size() || x.size() != w.size())
    throw std::invalid_argument("AtomicMeasure: component sizes differ");
  double total = 0.0;
  for (double wi : w) {
    if (!(wi >= 0.0)) throw std::domain_error("AtomicMeasure: negative weight");
    total += wi;
  }
  if (std::fabs(total - 1.0) > 1e-12)
    throw std::domain_error("AtomicMeasure: weights must sum to 1");
}

AtomicMeasure elliptic_law_grid(double tau, int cells_per_axis) {
  if (!(tau >= 0.0 && tau < 1.0))
    throw std::domain_error("elliptic_law_grid: tau must lie in [0,1)");
  if (cells_per_axis < 2)
    throw std::invalid_argument("elliptic_law_grid: need at least 2 cells per axis");
  const double ax = 1.0 + tau, ay = 1.0 - tau;
  const double hx = 2.0 * ax / cells_per_axis;
  const double hy = 2.0 * ay / cells_per_axis;
  AtomicMeasure mu;
  mu.symmetric = true;
  for (int i = 0; i < cells_per_axis; ++i) {
    const double cx = -ax + (i + 0.5) * hx;
    for (int j = 0; j < cells_per_axis; ++j) {
      const double cy = -ay + (j + 0.5) * hy;
      const double u = cx / ax, v = cy / ay;
      if (u * u + v * v <= 1.0) {
        mu.x.push_back(cx);
        mu.y.push_back(cy);
      }
    }
  }
  const double wi = 1.0 / double(mu.x.size());
  mu.w.assign(mu.x.size(), wi);
  return mu;
}

AtomicMeasure measure_from_spectrum(const Spectrum& s) {
  AtomicMeasure mu;
  mu.symmetric = true;
  const double wi = 1.0 / double(s.n());
  for (const auto& z : s.eigenvalues) {
    mu.x.push_back(z.real());
    mu.y.push_back(z.imag());
    mu.w.push_back(wi);
  }
  return mu;
}

double j_tau(const AtomicMeasure& mu, double tau, int workers) {
  if (!(tau >= 0.0 && tau < 1.0)) throw std::domain_error("j_tau: tau must lie in [0,1)");
  mu.validate();
  const std::size_t n = mu.size();
  if (n < 2) throw std::invalid_argument("j_tau: need at least 2 points");
  if (workers < 1) workers = 1;

  const double cx = 1.0 / (1.0 + tau);
  const double cy = 1.0 / (1.0 - tau);
  double confinement = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    confinement += mu.w[i] * (mu.x[i] * mu.x[i] * cx + mu.y[i] * mu.y[i] * cy);
  confinement *= 0.5;

  // pair interaction; per-row partial sums reduced in row order so the
  // result is identical for any worker count
  std::vector<double> row(n, 0.0);
  std::atomic<bool> coincident{false};
  const double* px = mu.x.data();
  const double* py = mu.y.data();
  const double* pw = mu.w.data();
  auto body = [&](std::size_t begin, std::size_t stride) {
    for (std::size_t i = begin; i < n; i += stride) {
      const double xi = px[i], yi = py[i], wi = pw[i];
      double acc = 0.0;
      for (std::size_t j = i + 1; j < n; ++j) {
        const double dx = xi - px[j];
        const double dy = yi - py[j];
        const double r2 = dx * dx + dy * dy;
        if (r2 == 0.0) {
          if (wi * pw[j] > 0.0) coincident.store(true, std::memory_order_relaxed);
          continue;
        }
        acc += wi * pw[j] * std::log(r2);
      }
      row[i] = acc;
    }
  };
  if (workers == 1) {
    body(0, 1);
  } else {
    std::vector<std::thread> pool;
    for (int t = 1; t < workers; ++t) pool.emplace_back(body, std::size_t(t), std::size_t(workers));
    body(0, std::size_t(workers));
    for (auto& th : pool) th.join();
  }
  if (coincident.load()) return std::numeric_limits<double>::infinity();

  double interaction = 0.0, comp = 0.0;  // Kahan over rows, fixed order
  for (std::size_t i = 0; i < n; ++i) {
    const double y = row[i] - comp;
    const double t = interaction + y;
    comp = (t - interaction) - y;
    interaction = t;
  }
  // rows hold w_i w_j ln(r^2) over j>i; the energy wants -sum_{i<j} w w ln r
  return confinement - 0.5 * interaction - 0.375;
}

// --------------------------------------------------------------------------
// Trial accumulation and the parallel runner.
// --------------------------------------------------------------------------

Histogram::Histogram(double lo_, double hi_, int bins) : lo(lo_), hi(hi_) {
  if (!(lo < hi)) throw std::invalid_argument("Histogram: lo must be < hi");
  if (bins < 1) throw std::invalid_argument("Histogram: need at least one bin");
  counts.assign(bins, 0);
}

void Histogram::add(double v) {
  if (v < lo) {
    ++below;
    return;
  }
  if (v >= hi) {
    ++above;
    return;
  }
  const int i = std::min(bins() - 1, int((v - lo) / bin_width()));
  ++counts[i];
}

void Histogram::merge(const Histogram& o) {
  if (o.lo != lo || o.hi != hi || o.counts.size() != counts.size())
    throw std::logic_error("Histogram::merge: incompatible binning");
  for (std::size_t i = 0; i < counts.size(); ++i) counts[i] += o.counts[i];
  below += o.below;
  above += o.above;
}

double Histogram::density(int i, long trials) const {
  return double(counts[i]) / (double(trials) * bin_width());
}

void RunningStat::merge(const RunningStat& o) {
  if (o.n == 0) return;
  if (n == 0) {
    *this = o;
    return;
  }
  const double delta = o.mean - mean;
  const long total = n + o.n;
  mean += delta * double(o.n) / double(total);
  m2 += o.m2 + delta * delta * double(n) * double(o.n) / double(total);
  n = total;
}

double RunningStat::std_error() const {
  return n > 1 ? std::sqrt(variance() / double(n)) : 0.0;
}

void TrialAccumulator::merge(const TrialAccumulator& o) {
  if (o.log_sums.size() != log_sums.size() || o.counters.size() != counters.size() ||
      o.hists.size() != hists.size() || o.stats.size() != stats.size())
    throw std::logic_error("TrialAccumulator::merge: incongruent shapes");
  trials += o.trials;
  for (std::size_t i = 0; i < log_sums.size(); ++i) log_sums[i].merge(o.log_sums[i]);
  for (std::size_t i = 0; i < counters.size(); ++i) counters[i] += o.counters[i];
  for (std::size_t i = 0; i < hists.size(); ++i) hists[i].merge(o.hists[i]);
  for (std::size_t i = 0; i < stats.size(); ++i) stats[i].merge(o.stats[i]);
  samples.insert(samples.end(), o.samples.begin(), o.samples.end());
}

TrialAccumulator run_trials_parallel(long trials, int workers,
                                     const std::function<TrialAccumulator(long)>& task) {
  if (trials < 0) throw std::invalid_argument("run_trials_parallel: trials must be >= 0");
  if (workers < 1) workers = 1;
  TrialAccumulator total;
  if (trials == 0) return total;

  constexpr long kChunk = 1024;
  const long window = std::min(kChunk, trials);
  std::vector<TrialAccumulator> slot(window);
  std::vector<std::exception_ptr> errors(window);

  bool first = true;
  for (long start = 0; start < trials; start += window) {
    const long count = std::min(window, trials - start);
    if (workers == 1) {
      for (long k = 0; k < count; ++k) {
        try {
          slot[k] = task(start + k);
          errors[k] = nullptr;
        } catch (...) {
          errors[k] = std::current_exception();
        }
      }
    } else {
      std::atomic<long> next{0};
      auto body = [&] {
        for (;;) {
          const long k = next.fetch_add(1, std::memory_order_relaxed);
          if (k >= count) break;
          try {
            slot[k] = task(start + k);
            errors[k] = nullptr;
          } catch (...) {
            errors[k] = std::current_exception();
          }
        }
      };
      std::vector<std::thread> pool;
      for (int t = 1; t < workers; ++t) pool.emplace_back(body);
      body();
      for (auto& th : pool) th.join();
    }

    for (long k = 0; k < count; ++k) {
      if (errors[k]) {
        // one retry, then abort naming the trial
        try {
          slot[k] = task(start + k);
          errors[k] = nullptr;
        } catch (const std::exception& e) {
          throw std::runtime_error("run_trials_parallel: trial " +
                                   std::to_string(start + k) + " failed twice: " + e.what());
        }
      }
    }
    for (long k = 0; k < count; ++k) {
      if (first) {
        total = std::move(slot[k]);
        first = false;
      } else {
        total.merge(slot[k]);
      }
      slot[k] = TrialAccumulator{};
    }
  }
  return total;
}

// --------------------------------------------------------------------------
// Monte Carlo estimators.
// --------------------------------------------------------------------------

namespace {

bool theta_accept(ThetaMode mode, const Spectrum& s, double x, double alpha) {
  switch (mode) {
    case ThetaMode::Unconstrained:
      return true;
    case ThetaMode::Stable:
      return x_max(s) < x;
    case ThetaMode::AlphaStable:
      return mu_h(s, x) <= alpha;
  }
  return true;
}

}  // namespace

DetAverage estimate_D(double x, const SamplerConfig& cfg, ThetaMode mode, double alpha,
                      long trials, int workers) {
  cfg.validate();
  if (trials < 2) throw std::invalid_argument("estimate_D: trials must be >= 2");
  if (mode == ThetaMode::AlphaStable && !(alpha >= 0.0 && alpha <= 1.0))
    throw std::domain_error("estimate_D: alpha must lie in [0,1]");

  TrialAccumulator acc = run_trials_parallel(trials, workers, [&](long trial) {
    TrialAccumulator a;
    a.trials = 1;
    a.log_sums.resize(1);
    a.counters.assign(1, 0);
    const Eigen::MatrixXd mat = sample_elliptic(cfg, trial);
    bool accept = true;
    if (mode != ThetaMode::Unconstrained) accept = theta_accept(mode, spectrum(mat), x, alpha);
    double lw = numerics::kNegInf;
    if (accept) {
      lw = log_abs_det(mat, x);
      a.counters[0] = 1;
    }
    a.log_sums[0].add(lw);
    a.samples.push_back(lw);
    return a;
  });

  DetAverage out;
  out.trials = trials;
  out.accepted = acc.counters[0];
  out.rejected = trials - out.accepted;
  const double lse = acc.log_sums[0].value();
  out.log_mean = lse - std::log(double(trials));
  out.reliable = (mode == ThetaMode::Unconstrained) || out.accepted >= 30;

  if (std::isfinite(lse) && out.accepted >= 2) {
    // jackknife on the log estimate
    const double log_t1 = std::log(double(trials - 1));
    RunningStat leave_one_out;
    for (double li : acc.samples)
      leave_one_out.add(numerics::log_diff_exp(lse, li) - log_t1);
    out.log_std_error =
        std::sqrt(double(trials - 1) / double(trials) * leave_one_out.m2);
  } else {
    out.log_std_error = std::numeric_limits<double>::quiet_NaN();
  }
  return out;
}

CountsEstimate estimate_N_counts(const analytic::ModelParams& params, ThetaMode mode,
                                 double alpha, long trials, int min_nodes,
                                 std::uint64_t base_seed, int workers) {
  params.validate();
  if (!(params.tau > 0.0))
    throw std::domain_error("estimate_N_counts: tau must be positive");
  if (trials < 2) throw std::invalid_argument("estimate_N_counts: trials must be >= 2");
  if (mode == ThetaMode::AlphaStable && !(alpha >= 0.0 && alpha <= 1.0))
    throw std::domain_error("estimate_N_counts: alpha must lie in [0,1]");

  const int k_nodes = std::max(21, min_nodes);
  const numerics::GaussHermiteRule rule = numerics::gauss_hermite(k_nodes);
  const double width = std::sqrt(2.0 * params.tau / double(params.n));
  std::vector<double> xs(k_nodes);
  for (int k = 0; k < k_nodes; ++k) xs[k] = params.m + width * rule.nodes[k];

  const SamplerConfig cfg{params.n, params.tau, base_seed};
  TrialAccumulator acc = run_trials_parallel(trials, workers, [&](long trial) {
    TrialAccumulator a;
    a.trials = 1;
    a.log_sums.resize(k_nodes);
    a.counters.assign(k_nodes, 0);
    const Eigen::MatrixXd mat = sample_elliptic(cfg, trial);
    Spectrum spec;
    if (mode != ThetaMode::Unconstrained) spec = spectrum(mat);
    for (int k = 0; k < k_nodes; ++k) {
      const bool accept =
          mode == ThetaMode::Unconstrained || theta_accept(mode, spec, xs[k], alpha);
      double lw = numerics::kNegInf;
      if (accept) {
        lw = log_abs_det(mat, xs[k]);
        a.counters[k] = 1;
      }
      a.log_sums[k].add(lw);
    }
    return a;
  });

  CountsEstimate out;
  out.trials = trials;
  const double log_sqrt_pi = 0.5 * std::log(kPi);
  numerics::LogSumExp integral;
  for (int k = 0; k < k_nodes; ++k) {
    CountsNode node;
    node.x = xs[k];
    node.log_quad_weight = std::log(rule.weights[k]) - log_sqrt_pi;
    node.log_d_mean = acc.log_sums[k].value() - std::log(double(trials));
    node.accepted = acc.counters[k];
    integral.add(node.log_quad_weight + node.log_d_mean);
    out.nodes.push_back(node);
    if (mode != ThetaMode::Unconstrained && node.accepted < 30) out.reliable = false;
  }
  out.log_count = -double(params.n) * std::log(params.m) + integral.value();
  return out;
}

EmpiricalDensities empirical_densities(const SamplerConfig& cfg, const DensityRequest& req) {
  cfg.validate();
  if (req.trials < 1)
    throw std::invalid_argument("empirical_densities: trials must be >= 1");
  const double edge = 1.0 + cfg.tau;
  if (!(req.bin_lo <= -edge - 1.0 && req.bin_hi >= edge + 1.0))
    throw std::invalid_argument(
        "empirical_densities: bins must cover [-(1+tau)-1, (1+tau)+1]");

  const double mu_h_x = analytic::x_of_alpha(req.mu_h_alpha, cfg.tau);
  const Histogram proto_hist(req.bin_lo, req.bin_hi, req.bins);
  const std::size_t frame_len = req.keep_frames ? 2 * std::size_t(cfg.n) : 0;

  TrialAccumulator acc = run_trials_parallel(req.trials, req.workers, [&](long trial) {
    TrialAccumulator a;
    a.trials = 1;
    a.hists.assign(2, proto_hist);
    a.stats.resize(1);
    const Spectrum s = spectrum(sample_elliptic(cfg, trial));
    for (double r : s.real_eigs) a.hists[0].add(r);
    for (const auto& z : s.eigenvalues) a.hists[1].add(z.real());
    a.stats[0].add(double(s.real_eigs.size()));
    a.samples.push_back(x_max(s));
    a.samples.push_back(mu_h(s, mu_h_x));
    if (req.keep_frames)
      for (const auto& z : s.eigenvalues) {
        a.samples.push_back(z.real());
        a.samples.push_back(z.imag());
      }
    return a;
  });

  EmpiricalDensities out;
  out.trials = req.trials;
  out.n = cfg.n;
  out.tau = cfg.tau;
  out.real_hist = std::move(acc.hists[0]);
  out.proj_hist = std::move(acc.hists[1]);
  out.real_count = acc.stats[0];
  out.mu_h_x = mu_h_x;
  const std::size_t stride = 2 + frame_len;
  for (long t = 0; t < req.trials; ++t) {
    const std::size_t base = std::size_t(t) * stride;
    out.xmax_samples.push_back(acc.samples[base]);
    out.mu_h_samples.push_back(acc.samples[base + 1]);
    if (req.keep_frames) {
      std::vector<std::complex<double>> frame(cfg.n);
      for (int i = 0; i < cfg.n; ++i)
        frame[i] = {acc.samples[base + 2 + 2 * i], acc.samples[base + 3 + 2 * i]};
      out.frames.push_back(std::move(frame));
    }
  }
  return out;
}

}  // namespace eqatlas::ensemble
