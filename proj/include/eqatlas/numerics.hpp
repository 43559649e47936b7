#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

// Self-contained special functions and numerical kernels. Everything here is
// a pure function of its inputs and safe to call concurrently.

namespace eqatlas::numerics {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

/// Tolerances and budget for adaptive quadrature. At least one of abs_tol,
/// rel_tol must be positive; max_subdivisions is the recursion depth limit.
struct QuadratureSpec {
  double abs_tol = 1e-10;
  double rel_tol = 1e-10;
  int max_subdivisions = 40;

  void validate() const;
};

/// Interval with a sign change of the target function across it.
struct RootBracket {
  double lo;
  double hi;
};

/// Thrown when the subdivision budget runs out before the tolerance is met.
/// Carries the best estimate reached and a bound on its error.
class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, double best_estimate, double error_bound)
      : std::runtime_error(what), best_(best_estimate), bound_(error_bound) {}

  double best_estimate() const { return best_; }
  double error_bound() const { return bound_; }

 private:
  double best_;
  double bound_;
};

/// Error function, rational approximation accurate to ~1 ulp (absolute error
/// well below 1e-14). Odd by construction: erf(-x) == -erf(x) exactly.
double erf(double x);

/// Complementary error function from the same rational kernels; keeps full
/// relative accuracy for large x where 1 - erf(x) would cancel.
double erfc(double x);

/// Leading asymptotic form of erfc(sqrt(2/(1-tau^2)) * y * sqrt(n)) including
/// the first two correction terms of the large-argument series, so the
/// relative error against a direct erfc stays below 1% once the argument
/// exceeds 3. Requires y > 0 and tau in [0,1).
double erfc_scaled_tail(double y, int n, double tau);

/// Regularized upper incomplete gamma ratio Gamma(n-1, n*a) / Gamma(n-1) for
/// integer order, via the finite sum exp(-n*a) * sum_{k<n-1} (n*a)^k / k!.
/// Summation runs in the log domain (peak-normalized, Kahan-compensated,
/// early exit below 1e-18 relative) so n up to 1e4 cannot overflow.
/// Requires n >= 2, a >= 0. Monotone non-increasing in a, range [0,1].
double igamma_ratio(int n, double a);

/// Adaptive Simpson quadrature of f over [lo, hi]. Deterministic subdivision
/// order (always left child first). `hints` lists interior points where the
/// caller knows the integrand is non-smooth; the interval is pre-split there.
/// Throws ConvergenceError when max_subdivisions is exhausted on some panel.
double integrate(const std::function<double(double)>& f, double lo, double hi,
                 const QuadratureSpec& spec = {},
                 const std::vector<double>& hints = {});

/// Quadrature over [lo, +inf) through the substitution t = q/(1+q) mapping
/// the tail onto [0,1). The integrand must vanish at infinity; the mapped
/// endpoint is pinned to zero rather than evaluated.
double integrate_to_inf(const std::function<double(double)>& f, double lo,
                        const QuadratureSpec& spec = {},
                        const std::vector<double>& hints = {});

/// Brent root finder: inverse-quadratic / secant steps with a fixed
/// tie-break (bisection whenever the interpolated step leaves the bracket),
/// so iteration order is deterministic. Requires a sign change across the
/// bracket, else throws std::invalid_argument.
double find_root(const std::function<double(double)>& f, RootBracket bracket,
                 double tol = 1e-12);

/// Streaming log-sum-exp accumulator with running-max renormalization.
/// Empty accumulator has value -inf (the log-domain zero). add() is defined
/// as merge with a singleton, so folding singletons in index order is
/// bit-identical to a single sequential pass.
class LogSumExp {
 public:
  void add(double log_value) {
    LogSumExp single;
    single.max_ = log_value;
    single.sum_ = (log_value == kNegInf) ? 0.0 : 1.0;
    single.n_ = 1;
    merge(single);
  }

  void merge(const LogSumExp& other) {
    n_ += other.n_;
    if (other.max_ == kNegInf) return;
    if (max_ == kNegInf) {
      max_ = other.max_;
      sum_ = other.sum_;
      return;
    }
    if (other.max_ <= max_) {
      sum_ += other.sum_ * std::exp(other.max_ - max_);
    } else {
      sum_ = sum_ * std::exp(max_ - other.max_) + other.sum_;
      max_ = other.max_;
    }
  }

  /// log(sum of exp(v_i)); -inf when nothing finite was added.
  double value() const;

  long count() const { return n_; }

 private:
  double max_ = kNegInf;
  double sum_ = 0.0;
  long n_ = 0;
};

/// One-shot log(sum exp(values)).
double log_sum_exp_stream(const std::vector<double>& log_values);

/// log(exp(a) - exp(b)) for a >= b, without leaving the log domain.
double log_diff_exp(double a, double b);

/// Gauss-Hermite nodes and weights for the weight exp(-x^2), by Newton
/// iteration on the Hermite recurrence. Nodes ascend; weights sum to
/// sqrt(pi).
struct GaussHermiteRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};
GaussHermiteRule gauss_hermite(int n);

}  // namespace eqatlas::numerics
