#include "eqatlas/numerics.hpp"

#include <algorithm>
#include <cmath>

namespace eqatlas::numerics {

void QuadratureSpec::validate() const {
  if (!(abs_tol >= 0.0) || !(rel_tol >= 0.0))
    throw std::invalid_argument("QuadratureSpec: tolerances must be non-negative");
  if (abs_tol == 0.0 && rel_tol == 0.0)
    throw std::invalid_argument("QuadratureSpec: at least one tolerance must be positive");
  if (max_subdivisions < 1)
    throw std::invalid_argument("QuadratureSpec: max_subdivisions must be >= 1");
}

// ---------------------------------------------------------------------------
// erf / erfc: W. J. Cody's rational approximations (netlib specfun CALERF).
// Three regimes; ~1 ulp accuracy in double precision.
// ---------------------------------------------------------------------------

namespace {

constexpr double kErfA[5] = {3.16112374387056560e+00, 1.13864154151050156e+02,
                             3.77485237685302021e+02, 3.20937758913846947e+03,
                             1.85777706184603153e-01};
constexpr double kErfB[4] = {2.36012909523441209e+01, 2.44024637934444173e+02,
                             1.28261652607737228e+03, 2.84423683343917062e+03};
constexpr double kErfC[9] = {5.64188496988670089e-01, 8.88314979438837594e+00,
                             6.61191906371416295e+01, 2.98635138197400131e+02,
                             8.81952221241769090e+02, 1.71204761263407058e+03,
                             2.05107837782607147e+03, 1.23033935479799725e+03,
                             2.15311535474403846e-08};
constexpr double kErfD[8] = {1.57449261107098347e+01, 1.17693950891312499e+02,
                             5.37181101862009858e+02, 1.62138957456669019e+03,
                             3.29079923573345963e+03, 4.36261909014324716e+03,
                             3.43936767414372164e+03, 1.23033935480374942e+03};
constexpr double kErfP[6] = {3.05326634961232344e-01, 3.60344899949804439e-01,
                             1.25781726111229246e-01, 1.60837851487422766e-02,
                             6.58749161529837803e-04, 1.63153871373020978e-02};
constexpr double kErfQ[5] = {2.56852019228982242e+00, 1.87295284992346047e+00,
                             5.27905102951428412e-01, 6.05183413124413191e-02,
                             2.33520497626869185e-03};

constexpr double kRsqrtPi = 5.6418958354775628695e-01;  // 1/sqrt(pi)
constexpr double kErfThresh = 0.46875;
constexpr double kErfcBig = 26.543;  // erfc underflows to 0 past here

// erfc(y) for y > kErfThresh, full relative accuracy.
double erfc_core(double y) {
  if (y > kErfcBig) return 0.0;
  double result;
  if (y <= 4.0) {
    double num = kErfC[8] * y;
    double den = y;
    for (int i = 0; i < 7; ++i) {
      num = (num + kErfC[i]) * y;
      den = (den + kErfD[i]) * y;
    }
    result = (num + kErfC[7]) / (den + kErfD[7]);
  } else {
    const double inv2 = 1.0 / (y * y);
    double num = kErfP[5] * inv2;
    double den = inv2;
    for (int i = 0; i < 4; ++i) {
      num = (num + kErfP[i]) * inv2;
      den = (den + kErfQ[i]) * inv2;
    }
    result = inv2 * (num + kErfP[4]) / (den + kErfQ[4]);
    result = (kRsqrtPi - result) / y;
  }
  // split exp(-y^2) to dodge rounding in the argument
  const double ysq = std::trunc(y * 16.0) / 16.0;
  const double del = (y - ysq) * (y + ysq);
  return std::exp(-ysq * ysq) * std::exp(-del) * result;
}

}  // namespace

double erf(double x) {
  if (!std::isfinite(x)) throw std::domain_error("erf: non-finite input");
  const double y = std::fabs(x);
  if (y <= kErfThresh) {
    const double ysq = y > 1.11e-16 ? y * y : 0.0;
    double num = kErfA[4] * ysq;
    double den = ysq;
    for (int i = 0; i < 3; ++i) {
      num = (num + kErfA[i]) * ysq;
      den = (den + kErfB[i]) * ysq;
    }
    return x * (num + kErfA[3]) / (den + kErfB[3]);
  }
  const double r = 1.0 - erfc_core(y);
  return x < 0.0 ? -r : r;
}

double erfc(double x) {
  if (!std::isfinite(x)) throw std::domain_error("erfc: non-finite input");
  const double y = std::fabs(x);
  double r;
  if (y <= kErfThresh)
    r = 1.0 - erf(y);
  else
    r = erfc_core(y);
  return x < 0.0 ? 2.0 - r : r;
}

double erfc_scaled_tail(double y, int n, double tau) {
  if (!(y > 0.0) || !std::isfinite(y))
    throw std::domain_error("erfc_scaled_tail: y must be positive and finite");
  if (n < 1) throw std::domain_error("erfc_scaled_tail: n must be >= 1");
  if (!(tau >= 0.0 && tau < 1.0))
    throw std::domain_error("erfc_scaled_tail: tau must lie in [0,1)");
  const double z = std::sqrt(2.0 / (1.0 - tau * tau)) * y * std::sqrt(double(n));
  const double z2 = z * z;
  // first three terms of the large-argument series; truncation error is
  // bounded by 15/(8 z^6), below 1% for z >= 3
  const double series = 1.0 - 0.5 / z2 + 0.75 / (z2 * z2);
  return std::exp(-z2) * kRsqrtPi / z * series;
}

// ---------------------------------------------------------------------------
// Incomplete gamma ratio for integer order.
// ---------------------------------------------------------------------------

double igamma_ratio(int n, double a) {
  if (n < 2) throw std::domain_error("igamma_ratio: n must be >= 2");
  if (!(a >= 0.0) || !std::isfinite(a))
    throw std::domain_error("igamma_ratio: a must be non-negative and finite");
  if (a == 0.0) return 1.0;

  const double na = double(n) * a;
  const long kmax = n - 2;
  const double lna = std::log(na);

  // log of term k, relative to the peak term
  auto log_term = [&](long k) { return double(k) * lna - std::lgamma(double(k) + 1.0); };
  const long kpeak = std::min<long>(kmax, (long)std::floor(na));
  const double lpeak = log_term(kpeak);

  // sum outward from the peak; terms are unimodal in k
  double sum = 0.0, comp = 0.0;  // Kahan
  auto accumulate = [&](double t) {
    const double y = t - comp;
    const double s = sum + y;
    comp = (s - sum) - y;
    sum = s;
  };
  accumulate(1.0);  // the peak term itself
  for (long k = kpeak - 1; k >= 0; --k) {
    const double t = std::exp(log_term(k) - lpeak);
    accumulate(t);
    if (t < 1e-18 * sum) break;
  }
  for (long k = kpeak + 1; k <= kmax; ++k) {
    const double t = std::exp(log_term(k) - lpeak);
    accumulate(t);
    if (t < 1e-18 * sum) break;
  }
  const double log_ratio = lpeak - na + std::log(sum);
  const double r = std::exp(log_ratio);
  return std::min(1.0, std::max(0.0, r));
}

// ---------------------------------------------------------------------------
// Adaptive Simpson quadrature.
// ---------------------------------------------------------------------------

namespace {

struct PanelState {
  const std::function<double(double)>& f;
  double rel_tol;
  int max_depth;
  int failed_panels = 0;
  double failed_error = 0.0;
};

double simpson_recurse(PanelState& st, double a, double b, double fa, double fm,
                       double fb, double whole, double abs_tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = st.f(lm);
  const double frm = st.f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double refined = left + right;
  const double delta = refined - whole;
  const double tol = std::max(abs_tol, st.rel_tol * std::fabs(refined));
  if (std::fabs(delta) <= 15.0 * tol) return refined + delta / 15.0;
  if (depth >= st.max_depth) {
    ++st.failed_panels;
    st.failed_error += std::fabs(delta) / 15.0;
    return refined + delta / 15.0;
  }
  const double child_tol = 0.5 * abs_tol;
  return simpson_recurse(st, a, m, fa, flm, fm, left, child_tol, depth + 1) +
         simpson_recurse(st, m, b, fm, frm, fb, right, child_tol, depth + 1);
}

double integrate_piece(PanelState& st, double a, double b, double abs_tol) {
  if (a == b) return 0.0;
  const double m = 0.5 * (a + b);
  const double fa = st.f(a);
  const double fm = st.f(m);
  const double fb = st.f(b);
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return simpson_recurse(st, a, b, fa, fm, fb, whole, abs_tol, 0);
}

}  // namespace

double integrate(const std::function<double(double)>& f, double lo, double hi,
                 const QuadratureSpec& spec, const std::vector<double>& hints) {
  spec.validate();
  if (!std::isfinite(lo) || !std::isfinite(hi))
    throw std::domain_error("integrate: bounds must be finite (use integrate_to_inf)");
  double sign = 1.0;
  if (lo > hi) {
    std::swap(lo, hi);
    sign = -1.0;
  }

  std::vector<double> cuts{lo};
  for (double h : hints)
    if (h > lo && h < hi) cuts.push_back(h);
  cuts.push_back(hi);
  std::sort(cuts.begin(), cuts.end());

  PanelState st{f, spec.rel_tol, spec.max_subdivisions};
  const double piece_tol = spec.abs_tol / double(cuts.size() - 1);
  double total = 0.0;
  for (size_t i = 0; i + 1 < cuts.size(); ++i)
    total += integrate_piece(st, cuts[i], cuts[i + 1], piece_tol);
  total *= sign;

  if (st.failed_panels > 0)
    throw ConvergenceError("integrate: subdivision budget exhausted on " +
                               std::to_string(st.failed_panels) + " panel(s)",
                           total, st.failed_error);
  return total;
}

double integrate_to_inf(const std::function<double(double)>& f, double lo,
                        const QuadratureSpec& spec, const std::vector<double>& hints) {
  // q = lo + t/(1-t), dq = dt/(1-t)^2; the integrand must vanish at infinity
  auto g = [&f, lo](double t) -> double {
    if (t >= 1.0) return 0.0;
    const double om = 1.0 - t;
    return f(lo + t / om) / (om * om);
  };
  std::vector<double> mapped;
  mapped.reserve(hints.size());
  for (double h : hints)
    if (h > lo && std::isfinite(h)) mapped.push_back((h - lo) / (1.0 + h - lo));
  return integrate(g, 0.0, 1.0, spec, mapped);
}

// ---------------------------------------------------------------------------
// Brent root finder.
// ---------------------------------------------------------------------------

double find_root(const std::function<double(double)>& f, RootBracket bracket,
                 double tol) {
  if (!(bracket.lo < bracket.hi))
    throw std::invalid_argument("find_root: bracket.lo must be < bracket.hi");
  if (!(tol > 0.0)) throw std::invalid_argument("find_root: tol must be positive");

  double a = bracket.lo, b = bracket.hi;
  double fa = f(a), fb = f(b);
  if (fa == 0.0) return a;
  if (fb == 0.0) return b;
  if ((fa > 0.0) == (fb > 0.0))
    throw std::invalid_argument("find_root: no sign change across bracket");

  double c = a, fc = fa;
  double d = b - a, e = b - a;
  constexpr int kMaxIter = 200;
  for (int iter = 0; iter < kMaxIter; ++iter) {
    if ((fb > 0.0) == (fc > 0.0)) {
      c = a;
      fc = fa;
      d = e = b - a;
    }
    if (std::fabs(fc) < std::fabs(fb)) {
      a = b;
      b = c;
      c = a;
      fa = fb;
      fb = fc;
      fc = fa;
    }
    const double tol1 =
        2.0 * std::numeric_limits<double>::epsilon() * std::fabs(b) + 0.5 * tol;
    const double xm = 0.5 * (c - b);
    if (std::fabs(xm) <= tol1 || fb == 0.0) return b;

    if (std::fabs(e) >= tol1 && std::fabs(fa) > std::fabs(fb)) {
      // try inverse quadratic (secant when only two points are distinct)
      const double s = fb / fa;
      double p, q;
      if (a == c) {
        p = 2.0 * xm * s;
        q = 1.0 - s;
      } else {
        const double qq = fa / fc;
        const double r = fb / fc;
        p = s * (2.0 * xm * qq * (qq - r) - (b - a) * (r - 1.0));
        q = (qq - 1.0) * (r - 1.0) * (s - 1.0);
      }
      if (p > 0.0) q = -q;
      p = std::fabs(p);
      // accept only if the step stays inside the bracket, else bisect
      if (2.0 * p < std::min(3.0 * xm * q - std::fabs(tol1 * q), std::fabs(e * q))) {
        e = d;
        d = p / q;
      } else {
        d = xm;
        e = d;
      }
    } else {
      d = xm;
      e = d;
    }
    a = b;
    fa = fb;
    if (std::fabs(d) > tol1)
      b += d;
    else
      b += (xm > 0.0 ? tol1 : -tol1);
    fb = f(b);
  }
  return b;
}

// ---------------------------------------------------------------------------
// Log-domain helpers.
// ---------------------------------------------------------------------------

double LogSumExp::value() const {
  if (max_ == kNegInf) return kNegInf;
  return max_ + std::log(sum_);
}

double log_sum_exp_stream(const std::vector<double>& log_values) {
  LogSumExp acc;
  for (double v : log_values) acc.add(v);
  return acc.value();
}

double log_diff_exp(double a, double b) {
  if (b == kNegInf) return a;
  if (!(a >= b)) throw std::domain_error("log_diff_exp: requires a >= b");
  if (a == b) return kNegInf;
  return a + std::log1p(-std::exp(b - a));
}

// ---------------------------------------------------------------------------
// Gauss-Hermite rule (weight exp(-x^2)), Newton iteration on the recurrence.
// ---------------------------------------------------------------------------

GaussHermiteRule gauss_hermite(int n) {
  if (n < 1) throw std::domain_error("gauss_hermite: n must be >= 1");
  GaussHermiteRule rule;
  rule.nodes.assign(n, 0.0);
  rule.weights.assign(n, 0.0);

  constexpr double kPiQuarterInv = 0.7511255444649425;  // pi^{-1/4}
  const int m = (n + 1) / 2;
  double z = 0.0;
  for (int i = 0; i < m; ++i) {
    if (i == 0)
      z = std::sqrt(2.0 * n + 1.0) - 1.85575 * std::pow(2.0 * n + 1.0, -1.0 / 6.0);
    else if (i == 1)
      z -= 1.14 * std::pow(double(n), 0.426) / z;
    else if (i == 2)
      z = 1.86 * z - 0.86 * rule.nodes[n - 1];
    else if (i == 3)
      z = 1.91 * z - 0.91 * rule.nodes[n - 2];
    else
      z = 2.0 * z - rule.nodes[n - i + 1];

    double pp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p1 = kPiQuarterInv, p2 = 0.0;
      for (int j = 1; j <= n; ++j) {
        const double p3 = p2;
        p2 = p1;
        p1 = z * std::sqrt(2.0 / j) * p2 - std::sqrt(double(j - 1) / j) * p3;
      }
      pp = std::sqrt(2.0 * n) * p2;
      const double dz = p1 / pp;
      z -= dz;
      if (std::fabs(dz) <= 1e-14) break;
    }
    rule.nodes[n - 1 - i] = z;
    rule.nodes[i] = -z;
    rule.weights[n - 1 - i] = 2.0 / (pp * pp);
    rule.weights[i] = rule.weights[n - 1 - i];
  }
  return rule;
}

}  // namespace eqatlas::numerics
