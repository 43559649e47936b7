#include "eqatlas/analytic.hpp"

#include <cmath>
#include <numbers>

namespace eqatlas::analytic {

namespace {

constexpr double kPi = std::numbers::pi;

void require(bool ok, const char* msg) {
  if (!ok) throw std::domain_error(msg);
}

void check_tau(double tau) {
  require(tau >= 0.0 && tau < 1.0, "tau must lie in [0,1)");
}

// sqrt(x^2 - 4 tau) for |x| >= 1+tau; the radicand is >= (1-tau)^2 there
double edge_sqrt(double ax, double tau) {
  return std::sqrt(std::max(ax * ax - 4.0 * tau, 0.0));
}

// w = (|x| + sqrt(x^2-4tau))/2; the conjugate of (|x|-sqrt(...))/2 = tau/w,
// so expressions in x - sqrt(x^2-4tau) stay exact as tau -> 0
double edge_w(double ax, double tau) { return 0.5 * (ax + edge_sqrt(ax, tau)); }

}  // namespace

void ModelParams::validate() const {
  require(std::isfinite(m) && m > 0.0, "ModelParams: m must be positive");
  check_tau(tau);
  require(n >= 1, "ModelParams: n must be >= 1");
}

EllipticSupport::EllipticSupport(double tau_) : tau(tau_) { check_tau(tau); }

double EllipticSupport::density() const { return 1.0 / (kPi * (1.0 - tau * tau)); }

bool EllipticSupport::contains(double x, double y) const {
  const double u = x / semi_axis_x();
  const double v = y / semi_axis_y();
  return u * u + v * v <= 1.0;
}

double rho_eq(double x, double y, double tau) {
  const EllipticSupport support(tau);
  return support.contains(x, y) ? support.density() : 0.0;
}

double phi_eq(double x, double tau) {
  check_tau(tau);
  const double ax = std::fabs(x);
  const double edge = 1.0 + tau;
  if (ax == edge) return 0.5 * tau;  // common value of both branches
  if (ax < edge) return x * x / (2.0 * edge) - 0.5;
  const double w = edge_w(ax, tau);
  return 0.5 * tau / (w * w) + std::log(w);
}

double phi_eq_prime(double x, double tau) {
  check_tau(tau);
  const double ax = std::fabs(x);
  const double edge = 1.0 + tau;
  if (ax <= edge) return x / edge;
  const double d = 1.0 / (2.0 * edge_w(ax, tau));  // = (|x|-sqrt(x^2-4tau))/(2tau)
  return x < 0.0 ? -d : d;
}

double psi_r(double x, double tau) {
  check_tau(tau);
  const double edge = 1.0 + tau;
  require(x >= edge, "psi_r: x must be >= 1+tau");
  const double w = edge_w(x, tau);
  return -0.5 + x * x / (2.0 * edge) - 0.5 * tau / (w * w) - std::log(w);
}

double q_r(double x, double tau, int n) {
  check_tau(tau);
  require(n >= 1, "q_r: n must be >= 1");
  const double edge = 1.0 + tau;
  require(x > edge, "q_r: x must be > 1+tau");
  const double s = edge_sqrt(x, tau);
  return std::sqrt(double(n) / (2.0 * kPi * edge) / (s * (x + s)));
}

double p_real_bulk(int n, double tau) {
  check_tau(tau);
  require(n >= 1, "p_real_bulk: n must be >= 1");
  return std::sqrt(double(n) / (2.0 * kPi * (1.0 - tau * tau)));
}

double p_real_edge(double delta, int n, double tau) {
  require(std::isfinite(delta), "p_real_edge: delta must be finite");
  const double dt = delta * std::sqrt((1.0 + tau) / (1.0 - tau));
  const double bulk = p_real_bulk(n, tau);
  return 0.5 * bulk *
         (1.0 - numerics::erf(dt * std::sqrt(2.0)) +
          std::exp(-dt * dt) * (1.0 + numerics::erf(dt)) / std::sqrt(2.0));
}

double p_complex_bulk(double x, int n, double tau, bool* outside_support) {
  check_tau(tau);
  require(n >= 1, "p_complex_bulk: n must be >= 1");
  const double edge = 1.0 + tau;
  const double u = x / edge;
  const bool outside = std::fabs(u) > 1.0;
  if (outside_support) *outside_support = outside;
  if (outside) return 0.0;
  return 2.0 * double(n) / (kPi * edge) * std::sqrt(std::max(0.0, 1.0 - u * u));
}

double p_complex_tail(double x, int n, double tau) {
  check_tau(tau);
  require(n >= 1, "p_complex_tail: n must be >= 1");
  const double edge = 1.0 + tau;
  require(x > edge, "p_complex_tail: x must be > 1+tau");
  const double w = edge_w(x, tau);
  const double b = 1.0 / (w * w);  // = ((x - sqrt(x^2-4tau)) / (2tau))^2
  const double pre = std::sqrt(double(n) / (2.0 * edge)) * b * b /
                     (kPi * std::pow(1.0 - b, 1.5) * std::sqrt(1.0 - tau * b));
  return pre * std::exp(-2.0 * double(n) * psi_r(x, tau));
}

double p_complex_edge(double delta, int n, double tau,
                      const numerics::QuadratureSpec& spec) {
  check_tau(tau);
  require(n >= 1, "p_complex_edge: n must be >= 1");
  require(std::isfinite(delta), "p_complex_edge: delta must be finite");
  const double c = (1.0 + tau) / (1.0 - tau);
  auto kernel = [c, delta](double q) {
    const double u = q + 2.0 * delta;
    return std::exp(-0.5 * c * u * u) * std::sqrt(q);
  };
  // hint the Gaussian peak when it sits inside the integration range
  std::vector<double> hints;
  const double peak = -2.0 * delta;
  const double width = 1.0 / std::sqrt(c);
  if (peak > 0.0) {
    hints.push_back(peak);
    hints.push_back(peak + 3.0 * width);
    if (peak - 3.0 * width > 0.0) hints.push_back(peak - 3.0 * width);
  } else {
    hints.push_back(width);
  }
  const double integral = numerics::integrate_to_inf(kernel, 0.0, spec, hints);
  const double pre = std::sqrt(2.0) * std::pow(double(n), 0.75) /
                     std::pow(kPi, 1.5) / std::sqrt(1.0 - tau * tau);
  return pre * integral;
}

double sigma_eq(double m) {
  require(std::isfinite(m) && m > 0.0, "sigma_eq: m must be positive");
  return 0.5 * (m * m - 1.0) - std::log(m);
}

double sigma_eq_profile(double x, const ModelParams& p) {
  p.validate();
  require(p.tau > 0.0, "sigma_eq_profile: tau=0 unsupported (Gaussian weight degenerates)");
  const double d = x - p.m;
  return phi_eq(x, p.tau) - d * d / (2.0 * p.tau) - std::log(p.m);
}

double sigma_st(double m, double tau) {
  require(m > 0.0 && m < 1.0, "sigma_st: m must lie in (0,1)");
  require(tau > 0.0 && tau < 1.0, "sigma_st: tau must lie in (0,1)");
  const double d = m - 1.0;
  return -(1.0 - m + std::log(m) + d * d / (2.0 * tau));
}

double sigma_st_from_sigma_eq(double m, double tau) {
  require(m > 0.0 && m < 1.0, "sigma_st: m must lie in (0,1)");
  require(tau > 0.0 && tau < 1.0, "sigma_st: tau must lie in (0,1)");
  const double d = 1.0 - m;
  return sigma_eq(m) - (1.0 + tau) / (2.0 * tau) * d * d;
}

double tau0(double m) {
  require(m > 0.0 && m < 1.0, "tau0: m must lie in (0,1)");
  const double d = 1.0 - m;
  return -0.5 * d * d / (1.0 - m + std::log(m));
}

double alpha_m(double m) {
  require(m >= -1.0 && m <= 1.0, "alpha_m: m must lie in [-1,1]");
  return (std::acos(m) - m * std::sqrt(1.0 - m * m)) / kPi;
}

double m_alpha(double alpha) {
  require(alpha >= 0.0 && alpha <= 1.0, "m_alpha: alpha must lie in [0,1]");
  // alpha_m is strictly decreasing on [-1,1], so the bracket is fixed
  return numerics::find_root([alpha](double m) { return alpha_m(m) - alpha; },
                             {-1.0, 1.0}, 1e-12);
}

double x_of_alpha(double alpha, double tau) {
  check_tau(tau);
  return (1.0 + tau) * m_alpha(alpha);
}

double sigma_st_alpha(double m, double tau, double alpha) {
  require(m > 0.0 && m < 1.0, "sigma_st_alpha: m must lie in (0,1)");
  require(tau > 0.0 && tau < 1.0, "sigma_st_alpha: tau must lie in (0,1)");
  require(alpha >= 0.0 && alpha <= 1.0, "sigma_st_alpha: alpha must lie in [0,1]");
  if (alpha >= 0.5) return sigma_eq(m);  // m_alpha <= 0 < m there
  const double ma = m_alpha(alpha);
  if (m >= ma) return sigma_eq(m);
  const double d = ma - m;
  return sigma_eq(m) - (1.0 + tau) / (2.0 * tau) * d * d;
}

double tau0_alpha(double m, double alpha) {
  require(alpha >= 0.0 && alpha <= 1.0, "tau0_alpha: alpha must lie in [0,1]");
  const double ma = m_alpha(alpha);
  require(m > 0.0 && m <= ma, "tau0_alpha: requires 0 < m <= m_alpha");
  const double d = ma - m;
  const double den = -1.0 - ma * ma - 2.0 * std::log(m) + 2.0 * m * ma;
  return d * d / den;
}

double nu_density(double alpha, const ModelParams& p) {
  p.validate();
  require(p.m < 1.0, "nu_density: m must lie in (0,1)");
  require(p.tau > 0.0, "nu_density: tau must lie in (0,1)");
  require(alpha >= 0.0 && alpha <= 1.0, "nu_density: alpha must lie in [0,1]");
  const double ma = m_alpha(alpha);
  const double d = ma - p.m;
  const double pre =
      std::sqrt(double(p.n) * kPi * (1.0 + p.tau) / (8.0 * p.tau * (1.0 - p.m * p.m)));
  return pre * std::exp(-0.5 * double(p.n) * (1.0 + p.tau) / p.tau * d * d);
}

double ln_p_st_annealed(const ModelParams& p) {
  p.validate();
  require(p.m < 1.0, "ln_p_st_annealed: m must lie in (0,1)");
  require(p.tau > 0.0, "ln_p_st_annealed: tau must be positive");
  const double d = 1.0 - p.m;
  return -double(p.n) * (1.0 + p.tau) * d * d / (2.0 * p.tau);
}

double sigma_gamma(double gamma, double delta, double tau, int n) {
  require(gamma >= 0.0, "sigma_gamma: gamma must be >= 0");
  require(delta > 0.0, "sigma_gamma: delta must be positive");
  require(tau > 0.0 && tau < 1.0, "sigma_gamma: tau must lie in (0,1)");
  require(n >= 1, "sigma_gamma: n must be >= 1");
  const double bracket = delta - 0.5 * std::pow(1.5 * kPi * gamma, 2.0 / 3.0);
  const double pre = std::sqrt(kPi * (1.0 + tau) / (16.0 * tau * delta));
  return pre * std::exp(-(1.0 + tau) / (2.0 * tau) * bracket * bracket);
}

bool sigma_gamma_range_ok(double delta, int n) {
  return delta >= 3.0 && delta <= std::sqrt(double(n)) / 3.0;
}

PhaseClassification classify_phase(const ModelParams& p) {
  p.validate();
  constexpr double kBoundaryEps = 1e-12;
  PhaseClassification out{PhaseRegion::AbsoluteStability, false};
  if (std::fabs(p.m - 1.0) <= kBoundaryEps) out.near_boundary = true;
  if (p.m >= 1.0) return out;
  const double t0 = tau0(p.m);
  if (std::fabs(p.tau - t0) <= kBoundaryEps) out.near_boundary = true;
  out.region = p.tau > t0 ? PhaseRegion::RelativeInstability
                          : PhaseRegion::AbsoluteInstability;
  return out;
}

}  // namespace eqatlas::analytic
