#pragma once

#include "eqatlas/numerics.hpp"

// Closed-form predictions for the real elliptic ensemble and the equilibria
// counting exponents of the m/tau model. All functions are pure; parameter
// violations throw std::domain_error.

namespace eqatlas::analytic {

/// The model's whole parameter space: scaled relaxation strength m,
/// non-potentiality tau, system dimension n.
struct ModelParams {
  double m = 1.0;
  double tau = 0.0;
  int n = 1;

  void validate() const;
};

/// Support of the limiting eigenvalue distribution: ellipse with semi-axes
/// 1+tau (real direction) and 1-tau (imaginary direction).
struct EllipticSupport {
  explicit EllipticSupport(double tau_);

  double tau;
  double semi_axis_x() const { return 1.0 + tau; }
  double semi_axis_y() const { return 1.0 - tau; }
  double density() const;  // uniform value on the support
  bool contains(double x, double y) const;
};

enum class PhaseRegion { AbsoluteStability, RelativeInstability, AbsoluteInstability };

struct PhaseClassification {
  PhaseRegion region;
  bool near_boundary;  // within 1e-12 of m=1 or tau=tau0(m)
};

/// Limiting eigenvalue density: 1/(pi (1-tau^2)) inside the ellipse, 0
/// outside. The boundary gets the inside value.
double rho_eq(double x, double y, double tau);

/// Log-potential of the limiting eigenvalue distribution at a real point.
/// Quadratic inside the support, closed form outside; even in x, continuous
/// at |x| = 1+tau where it equals tau/2 (returned exactly there).
double phi_eq(double x, double tau);

/// d/dx of phi_eq. Inside: x/(1+tau). Outside: coded as the conjugate form
/// sign(x) * 2/(|x| + sqrt(x^2-4tau)) so tau -> 0 is exact.
double phi_eq_prime(double x, double tau);

/// Large-deviation rate for the rightmost real eigenvalue exceeding
/// x >= 1+tau. Vanishes at the edge, strictly increasing.
double psi_r(double x, double tau);

/// Pre-exponential factor pairing with psi_r: the tail density of real
/// eigenvalues is q_r(x) * exp(-n psi_r(x)). Requires x > 1+tau.
double q_r(double x, double tau, int n);

/// Flat density of real eigenvalues in the bulk.
double p_real_bulk(int n, double tau);

/// Real-eigenvalue density in the edge crossover window
/// x = (1+tau)(1 + delta/sqrt(n)); matches the bulk as delta -> -inf and the
/// tail asymptote as delta -> +inf.
double p_real_edge(double delta, int n, double tau);

/// Density of real parts of the complex eigenvalues in the bulk
/// (semicircle normalized to integrate to n). Returns 0 outside the support;
/// `outside_support`, when non-null, reports which side was taken.
double p_complex_bulk(double x, int n, double tau, bool* outside_support = nullptr);

/// Tail density of real parts of complex eigenvalues for x > 1+tau. The rate
/// is structurally 2*psi_r; the prefactor diverges at the edge like
/// (1-b)^{-3/2}.
double p_complex_tail(double x, int n, double tau);

/// Edge crossover of the complex-projection density, evaluated by quadrature
/// of its kernel. Quadrature failures propagate as ConvergenceError.
double p_complex_edge(double delta, int n, double tau,
                      const numerics::QuadratureSpec& spec = {});

/// Complexity exponent of the total number of equilibria, (m^2-1)/2 - ln m.
double sigma_eq(double m);

/// The x-resolved exponent profile whose Laplace maximum at x=(1+tau)m gives
/// sigma_eq. Requires tau > 0 (the Gaussian x-weight degenerates at tau=0).
double sigma_eq_profile(double x, const ModelParams& p);

/// Complexity exponent of stable equilibria, -[1-m+ln m+(m-1)^2/(2 tau)].
double sigma_st(double m, double tau);

/// Same quantity via sigma_eq - (1+tau)/(2 tau) (1-m)^2; the two routes must
/// agree to 1e-12 (asserted by tests).
double sigma_st_from_sigma_eq(double m, double tau);

/// Zero-level curve of sigma_st in the (m,tau) plane.
double tau0(double m);

/// Inverse of alpha_m: the unique m in [-1,1] with
/// alpha = (arccos m - m sqrt(1-m^2))/pi, found by Brent to 1e-12.
double m_alpha(double alpha);

/// Fraction of eigenvalues right of (1+tau)m for the limiting law, as a
/// function of m alone: (arccos m - m sqrt(1-m^2))/pi.
double alpha_m(double m);

/// Abscissa where the limiting law puts mass alpha to the right:
/// (1+tau) * m_alpha(alpha).
double x_of_alpha(double alpha, double tau);

/// Complexity exponent of alpha-stable equilibria; equals sigma_eq once
/// m >= m_alpha (always for alpha >= 1/2) and reduces to sigma_st at alpha=0.
double sigma_st_alpha(double m, double tau, double alpha);

/// Zero-level curve of sigma_st_alpha; defined for 0 < m <= m_alpha.
double tau0_alpha(double m, double alpha);

/// Relative density of the instability index alpha at dimension n, with the
/// normalization-fixing prefactor sqrt(n pi (1+tau) / (8 tau (1-m^2))).
double nu_density(double alpha, const ModelParams& p);

/// Log of the annealed probability that an equilibrium is stable:
/// -n (1+tau) (1-m)^2 / (2 tau).
double ln_p_st_annealed(const ModelParams& p);

/// Transition-tail density of the rescaled index gamma = alpha n^{3/4} at
/// m = 1 - delta/sqrt(n). Valid as an asymptote for 1 << delta << sqrt(n);
/// see sigma_gamma_range_ok.
double sigma_gamma(double gamma, double delta, double tau, int n);

/// Soft validity window for sigma_gamma's asymptotics.
bool sigma_gamma_range_ok(double delta, int n);

/// Phase of the (m, tau) point: m >= 1 absolute stability, otherwise the
/// tau0 curve separates relative from absolute instability.
PhaseClassification classify_phase(const ModelParams& p);

}  // namespace eqatlas::analytic
