#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>
#include <random>

#include "eqatlas/analytic.hpp"
#include "oracles.hpp"

namespace law = eqatlas::analytic;
namespace num = eqatlas::numerics;

TEST_CASE("rho_eq values and support") {
  CHECK(law::rho_eq(0.0, 0.0, 0.0) == doctest::Approx(1.0 / M_PI).epsilon(1e-15));
  CHECK(law::rho_eq(2.1, 0.0, 0.5) == 0.0);
  CHECK(law::rho_eq(1.5, 0.0, 0.5) == doctest::Approx(1.0 / (M_PI * 0.75)).epsilon(1e-15));
  CHECK_THROWS_AS(law::rho_eq(0.0, 0.0, 1.0), std::domain_error);
}

TEST_CASE("rho_eq integrates to one") {
  // the y-section of the ellipse is exact, the remaining 1-D integral is
  // smoothed with x = (1+tau) sin(theta)
  for (double tau : {0.0, 0.3, 0.7}) {
    const double ax = 1.0 + tau, ay = 1.0 - tau;
    auto f = [&](double th) {
      const double x = ax * std::sin(th);
      const double half_width = ay * std::fabs(std::cos(th));
      return law::rho_eq(x, 0.0, tau) * 2.0 * half_width * ax * std::cos(th);
    };
    const double total = num::integrate(f, -M_PI / 2, M_PI / 2,
                                        num::QuadratureSpec{1e-12, 1e-12, 44});
    CHECK(std::fabs(total - 1.0) < 1e-10);
  }
}

TEST_CASE("phi_eq branch values") {
  for (int t = 0; t <= 9; ++t) {
    const double tau = 0.1 * t;
    CHECK(law::phi_eq(1.0 + tau, tau) == 0.5 * tau);  // exact edge value
    CHECK(law::phi_eq(0.0, tau) == -0.5);
    CHECK(law::phi_eq(-2.5, tau) == law::phi_eq(2.5, tau));  // even
  }
  // frozen from the 2-D quadrature oracle
  CHECK(law::phi_eq(2.0, 0.5) == doctest::Approx(0.62058643436647532).epsilon(1e-12));
}

TEST_CASE("phi_eq against the polar quadrature oracle") {
  // Phi(x) = (1/pi) Re int_0^1 r dr int_0^{2pi} ln(x - (1+t) r cos - i (1-t) r sin)
  for (double tau : {0.0, 0.5}) {
    for (double x : {1.9, 2.4}) {
      auto inner = [&](double r) {
        auto f = [&](double th) {
          const std::complex<double> z(x - (1.0 + tau) * r * std::cos(th),
                                       -(1.0 - tau) * r * std::sin(th));
          return std::log(std::abs(z));
        };
        return r * oracle::richardson(f, 0.0, 2.0 * M_PI, 256);
      };
      const double ref = oracle::richardson(inner, 0.0, 1.0, 256) / M_PI;
      CHECK(law::phi_eq(x, tau) == doctest::Approx(ref).epsilon(1e-6));
    }
  }
}

TEST_CASE("phi_eq continuity at the edge") {
  for (int t = 0; t <= 9; ++t) {
    const double tau = 0.1 * t;
    const double edge = 1.0 + tau;
    for (double h = 1e-3; h >= 1e-9; h /= 10.0) {
      const double gap = std::fabs(law::phi_eq(edge - h, tau) - law::phi_eq(edge + h, tau));
      CHECK(gap <= 4.0 * h);  // O(h) continuity, slope around 1 there
    }
  }
}

TEST_CASE("phi_eq_prime branches and derivative consistency") {
  CHECK(law::phi_eq_prime(1.5, 0.5) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(law::phi_eq_prime(2.0, 0.5) == doctest::Approx(2.0 - std::sqrt(2.0)).epsilon(1e-12));
  CHECK(law::phi_eq_prime(0.6, 0.2) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(law::phi_eq_prime(-0.6, 0.2) == doctest::Approx(-0.5).epsilon(1e-14));
  // tau=0 outside branch collapses to 1/x without 0/0
  CHECK(law::phi_eq_prime(2.0, 0.0) == doctest::Approx(0.5).epsilon(1e-14));

  for (double tau : {0.0, 0.2, 0.5, 0.8}) {
    const double edge = 1.0 + tau;
    for (double x : {-2.7, -0.8, 0.2, 0.9, 1.2, 2.1, 3.5}) {
      if (std::fabs(std::fabs(x) - edge) < 1e-3) continue;
      const double fd =
          oracle::central_diff([&](double u) { return law::phi_eq(u, tau); }, x, 1e-5);
      CHECK(std::fabs(law::phi_eq_prime(x, tau) - fd) < 1e-6);
    }
  }
}

TEST_CASE("psi_r edge behavior and frozen values") {
  for (int t = 0; t <= 9; ++t) {
    const double tau = 0.1 * t;
    CHECK(std::fabs(law::psi_r(1.0 + tau, tau)) < 1e-12);
  }
  CHECK(law::psi_r(1.7, 0.5) == doctest::Approx(0.041303656552344618).epsilon(1e-12));
  CHECK(law::psi_r(2.0, 0.5) == doctest::Approx(0.21274689896685801).epsilon(1e-12));
  CHECK_THROWS_AS(law::psi_r(1.2, 0.5), std::domain_error);
}

TEST_CASE("psi_r strictly increasing with derivative matching") {
  for (double tau : {0.0, 0.5, 0.9}) {
    const double edge = 1.0 + tau;
    double prev = law::psi_r(edge, tau);
    for (int k = 1; k <= 100; ++k) {
      const double x = edge + 0.02 * k;
      const double cur = law::psi_r(x, tau);
      CHECK(cur > prev);
      prev = cur;
      // dpsi/dx = x/(1+tau) - 2/(x + sqrt(x^2-4tau)), checked by differences
      const double expect =
          x / (1.0 + tau) - 2.0 / (x + std::sqrt(x * x - 4.0 * tau));
      const double fd =
          oracle::central_diff([&](double u) { return law::psi_r(u, tau); }, x, 1e-6);
      CHECK(std::fabs(fd - expect) < 1e-6);
    }
  }
}

TEST_CASE("q_r values and scaling") {
  // frozen from the dual-factoring oracle
  CHECK(law::q_r(2.0, 0.5, 100) == doctest::Approx(1.4823869934150257).epsilon(1e-12));
  CHECK(law::q_r(2.0, 0.5, 400) == doctest::Approx(2.0 * law::q_r(2.0, 0.5, 100)).epsilon(1e-14));
  // near-edge limit stays finite: sqrt(x^2-4tau) -> 1-tau
  const double near = law::q_r(1.5 + 1e-12, 0.5, 100);
  const double limit = std::sqrt(100.0 / (2.0 * M_PI * 1.5) / (0.5 * 2.0 * 1.5));
  CHECK(near == doctest::Approx(limit).epsilon(1e-3));
  CHECK_THROWS_AS(law::q_r(1.5, 0.5, 100), std::domain_error);
}

TEST_CASE("p_real_bulk") {
  CHECK(law::p_real_bulk(100, 0.0) == doctest::Approx(3.9894228040143268).epsilon(1e-14));
  CHECK(law::p_real_bulk(100, 0.5) == doctest::Approx(4.6065886596178064).epsilon(1e-14));
  CHECK(law::p_real_bulk(400, 0.2) ==
        doctest::Approx(2.0 * law::p_real_bulk(100, 0.2)).epsilon(1e-14));
}

TEST_CASE("p_real_edge crossover") {
  const double bulk = law::p_real_bulk(100, 0.5);
  CHECK(law::p_real_edge(0.0, 100, 0.5) == doctest::Approx(3.9319693694853029).epsilon(1e-9));
  CHECK(std::fabs(law::p_real_edge(-6.0, 100, 0.5) / bulk - 1.0) < 0.005);
  const double dt = 4.0 * std::sqrt(3.0);
  const double tail = bulk / std::sqrt(2.0) * std::exp(-dt * dt);
  const double ratio = law::p_real_edge(4.0, 100, 0.5) / tail;
  CHECK(ratio > 0.98);
  CHECK(ratio < 1.02);
  // monotone decreasing on delta > 0 (spec'd for the density CLI grid)
  double prev = law::p_real_edge(0.0, 100, 0.5);
  for (double d = 0.25; d <= 6.0; d += 0.25) {
    const double cur = law::p_real_edge(d, 100, 0.5);
    CHECK(cur < prev);
    prev = cur;
  }
}

TEST_CASE("p_complex_bulk normalization and edges") {
  CHECK(law::p_complex_bulk(0.0, 100, 0.5) ==
        doctest::Approx(200.0 / (1.5 * M_PI)).epsilon(1e-13));
  bool outside = false;
  CHECK(law::p_complex_bulk(1.5, 100, 0.5, &outside) == 0.0);
  CHECK_FALSE(outside);
  CHECK(law::p_complex_bulk(1.6, 100, 0.5, &outside) == 0.0);
  CHECK(outside);

  for (double tau : {0.0, 0.5}) {
    const int n = 256;
    const double ax = 1.0 + tau;
    auto f = [&](double th) {
      return law::p_complex_bulk(ax * std::sin(th), n, tau) * ax * std::cos(th);
    };
    const double total =
        num::integrate(f, -M_PI / 2, M_PI / 2, num::QuadratureSpec{1e-10, 1e-10, 44});
    CHECK(std::fabs(total - n) < 1e-6 * n);
  }
}

TEST_CASE("p_complex_tail dual coding and structure") {
  // independent coding with the literal quotient form of b(x)
  auto tail_literal = [](double x, int n, double tau) {
    const double s = std::sqrt(x * x - 4.0 * tau);
    const double b = std::pow((x - s) / (2.0 * tau), 2);
    const double psi = -0.5 + x * x / (2.0 * (1.0 + tau)) -
                       std::pow(x - s, 2) / (8.0 * tau) - std::log((x + s) / 2.0);
    return std::sqrt(n / (2.0 * (1.0 + tau))) * b * b /
           (M_PI * std::pow(1.0 - b, 1.5) * std::sqrt(1.0 - tau * b)) *
           std::exp(-2.0 * n * psi);
  };
  for (double x : {1.8, 2.0, 2.5}) {
    const double mine = law::p_complex_tail(x, 50, 0.5);
    const double lit = tail_literal(x, 50, 0.5);
    CHECK(std::fabs(mine / lit - 1.0) < 1e-10);
  }
  // tau=0 is supported through the conjugate form
  CHECK(law::p_complex_tail(1.5, 0.0, 50) > 0.0);
  // the rate is exactly twice psi_r: log-density differences are n-linear
  const double l50 = std::log(law::p_complex_tail(2.0, 50, 0.5));
  const double l25 = std::log(law::p_complex_tail(2.0, 25, 0.5));
  const double expect = 0.5 * std::log(2.0) - 2.0 * 25.0 * law::psi_r(2.0, 0.5);
  CHECK(l50 - l25 == doctest::Approx(expect).epsilon(1e-10));
  // prefactor blows up toward the edge
  CHECK(law::p_complex_tail(1.5 + 1e-9, 10, 0.5) > law::p_complex_tail(1.6, 10, 0.5));
  CHECK_THROWS_AS(law::p_complex_tail(1.5, 0.5, 50), std::domain_error);
}

TEST_CASE("p_complex_edge value stability and asymptotes") {
  const double a = law::p_complex_edge(0.0, 100, 0.5, num::QuadratureSpec{1e-10, 1e-10, 40});
  const double b = law::p_complex_edge(0.0, 100, 0.5, num::QuadratureSpec{1e-12, 1e-12, 44});
  CHECK(std::fabs(a - b) < 1e-8);
  CHECK(a == doctest::Approx(4.1922281767459505).epsilon(1e-9));

  const int n = 100;
  const double tau = 0.5;
  auto pos = [&](double d) {
    return std::pow(n, 0.75) * (1.0 - tau) / (4.0 * M_PI * std::pow(1.0 + tau, 2)) *
           std::pow(d, -1.5) * std::exp(-2.0 * (1.0 + tau) / (1.0 - tau) * d * d);
  };
  auto neg = [&](double d) {
    return std::pow(2.0, 1.5) * std::pow(n, 0.75) / (M_PI * (1.0 + tau)) * std::sqrt(d);
  };
  CHECK(law::p_complex_edge(-5.0, n, tau) / neg(5.0) == doctest::Approx(1.0).epsilon(0.1));
  CHECK(law::p_complex_edge(3.0, n, tau) / pos(3.0) == doctest::Approx(1.0).epsilon(0.2));
}

TEST_CASE("sigma_eq") {
  CHECK(law::sigma_eq(1.0) == 0.0);
  CHECK(law::sigma_eq(0.5) == doctest::Approx(0.31814718055994531).epsilon(1e-14));
  CHECK(law::sigma_eq(0.3) == doctest::Approx(0.74897280432593599).epsilon(1e-13));
  CHECK_THROWS_AS(law::sigma_eq(0.0), std::domain_error);
}

TEST_CASE("sigma_eq_profile") {
  law::ModelParams p{0.3, 0.5, 1};
  // global maximum sits at x* = (1+tau) m with value sigma_eq(m)
  CHECK(law::sigma_eq_profile(1.5 * 0.3, p) ==
        doctest::Approx(law::sigma_eq(0.3)).epsilon(1e-12));
  CHECK(law::sigma_eq_profile(1.5 * 0.3, p) > law::sigma_eq_profile(0.40, p));
  CHECK(law::sigma_eq_profile(1.5 * 0.3, p) > law::sigma_eq_profile(0.50, p));

  // decreasing on x >= 1+tau with slope at most (m-1)/tau
  for (double x = 1.5; x <= 3.0; x += 0.1) {
    const double fd = oracle::central_diff(
        [&](double u) { return law::sigma_eq_profile(u, p); }, x + 0.05, 1e-6);
    CHECK(fd <= (0.3 - 1.0) / 0.5 + 1e-9);
  }

  // edge value coincides with the stable-exponent combination
  for (double m : {0.3, 0.6, 0.9}) {
    for (double tau : {0.2, 0.5, 0.8}) {
      law::ModelParams q{m, tau, 1};
      const double lhs = law::sigma_eq_profile(1.0 + tau, q);
      const double rhs =
          0.5 * tau - std::pow(1.0 + tau - m, 2) / (2.0 * tau) - std::log(m);
      CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
    }
  }
  CHECK_THROWS_AS(law::sigma_eq_profile(0.5, law::ModelParams{0.3, 0.0, 1}),
                  std::domain_error);
}

TEST_CASE("sigma_st and its second form") {
  CHECK(std::fabs(law::sigma_st(1.0 - 1e-5, 0.5)) < 1e-8);
  CHECK(law::sigma_st(0.5, 0.5) == doctest::Approx(-0.056852819440054691).epsilon(1e-13));
  for (double m = 0.05; m < 1.0; m += 0.05) {
    for (double tau : {0.1, 0.5, 0.9}) {
      CHECK(std::fabs(law::sigma_st(m, tau) - law::sigma_st_from_sigma_eq(m, tau)) < 1e-12);
    }
  }
  CHECK(std::fabs(law::sigma_st(0.5, law::tau0(0.5))) < 1e-10);
  CHECK_THROWS_AS(law::sigma_st(1.0, 0.5), std::domain_error);
  CHECK_THROWS_AS(law::sigma_st(0.5, 0.0), std::domain_error);
}

TEST_CASE("tau0 curve") {
  CHECK(law::tau0(0.5) == doctest::Approx(0.64717486239052246).epsilon(1e-13));
  CHECK(std::fabs(law::tau0(0.999) - 1.0) < 1e-3);
  CHECK(law::tau0(0.01) == doctest::Approx(0.13555378441086045).epsilon(1e-12));
  // m -> 0+ drives the curve to 0 through the log divergence
  double prev = law::tau0(0.01);
  for (double m : {1e-3, 1e-5, 1e-8}) {
    const double cur = law::tau0(m);
    CHECK(cur < prev);
    prev = cur;
  }
  CHECK(law::tau0(1e-8) < 0.03);
  CHECK_THROWS_AS(law::tau0(1.0), std::domain_error);
}

TEST_CASE("m_alpha endpoints, frozen value, asymptote") {
  CHECK(law::m_alpha(0.0) == 1.0);
  CHECK(law::m_alpha(1.0) == -1.0);
  CHECK(std::fabs(law::m_alpha(0.5)) < 1e-10);
  CHECK(law::m_alpha(0.25) == doctest::Approx(0.40397275329951721).epsilon(1e-9));
  // cross-check against quadrature of the integral form
  const double ma = law::m_alpha(0.25);
  const double quad = 2.0 / M_PI *
                      num::integrate([](double t) { return std::sqrt(1.0 - t * t); }, ma,
                                     1.0, num::QuadratureSpec{1e-12, 1e-12, 46});
  CHECK(quad == doctest::Approx(0.25).epsilon(1e-8));
  // small-alpha expansion within 1%
  const double approx = 1.0 - std::pow(3.0 * M_PI / (4.0 * std::sqrt(2.0)) * 1e-4, 2.0 / 3.0);
  CHECK(std::fabs(law::m_alpha(1e-4) - approx) / law::m_alpha(1e-4) < 0.01);
  // strictly decreasing
  double prev = law::m_alpha(0.0);
  for (double a = 0.05; a <= 1.0; a += 0.05) {
    const double cur = law::m_alpha(a);
    CHECK(cur < prev);
    prev = cur;
  }
  CHECK_THROWS_AS(law::m_alpha(-0.1), std::domain_error);
  CHECK_THROWS_AS(law::m_alpha(1.1), std::domain_error);
}

TEST_CASE("alpha_m endpoints, asymptote, roundtrip") {
  CHECK(law::alpha_m(1.0) == 0.0);
  CHECK(std::fabs(law::alpha_m(0.0) - 0.5) < 1e-15);
  CHECK(std::fabs(law::alpha_m(-1.0) - 1.0) < 1e-15);
  const double ratio =
      law::alpha_m(0.99) / (4.0 * std::sqrt(2.0) / (3.0 * M_PI) * std::pow(0.01, 1.5));
  CHECK(ratio > 0.98);
  CHECK(ratio < 1.02);
  CHECK(law::alpha_m(0.40397275329951721) == doctest::Approx(0.25).epsilon(1e-9));
  for (double a = 0.0; a <= 1.0; a += 0.02)
    CHECK(std::fabs(law::alpha_m(law::m_alpha(a)) - a) < 1e-10);
  for (double m = -1.0; m <= 1.0; m += 0.05)
    CHECK(std::fabs(law::m_alpha(law::alpha_m(m)) - m) < 1e-9);
}

TEST_CASE("x_of_alpha") {
  CHECK(law::x_of_alpha(0.0, 0.5) == 1.5);
  CHECK(std::fabs(law::x_of_alpha(0.5, 0.3)) < 1e-10);
  CHECK(law::x_of_alpha(0.25, 0.5) == doctest::Approx(0.60595912994927582).epsilon(1e-9));
}

TEST_CASE("sigma_st_alpha branches") {
  CHECK(law::sigma_st_alpha(0.5, 0.5, 0.0) ==
        doctest::Approx(law::sigma_st(0.5, 0.5)).epsilon(1e-13));
  CHECK(law::sigma_st_alpha(0.5, 0.5, 0.5) == law::sigma_eq(0.5));
  CHECK(law::sigma_st_alpha(0.5, 0.5, 0.8) == law::sigma_eq(0.5));
  // branch continuity at m = m_alpha
  const double mj = law::m_alpha(0.25);
  const double below = law::sigma_st_alpha(mj - 1e-11, 0.5, 0.25);
  const double above = law::sigma_st_alpha(mj + 1e-11, 0.5, 0.25);
  CHECK(std::fabs(below - above) < 1e-10);
  CHECK(law::sigma_st_alpha(mj, 0.5, 0.25) ==
        doctest::Approx(law::sigma_eq(mj)).epsilon(1e-12));
  // pointwise reduction at alpha=0 across a grid
  for (double m = 0.05; m < 1.0; m += 0.06) {
    for (double tau : {0.2, 0.6}) {
      CHECK(std::fabs(law::sigma_st_alpha(m, tau, 0.0) - law::sigma_st(m, tau)) < 1e-12);
    }
  }
}

TEST_CASE("tau0_alpha") {
  for (double m = 0.05; m < 1.0; m += 0.05)
    CHECK(law::tau0_alpha(m, 0.0) == doctest::Approx(law::tau0(m)).epsilon(1e-10));
  const double ma = law::m_alpha(0.1);
  CHECK(law::tau0_alpha(ma, 0.1) == 0.0);
  // defining property: the alpha-exponent vanishes on its level curve
  const double t0 = law::tau0_alpha(0.2, 0.1);
  CHECK(std::fabs(law::sigma_st_alpha(0.2, t0, 0.1)) < 1e-9);
  CHECK_THROWS_AS(law::tau0_alpha(0.9, 0.25), std::domain_error);
}

TEST_CASE("nu_density peak, value, and integral") {
  law::ModelParams p{0.6, 0.8, 625};
  const double peak_alpha = law::alpha_m(0.6);
  const double peak = law::nu_density(peak_alpha, p);
  CHECK(peak == doctest::Approx(29.374550093332037).epsilon(1e-9));
  CHECK(peak > law::nu_density(peak_alpha + 0.01, p));
  CHECK(peak > law::nu_density(peak_alpha - 0.01, p));

  // frozen finite-n integral for this combination (inside 1 +- 1e-3)
  const double width = std::sqrt(p.tau / (625.0 * 1.8)) * (2.0 / M_PI) * 0.8;
  const double integral = num::integrate(
      [&](double a) { return law::nu_density(a, p); }, 0.0, 1.0,
      num::QuadratureSpec{1e-9, 1e-9, 44},
      {peak_alpha, peak_alpha - 6.0 * width, peak_alpha + 6.0 * width});
  CHECK(integral == doctest::Approx(0.999129154744).epsilon(3e-6));
  CHECK(std::fabs(integral - 1.0) < 1e-3);
}

TEST_CASE("nu_density width scales as sqrt(tau/n)") {
  auto halfwidth = [](int n) {
    law::ModelParams p{0.6, 0.8, n};
    const double peak_alpha = law::alpha_m(0.6);
    const double half = 0.5 * law::nu_density(peak_alpha, p);
    auto f = [&](double a) { return law::nu_density(a, p) - half; };
    const double lo = num::find_root(f, {1e-6, peak_alpha}, 1e-12);
    const double hi = num::find_root(f, {peak_alpha, 0.999999}, 1e-12);
    return hi - lo;
  };
  const double ratio = halfwidth(625) / halfwidth(2500);
  CHECK(ratio > 1.96);
  CHECK(ratio < 2.04);
}

TEST_CASE("ln_p_st_annealed") {
  CHECK(std::fabs(law::ln_p_st_annealed({1.0 - 1e-9, 0.5, 100})) < 1e-13);
  CHECK(law::ln_p_st_annealed({0.5, 0.5, 100}) == doctest::Approx(-37.5).epsilon(1e-14));
  for (double m = 0.05; m < 1.0; m += 0.13) {
    for (double tau : {0.15, 0.45, 0.75}) {
      for (int n : {10, 100}) {
        const double lhs = law::ln_p_st_annealed({m, tau, n});
        const double rhs = n * (law::sigma_st(m, tau) - law::sigma_eq(m));
        CHECK(std::fabs(lhs - rhs) < 1e-10);
      }
    }
  }
}

TEST_CASE("sigma_gamma density") {
  // exponent vanishes at the mode gamma = (2/(3pi)) (2 delta)^{3/2}
  const double delta = 6.0, tau = 0.5;
  const double mode = 2.0 / (3.0 * M_PI) * std::pow(2.0 * delta, 1.5);
  const double pre = std::sqrt(M_PI * (1.0 + tau) / (16.0 * tau * delta));
  CHECK(law::sigma_gamma(mode, delta, tau, 10000) == doctest::Approx(pre).epsilon(1e-12));

  // integrates to one for large delta
  const double total = num::integrate_to_inf(
      [&](double g) { return law::sigma_gamma(g, delta, tau, 10000); }, 0.0,
      num::QuadratureSpec{1e-9, 1e-9, 44}, {mode, 0.5 * mode, 2.0 * mode});
  CHECK(std::fabs(total - 1.0) < 0.02);

  // gamma=0 value: prefactor times the delta^2 Gaussian factor
  const double at0 = law::sigma_gamma(0.0, 5.0, tau, 10000);
  const double expect = std::sqrt(M_PI * 1.5 / (16.0 * 0.5 * 5.0)) *
                        std::exp(-1.5 * 25.0 / (2.0 * 0.5));
  CHECK(at0 == doctest::Approx(expect).epsilon(1e-10));
  CHECK(at0 < 1e-6);

  CHECK_THROWS_AS(law::sigma_gamma(1.0, 0.0, 0.5, 100), std::domain_error);
  CHECK(law::sigma_gamma_range_ok(5.0, 10000));
  CHECK_FALSE(law::sigma_gamma_range_ok(2.0, 10000));
  CHECK_FALSE(law::sigma_gamma_range_ok(40.0, 10000));
}

TEST_CASE("classify_phase") {
  using law::PhaseRegion;
  CHECK(law::classify_phase({1.2, 0.3, 1}).region == PhaseRegion::AbsoluteStability);
  CHECK(law::classify_phase({0.5, 0.7, 1}).region == PhaseRegion::RelativeInstability);
  CHECK(law::classify_phase({0.5, 0.5, 1}).region == PhaseRegion::AbsoluteInstability);

  // stability under sub-1e-13 perturbations away from boundaries
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> um(0.05, 1.6), ut(0.02, 0.95);
  for (int i = 0; i < 2000; ++i) {
    const double m = um(rng), tau = ut(rng);
    const auto base = law::classify_phase({m, tau, 1});
    if (base.near_boundary) continue;
    if (std::fabs(m - 1.0) < 1e-10) continue;
    if (m < 1.0 && std::fabs(tau - law::tau0(m)) < 1e-10) continue;
    for (double eps : {1e-13, -1e-13}) {
      CHECK(law::classify_phase({m + eps, tau, 1}).region == base.region);
      CHECK(law::classify_phase({m, tau + eps, 1}).region == base.region);
    }
  }
  // boundary flags
  CHECK(law::classify_phase({1.0, 0.5, 1}).near_boundary);
  CHECK(law::classify_phase({0.5, law::tau0(0.5), 1}).near_boundary);
}

TEST_CASE("parameter validation") {
  CHECK_THROWS_AS((law::ModelParams{-0.5, 0.5, 1}).validate(), std::domain_error);
  CHECK_THROWS_AS((law::ModelParams{0.5, 1.0, 1}).validate(), std::domain_error);
  CHECK_THROWS_AS((law::ModelParams{0.5, 0.5, 0}).validate(), std::domain_error);
  CHECK_NOTHROW((law::ModelParams{0.5, 0.0, 1}).validate());
  CHECK(law::EllipticSupport(0.5).density() == doctest::Approx(1.0 / (0.75 * M_PI)));
  CHECK_THROWS_AS(law::EllipticSupport(1.0), std::domain_error);
}
