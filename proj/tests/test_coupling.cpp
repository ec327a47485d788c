// SPDX-License-Identifier: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "core/coupling.hpp"

using namespace arisim;

TEST_CASE("gauss-legendre rule integrates polynomials exactly") {
  arma::vec x, w;
  gauss_legendre(16, x, w);
  CHECK(arma::sum(w) == doctest::Approx(2.0).epsilon(1e-14));
  // Exact through degree 2n-1 = 31 on [-1, 1].
  for (int k : {2, 8, 20, 30}) {
    double acc = 0.0;
    for (arma::uword i = 0; i < x.n_elem; ++i)
      acc += w[i] * std::pow(x[i], k);
    CHECK(acc == doctest::Approx(2.0 / (k + 1)).epsilon(1e-12));
  }
  for (int k : {1, 7, 31}) {
    double acc = 0.0;
    for (arma::uword i = 0; i < x.n_elem; ++i)
      acc += w[i] * std::pow(x[i], k);
    CHECK(acc == doctest::Approx(0.0).epsilon(1e-12));
  }
}

TEST_CASE("adaptive integration handles smooth and sharp integrands") {
  const cxd s = integrate_adaptive([](double t) { return cxd(std::sin(t), 0); },
                                   0.0, kPi);
  CHECK(s.real() == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(s.imag() == doctest::Approx(0.0));

  const cxd e = integrate_adaptive(
      [](double t) { return std::exp(cxd(0.0, t)); }, 0.0, 1.0);
  CHECK(e.real() == doctest::Approx(std::sin(1.0)).epsilon(1e-12));
  CHECK(e.imag() == doctest::Approx(1.0 - std::cos(1.0)).epsilon(1e-12));

  // Narrow near-singular feature like 1/sqrt(d^2 + t^2) with d = 2e-3.
  const double d = 2e-3;
  const cxd narrow = integrate_adaptive(
      [&](double t) { return cxd(1.0 / std::sqrt(d * d + t * t), 0.0); }, 0.0,
      1.0);
  const double exact = std::asinh(1.0 / d);
  CHECK(narrow.real() == doctest::Approx(exact).epsilon(1e-9));
}

// Classic induced-EMF values for half-wave dipoles (current referred to the
// maximum): self impedance ~ 73.1 + j42 ohm, side-by-side mutual at
// d = 0.5 wavelengths ~ -12.5 - j29.9 ohm and at d = 1.0 ~ 4.0 + j17.7 ohm.
TEST_CASE("half-wave dipole impedance oracle") {
  const double lam = 1.0;
  const cxd zs = wire_self_impedance(0.5 * lam, lam / 500.0, lam);
  CHECK(zs.real() == doctest::Approx(73.13).epsilon(0.01));
  CHECK(zs.imag() > 40.5);
  CHECK(zs.imag() < 43.5);

  const cxd zm_half = wire_mutual_impedance(0.5 * lam, 0.5 * lam, lam);
  CHECK(zm_half.real() == doctest::Approx(-12.53).epsilon(0.02));
  CHECK(zm_half.imag() == doctest::Approx(-29.93).epsilon(0.02));

  const cxd zm_one = wire_mutual_impedance(1.0 * lam, 0.5 * lam, lam);
  CHECK(zm_one.real() == doctest::Approx(4.01).epsilon(0.05));
  CHECK(zm_one.imag() == doctest::Approx(17.74).epsilon(0.05));
}

TEST_CASE("short wire radiation resistance matches the small-dipole law") {
  // Re(Z_self) for an electrically short wire approaches 20*pi^2*(l/lam)^2.
  const double lam = 1.0;
  const double l = lam / 32.0;
  const cxd zs = wire_self_impedance(l, lam / 500.0, lam);
  const double expected = 20.0 * kPi * kPi * (l / lam) * (l / lam);
  CHECK(zs.real() == doctest::Approx(expected).epsilon(0.02));
  CHECK(zs.imag() < 0.0);  // strongly capacitive
}

TEST_CASE("impedance is scale invariant in wavelength units") {
  const cxd a = wire_mutual_impedance(0.05, 1.0 / 32.0, 1.0);
  const cxd b = wire_mutual_impedance(0.05 * 0.01, 0.01 / 32.0, 0.01);
  CHECK(std::abs(a - b) < 1e-8 * std::abs(a) + 1e-12);
}

TEST_CASE("thin wire scattering matrix structure") {
  WireCouplingParams p;
  p.wavelength = 1.0;
  p.total_length = 1.0 / 32.0;
  const int nh = 4, nv = 2;

  const arma::cx_mat s = thin_wire_scattering(nh, nv, 0.05, p);
  CHECK(s.n_rows == arma::uword(nh * nv));
  CHECK(arma::norm(arma::cx_mat(s - s.st()), "inf") < 1e-12);

  // On a square array, swapping the h and v axes is a geometric symmetry, so
  // with element index h * nv + v the couplings of element 0 to its (1,0)
  // and (0,1) neighbours must agree.
  const arma::cx_mat sq = thin_wire_scattering(3, 3, 0.05, p);
  const cxd step_h = sq(0, 1 * 3 + 0);
  const cxd step_v = sq(0, 0 * 3 + 1);
  CHECK(std::abs(step_h - step_v) < 1e-10);
  const cxd diag_step = sq(0, 1 * 3 + 1);
  CHECK(std::abs(diag_step) < std::abs(step_h));  // farther -> weaker

  // Coupling strength falls off quickly with spacing (probed values from the
  // induced-EMF integral at lam/32 wires: ~0.075 at lam/20, ~1e-3 at lam/2).
  const arma::cx_mat s20 = thin_wire_scattering(nh, nv, 0.05, p);
  const arma::cx_mat s10 = thin_wire_scattering(nh, nv, 0.10, p);
  const arma::cx_mat s2 = thin_wire_scattering(nh, nv, 0.50, p);
  CHECK(std::abs(s20(0, nv)) == doctest::Approx(0.075).epsilon(0.1));
  CHECK(std::abs(s10(0, nv)) < 0.02);
  CHECK(std::abs(s2(0, nv)) < 2e-3);
  CHECK(spectral_radius(s2) < 5e-3);

  // Matched elements: with mutuals removed S would vanish identically.
  WireCouplingParams pm = p;
  const arma::cx_mat s_strong = thin_wire_scattering(nh, nv, 0.02, pm);
  CHECK(spectral_radius(s_strong) > 0.5);  // near-dense coupling at lam/50
}

TEST_CASE("synthetic scattering is symmetric with unit spectral radius") {
  Rng rng(5);
  const arma::cx_mat s = synthetic_scattering(6, rng);
  CHECK(arma::norm(arma::cx_mat(s - s.st()), "inf") < 1e-12);
  CHECK(spectral_radius(s) == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("spectral radius of a diagonal matrix") {
  arma::cx_mat d(3, 3, arma::fill::zeros);
  d(0, 0) = cxd(0.1, 0.0);
  d(1, 1) = cxd(0.0, -0.7);
  d(2, 2) = cxd(0.3, 0.4);
  CHECK(spectral_radius(d) == doctest::Approx(0.7).epsilon(1e-12));
}
