// SPDX-License-Identifier: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "core/beamform.hpp"
#include "core/coupling.hpp"

using namespace arisim;

namespace {

UpaGeometry make_geom(int nh, int nv, double spacing) {
  UpaGeometry g;
  g.nh = nh;
  g.nv = nv;
  g.spacing = spacing;
  return g;
}

// Surrogate quadratic value gamma^H (K I - v v^H) gamma - 2 Re(gamma^H b*).
double quad_value(const arma::cx_vec& v, const arma::cx_vec& bstar, double k,
                  const arma::cx_vec& gamma) {
  const cxd vg = arma::cdot(v, gamma);
  return k * std::pow(arma::norm(gamma), 2) - std::norm(vg) -
         2.0 * std::real(arma::cdot(gamma, bstar));
}

// Projected-gradient oracle for the same sphere-constrained quadratic.
arma::cx_vec quad_pgd(const arma::cx_vec& v, const arma::cx_vec& bstar,
                      double k, double radius_sq, const arma::cx_vec& start,
                      int iters) {
  const double radius = std::sqrt(radius_sq);
  const double tau = 1.0 / (4.0 * k + 1.0);
  arma::cx_vec g = radius * start / arma::norm(start);
  for (int it = 0; it < iters; ++it) {
    const arma::cx_vec grad = k * g - v * arma::cdot(v, g) - bstar;
    g -= tau * grad;
    g *= radius / arma::norm(g);
  }
  return g;
}

}  // namespace

TEST_CASE("uplink and downlink equivalent channels are consistent") {
  Rng rng(11);
  const arma::uword n_cells = 4, n_base = 3, n_user = 2;
  const arma::cx_mat h_bi = rng.cgauss_mat(n_base, n_cells);
  const arma::cx_mat h_iu = rng.cgauss_mat(n_cells, n_user);

  // Exact format: the downlink matrix is a pure reindexing of the uplink one.
  const arma::cx_mat g_ul = arma::kron(h_iu.st(), h_bi);
  const arma::cx_mat g_dl = ul_to_dl_equivalent(g_ul, n_user, n_base, n_cells);
  const arma::cx_mat g_dl_ref = downlink_equivalent_exact(h_bi, h_iu);
  REQUIRE(g_dl.n_rows == g_dl_ref.n_rows);
  REQUIRE(g_dl.n_cols == g_dl_ref.n_cols);
  CHECK(arma::norm(g_dl - g_dl_ref, "fro") <=
        1e-14 * arma::norm(g_dl_ref, "fro"));

  // Conventional format.
  arma::cx_mat g_cv_ul(n_user * n_base, n_cells);
  for (arma::uword i = 0; i < n_cells; ++i)
    g_cv_ul.col(i) = arma::kron(h_iu.row(i).st(), h_bi.col(i));
  const arma::cx_mat g_cv_dl =
      ul_to_dl_equivalent(g_cv_ul, n_user, n_base, n_cells);
  const arma::cx_mat g_cv_ref = downlink_equivalent_conventional(h_bi, h_iu);
  CHECK(arma::norm(g_cv_dl - g_cv_ref, "fro") <=
        1e-14 * arma::norm(g_cv_ref, "fro"));

  // Both formats reproduce the bilinear link gains for a coupled response.
  const arma::cx_mat s = 0.3 * synthetic_scattering(int(n_cells), rng);
  const arma::cx_vec gamma = 2.0 * rng.phase_vec(n_cells);
  const arma::cx_mat r = ris_response(gamma, s);
  const arma::cx_vec f = rng.cgauss_vec(n_user);
  const arma::cx_vec w = rng.cgauss_vec(n_base);

  const cxd up_direct =
      arma::as_scalar(w.t() * h_bi * r * h_iu * f);
  const arma::cx_mat m_ul =
      arma::reshape(g_ul * arma::vectorise(r), n_base, n_user);
  const cxd up_vec = arma::as_scalar(w.t() * m_ul * f);
  CHECK(std::abs(up_direct - up_vec) <= 1e-12 * std::abs(up_direct));

  const cxd dn_direct =
      arma::as_scalar(f.t() * h_iu.st() * r * h_bi.st() * w);
  const arma::cx_mat m_dl =
      arma::reshape(g_dl * arma::vectorise(r), n_user, n_base);
  const cxd dn_vec = arma::as_scalar(f.t() * m_dl * w);
  CHECK(std::abs(dn_direct - dn_vec) <= 1e-12 * std::abs(dn_direct));

  CHECK_THROWS_AS(ul_to_dl_equivalent(g_ul, n_user + 1, n_base, n_cells),
                  config_error);
}

TEST_CASE("effective downlink matrix matches the first-order response") {
  Rng rng(12);
  const arma::uword n_cells = 5, n_base = 3, n_user = 2;
  const arma::cx_mat g_dl = rng.cgauss_mat(n_user * n_base, n_cells * n_cells);
  const arma::cx_mat s = 0.4 * synthetic_scattering(int(n_cells), rng);
  const arma::cx_vec gamma = 1.5 * rng.phase_vec(n_cells);

  const arma::cx_mat r1 = neumann_response(gamma, s, 1);
  const arma::cx_mat want =
      arma::reshape(g_dl * arma::vectorise(r1), n_user, n_base);
  const arma::cx_mat got =
      effective_downlink(g_dl, gamma, s, false, n_user, n_base);
  CHECK(arma::norm(got - want, "fro") <= 1e-12 * arma::norm(want, "fro"));

  const arma::cx_mat g_cv = rng.cgauss_mat(n_user * n_base, n_cells);
  const arma::cx_mat want_cv =
      arma::reshape(g_cv * gamma, n_user, n_base);
  const arma::cx_mat got_cv =
      effective_downlink(g_cv, gamma, s, true, n_user, n_base);
  CHECK(arma::norm(got_cv - want_cv, "fro") <=
        1e-13 * arma::norm(want_cv, "fro"));
}

TEST_CASE("surface model reproduces the first-order link gain") {
  Rng rng(13);
  const arma::uword n = 6;
  // Non-symmetric scattering pins the elementwise orientation of B.
  const arma::cx_mat s = rng.cgauss_mat(n, n);
  const arma::cx_vec t = rng.cgauss_vec(n * n);
  const arma::cx_vec gamma = rng.cgauss_vec(n);

  const SurfaceModel model = make_surface_model(t, s);
  const cxd u = model_gain(model, gamma);
  const arma::cx_mat r1 = neumann_response(gamma, s, 1);
  const cxd want = arma::as_scalar(t.st() * arma::vectorise(r1));
  CHECK(std::abs(u - want) <= 1e-12 * std::abs(want));
  CHECK(model_objective(model, gamma) ==
        doctest::Approx(-std::norm(u)).epsilon(1e-12));

  CHECK_THROWS_AS(make_surface_model(rng.cgauss_vec(n * n - 1), s),
                  config_error);
}

TEST_CASE("model gradient agrees with finite differences") {
  Rng rng(14);
  const arma::uword n = 5;
  const arma::cx_mat s = 0.5 * synthetic_scattering(int(n), rng);
  const SurfaceModel model = make_surface_model(rng.cgauss_vec(n * n), s);
  const arma::cx_vec gamma = rng.cgauss_vec(n);
  const arma::cx_vec grad = model_gradient(model, gamma);

  const double h = 1e-5;
  for (int trial = 0; trial < 5; ++trial) {
    arma::cx_vec dir = rng.cgauss_vec(n);
    dir /= arma::norm(dir);
    const double fp = model_objective(model, gamma + h * dir);
    const double fm = model_objective(model, gamma - h * dir);
    const double fd = (fp - fm) / (2.0 * h);
    const double analytic = 2.0 * std::real(arma::cdot(grad, dir));
    CHECK(fd == doctest::Approx(analytic)
                    .epsilon(1e-5)
                    .scale(std::abs(analytic) + 1.0));
  }
}

TEST_CASE("surrogate matches value and gradient at the expansion point") {
  Rng rng(15);
  const arma::uword n = 6;
  const arma::cx_mat s = 0.5 * synthetic_scattering(int(n), rng);
  const SurfaceModel model = make_surface_model(rng.cgauss_vec(n * n), s);
  const arma::cx_vec gamma = rng.cgauss_vec(n);

  const cxd u = model_gain(model, gamma);
  const arma::cx_vec v = model.q + model.b.t() * arma::conj(gamma);
  CHECK(std::abs(arma::cdot(v, gamma) - u) <= 1e-12 * std::abs(u));

  const double k = std::pow(arma::norm(v), 2) * (1.0 + 1e-6);
  const arma::cx_vec bstar =
      k * gamma + u * arma::conj(model.b * gamma);
  const arma::cx_vec sur_grad =
      k * gamma - v * arma::cdot(v, gamma) - bstar;
  const arma::cx_vec true_grad = model_gradient(model, gamma);
  CHECK(arma::norm(sur_grad - true_grad) <= 1e-8 * arma::norm(true_grad));
}

TEST_CASE("sphere-constrained quadratic solver is optimal") {
  Rng rng(16);
  for (int trial = 0; trial < 10; ++trial) {
    const arma::uword n = 6;
    const arma::cx_vec v = rng.cgauss_vec(n);
    const arma::cx_vec bstar = rng.cgauss_vec(n);
    const double vv = std::pow(arma::norm(v), 2);
    const double k = vv * (trial % 2 == 0 ? 1.0 + 1e-6 : 2.0);
    const double radius_sq = 0.5 + rng.uniform() * 4.0;

    const arma::cx_vec g = solve_surrogate(v, bstar, k, radius_sq);
    const double norm_sq = std::pow(arma::norm(g), 2);
    CHECK(norm_sq == doctest::Approx(radius_sq).epsilon(1e-8));

    // Stationarity: the gradient is a real multiple of gamma.
    const arma::cx_vec grad = k * g - v * arma::cdot(v, g) - bstar;
    const double nu = -std::real(arma::cdot(g, grad)) / norm_sq;
    const double scale = arma::norm(bstar) + k * std::sqrt(radius_sq);
    CHECK(arma::norm(grad + nu * g) <= 1e-8 * scale);
    // Global-optimality condition for the sphere-constrained problem.
    CHECK(k + nu >= vv - 1e-9 * scale);

    // A long projected-gradient run cannot do better.
    double best_pgd = arma::datum::inf;
    for (int start = 0; start < 3; ++start) {
      const arma::cx_vec trial_g = quad_pgd(
          v, bstar, k, radius_sq, rng.cgauss_vec(n), 5000);
      best_pgd = std::min(best_pgd, quad_value(v, bstar, k, trial_g));
    }
    const double obj_scale =
        arma::norm(bstar) * std::sqrt(radius_sq) + k * radius_sq;
    CHECK(quad_value(v, bstar, k, g) <= best_pgd + 1e-8 * obj_scale);
  }
}

TEST_CASE("quadratic solver handles an orthogonal linear term") {
  Rng rng(17);
  const arma::uword n = 5;
  const arma::cx_vec v = rng.cgauss_vec(n);
  const arma::cx_vec vhat = v / arma::norm(v);
  arma::cx_vec bstar = rng.cgauss_vec(n);
  bstar -= vhat * arma::cdot(vhat, bstar);  // exactly orthogonal to v
  const double vv = std::pow(arma::norm(v), 2);
  const double k = vv * (1.0 + 1e-6);
  // Large radius forces the null-space component of the solution.
  const double radius_sq =
      4.0 * std::pow(arma::norm(bstar), 2) / (vv * vv);

  const arma::cx_vec g = solve_surrogate(v, bstar, k, radius_sq);
  CHECK(std::pow(arma::norm(g), 2) ==
        doctest::Approx(radius_sq).epsilon(1e-8));
  // At the hard-case multiplier nu = ||v||^2 - k the KKT system is exact.
  const arma::cx_vec resid = vv * g - v * arma::cdot(v, g) - bstar;
  CHECK(arma::norm(resid) <= 1e-10 * arma::norm(bstar));

  double best_pgd = arma::datum::inf;
  for (int start = 0; start < 3; ++start) {
    const arma::cx_vec trial_g =
        quad_pgd(v, bstar, k, radius_sq, rng.cgauss_vec(n), 20000);
    best_pgd = std::min(best_pgd, quad_value(v, bstar, k, trial_g));
  }
  const double obj_scale =
      arma::norm(bstar) * std::sqrt(radius_sq) + k * radius_sq;
  CHECK(quad_value(v, bstar, k, g) <= best_pgd + 1e-7 * obj_scale);
}

TEST_CASE("surrogate descent is monotone and feasible") {
  Rng rng(18);
  const arma::uword n = 6;
  const double amp_budget_sq = 4.0 * double(n);
  const arma::cx_mat s = 0.5 * synthetic_scattering(int(n), rng);
  const SurfaceModel model = make_surface_model(rng.cgauss_vec(n * n), s);
  const arma::cx_vec gamma0 =
      std::sqrt(amp_budget_sq / double(n)) * rng.phase_vec(n);

  const SurfaceResult res = sca_optimize(model, gamma0, amp_budget_sq);
  REQUIRE(res.objective_trace.size() == size_t(res.iterations + 1));
  CHECK_FALSE(res.line_search_failed);
  for (size_t i = 1; i < res.objective_trace.size(); ++i)
    CHECK(res.objective_trace[i] <= res.objective_trace[i - 1] + 1e-300);
  CHECK(std::pow(arma::norm(res.gamma), 2) <=
        amp_budget_sq * (1.0 + 1e-9));
  CHECK(res.objective_trace.back() <= res.objective_trace.front());
  CHECK(model_objective(model, res.gamma) ==
        doctest::Approx(res.objective_trace.back()).epsilon(1e-12));
}

TEST_CASE("multistart surrogate descent agrees on a small surface") {
  Rng rng(19);
  const arma::uword n = 4;
  const double amp_budget_sq = 4.0 * double(n);
  const arma::cx_mat s = 0.5 * synthetic_scattering(int(n), rng);
  const SurfaceModel model = make_surface_model(rng.cgauss_vec(n * n), s);

  std::vector<double> gains_sca, gains_gd;
  for (int start = 0; start < 20; ++start) {
    const arma::cx_vec gamma0 =
        std::sqrt(amp_budget_sq / double(n)) * rng.phase_vec(n);
    const SurfaceResult res = sca_optimize(model, gamma0, amp_budget_sq);
    gains_sca.push_back(-res.objective_trace.back());
    const SurfaceResult gd = gradient_optimize(model, gamma0, amp_budget_sq);
    gains_gd.push_back(-gd.objective_trace.back());
  }
  const double best = *std::max_element(gains_sca.begin(), gains_sca.end());
  REQUIRE(best > 0.0);
  int close = 0;
  for (double g : gains_sca)
    if (g >= best * (1.0 - 1e-3)) ++close;
  CHECK(close >= 15);

  // The fixed-step projected-gradient baseline never beats the best
  // surrogate-descent restart.
  const double best_gd = *std::max_element(gains_gd.begin(), gains_gd.end());
  CHECK(best >= best_gd * (1.0 - 1e-6));
}

TEST_CASE("projected gradient baseline is feasible and improves") {
  Rng rng(20);
  const arma::uword n = 5;
  const double amp_budget_sq = 4.0 * double(n);
  const arma::cx_mat s = 0.5 * synthetic_scattering(int(n), rng);
  const SurfaceModel model = make_surface_model(rng.cgauss_vec(n * n), s);
  const arma::cx_vec gamma0 =
      std::sqrt(amp_budget_sq / double(n)) * rng.phase_vec(n);

  const SurfaceResult res = gradient_optimize(model, gamma0, amp_budget_sq);
  CHECK(std::pow(arma::norm(res.gamma), 2) ==
        doctest::Approx(amp_budget_sq).epsilon(1e-9));
  // Best-iterate objective is at least as good as the start.
  CHECK(model_objective(model, res.gamma) <= res.objective_trace.front());
}

TEST_CASE("digital filters attain the dominant singular pair") {
  Rng rng(21);
  const arma::cx_mat h = rng.cgauss_mat(3, 5);
  const double p_base = 2.5;
  const FilterPair fw = fw_digital(h, p_base);

  CHECK(arma::norm(fw.f) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(std::pow(arma::norm(fw.w), 2) ==
        doctest::Approx(p_base).epsilon(1e-12));

  const arma::vec sv = arma::svd(h);
  const double gain = std::norm(arma::cdot(fw.f, h * fw.w));
  CHECK(gain == doctest::Approx(p_base * sv[0] * sv[0]).epsilon(1e-10));

  for (int trial = 0; trial < 20; ++trial) {
    arma::cx_vec f = rng.cgauss_vec(3);
    f /= arma::norm(f);
    arma::cx_vec w = rng.cgauss_vec(5);
    w *= std::sqrt(p_base) / arma::norm(w);
    CHECK(std::norm(arma::cdot(f, h * w)) <= gain * (1.0 + 1e-12));
  }
}

TEST_CASE("analog filters are constant modulus and phase matched") {
  Rng rng(22);
  const arma::uword n_user = 2, n_base = 4;
  const arma::cx_mat h = rng.cgauss_mat(n_user, n_base);
  const double p_base = 1.7;
  const FilterPair fw = fw_analog(h, p_base);

  for (arma::uword i = 0; i < n_user; ++i)
    CHECK(std::abs(fw.f[i]) ==
          doctest::Approx(1.0 / std::sqrt(double(n_user))).epsilon(1e-12));
  for (arma::uword i = 0; i < n_base; ++i)
    CHECK(std::abs(fw.w[i]) ==
          doctest::Approx(std::sqrt(p_base / double(n_base))).epsilon(1e-12));

  // Scalar link: the analog pair is exactly phase matched.
  const arma::cx_mat h1 = rng.cgauss_mat(1, 1);
  const FilterPair fw1 = fw_analog(h1, p_base);
  CHECK(std::norm(arma::cdot(fw1.f, h1 * fw1.w)) ==
        doctest::Approx(p_base * std::norm(h1(0, 0))).epsilon(1e-12));
}

TEST_CASE("joint design is feasible and beats a random configuration") {
  const double lam = 0.01;
  const UpaGeometry surface = make_geom(2, 2, lam / 10.0);
  const UpaGeometry base = make_geom(2, 1, lam / 2.0);
  const UpaGeometry user = make_geom(2, 1, lam / 2.0);

  LinkConfig link;
  link.surface = surface;
  link.base = base;
  link.user = user;
  link.wavelength = lam;

  WireCouplingParams wire;
  wire.wavelength = lam;
  wire.total_length = lam / 32.0;
  const arma::cx_mat s =
      thin_wire_scattering(surface.nh, surface.nv, surface.spacing, wire);

  const double p_base = dbm_to_watt(10.0);
  const double amp = 2.0;
  const double amp_budget_sq = amp * amp * double(surface.size());
  const double sigma2 = dbm_to_watt(-95.0);

  for (int trial = 0; trial < 3; ++trial) {
    Rng rng(700 + trial);
    const TwoHopChannel ch = draw_two_hop(link, rng);
    const arma::cx_mat g_dl = downlink_equivalent_exact(ch.h_bi, ch.h_iu);

    Rng opt_rng(100 + trial);
    const JointResult joint = joint_beamforming(
        g_dl, s, user.size(), base.size(), p_base, amp_budget_sq,
        SurfaceSolver::sca, opt_rng);

    CHECK(arma::norm(joint.f) == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(std::pow(arma::norm(joint.w), 2) ==
          doctest::Approx(p_base).epsilon(1e-9));
    CHECK(std::pow(arma::norm(joint.gamma), 2) <=
          amp_budget_sq * (1.0 + 1e-9));
    CHECK(joint.outer_iterations >= 1);

    const double se_joint = spectral_efficiency(downlink_snr_exact(
        joint.f, joint.w, joint.gamma, ch.h_bi, ch.h_iu, s, sigma2, sigma2));

    // Random surface phases with matched filters on the resulting channel.
    double se_rand = 0.0;
    Rng rand_rng(300 + trial);
    const arma::cx_vec gamma_rand =
        std::sqrt(amp_budget_sq / double(surface.size())) *
        rand_rng.phase_vec(surface.size());
    const arma::cx_mat h_rand = effective_downlink(
        g_dl, gamma_rand, s, false, user.size(), base.size());
    const FilterPair fw_rand = fw_digital(h_rand, p_base);
    se_rand = spectral_efficiency(downlink_snr_exact(
        fw_rand.f, fw_rand.w, gamma_rand, ch.h_bi, ch.h_iu, s, sigma2,
        sigma2));

    CHECK(se_joint > se_rand);
  }
}

TEST_CASE("exact link quality matches a scalar reference") {
  arma::cx_mat h_bi(1, 1), h_iu(1, 1), s(1, 1);
  h_bi(0, 0) = cxd(0.3, -0.4);
  h_iu(0, 0) = cxd(-0.2, 0.7);
  s(0, 0) = cxd(0.1, 0.05);
  arma::cx_vec gamma(1), f(1), w(1);
  gamma[0] = cxd(1.2, 0.9);
  f[0] = std::polar(1.0, 0.3);
  w[0] = std::polar(std::sqrt(2.0), -1.1);
  const double sigma2_user = 1e-3, sigma2_surface = 4e-4;

  const cxd r = gamma[0] / (1.0 - gamma[0] * s(0, 0));
  const double signal = std::norm(f[0]) * std::norm(w[0]) *
                        std::norm(h_iu(0, 0) * r * h_bi(0, 0));
  const double noise =
      std::norm(f[0]) * sigma2_user +
      std::norm(f[0]) * std::norm(h_iu(0, 0) * r) * sigma2_surface;
  const double want = signal / noise;

  const double got = downlink_snr_exact(f, w, gamma, h_bi, h_iu, s,
                                        sigma2_user, sigma2_surface);
  CHECK(got == doctest::Approx(want).epsilon(1e-12));

  CHECK(spectral_efficiency(0.0) == doctest::Approx(0.0));
  CHECK(spectral_efficiency(1.0) == doctest::Approx(1.0));
  CHECK(spectral_efficiency(3.0) == doctest::Approx(2.0));
}
