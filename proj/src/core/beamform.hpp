// SPDX-License-Identifier: Apache-2.0
//
// Joint transmit/receive beamforming and surface-configuration design for
// the downlink of a coupled reflecting surface link: quadratic surrogate of
// the first-order (single-bounce) coupling model, a successive convex
// approximation (SCA) solver with an exact rank-one trust-region subproblem,
// a projected-gradient baseline, closed-form filter updates, an alternating
// joint optimizer, and exact-model link-quality evaluation.

#pragma once

#include <armadillo>
#include <cmath>
#include <vector>

#include "core/channel.hpp"
#include "core/common.hpp"

namespace arisim {

// ---------------------------------------------------------------------------
// Equivalent-channel plumbing.
//
// Uplink equivalent channels map the surface response to per-(user, base)
// antenna pair gains: row index u * n_base + b corresponds to w_b^* f_u, and
// for the exact (coupling-aware) format column i + j * n_cells multiplies
// response entry R(i, j).  The downlink counterpart has row index
// b * n_user + u and column j + i * n_cells, so that for reciprocal channels
// the two matrices hold identical entries in permuted positions.
// ---------------------------------------------------------------------------

// Reindex an uplink equivalent channel (conventional n_cells columns or
// exact n_cells^2 columns) into the downlink layout described above.
arma::cx_mat ul_to_dl_equivalent(const arma::cx_mat& g_ul, arma::uword n_user,
                                 arma::uword n_base, arma::uword n_cells);

// Ground-truth downlink equivalent channels built from the channel factors.
// Exact format: kron(H_BI, H_IU^T); conventional format: column i equals
// kron(H_BI.col(i), H_IU.row(i)^T).
arma::cx_mat downlink_equivalent_exact(const arma::cx_mat& h_bi,
                                       const arma::cx_mat& h_iu);
arma::cx_mat downlink_equivalent_conventional(const arma::cx_mat& h_bi,
                                              const arma::cx_mat& h_iu);

// Effective user-by-base matrix H_hat(gamma) under the first-order response
// model R1 = diag(gamma) + diag(gamma) S diag(gamma) (exact format), or
// R = diag(gamma) for the conventional format.  The received downlink symbol
// gain is f^H H_hat w.
arma::cx_mat effective_downlink(const arma::cx_mat& g_dl,
                                const arma::cx_vec& gamma,
                                const arma::cx_mat& scattering,
                                bool conventional, arma::uword n_user,
                                arma::uword n_base);

// ---------------------------------------------------------------------------
// Surrogate model for the surface subproblem.
//
// For fixed filters (f, w) the downlink gain under the first-order response
// model is u(gamma) = q^H gamma + gamma^T B gamma, where t = g_dl^T kron(w,
// conj(f)), T = reshape(t, n, n), q = conj(diag(T)) and B = S o T
// (elementwise).  The design objective is to minimize -|u(gamma)|^2 subject
// to the total reflection budget ||gamma||^2 = amp_budget_sq.
// ---------------------------------------------------------------------------

struct SurfaceModel {
  arma::cx_vec q;    // conjugated diagonal of reshape(t, n, n)
  arma::cx_mat b;    // scattering o reshape(t, n, n)
};

SurfaceModel make_surface_model(const arma::cx_vec& t,
                                const arma::cx_mat& scattering);

// u(gamma) = q^H gamma + gamma^T B gamma.
cxd model_gain(const SurfaceModel& model, const arma::cx_vec& gamma);

// Objective value -|u(gamma)|^2 and its conjugate (Wirtinger) gradient
// -u * (q + conj((B + B^T) gamma)).
double model_objective(const SurfaceModel& model, const arma::cx_vec& gamma);
arma::cx_vec model_gradient(const SurfaceModel& model,
                            const arma::cx_vec& gamma);

// Global minimizer of gamma^H (K I - v v^H) gamma - 2 Re(gamma^H bstar)
// subject to ||gamma||^2 = radius_sq, with K > ||v||^2 so the quadratic is
// positive definite.  Solved exactly through the rank-one resolvent
// gamma(mu) = (bstar + v (v^H bstar) / mu) / (mu + ||v||^2) and a bisection
// on mu = K + nu - ||v||^2 > 0 for the norm constraint.
arma::cx_vec solve_surrogate(const arma::cx_vec& v, const arma::cx_vec& bstar,
                             double k, double radius_sq);

struct ScaOptions {
  int max_iter = 100;
  double conv_tol = 1e-5;      // relative objective-change stop
  double armijo_shrink = 0.5;  // step shrink factor per backtrack
  double armijo_slope = 0.1;   // sufficient-decrease coefficient
  int max_backtracks = 60;
};

struct SurfaceResult {
  arma::cx_vec gamma;
  std::vector<double> objective_trace;  // -|u|^2 at start and after each step
  int iterations = 0;
  bool line_search_failed = false;
};

// Successive convex approximation: at each iterate the objective is majorized
// by the convex quadratic solved in solve_surrogate (the two agree in value
// and gradient at the expansion point), and the step is safeguarded by an
// Armijo backtracking line search.  The trace is non-increasing; a
// backtracked (eta < 1) step is treated as converged.
SurfaceResult sca_optimize(const SurfaceModel& model,
                           const arma::cx_vec& gamma0, double amp_budget_sq,
                           const ScaOptions& opt = {});

struct GradientOptions {
  int max_iter = 100;
  double conv_tol = 1e-5;
  double step_scale = 1e-2;  // step = step_scale / ||q + B^H conj(gamma0)||^2
};

// Fixed-step projected Wirtinger-gradient baseline on the same objective;
// iterates stay on the sphere ||gamma||^2 = amp_budget_sq and the best
// visited iterate is returned.
SurfaceResult gradient_optimize(const SurfaceModel& model,
                                const arma::cx_vec& gamma0,
                                double amp_budget_sq,
                                const GradientOptions& opt = {});

// ---------------------------------------------------------------------------
// Filter updates and the alternating joint design.
// ---------------------------------------------------------------------------

struct FilterPair {
  arma::cx_vec f;  // user combiner
  arma::cx_vec w;  // base precoder, ||w||^2 = p_base
};

// Dominant-singular-pair filters: f is the leading left singular vector of
// h_eff and w is sqrt(p_base) times the leading right singular vector, which
// maximizes |f^H h_eff w|^2 under ||f|| = 1, ||w||^2 = p_base.
FilterPair fw_digital(const arma::cx_mat& h_eff, double p_base);

// Phase-only (constant-modulus) alternating filters: f = exp(j arg(h w)) /
// sqrt(n_user), w = sqrt(p_base / n_base) exp(j arg(h^H f)), iterated until
// the gain stops improving.
FilterPair fw_analog(const arma::cx_mat& h_eff, double p_base,
                     int max_iter = 50, double tol = 1e-10);

enum class SurfaceSolver {
  sca,               // surrogate descent on the exact-format model
  gradient_descent,  // projected gradient baseline on the same model
  closed_form,       // conventional format: gamma = sqrt(A) conj(t) / ||t||
};

struct JointOptions {
  int outer_max_iter = 30;
  double outer_tol = 1e-4;  // relative model-objective change stop
  ScaOptions sca;
  GradientOptions gradient;
};

struct JointResult {
  arma::cx_vec f;
  arma::cx_vec w;
  arma::cx_vec gamma;
  double model_gain_sq = 0.0;  // |f^H H_hat(gamma) w|^2 of the best iterate
  int outer_iterations = 0;
  bool line_search_failed = false;
};

// Alternating joint design on a downlink equivalent channel: each outer
// iteration refreshes (f, w) = fw_digital(H_hat(gamma)) and then re-solves
// the surface subproblem warm-started at the current gamma.  The surface
// phases are initialized uniformly at random with per-cell amplitude
// sqrt(amp_budget_sq / n_cells), and the best iterate under the model
// objective is returned.  `g_dl` must be in conventional format for the
// closed-form solver and exact format otherwise.
JointResult joint_beamforming(const arma::cx_mat& g_dl,
                              const arma::cx_mat& scattering,
                              arma::uword n_user, arma::uword n_base,
                              double p_base, double amp_budget_sq,
                              SurfaceSolver solver, Rng& rng,
                              const JointOptions& opt = {});

// ---------------------------------------------------------------------------
// Exact-model evaluation.
// ---------------------------------------------------------------------------

// Downlink SNR with the exact coupled response R = (diag(gamma)^-1 - S)^-1:
//   |f^H H_IU^T R H_BI^T w|^2 /
//     (||f||^2 sigma2_user + ||f^H H_IU^T R||^2 sigma2_surface),
// accounting for surface-injected noise amplified by the reflection.
double downlink_snr_exact(const arma::cx_vec& f, const arma::cx_vec& w,
                          const arma::cx_vec& gamma, const arma::cx_mat& h_bi,
                          const arma::cx_mat& h_iu,
                          const arma::cx_mat& scattering, double sigma2_user,
                          double sigma2_surface);

inline double spectral_efficiency(double snr) { return std::log2(1.0 + snr); }

}  // namespace arisim
