// SPDX-License-Identifier: Apache-2.0
//
// Sparse recovery of the equivalent cascaded channel from training pilots:
// greedy orthogonal matching pursuit over materialized or Kronecker-
// structured sensing operators, the coupling-unaware and exact-model
// estimators, the two-stage estimator with dictionary reduction, and the
// reconstruction error metric.

#pragma once

#include <armadillo>

#include "core/dictionary.hpp"
#include "core/training.hpp"

namespace arisim {

struct OmpResult {
  arma::uvec support;   // selected column indices, in selection order
  arma::cx_vec coeff;   // least-squares coefficients for those columns
  bool used_pinv = false;  // rank-deficient refit fell back to pseudoinverse
};

// Greedy pursuit: each iteration selects the column maximizing
// |column^H residual| / ||column|| (ties toward the lowest index, already
// selected columns excluded), then refits all selected columns by least
// squares. Stops after `sparsity` picks or when the residual is negligible.
OmpResult omp(const arma::cx_vec& y, const arma::cx_mat& dict, int sparsity);

// Sensing operator of the form Xi = kron(T_s, T_b): column j*G_b + k is
// kron(t_s_j, t_b_k), acting on measurements stacked as vec(Y) with
// Y being M_b x M_s. Correlations against all columns reduce to
// T_b^H * Y * conj(T_s) and column norms factor, so Xi is never formed.
struct KronSensing {
  arma::cx_mat t_surface;  // M_s x G_s
  arma::cx_mat t_beam;     // M_b x G_b

  arma::uword n_cols() const { return t_surface.n_cols * t_beam.n_cols; }
  arma::cx_vec column(arma::uword idx) const;
};

// Identical algorithm to omp() over the implicit columns of `op`.
OmpResult omp_kron(const arma::cx_mat& y, const KronSensing& op, int sparsity);

// One estimated equivalent channel in factored form: term s couples beam
// atom beam_idx[s] with surface atom surf_idx[s] (a KR column for the
// conventional model, a pair index g1*G+g2 for the exact model).
struct ChannelEstimate {
  arma::uvec beam_idx;
  arma::uvec surf_idx;
  arma::cx_vec coeff;
  bool conventional_model = true;
  bool used_pinv = false;
  double offline_seconds = 0.0;  // dictionary / sensing-factor construction
  double online_seconds = 0.0;   // pursuit, refits, reduction scoring
};

// Coupling-unaware estimator: pursuit over kron(Theta^T KR, P A_UB).
ChannelEstimate estimate_unaware(const arma::cx_mat& y,
                                 const TrainingPlan& plan,
                                 const Dictionaries& dicts, int sparsity);

// Exact-model estimator over the full pair dictionary (no reduction).
ChannelEstimate estimate_exact(const arma::cx_mat& y, const TrainingPlan& plan,
                               const Dictionaries& dicts,
                               const arma::cx_cube& responses, int sparsity);

// Two-stage estimator: a conventional-model pursuit anchors a dictionary
// reduction keeping `keep_fraction` of the pair grid, then the exact-model
// pursuit runs on the reduced dictionary. Optional perturbation noise of
// variance `stage2_noise_var` is added to the measurements seen by the
// second stage (robustness experiments).
ChannelEstimate estimate_two_stage(const arma::cx_mat& y,
                                   const TrainingPlan& plan,
                                   const Dictionaries& dicts,
                                   const arma::cx_cube& responses,
                                   double keep_fraction, int sparsity,
                                   double stage2_noise_var = 0.0,
                                   Rng* noise_rng = nullptr);

// Predicted pilot matrix P * G_hat * Theta for an estimate, using the
// estimator's own propagation model on the surface side (intended
// configurations for the conventional model, exact responses otherwise).
arma::cx_mat predict_measurements(const ChannelEstimate& est,
                                  const TrainingPlan& plan,
                                  const Dictionaries& dicts,
                                  const arma::cx_cube* responses);

// Materialized equivalent channel: N_U*N_B x N_I (conventional) or
// N_U*N_B x N_I^2 (exact); row index u*N_B + b.
arma::cx_mat equivalent_channel(const ChannelEstimate& est,
                                const Dictionaries& dicts);

// 10*log10(||y_pred - y_clean||_F^2 / ||y_clean||_F^2), floored at -200 dB
// (also the sentinel when the reference is identically zero).
double reconstruction_nmse_db(const arma::cx_mat& y_pred,
                              const arma::cx_mat& y_clean);

}  // namespace arisim
