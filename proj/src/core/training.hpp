// SPDX-License-Identifier: Apache-2.0
//
// Uplink training: beam/combiner/surface-configuration schedules, the
// stacked measurement operator, and the received pilot matrix under the
// exact coupled surface model with amplified surface noise.

#pragma once

#include <armadillo>

#include "core/channel.hpp"
#include "core/common.hpp"

namespace arisim {

// One training schedule: every surface configuration (column of `gamma`) is
// observed once per beam pair (columns of `f` and `w`), yielding an
// m_beams x m_configs pilot matrix.
struct TrainingPlan {
  arma::cx_mat f;      // n_user  x m_beams, per-entry magnitude sqrt(p_u/n_user)
  arma::cx_mat w;      // n_base  x m_beams, per-entry magnitude 1/sqrt(n_base)
  arma::cx_mat gamma;  // n_cells x m_configs, per-entry magnitude `amp`
};

TrainingPlan make_training_plan(int n_user, int n_base, int n_cells,
                                int m_beams, int m_configs, double p_u_watt,
                                double amp, Rng& rng);

// Rows of the beam-side measurement operator: row m is f_m^T kron w_m^H, so
// that row m applied to vec(H) (H being n_user*n_base entries with index
// u*n_base + b) equals w_m^H H' f_m for the base-station-side channel H'.
arma::cx_mat beam_measurement_rows(const TrainingPlan& plan);

// Exact coupled response (1/Gamma_m - S)^(-1) for every configuration;
// slice m corresponds to column m of plan.gamma.
arma::cx_cube config_responses(const TrainingPlan& plan, const arma::cx_mat& s);

// Received pilots Y (m_beams x m_configs) under the exact model:
//   Y(mb, mi) = w_mb^H H_BI R_mi H_IU f_mb + w_mb^H (H_BI R_mi n_i + n_b)
// with fresh surface noise n_i ~ CN(0, sigma2_i I) and receiver noise
// n_b ~ CN(0, sigma2_b I) per measurement. Pass noise_rng = nullptr for the
// noise-free matrix.
arma::cx_mat receive_training(const TrainingPlan& plan,
                              const arma::cx_mat& h_bi,
                              const arma::cx_mat& h_iu,
                              const arma::cx_cube& responses, double sigma2_b,
                              double sigma2_i, Rng* noise_rng);

// Surface-side factor of the stacked sensing operator, exact model: row m,
// column (g1*G + g2) equals a_{g2}^T R_m a_{g1} for grid atoms a_g. This is
// Theta^T * (A kron A) computed without materializing the Kronecker product.
arma::cx_mat exact_surface_factor(const arma::cx_cube& responses,
                                  const arma::cx_mat& grid_atoms);

// Same, restricted to the given pair indices (pair = g1*G + g2), grouped by
// g2 internally so the cost scales with the number of distinct g2 values.
arma::cx_mat exact_surface_factor_pairs(const arma::cx_cube& responses,
                                        const arma::cx_mat& grid_atoms,
                                        const arma::uvec& pairs);

}  // namespace arisim
