// SPDX-License-Identifier: Apache-2.0

#include "core/training.hpp"

#include <cmath>
#include <map>
#include <vector>

namespace arisim {

TrainingPlan make_training_plan(int n_user, int n_base, int n_cells,
                                int m_beams, int m_configs, double p_u_watt,
                                double amp, Rng& rng) {
  TrainingPlan plan;
  plan.f = std::sqrt(p_u_watt / n_user) * rng.phase_mat(n_user, m_beams);
  plan.w = (1.0 / std::sqrt(double(n_base))) * rng.phase_mat(n_base, m_beams);
  plan.gamma = amp * rng.phase_mat(n_cells, m_configs);
  return plan;
}

arma::cx_mat beam_measurement_rows(const TrainingPlan& plan) {
  const arma::uword n_user = plan.f.n_rows;
  const arma::uword n_base = plan.w.n_rows;
  const arma::uword m_beams = plan.f.n_cols;
  arma::cx_mat p(m_beams, n_user * n_base);
  for (arma::uword m = 0; m < m_beams; ++m)
    for (arma::uword u = 0; u < n_user; ++u)
      for (arma::uword b = 0; b < n_base; ++b)
        p(m, u * n_base + b) = plan.f(u, m) * std::conj(plan.w(b, m));
  return p;
}

arma::cx_cube config_responses(const TrainingPlan& plan,
                               const arma::cx_mat& s) {
  const arma::uword n = plan.gamma.n_rows;
  const arma::uword m_configs = plan.gamma.n_cols;
  arma::cx_cube responses(n, n, m_configs);
  for (arma::uword m = 0; m < m_configs; ++m)
    responses.slice(m) = ris_response(plan.gamma.col(m), s);
  return responses;
}

arma::cx_mat receive_training(const TrainingPlan& plan,
                              const arma::cx_mat& h_bi,
                              const arma::cx_mat& h_iu,
                              const arma::cx_cube& responses, double sigma2_b,
                              double sigma2_i, Rng* noise_rng) {
  const arma::uword m_beams = plan.f.n_cols;
  const arma::uword m_configs = plan.gamma.n_cols;
  const double sd_b = std::sqrt(sigma2_b);
  const double sd_i = std::sqrt(sigma2_i);

  arma::cx_mat y(m_beams, m_configs);
  for (arma::uword mi = 0; mi < m_configs; ++mi) {
    // Base-station side of this configuration, reused across beams.
    const arma::cx_mat through = h_bi * responses.slice(mi);  // n_base x n_cells
    const arma::cx_mat effective = through * h_iu;            // n_base x n_user
    for (arma::uword mb = 0; mb < m_beams; ++mb) {
      cxd v = arma::as_scalar(plan.w.col(mb).t() * effective * plan.f.col(mb));
      if (noise_rng) {
        const arma::cx_vec n_i = sd_i * noise_rng->cgauss_vec(h_bi.n_cols);
        const arma::cx_vec n_b = sd_b * noise_rng->cgauss_vec(h_bi.n_rows);
        v += arma::as_scalar(plan.w.col(mb).t() * (through * n_i + n_b));
      }
      y(mb, mi) = v;
    }
  }
  return y;
}

arma::cx_mat exact_surface_factor(const arma::cx_cube& responses,
                                  const arma::cx_mat& grid_atoms) {
  const arma::uword g = grid_atoms.n_cols;
  const arma::uword m_configs = responses.n_slices;
  check_matrix_alloc(m_configs, g * g, "exact surface factor");
  arma::cx_mat t(m_configs, g * g);
  for (arma::uword m = 0; m < m_configs; ++m) {
    // (A^T R A)(g2, g1) = a_{g2}^T R a_{g1}; its column-major vectorization
    // places pair (g1, g2) at index g1*G + g2, matching the pair layout.
    const arma::cx_mat block =
        grid_atoms.st() * responses.slice(m) * grid_atoms;
    t.row(m) = arma::vectorise(block).st();
  }
  return t;
}

arma::cx_mat exact_surface_factor_pairs(const arma::cx_cube& responses,
                                        const arma::cx_mat& grid_atoms,
                                        const arma::uvec& pairs) {
  const arma::uword g = grid_atoms.n_cols;
  const arma::uword m_configs = responses.n_slices;
  check_matrix_alloc(m_configs, pairs.n_elem, "exact surface factor subset");

  // Group requested pairs by g2 so each distinct g2 costs one matrix-vector
  // product per configuration.
  std::map<arma::uword, std::vector<arma::uword>> by_g2;
  for (arma::uword idx = 0; idx < pairs.n_elem; ++idx)
    by_g2[pairs[idx] % g].push_back(idx);

  arma::cx_mat t(m_configs, pairs.n_elem);
  for (arma::uword m = 0; m < m_configs; ++m) {
    const arma::cx_mat& r = responses.slice(m);
    for (const auto& [g2, idx_list] : by_g2) {
      const arma::cx_vec left = r.st() * grid_atoms.col(g2);  // R^T a_{g2}
      for (const arma::uword idx : idx_list) {
        const arma::uword g1 = pairs[idx] / g;
        t(m, idx) = arma::dot(left, grid_atoms.col(g1));  // a_{g2}^T R a_{g1}
      }
    }
  }
  return t;
}

}  // namespace arisim
