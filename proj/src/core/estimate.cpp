// SPDX-License-Identifier: Apache-2.0

#include "core/estimate.hpp"

#include <chrono>
#include <cmath>
#include <vector>

namespace arisim {

namespace {

using clock_type = std::chrono::steady_clock;

double seconds_since(clock_type::time_point start) {
  return std::chrono::duration<double>(clock_type::now() - start).count();
}

// Least-squares refit on the selected columns; falls back to the
// pseudoinverse when the subset is rank deficient.
arma::cx_vec refit(const arma::cx_mat& a, const arma::cx_vec& y,
                   bool* used_pinv) {
  if (arma::rank(a) < a.n_cols) {
    *used_pinv = true;
    return arma::pinv(a) * y;
  }
  arma::cx_vec coef;
  if (!arma::solve(coef, a, y)) {
    *used_pinv = true;
    return arma::pinv(a) * y;
  }
  return coef;
}

// Selection + refit loop shared by both operator representations.
// `score` fills normalized correlation magnitudes for the current residual;
// `column` materializes one column.
template <typename ScoreFn, typename ColumnFn>
OmpResult omp_loop(const arma::cx_vec& y, arma::uword n_cols, int sparsity,
                   ScoreFn&& score, ColumnFn&& column) {
  OmpResult result;
  const arma::uword k_max =
      std::min<arma::uword>(std::max(sparsity, 0), n_cols);
  const double y_norm = arma::norm(y);
  arma::cx_vec residual = y;
  arma::cx_mat selected(y.n_elem, 0);
  std::vector<arma::uword> support;
  arma::vec scores(n_cols);

  for (arma::uword it = 0; it < k_max; ++it) {
    if (arma::norm(residual) <= 1e-12 * y_norm && !support.empty()) break;
    score(residual, scores);
    for (const arma::uword s : support) scores[s] = -1.0;  // exclude picked
    arma::uword best = 0;
    double best_score = -1.0;
    for (arma::uword c = 0; c < n_cols; ++c) {
      if (scores[c] > best_score) {  // strict: ties keep the lowest index
        best_score = scores[c];
        best = c;
      }
    }
    support.push_back(best);
    selected.insert_cols(selected.n_cols, column(best));
    result.coeff = refit(selected, y, &result.used_pinv);
    residual = y - selected * result.coeff;
  }

  result.support = arma::uvec(support);
  return result;
}

}  // namespace

OmpResult omp(const arma::cx_vec& y, const arma::cx_mat& dict, int sparsity) {
  arma::vec col_norms(dict.n_cols);
  for (arma::uword c = 0; c < dict.n_cols; ++c)
    col_norms[c] = arma::norm(dict.col(c));
  return omp_loop(
      y, dict.n_cols, sparsity,
      [&](const arma::cx_vec& r, arma::vec& scores) {
        const arma::cx_vec corr = dict.t() * r;
        for (arma::uword c = 0; c < dict.n_cols; ++c)
          scores[c] =
              (col_norms[c] > 0.0) ? std::abs(corr[c]) / col_norms[c] : 0.0;
      },
      [&](arma::uword c) { return arma::cx_vec(dict.col(c)); });
}

arma::cx_vec KronSensing::column(arma::uword idx) const {
  const arma::uword g_b = t_beam.n_cols;
  return arma::kron(t_surface.col(idx / g_b), t_beam.col(idx % g_b));
}

OmpResult omp_kron(const arma::cx_mat& y, const KronSensing& op,
                   int sparsity) {
  const arma::uword m_b = op.t_beam.n_rows;
  const arma::uword m_s = op.t_surface.n_rows;
  const arma::uword g_b = op.t_beam.n_cols;
  const arma::uword g_s = op.t_surface.n_cols;
  arma::vec nb(g_b), ns(g_s);
  for (arma::uword c = 0; c < g_b; ++c) nb[c] = arma::norm(op.t_beam.col(c));
  for (arma::uword c = 0; c < g_s; ++c)
    ns[c] = arma::norm(op.t_surface.col(c));

  return omp_loop(
      arma::vectorise(y), op.n_cols(), sparsity,
      [&](const arma::cx_vec& r, arma::vec& scores) {
        const arma::cx_mat rm = arma::reshape(r, m_b, m_s);
        // corr(k, j) = column(j*G_b+k)^H r = t_b_k^H * R * conj(t_s_j)
        const arma::cx_mat corr = op.t_beam.t() * rm * arma::conj(op.t_surface);
        for (arma::uword j = 0; j < g_s; ++j)
          for (arma::uword k = 0; k < g_b; ++k) {
            const double denom = ns[j] * nb[k];
            scores[j * g_b + k] =
                (denom > 0.0) ? std::abs(corr(k, j)) / denom : 0.0;
          }
      },
      [&](arma::uword c) { return op.column(c); });
}

namespace {

// Beam-side sensing factor P * A_UB for a plan.
arma::cx_mat beam_factor(const TrainingPlan& plan, const Dictionaries& dicts) {
  return beam_measurement_rows(plan) * dicts.beam_atoms;
}

void split_kron_support(const OmpResult& res, arma::uword g_b,
                        ChannelEstimate* est) {
  est->beam_idx.set_size(res.support.n_elem);
  est->surf_idx.set_size(res.support.n_elem);
  for (arma::uword s = 0; s < res.support.n_elem; ++s) {
    est->surf_idx[s] = res.support[s] / g_b;
    est->beam_idx[s] = res.support[s] % g_b;
  }
  est->coeff = res.coeff;
  est->used_pinv = res.used_pinv;
}

}  // namespace

ChannelEstimate estimate_unaware(const arma::cx_mat& y,
                                 const TrainingPlan& plan,
                                 const Dictionaries& dicts, int sparsity) {
  ChannelEstimate est;
  est.conventional_model = true;

  auto t0 = clock_type::now();
  KronSensing op;
  op.t_beam = beam_factor(plan, dicts);
  op.t_surface = plan.gamma.st() * dicts.kr.atoms;
  est.offline_seconds = seconds_since(t0);

  t0 = clock_type::now();
  const OmpResult res = omp_kron(y, op, sparsity);
  est.online_seconds = seconds_since(t0);
  split_kron_support(res, op.t_beam.n_cols, &est);
  return est;
}

ChannelEstimate estimate_exact(const arma::cx_mat& y, const TrainingPlan& plan,
                               const Dictionaries& dicts,
                               const arma::cx_cube& responses, int sparsity) {
  ChannelEstimate est;
  est.conventional_model = false;

  auto t0 = clock_type::now();
  KronSensing op;
  op.t_beam = beam_factor(plan, dicts);
  op.t_surface = exact_surface_factor(responses, dicts.surface.atoms);
  est.offline_seconds = seconds_since(t0);

  t0 = clock_type::now();
  const OmpResult res = omp_kron(y, op, sparsity);
  est.online_seconds = seconds_since(t0);
  split_kron_support(res, op.t_beam.n_cols, &est);
  return est;
}

ChannelEstimate estimate_two_stage(const arma::cx_mat& y,
                                   const TrainingPlan& plan,
                                   const Dictionaries& dicts,
                                   const arma::cx_cube& responses,
                                   double keep_fraction, int sparsity,
                                   double stage2_noise_var, Rng* noise_rng) {
  ChannelEstimate est;
  est.conventional_model = false;

  // Stage 1: conventional-model anchor estimate.
  auto t0 = clock_type::now();
  KronSensing op1;
  op1.t_beam = beam_factor(plan, dicts);
  op1.t_surface = plan.gamma.st() * dicts.kr.atoms;
  est.offline_seconds = seconds_since(t0);

  t0 = clock_type::now();
  const OmpResult stage1 = omp_kron(y, op1, sparsity);
  const arma::uword g_b = op1.t_beam.n_cols;

  // Anchor columns: surface sides of the stage-1 atoms (duplicates kept).
  arma::cx_mat anchors(dicts.kr.atoms.n_rows, stage1.support.n_elem);
  for (arma::uword s = 0; s < stage1.support.n_elem; ++s)
    anchors.col(s) = dicts.kr.atoms.col(stage1.support[s] / g_b);

  const arma::uword g = dicts.surface.atoms.n_cols;
  const arma::uword pair_count = g * g;
  int keep = int(std::llround(keep_fraction * double(pair_count)));
  keep = std::max(1, std::min<int>(keep, int(pair_count)));
  const arma::uvec kept =
      dictionary_reduce_pairs(dicts.surface.atoms, anchors, keep);
  est.online_seconds = seconds_since(t0);

  // Stage 2: exact model on the reduced pair dictionary. A full keep is the
  // identity selection; use the dense construction so the result (including
  // tie-breaking between duplicate pair columns) is identical to
  // estimate_exact.
  t0 = clock_type::now();
  KronSensing op2;
  op2.t_beam = op1.t_beam;
  if (kept.n_elem == pair_count)
    op2.t_surface = exact_surface_factor(responses, dicts.surface.atoms);
  else
    op2.t_surface =
        exact_surface_factor_pairs(responses, dicts.surface.atoms, kept);
  est.offline_seconds += seconds_since(t0);

  t0 = clock_type::now();
  arma::cx_mat y2 = y;
  if (stage2_noise_var > 0.0 && noise_rng)
    y2 += std::sqrt(stage2_noise_var) *
          noise_rng->cgauss_mat(y.n_rows, y.n_cols);
  const OmpResult stage2 = omp_kron(y2, op2, sparsity);
  est.online_seconds += seconds_since(t0);

  split_kron_support(stage2, op2.t_beam.n_cols, &est);
  for (arma::uword s = 0; s < est.surf_idx.n_elem; ++s)
    est.surf_idx[s] = kept[est.surf_idx[s]];  // back to global pair indices
  return est;
}

arma::cx_mat predict_measurements(const ChannelEstimate& est,
                                  const TrainingPlan& plan,
                                  const Dictionaries& dicts,
                                  const arma::cx_cube* responses) {
  const arma::uword m_b = plan.f.n_cols;
  const arma::uword m_s = plan.gamma.n_cols;
  if (est.coeff.n_elem == 0) return arma::cx_mat(m_b, m_s, arma::fill::zeros);

  const arma::cx_mat t_beam = beam_factor(plan, dicts);
  arma::cx_mat beam_sel(m_b, est.coeff.n_elem);
  for (arma::uword s = 0; s < est.coeff.n_elem; ++s)
    beam_sel.col(s) = t_beam.col(est.beam_idx[s]);

  arma::cx_mat surf_sel(m_s, est.coeff.n_elem);
  if (est.conventional_model) {
    const arma::cx_mat t_kr = plan.gamma.st() * dicts.kr.atoms;
    for (arma::uword s = 0; s < est.coeff.n_elem; ++s)
      surf_sel.col(s) = t_kr.col(est.surf_idx[s]);
  } else {
    surf_sel =
        exact_surface_factor_pairs(*responses, dicts.surface.atoms,
                                   est.surf_idx);
  }
  return beam_sel * arma::diagmat(est.coeff) * surf_sel.st();
}

arma::cx_mat equivalent_channel(const ChannelEstimate& est,
                                const Dictionaries& dicts) {
  const arma::uword n_beam = dicts.beam_atoms.n_rows;
  const arma::uword n = dicts.surface.atoms.n_rows;
  const arma::uword g = dicts.surface.atoms.n_cols;
  const arma::uword surf_dim = est.conventional_model ? n : n * n;
  check_matrix_alloc(n_beam, surf_dim, "equivalent channel");
  arma::cx_mat eq(n_beam, surf_dim, arma::fill::zeros);
  for (arma::uword s = 0; s < est.coeff.n_elem; ++s) {
    const arma::cx_vec beam = dicts.beam_atoms.col(est.beam_idx[s]);
    arma::cx_vec surf;
    if (est.conventional_model) {
      surf = dicts.kr.atoms.col(est.surf_idx[s]);
    } else {
      const arma::uword g1 = est.surf_idx[s] / g;
      const arma::uword g2 = est.surf_idx[s] % g;
      surf = arma::kron(dicts.surface.atoms.col(g1),
                        dicts.surface.atoms.col(g2));
    }
    eq += est.coeff[s] * beam * surf.st();
  }
  return eq;
}

double reconstruction_nmse_db(const arma::cx_mat& y_pred,
                              const arma::cx_mat& y_clean) {
  const double ref = arma::norm(y_clean, "fro");
  if (ref == 0.0) return -200.0;
  const double err = arma::norm(y_pred - y_clean, "fro");
  const double ratio = (err * err) / (ref * ref);
  if (ratio <= 1e-20) return -200.0;
  return std::max(10.0 * std::log10(ratio), -200.0);
}

}  // namespace arisim
