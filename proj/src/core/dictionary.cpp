// SPDX-License-Identifier: Apache-2.0

#include "core/dictionary.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

namespace arisim {

arma::vec dictionary_grid(int g_count, double spacing, double wavelength) {
  arma::vec beta(g_count);
  const double step = 2.0 * spacing / (wavelength * g_count);
  for (int g = 1; g <= g_count; ++g)
    beta[g - 1] = step * (g - 0.5 * (g_count + 1));
  return beta;
}

GridAtoms grid_arv_matrix(const UpaGeometry& geom, int g_h, int g_v,
                          double wavelength) {
  const arma::vec bh = dictionary_grid(g_h, geom.spacing, wavelength);
  const arma::vec bv = dictionary_grid(g_v, geom.spacing, wavelength);
  GridAtoms grid;
  grid.atoms.set_size(geom.size(), arma::uword(g_h) * g_v);
  grid.freq_h.set_size(grid.atoms.n_cols);
  grid.freq_v.set_size(grid.atoms.n_cols);
  for (int v = 0; v < g_v; ++v)
    for (int h = 0; h < g_h; ++h) {
      const arma::uword col = arma::uword(v) * g_h + h;
      grid.atoms.col(col) = upa_arv_freq(geom, bh[h], bv[v]);
      grid.freq_h[col] = bh[h];
      grid.freq_v[col] = bv[v];
    }
  return grid;
}

KrDictionary khatri_rao_dictionary(const GridAtoms& grid) {
  const arma::uword g = grid.atoms.n_cols;
  const arma::uword n = grid.atoms.n_rows;
  KrDictionary kr;
  kr.pair_to_col.set_size(g, g);

  // Bucket candidates by quantized sum frequency; a bucket hit is confirmed
  // by direct column comparison so quantization can never merge distinct
  // columns. Responses are periodic in frequency with period 1.
  const double quantum = 1e-6;
  const long long period = 1000000;  // 1.0 / quantum, frequency ring size
  std::map<std::pair<long long, long long>, std::vector<arma::uword>> buckets;
  auto quantize = [&](double f) {
    double w = std::fmod(f, 1.0);
    if (w < 0) w += 1.0;
    return ((llround(w / quantum) % period) + period) % period;
  };
  auto ring = [&](long long q, long long dq) {
    return ((q + dq) % period + period) % period;
  };
  std::vector<arma::cx_vec> columns;
  std::vector<std::pair<int, int>> reps;

  for (arma::uword g1 = 0; g1 < g; ++g1)
    for (arma::uword g2 = 0; g2 < g; ++g2) {
      const arma::cx_vec cand = grid.atoms.col(g1) % grid.atoms.col(g2);
      const long long qh = quantize(grid.freq_h[g1] + grid.freq_h[g2]);
      const long long qv = quantize(grid.freq_v[g1] + grid.freq_v[g2]);

      arma::uword found = columns.size();
      for (long long dh = -1; dh <= 1 && found == columns.size(); ++dh)
        for (long long dv = -1; dv <= 1 && found == columns.size(); ++dv) {
          const auto it = buckets.find({ring(qh, dh), ring(qv, dv)});
          if (it == buckets.end()) continue;
          for (const arma::uword c : it->second) {
            if (arma::norm(arma::cx_vec(cand - columns[c]), "inf") <= 1e-9) {
              found = c;
              break;
            }
          }
        }
      if (found == columns.size()) {
        buckets[{qh, qv}].push_back(found);
        columns.push_back(cand);
        reps.emplace_back(int(g1), int(g2));
      }
      kr.pair_to_col(g1, g2) = found;
    }

  kr.atoms.set_size(n, columns.size());
  for (arma::uword c = 0; c < columns.size(); ++c) kr.atoms.col(c) = columns[c];
  kr.representative = std::move(reps);
  return kr;
}

Dictionaries build_dictionaries(const UpaGeometry& user_geom,
                                const UpaGeometry& base_geom,
                                const UpaGeometry& surface_geom,
                                double wavelength) {
  Dictionaries d;
  // Grid sizes track the array sizes (critically sampled dictionaries).
  d.user = grid_arv_matrix(user_geom, user_geom.nh, user_geom.nv, wavelength);
  d.base = grid_arv_matrix(base_geom, base_geom.nh, base_geom.nv, wavelength);
  d.surface = grid_arv_matrix(surface_geom, surface_geom.nh, surface_geom.nv,
                              wavelength);
  d.beam_atoms = arma::kron(d.user.atoms, d.base.atoms);
  d.kr = khatri_rao_dictionary(d.surface);
  return d;
}

namespace {

// Shared top-k selection: order by (score descending, index ascending),
// return the kept indices sorted ascending.
arma::uvec select_top(const arma::vec& scores, int keep) {
  const arma::uword n = scores.n_elem;
  const arma::uword k = std::min<arma::uword>(std::max(keep, 0), n);
  std::vector<arma::uword> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](arma::uword a, arma::uword b) {
                     if (scores[a] != scores[b]) return scores[a] > scores[b];
                     return a < b;
                   });
  std::vector<arma::uword> kept(order.begin(), order.begin() + k);
  std::sort(kept.begin(), kept.end());
  return arma::uvec(kept);
}

}  // namespace

arma::uvec dictionary_reduce(const arma::cx_mat& pool,
                             const arma::cx_mat& anchors, int keep) {
  // score_i = || pool_i^H * anchors ||_2 = sqrt(diag(C C^H)) with
  // C = pool^H anchors.
  const arma::cx_mat c = pool.t() * anchors;
  arma::vec scores(pool.n_cols);
  for (arma::uword i = 0; i < pool.n_cols; ++i)
    scores[i] = arma::norm(c.row(i));
  return select_top(scores, keep);
}

arma::uvec dictionary_reduce_pairs(const arma::cx_mat& grid_atoms,
                                   const arma::cx_mat& anchors, int keep) {
  const arma::uword g = grid_atoms.n_cols;
  const double scale = 1.0 / std::sqrt(double(grid_atoms.n_rows));
  arma::vec g2_scores(g);
  for (arma::uword g2 = 0; g2 < g; ++g2)
    g2_scores[g2] =
        arma::norm(arma::cx_rowvec(scale * grid_atoms.col(g2).t() * anchors));

  arma::vec scores(g * g);
  for (arma::uword g1 = 0; g1 < g; ++g1)
    for (arma::uword g2 = 0; g2 < g; ++g2)
      scores[g1 * g + g2] = g2_scores[g2];
  return select_top(scores, keep);
}

}  // namespace arisim
