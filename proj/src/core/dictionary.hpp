// SPDX-License-Identifier: Apache-2.0
//
// Spatial-frequency dictionaries for sparse channel recovery: per-array
// grids, the deduplicated Khatri-Rao (sum-frequency) dictionary used by the
// coupling-unaware model, and correlation-based dictionary reduction for the
// exact pair dictionary.

#pragma once

#include <armadillo>

#include <utility>
#include <vector>

#include "core/channel.hpp"
#include "core/common.hpp"

namespace arisim {

// Uniform frequency grid beta_g = (2*spacing / (wavelength*G)) * (g - (G+1)/2)
// for g = 1..G; symmetric about zero with step 2*spacing/(wavelength*G).
arma::vec dictionary_grid(int g_count, double spacing, double wavelength);

// Grid response matrix of a planar array: one column per (g_h, g_v) grid
// node with g_h varying fastest (column index g_v*G_h + g_h). Also reports
// the per-column frequencies.
struct GridAtoms {
  arma::cx_mat atoms;  // N x (G_h*G_v), unit-norm columns
  arma::vec freq_h;    // per column
  arma::vec freq_v;
};
GridAtoms grid_arv_matrix(const UpaGeometry& geom, int g_h, int g_v,
                          double wavelength);

// Deduplicated Khatri-Rao dictionary: candidate columns are elementwise
// products atoms(g1) .* atoms(g2) = (1/sqrt(N)) * arv(sum frequency); for a
// full grid the distinct count is (2*G_h - 1)*(2*G_v - 1). Columns equal
// within 1e-9 infinity-norm are merged (bucketed by quantized sum
// frequency, verified by direct comparison).
struct KrDictionary {
  arma::cx_mat atoms;  // N x n_distinct
  std::vector<std::pair<int, int>> representative;  // (g1, g2) per column
  arma::umat pair_to_col;  // G x G -> column index
};
KrDictionary khatri_rao_dictionary(const GridAtoms& grid);

// All dictionaries for one system geometry. The beam-side dictionary pairs
// the user and base grids (column g_u*G_B + g_b = a_user(g_u) kron
// a_base(g_b)); the surface side keeps the single-array grid whose pair
// (g1, g2) Kronecker products form the exact dictionary implicitly.
struct Dictionaries {
  GridAtoms user, base, surface;
  arma::cx_mat beam_atoms;  // (N_U*N_B) x (G_U*G_B)
  KrDictionary kr;          // conventional surface dictionary
};
Dictionaries build_dictionaries(const UpaGeometry& user_geom,
                                const UpaGeometry& base_geom,
                                const UpaGeometry& surface_geom,
                                double wavelength);

// Correlation-based reduction: scores column i of `pool` by the Euclidean
// norm of its correlations with the anchor columns and keeps the `keep`
// best (ties broken toward the lowest index; result in ascending order).
arma::uvec dictionary_reduce(const arma::cx_mat& pool,
                             const arma::cx_mat& anchors, int keep);

// Reduction over the implicit pair grid (pair index g1*G + g2) whose pool
// columns, truncated to the leading N entries, equal (1/sqrt(N)) *
// atoms(g2). Scores therefore depend on g2 only; tie-breaking and ordering
// match dictionary_reduce applied to the materialized truncated pool.
arma::uvec dictionary_reduce_pairs(const arma::cx_mat& grid_atoms,
                                   const arma::cx_mat& anchors, int keep);

}  // namespace arisim
