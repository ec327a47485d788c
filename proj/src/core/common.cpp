// SPDX-License-Identifier: Apache-2.0

#include "core/common.hpp"

#include <cmath>

namespace arisim {

double dbm_to_watt(double dbm) { return 1e-3 * std::pow(10.0, dbm / 10.0); }

double watt_to_dbm(double watt) { return 10.0 * std::log10(watt / 1e-3); }

double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

double linear_to_db(double linear) { return 10.0 * std::log10(linear); }

void check_matrix_alloc(std::uint64_t rows, std::uint64_t cols,
                        const char* what) {
  const std::uint64_t bytes = rows * cols * sizeof(cxd);
  if (rows != 0 && bytes / rows / sizeof(cxd) != cols) {
    throw allocation_limit_error(std::string(what) +
                                 ": matrix size overflows 64-bit bytes");
  }
  if (bytes > kMaxMatrixBytes) {
    throw allocation_limit_error(
        std::string(what) + ": requested " + std::to_string(rows) + "x" +
        std::to_string(cols) + " complex matrix (" + std::to_string(bytes) +
        " bytes) exceeds the " + std::to_string(kMaxMatrixBytes) +
        "-byte single-matrix budget");
  }
}

std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9E3779B97F4A7C15ull;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a,
                          std::uint64_t b) {
  std::uint64_t state = master;
  std::uint64_t h = splitmix64(state);
  state = h ^ (a * 0xD1342543DE82EF95ull + 0x9E3779B97F4A7C15ull);
  h = splitmix64(state);
  state = h ^ (b * 0xAF251AF3B0F025B5ull + 0x9E3779B97F4A7C15ull);
  return splitmix64(state);
}

arma::cx_vec Rng::cgauss_vec(arma::uword n) {
  arma::cx_vec v(n);
  for (arma::uword i = 0; i < n; ++i) v[i] = cgauss();
  return v;
}

arma::cx_mat Rng::cgauss_mat(arma::uword rows, arma::uword cols) {
  arma::cx_mat m(rows, cols);
  // Column-major fill keeps the draw order equal to element storage order.
  for (arma::uword c = 0; c < cols; ++c)
    for (arma::uword r = 0; r < rows; ++r) m(r, c) = cgauss();
  return m;
}

arma::cx_vec Rng::phase_vec(arma::uword n) {
  arma::cx_vec v(n);
  for (arma::uword i = 0; i < n; ++i) v[i] = std::polar(1.0, phase());
  return v;
}

arma::cx_mat Rng::phase_mat(arma::uword rows, arma::uword cols) {
  arma::cx_mat m(rows, cols);
  for (arma::uword c = 0; c < cols; ++c)
    for (arma::uword r = 0; r < rows; ++r) m(r, c) = std::polar(1.0, phase());
  return m;
}

}  // namespace arisim
