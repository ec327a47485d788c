// SPDX-License-Identifier: Apache-2.0
//
// Small binary cache format for complex matrices, used to persist expensive
// deterministic precomputations (e.g. coupling matrices) between runs.
//
// Layout: magic "ARSX", u32 version, u8 dtype (0 = complex128), u64 rows,
// u64 cols, then row-major complex128 payload. Little-endian throughout.

#pragma once

#include <armadillo>

#include <string>

namespace arisim {

void save_matrix(const std::string& path, const arma::cx_mat& m);

// Throws std::runtime_error on missing file, bad magic, unsupported version
// or dtype, or truncated payload.
arma::cx_mat load_matrix(const std::string& path);

}  // namespace arisim
