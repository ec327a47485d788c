// SPDX-License-Identifier: Apache-2.0

#include "core/matrix_io.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>
#include <vector>

#include "core/common.hpp"

namespace arisim {

namespace {
constexpr char kMagic[4] = {'A', 'R', 'S', 'X'};
constexpr std::uint32_t kVersion = 1;
constexpr std::uint8_t kDtypeComplex128 = 0;
}  // namespace

void save_matrix(const std::string& path, const arma::cx_mat& m) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("save_matrix: cannot open " + path);
  out.write(kMagic, 4);
  const std::uint32_t version = kVersion;
  out.write(reinterpret_cast<const char*>(&version), sizeof(version));
  const std::uint8_t dtype = kDtypeComplex128;
  out.write(reinterpret_cast<const char*>(&dtype), sizeof(dtype));
  const std::uint64_t rows = m.n_rows, cols = m.n_cols;
  out.write(reinterpret_cast<const char*>(&rows), sizeof(rows));
  out.write(reinterpret_cast<const char*>(&cols), sizeof(cols));
  // Payload is row-major; transpose from the column-major in-memory layout.
  const arma::cx_mat t = m.st();
  out.write(reinterpret_cast<const char*>(t.memptr()),
            std::streamsize(t.n_elem * sizeof(cxd)));
  if (!out) throw std::runtime_error("save_matrix: write failed for " + path);
}

arma::cx_mat load_matrix(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("load_matrix: cannot open " + path);
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kMagic, 4) != 0)
    throw std::runtime_error("load_matrix: bad magic in " + path);
  std::uint32_t version = 0;
  in.read(reinterpret_cast<char*>(&version), sizeof(version));
  if (!in || version != kVersion)
    throw std::runtime_error("load_matrix: unsupported version in " + path);
  std::uint8_t dtype = 0xff;
  in.read(reinterpret_cast<char*>(&dtype), sizeof(dtype));
  if (!in || dtype != kDtypeComplex128)
    throw std::runtime_error("load_matrix: unsupported dtype in " + path);
  std::uint64_t rows = 0, cols = 0;
  in.read(reinterpret_cast<char*>(&rows), sizeof(rows));
  in.read(reinterpret_cast<char*>(&cols), sizeof(cols));
  if (!in) throw std::runtime_error("load_matrix: truncated header in " + path);
  check_matrix_alloc(rows, cols, "load_matrix");
  arma::cx_mat t(cols, rows);  // row-major payload = transposed matrix
  in.read(reinterpret_cast<char*>(t.memptr()),
          std::streamsize(t.n_elem * sizeof(cxd)));
  if (!in) throw std::runtime_error("load_matrix: truncated payload in " + path);
  return t.st();
}

}  // namespace arisim
