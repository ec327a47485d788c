// SPDX-License-Identifier: Apache-2.0
//
// Shared numeric utilities: physical constants, unit conversions, error
// types, allocation guarding, and deterministic random number generation.

#pragma once

#include <armadillo>

#include <complex>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

namespace arisim {

using cxd = std::complex<double>;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kSpeedOfLight = 2.99792458e8;  // m/s
// Free-space wave impedance, rounded to the customary engineering value.
inline constexpr double kFreeSpaceImpedance = 377.0;  // ohm

// ---------------------------------------------------------------------------
// Unit conversions
// ---------------------------------------------------------------------------

double dbm_to_watt(double dbm);
double watt_to_dbm(double watt);
double db_to_linear(double db);
double linear_to_db(double linear);

// ---------------------------------------------------------------------------
// Error types
// ---------------------------------------------------------------------------

// Thrown when a matrix that must be inverted is numerically singular.
class singular_matrix_error : public std::runtime_error {
 public:
  explicit singular_matrix_error(const std::string& what, double rcond)
      : std::runtime_error(what + " (rcond=" + std::to_string(rcond) + ")"),
        rcond_(rcond) {}
  double rcond() const { return rcond_; }

 private:
  double rcond_;
};

// Thrown before an allocation that would exceed the single-object budget.
class allocation_limit_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Thrown on malformed or inconsistent experiment configuration.
class config_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Largest single complex-double matrix we allow (bytes). Chosen well under
// the memory of a small workstation so paper-scale runs fail fast with a
// clear message instead of thrashing.
inline constexpr std::uint64_t kMaxMatrixBytes = 2ull << 30;  // 2 GiB

// Throws allocation_limit_error if rows*cols complex doubles exceed the cap.
void check_matrix_alloc(std::uint64_t rows, std::uint64_t cols,
                        const char* what);

// ---------------------------------------------------------------------------
// Deterministic RNG
// ---------------------------------------------------------------------------

// One step of the splitmix64 sequence; advances `state`.
std::uint64_t splitmix64(std::uint64_t& state);

// Derives an independent stream seed from (master, a, b) via a splitmix64
// chain. Used to give every (sweep point, trial) its own stream so the same
// configuration and seed reproduce results regardless of worker scheduling.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a,
                          std::uint64_t b);

// Thin wrapper around mt19937_64 with the complex draws used everywhere.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  // Uniform on [0, 1).
  double uniform() { return unit_(engine_); }
  // Standard normal.
  double gauss() { return normal_(engine_); }
  // Circularly-symmetric complex normal, unit variance (CN(0,1)).
  cxd cgauss() {
    const double re = gauss();
    const double im = gauss();
    return cxd(re, im) / std::sqrt(2.0);
  }
  // Uniform phase on [0, 2*pi).
  double phase() { return 2.0 * kPi * uniform(); }

  arma::cx_vec cgauss_vec(arma::uword n);
  arma::cx_mat cgauss_mat(arma::uword rows, arma::uword cols);
  // Unit-magnitude entries with i.i.d. uniform phases.
  arma::cx_vec phase_vec(arma::uword n);
  arma::cx_mat phase_mat(arma::uword rows, arma::uword cols);

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
  std::uniform_real_distribution<double> unit_{0.0, 1.0};
  std::normal_distribution<double> normal_{0.0, 1.0};
};

}  // namespace arisim
