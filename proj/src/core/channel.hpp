// SPDX-License-Identifier: Apache-2.0
//
// Array geometry, array response vectors, geometric multipath channels, and
// the reflecting-surface response with and without mutual coupling.

#pragma once

#include <armadillo>

#include "core/common.hpp"

namespace arisim {

// Uniform planar array on a square grid; element index is h * nv + v.
struct UpaGeometry {
  int nh = 1;
  int nv = 1;
  double spacing = 0.5;  // meters

  int size() const { return nh * nv; }
  // Diagonal extent of the aperture, used for far-field distances.
  double aperture_diagonal() const {
    return spacing * std::hypot(double(nh - 1), double(nv - 1));
  }
};

// Array response vector for a propagation direction given as azimuth and
// elevation (elevation measured from the array normal's zenith, i.e. the
// inclination angle). Unit norm; entry for element (h, v) is
// exp(-j*2*pi*(phi_h*h + phi_v*v)) / sqrt(N) with
// phi_h = spacing*sin(az)*sin(el)/wavelength and
// phi_v = spacing*cos(el)/wavelength.
arma::cx_vec upa_arv(const UpaGeometry& geom, double azimuth, double elevation,
                     double wavelength);

// Same response expressed directly in normalized spatial frequencies.
arma::cx_vec upa_arv_freq(const UpaGeometry& geom, double freq_h,
                          double freq_v);

// One multipath cluster set for a link.
struct PathSet {
  arma::vec azimuth_rx, elevation_rx;  // per path, receive side
  arma::vec azimuth_tx, elevation_tx;  // per path, transmit side
  arma::cx_vec gain;                   // complex path gains
};

// Draws `n_paths` paths. Path 0 is line-of-sight: deterministic real
// amplitude (wavelength / (4*pi*distance))^(exponent/2). Remaining paths are
// CN(0, amplitude^2). All angles uniform (azimuth in [0, 2*pi), elevation in
// [0, pi)).
PathSet draw_paths(int n_paths, double distance, double exponent,
                   double wavelength, Rng& rng);

// Steering matrix whose columns are the receive-side (or transmit-side)
// responses of the given paths.
arma::cx_mat path_steering_rx(const UpaGeometry& geom, const PathSet& paths,
                              double wavelength);
arma::cx_mat path_steering_tx(const UpaGeometry& geom, const PathSet& paths,
                              double wavelength);

// H = A_rx * diag(sqrt(N_rx*N_tx/L) * gain) * A_tx^T.
arma::cx_mat assemble_channel(const arma::cx_mat& a_rx, const arma::cx_mat& a_tx,
                              const arma::cx_vec& gain);

// Both hops of the two-hop link plus the path data they were built from.
struct TwoHopChannel {
  PathSet paths_iu, paths_bi;
  arma::cx_mat h_iu;  // surface <- user terminal (N_I x N_U)
  arma::cx_mat h_bi;  // base station <- surface (N_B x N_I)
  arma::cx_mat a_i_iu, a_u;  // steering used for h_iu
  arma::cx_mat a_b, a_i_bi;  // steering used for h_bi
};

struct LinkConfig {
  UpaGeometry surface, base, user;
  double wavelength = 0.01;
  double dist_iu = 2.6;   // meters, surface to user
  double dist_bi = 2.2;   // meters, base to surface
  int paths_iu = 2;
  int paths_bi = 2;
  double pathloss_exponent = 2.1;
};

TwoHopChannel draw_two_hop(const LinkConfig& cfg, Rng& rng);

// Surface response with mutual coupling: (diag(gamma)^-1 - S)^-1.
// Entries of gamma with magnitude below `clamp` are clamped (preserving
// phase, or set real) before inversion; `clamped` reports whether that
// happened. Throws singular_matrix_error when the matrix to invert is
// numerically singular (rcond < 1e-12).
arma::cx_mat ris_response(const arma::cx_vec& gamma, const arma::cx_mat& s,
                          bool* clamped = nullptr, double clamp = 1e-8);

// Truncated Neumann-series approximation sum_{n=0..order} (Gamma*S)^n * Gamma.
// Order 0 equals the coupling-unaware response diag(gamma). `diverging` is
// set when spectral_radius(Gamma*S) >= 1.
arma::cx_mat neumann_response(const arma::cx_vec& gamma, const arma::cx_mat& s,
                              int order, bool* diverging = nullptr);

// End-to-end cascade H_rx_side * response * H_tx_side.
arma::cx_mat cascade(const arma::cx_mat& h_rx_side,
                     const arma::cx_mat& response,
                     const arma::cx_mat& h_tx_side);

// |a(obs)^T * response * a(inc)|^2 for a far-field reflection pattern cut.
double reflection_gain(const UpaGeometry& geom, const arma::cx_mat& response,
                       double az_inc, double el_inc, double az_obs,
                       double el_obs, double wavelength);

}  // namespace arisim
