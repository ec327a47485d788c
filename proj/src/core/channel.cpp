// SPDX-License-Identifier: Apache-2.0

#include "core/channel.hpp"

#include <cmath>

#include "core/coupling.hpp"

namespace arisim {

arma::cx_vec upa_arv_freq(const UpaGeometry& geom, double freq_h,
                          double freq_v) {
  const cxd j(0.0, 1.0);
  arma::cx_vec ah(geom.nh), av(geom.nv);
  for (int h = 0; h < geom.nh; ++h)
    ah[h] = std::exp(-j * (2.0 * kPi * freq_h * double(h)));
  for (int v = 0; v < geom.nv; ++v)
    av[v] = std::exp(-j * (2.0 * kPi * freq_v * double(v)));
  return arma::kron(ah, av) / std::sqrt(double(geom.size()));
}

arma::cx_vec upa_arv(const UpaGeometry& geom, double azimuth, double elevation,
                     double wavelength) {
  const double fh =
      geom.spacing * std::sin(azimuth) * std::sin(elevation) / wavelength;
  const double fv = geom.spacing * std::cos(elevation) / wavelength;
  return upa_arv_freq(geom, fh, fv);
}

PathSet draw_paths(int n_paths, double distance, double exponent,
                   double wavelength, Rng& rng) {
  PathSet p;
  p.azimuth_rx.set_size(n_paths);
  p.elevation_rx.set_size(n_paths);
  p.azimuth_tx.set_size(n_paths);
  p.elevation_tx.set_size(n_paths);
  p.gain.set_size(n_paths);
  const double amplitude =
      std::pow(wavelength / (4.0 * kPi * distance), exponent / 2.0);
  for (int l = 0; l < n_paths; ++l) {
    p.azimuth_rx[l] = 2.0 * kPi * rng.uniform();
    p.elevation_rx[l] = kPi * rng.uniform();
    p.azimuth_tx[l] = 2.0 * kPi * rng.uniform();
    p.elevation_tx[l] = kPi * rng.uniform();
    // Path 0 is line-of-sight with deterministic gain; the rest fade.
    p.gain[l] = (l == 0) ? cxd(amplitude, 0.0) : amplitude * rng.cgauss();
  }
  return p;
}

arma::cx_mat path_steering_rx(const UpaGeometry& geom, const PathSet& paths,
                              double wavelength) {
  const int n_paths = int(paths.gain.n_elem);
  arma::cx_mat a(geom.size(), n_paths);
  for (int l = 0; l < n_paths; ++l)
    a.col(l) =
        upa_arv(geom, paths.azimuth_rx[l], paths.elevation_rx[l], wavelength);
  return a;
}

arma::cx_mat path_steering_tx(const UpaGeometry& geom, const PathSet& paths,
                              double wavelength) {
  const int n_paths = int(paths.gain.n_elem);
  arma::cx_mat a(geom.size(), n_paths);
  for (int l = 0; l < n_paths; ++l)
    a.col(l) =
        upa_arv(geom, paths.azimuth_tx[l], paths.elevation_tx[l], wavelength);
  return a;
}

arma::cx_mat assemble_channel(const arma::cx_mat& a_rx,
                              const arma::cx_mat& a_tx,
                              const arma::cx_vec& gain) {
  const double n_paths = double(gain.n_elem);
  const double scale =
      std::sqrt(double(a_rx.n_rows) * double(a_tx.n_rows) / n_paths);
  return a_rx * arma::diagmat(scale * gain) * a_tx.st();
}

TwoHopChannel draw_two_hop(const LinkConfig& cfg, Rng& rng) {
  TwoHopChannel ch;
  ch.paths_iu = draw_paths(cfg.paths_iu, cfg.dist_iu, cfg.pathloss_exponent,
                           cfg.wavelength, rng);
  ch.paths_bi = draw_paths(cfg.paths_bi, cfg.dist_bi, cfg.pathloss_exponent,
                           cfg.wavelength, rng);
  ch.a_i_iu = path_steering_rx(cfg.surface, ch.paths_iu, cfg.wavelength);
  ch.a_u = path_steering_tx(cfg.user, ch.paths_iu, cfg.wavelength);
  ch.a_b = path_steering_rx(cfg.base, ch.paths_bi, cfg.wavelength);
  ch.a_i_bi = path_steering_tx(cfg.surface, ch.paths_bi, cfg.wavelength);
  ch.h_iu = assemble_channel(ch.a_i_iu, ch.a_u, ch.paths_iu.gain);
  ch.h_bi = assemble_channel(ch.a_b, ch.a_i_bi, ch.paths_bi.gain);
  return ch;
}

arma::cx_mat ris_response(const arma::cx_vec& gamma, const arma::cx_mat& s,
                          bool* clamped, double clamp) {
  const arma::uword n = gamma.n_elem;
  arma::cx_vec g = gamma;
  bool did_clamp = false;
  for (arma::uword i = 0; i < n; ++i) {
    const double mag = std::abs(g[i]);
    if (mag < clamp) {
      g[i] = (mag == 0.0) ? cxd(clamp, 0.0) : g[i] * (clamp / mag);
      did_clamp = true;
    }
  }
  if (clamped) *clamped = did_clamp;

  arma::cx_mat lhs = -s;
  lhs.diag() += 1.0 / g;
  const double rc = arma::rcond(lhs);
  if (rc < 1e-12)
    throw singular_matrix_error("surface response: 1/Gamma - S singular", rc);
  return arma::inv(lhs);
}

arma::cx_mat neumann_response(const arma::cx_vec& gamma, const arma::cx_mat& s,
                              int order, bool* diverging) {
  const arma::uword n = gamma.n_elem;
  const arma::cx_mat gs = arma::diagmat(gamma) * s;
  if (diverging) *diverging = spectral_radius(gs) >= 1.0;
  arma::cx_mat series = arma::eye<arma::cx_mat>(n, n);
  arma::cx_mat term = arma::eye<arma::cx_mat>(n, n);
  for (int k = 1; k <= order; ++k) {
    term = gs * term;
    series += term;
  }
  return series * arma::diagmat(gamma);
}

arma::cx_mat cascade(const arma::cx_mat& h_rx_side,
                     const arma::cx_mat& response,
                     const arma::cx_mat& h_tx_side) {
  return h_rx_side * response * h_tx_side;
}

double reflection_gain(const UpaGeometry& geom, const arma::cx_mat& response,
                       double az_inc, double el_inc, double az_obs,
                       double el_obs, double wavelength) {
  const arma::cx_vec a_inc = upa_arv(geom, az_inc, el_inc, wavelength);
  const arma::cx_vec a_obs = upa_arv(geom, az_obs, el_obs, wavelength);
  const cxd v = arma::as_scalar(a_obs.st() * response * a_inc);
  return std::norm(v);
}

}  // namespace arisim
