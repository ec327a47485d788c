// SPDX-License-Identifier: Apache-2.0
//
// Electromagnetic mutual coupling between the unit cells of a planar
// reflecting surface, modeled as thin parallel wire scatterers. Mutual
// impedances come from the induced-EMF method with a sinusoidal current
// profile; impedances are mapped to a scattering matrix relative to a
// reference impedance.

#pragma once

#include <armadillo>

#include <functional>

#include "core/common.hpp"

namespace arisim {

// Nodes and weights of the n-point Gauss–Legendre rule on [-1, 1].
void gauss_legendre(int n, arma::vec& nodes, arma::vec& weights);

// Adaptive complex-valued integration (Gauss–Legendre with interval
// bisection) of f on [a, b].
cxd integrate_adaptive(const std::function<cxd(double)>& f, double a, double b,
                       double abs_tol = 1e-12, double rel_tol = 1e-10,
                       int max_depth = 24);

// Induced-EMF mutual impedance between two parallel side-by-side wires of
// the given total length whose centers are `distance` apart. Currents are
// sinusoidal, referred to the current maximum.
cxd wire_mutual_impedance(double distance, double total_length,
                          double wavelength);

// Self impedance of a single wire: the same integral evaluated at a center
// distance equal to the wire radius. Exposed for diagnostics and validated
// against textbook dipole values; the scattering builder below does not use
// it (elements are treated as matched to the reference impedance).
cxd wire_self_impedance(double total_length, double radius, double wavelength);

struct WireCouplingParams {
  double wavelength = 1.0;
  // Total wire length of each unit cell.
  double total_length = 1.0 / 32.0;
  // Wire radius (diagnostics only).
  double radius = 1.0 / 500.0;
  // Reference impedance the cells are matched to.
  double reference_impedance = 50.0;
};

// Scattering matrix of an nh-by-nv planar array of identical thin wires on a
// square grid with the given inter-element spacing (meters). Element index
// is h * nv + v. The impedance matrix has the reference impedance on the
// diagonal (matched, zero self-reflection) and induced-EMF mutual impedances
// off the diagonal, with the side-by-side formula applied at the Euclidean
// center distance of each pair; S = (Z + Z0 I)^{-1} (Z - Z0 I), symmetric.
arma::cx_mat thin_wire_scattering(int nh, int nv, double spacing,
                                  const WireCouplingParams& params);

// Random symmetric complex matrix scaled to unit spectral radius; used to
// exercise coupling-dependent code paths at controlled strength.
arma::cx_mat synthetic_scattering(int n, Rng& rng);

// Largest eigenvalue magnitude of a (general) square matrix.
double spectral_radius(const arma::cx_mat& m);

}  // namespace arisim
