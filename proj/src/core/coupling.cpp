// SPDX-License-Identifier: Apache-2.0

#include "core/coupling.hpp"

#include <cmath>
#include <functional>
#include <map>
#include <utility>

namespace arisim {

void gauss_legendre(int n, arma::vec& nodes, arma::vec& weights) {
  nodes.set_size(n);
  weights.set_size(n);
  // Newton iteration on Legendre polynomials; roots are symmetric about 0.
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(kPi * (i + 0.75) / (n + 0.5));
    double p_prime = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      p_prime = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / p_prime;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    nodes[i] = -x;
    nodes[n - 1 - i] = x;
    const double w = 2.0 / ((1.0 - x * x) * p_prime * p_prime);
    weights[i] = w;
    weights[n - 1 - i] = w;
  }
}

namespace {

struct GaussRule {
  arma::vec nodes;
  arma::vec weights;
  GaussRule() { gauss_legendre(16, nodes, weights); }
};

cxd gauss_segment(const std::function<cxd(double)>& f, double a, double b,
                  const GaussRule& rule) {
  const double mid = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  cxd acc(0.0, 0.0);
  for (arma::uword i = 0; i < rule.nodes.n_elem; ++i)
    acc += rule.weights[i] * f(mid + half * rule.nodes[i]);
  return half * acc;
}

cxd integrate_recursive(const std::function<cxd(double)>& f, double a,
                        double b, cxd whole, double abs_tol, double rel_tol,
                        int depth, const GaussRule& rule) {
  const double mid = 0.5 * (a + b);
  const cxd left = gauss_segment(f, a, mid, rule);
  const cxd right = gauss_segment(f, mid, b, rule);
  const cxd refined = left + right;
  const double err = std::abs(refined - whole);
  if (depth <= 0 || err <= std::max(abs_tol, rel_tol * std::abs(refined)))
    return refined;
  return integrate_recursive(f, a, mid, left, 0.5 * abs_tol, rel_tol,
                             depth - 1, rule) +
         integrate_recursive(f, mid, b, right, 0.5 * abs_tol, rel_tol,
                             depth - 1, rule);
}

}  // namespace

cxd integrate_adaptive(const std::function<cxd(double)>& f, double a, double b,
                       double abs_tol, double rel_tol, int max_depth) {
  static const GaussRule rule;
  const cxd whole = gauss_segment(f, a, b, rule);
  return integrate_recursive(f, a, b, whole, abs_tol, rel_tol, max_depth,
                             rule);
}

namespace {

// Core induced-EMF integral for two parallel sinusoidal currents of
// half-length l whose axes are `d` apart (side-by-side geometry).
cxd induced_emf_impedance(double d, double half_length, double wavelength) {
  const double l = half_length;
  const double k = 2.0 * kPi / wavelength;
  const cxd j(0.0, 1.0);
  const double cos_kl = std::cos(k * l);
  auto integrand = [&](double z) {
    const double r0 = std::sqrt(d * d + z * z);
    const double r1 = std::sqrt(d * d + (z - l) * (z - l));
    const double r2 = std::sqrt(d * d + (z + l) * (z + l));
    const cxd kernel = std::exp(-j * (k * r1)) / r1 +
                       std::exp(-j * (k * r2)) / r2 -
                       2.0 * cos_kl * std::exp(-j * (k * r0)) / r0;
    return std::sin(k * (l - std::abs(z))) * kernel;
  };
  // Split at z = 0 where |z| kinks; the adaptive rule resolves the sharp
  // (but analytic) features near z = +-l when d is small.
  const cxd integral = integrate_adaptive(integrand, -l, 0.0) +
                       integrate_adaptive(integrand, 0.0, l);
  const double sin_kl = std::sin(k * l);
  return j * kFreeSpaceImpedance / (4.0 * kPi * sin_kl * sin_kl) * integral;
}

}  // namespace

cxd wire_mutual_impedance(double distance, double total_length,
                          double wavelength) {
  return induced_emf_impedance(distance, 0.5 * total_length, wavelength);
}

cxd wire_self_impedance(double total_length, double radius,
                        double wavelength) {
  return induced_emf_impedance(radius, 0.5 * total_length, wavelength);
}

arma::cx_mat thin_wire_scattering(int nh, int nv, double spacing,
                                  const WireCouplingParams& params) {
  const int n = nh * nv;
  const double z0 = params.reference_impedance;
  arma::cx_mat z(n, n, arma::fill::zeros);
  z.diag().fill(z0);

  // Mutual impedance depends only on the center distance; cache per distinct
  // (|dh|, |dv|) offset to avoid re-integrating identical pairs.
  std::map<std::pair<int, int>, cxd> cache;
  auto mutual = [&](int dh, int dv) {
    const auto key = std::make_pair(std::abs(dh), std::abs(dv));
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
    const double d = spacing * std::hypot(double(key.first),
                                          double(key.second));
    const cxd val =
        wire_mutual_impedance(d, params.total_length, params.wavelength);
    cache.emplace(key, val);
    return val;
  };

  for (int h1 = 0; h1 < nh; ++h1)
    for (int v1 = 0; v1 < nv; ++v1)
      for (int h2 = 0; h2 < nh; ++h2)
        for (int v2 = 0; v2 < nv; ++v2) {
          const int i = h1 * nv + v1;
          const int jdx = h2 * nv + v2;
          if (i == jdx) continue;
          z(i, jdx) = mutual(h1 - h2, v1 - v2);
        }

  const arma::cx_mat lhs = z + z0 * arma::eye<arma::cx_mat>(n, n);
  const double rc = arma::rcond(lhs);
  if (rc < 1e-12)
    throw singular_matrix_error("scattering conversion: Z + Z0*I singular",
                                rc);
  arma::cx_mat s = arma::solve(lhs, z - z0 * arma::eye<arma::cx_mat>(n, n));
  // Z is symmetric (reciprocity), so S is symmetric up to roundoff.
  s = 0.5 * (s + s.st());
  return s;
}

arma::cx_mat synthetic_scattering(int n, Rng& rng) {
  arma::cx_mat m = rng.cgauss_mat(n, n);
  arma::cx_mat s = 0.5 * (m + m.st());
  const double radius = spectral_radius(s);
  if (radius > 0.0) s /= radius;
  return s;
}

double spectral_radius(const arma::cx_mat& m) {
  arma::cx_vec eigenvalues;
  if (!arma::eig_gen(eigenvalues, m))
    throw std::runtime_error("spectral_radius: eigenvalue solve failed");
  return arma::abs(eigenvalues).max();
}

}  // namespace arisim
