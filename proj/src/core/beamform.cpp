// SPDX-License-Identifier: Apache-2.0

#include "core/beamform.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace arisim {

namespace {

// Uniform-random surface phases at equal per-cell amplitude filling the
// budget: ||gamma||^2 = amp_budget_sq.
arma::cx_vec random_surface_start(arma::uword n_cells, double amp_budget_sq,
                                  Rng& rng) {
  const double per_cell = std::sqrt(amp_budget_sq / double(n_cells));
  return per_cell * rng.phase_vec(n_cells);
}

double rel_change(double next, double prev) {
  return std::abs(next - prev) / std::max(std::abs(prev), 1e-300);
}

}  // namespace

arma::cx_mat ul_to_dl_equivalent(const arma::cx_mat& g_ul, arma::uword n_user,
                                 arma::uword n_base, arma::uword n_cells) {
  if (g_ul.n_rows != n_user * n_base)
    throw config_error("equivalent channel row count does not match arrays");
  const bool conventional = g_ul.n_cols == n_cells;
  if (!conventional && g_ul.n_cols != n_cells * n_cells)
    throw config_error("equivalent channel column count does not match cells");

  arma::cx_mat g_dl(g_ul.n_rows, g_ul.n_cols);
  for (arma::uword u = 0; u < n_user; ++u) {
    for (arma::uword b = 0; b < n_base; ++b) {
      const arma::uword row_ul = u * n_base + b;
      const arma::uword row_dl = b * n_user + u;
      if (conventional) {
        g_dl.row(row_dl) = g_ul.row(row_ul);
      } else {
        for (arma::uword j = 0; j < n_cells; ++j)
          for (arma::uword i = 0; i < n_cells; ++i)
            g_dl(row_dl, j + i * n_cells) = g_ul(row_ul, i + j * n_cells);
      }
    }
  }
  return g_dl;
}

arma::cx_mat downlink_equivalent_exact(const arma::cx_mat& h_bi,
                                       const arma::cx_mat& h_iu) {
  check_matrix_alloc(h_bi.n_rows * h_iu.n_cols, h_bi.n_cols * h_iu.n_rows,
                     "downlink equivalent channel");
  return arma::kron(h_bi, h_iu.st());
}

arma::cx_mat downlink_equivalent_conventional(const arma::cx_mat& h_bi,
                                              const arma::cx_mat& h_iu) {
  const arma::uword n_cells = h_bi.n_cols;
  arma::cx_mat g(h_iu.n_cols * h_bi.n_rows, n_cells);
  for (arma::uword i = 0; i < n_cells; ++i)
    g.col(i) = arma::kron(h_bi.col(i), h_iu.row(i).st());
  return g;
}

arma::cx_mat effective_downlink(const arma::cx_mat& g_dl,
                                const arma::cx_vec& gamma,
                                const arma::cx_mat& scattering,
                                bool conventional, arma::uword n_user,
                                arma::uword n_base) {
  if (g_dl.n_rows != n_user * n_base)
    throw config_error("equivalent channel row count does not match arrays");
  arma::cx_vec response;
  if (conventional) {
    response = gamma;
  } else {
    const arma::cx_mat gd = arma::diagmat(gamma);
    response = arma::vectorise(gd + gd * scattering * gd);
  }
  // Row b * n_user + u of g_dl is entry (u, b) of the column-major reshape.
  return arma::reshape(g_dl * response, n_user, n_base);
}

SurfaceModel make_surface_model(const arma::cx_vec& t,
                                const arma::cx_mat& scattering) {
  const arma::uword n = scattering.n_rows;
  if (t.n_elem != n * n)
    throw config_error("surrogate vector length does not match the surface");
  const arma::cx_mat t_mat = arma::reshape(t, n, n);
  SurfaceModel model;
  model.q = arma::conj(t_mat.diag());
  model.b = scattering % t_mat;
  return model;
}

cxd model_gain(const SurfaceModel& model, const arma::cx_vec& gamma) {
  return arma::cdot(model.q, gamma) +
         arma::as_scalar(gamma.st() * model.b * gamma);
}

double model_objective(const SurfaceModel& model, const arma::cx_vec& gamma) {
  const cxd u = model_gain(model, gamma);
  return -std::norm(u);
}

arma::cx_vec model_gradient(const SurfaceModel& model,
                            const arma::cx_vec& gamma) {
  const cxd u = model_gain(model, gamma);
  const arma::cx_vec lin =
      model.q + arma::conj((model.b + model.b.st()) * gamma);
  return -u * lin;
}

arma::cx_vec solve_surrogate(const arma::cx_vec& v, const arma::cx_vec& bstar,
                             double k, double radius_sq) {
  const double vv = std::pow(arma::norm(v), 2);
  if (!(k > vv))
    throw config_error("surrogate curvature must exceed ||v||^2");
  const double radius = std::sqrt(radius_sq);

  const double bnorm = arma::norm(bstar);
  if (bnorm == 0.0) {
    // Degenerate linear term: the quadratic is minimized along v.
    if (vv > 0.0) return radius * (v / arma::norm(v));
    arma::cx_vec g(v.n_elem, arma::fill::zeros);
    if (g.n_elem > 0) g[0] = radius;
    return g;
  }

  // Split bstar into components along and orthogonal to v.  The constrained
  // stationary points solve ((k + nu) I - v v^H) gamma = bstar; with
  // mu = k + nu - ||v||^2 the squared norm is
  //   h(mu) = |beta|^2 / mu^2 + ||b_perp||^2 / (mu + ||v||^2)^2,
  // strictly decreasing on mu > 0.
  arma::cx_vec vhat;
  cxd beta(0.0, 0.0);
  if (vv > 0.0) {
    vhat = v / arma::norm(v);
    beta = arma::cdot(vhat, bstar);
  } else {
    vhat = arma::cx_vec(v.n_elem, arma::fill::zeros);
  }
  const arma::cx_vec b_perp = bstar - beta * vhat;
  const double beta2 = std::norm(beta);
  const double perp2 = std::pow(arma::norm(b_perp), 2);

  auto norm_sq_at = [&](double mu) {
    return beta2 / (mu * mu) + perp2 / std::pow(mu + vv, 2);
  };
  auto gamma_at = [&](double mu) -> arma::cx_vec {
    return (beta / mu) * vhat + b_perp / (mu + vv);
  };

  // Hard case: bstar (numerically) orthogonal to v and the orthogonal
  // component alone cannot reach the radius even as mu -> 0.  The boundary
  // solution adds a null-space component along v.
  const double perp_limit = vv > 0.0 ? perp2 / (vv * vv)
                                     : std::numeric_limits<double>::infinity();
  if (beta2 <= 1e-60 * bnorm * bnorm && perp_limit < radius_sq && vv > 0.0) {
    const arma::cx_vec base = b_perp / vv;
    const double alpha =
        std::sqrt(std::max(0.0, radius_sq - std::pow(arma::norm(base), 2)));
    return base + alpha * vhat;
  }

  // Bracket the root of h(mu) = radius_sq; h(mu) <= ||bstar||^2 / mu^2 gives
  // the upper starting point.
  double hi = std::max(1.0, bnorm / radius);
  while (norm_sq_at(hi) > radius_sq) hi *= 2.0;
  double lo = hi;
  while (norm_sq_at(lo) < radius_sq) {
    lo *= 0.5;
    if (lo < 1e-290) break;  // only reachable in the guarded hard case
  }
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double n2 = norm_sq_at(mid);
    if (n2 > radius_sq)
      lo = mid;
    else
      hi = mid;
    if (std::abs(n2 - radius_sq) <= 1e-10 * radius_sq &&
        (hi - lo) <= 1e-12 * hi)
      break;
  }
  return gamma_at(0.5 * (lo + hi));
}

SurfaceResult sca_optimize(const SurfaceModel& model,
                           const arma::cx_vec& gamma0, double amp_budget_sq,
                           const ScaOptions& opt) {
  SurfaceResult result;
  result.gamma = gamma0;
  double f_curr = model_objective(model, result.gamma);
  result.objective_trace.push_back(f_curr);

  for (int it = 0; it < opt.max_iter; ++it) {
    const cxd u = model_gain(model, result.gamma);
    const arma::cx_vec v = model.q + model.b.t() * arma::conj(result.gamma);
    const double k = std::pow(arma::norm(v), 2) * (1.0 + 1e-6);
    const arma::cx_vec bstar =
        k * result.gamma + u * arma::conj(model.b * result.gamma);
    const arma::cx_vec target = solve_surrogate(v, bstar, k, amp_budget_sq);

    const arma::cx_vec step = target - result.gamma;
    const double slope =
        2.0 * std::real(arma::cdot(model_gradient(model, result.gamma), step));

    double eta = 1.0;
    bool accepted = false;
    double f_try = f_curr;
    arma::cx_vec gamma_try;
    for (int bt = 0; bt <= opt.max_backtracks; ++bt) {
      gamma_try = result.gamma + eta * step;
      f_try = model_objective(model, gamma_try);
      if (f_try <= f_curr + opt.armijo_slope * eta * slope &&
          f_try <= f_curr) {
        accepted = true;
        break;
      }
      eta *= opt.armijo_shrink;
    }
    if (!accepted) {
      result.line_search_failed = true;
      break;
    }

    result.gamma = gamma_try;
    result.objective_trace.push_back(f_try);
    ++result.iterations;
    const bool small_change = rel_change(f_try, f_curr) <= opt.conv_tol;
    f_curr = f_try;
    if (eta < 1.0 || small_change) break;
  }
  return result;
}

SurfaceResult gradient_optimize(const SurfaceModel& model,
                                const arma::cx_vec& gamma0,
                                double amp_budget_sq,
                                const GradientOptions& opt) {
  SurfaceResult result;
  const double radius = std::sqrt(amp_budget_sq);
  const arma::cx_vec v0 = model.q + model.b.t() * arma::conj(gamma0);
  const double v0_sq = std::pow(arma::norm(v0), 2);
  const double step = opt.step_scale / std::max(v0_sq, 1e-300);

  arma::cx_vec gamma = gamma0;
  double f_curr = model_objective(model, gamma);
  result.gamma = gamma;
  result.objective_trace.push_back(f_curr);
  double f_best = f_curr;

  for (int it = 0; it < opt.max_iter; ++it) {
    arma::cx_vec next = gamma - step * model_gradient(model, gamma);
    const double norm_next = arma::norm(next);
    if (norm_next > 0.0) next *= radius / norm_next;
    const double f_next = model_objective(model, next);
    result.objective_trace.push_back(f_next);
    ++result.iterations;
    if (f_next < f_best) {
      f_best = f_next;
      result.gamma = next;
    }
    const bool small_change = rel_change(f_next, f_curr) <= opt.conv_tol;
    gamma = next;
    f_curr = f_next;
    if (small_change) break;
  }
  return result;
}

FilterPair fw_digital(const arma::cx_mat& h_eff, double p_base) {
  arma::cx_mat u_mat, v_mat;
  arma::vec sv;
  if (!arma::svd(u_mat, sv, v_mat, h_eff))
    throw singular_matrix_error("SVD of the effective channel failed", 0.0);
  FilterPair fw;
  fw.f = u_mat.col(0);
  fw.w = std::sqrt(p_base) * v_mat.col(0);
  return fw;
}

FilterPair fw_analog(const arma::cx_mat& h_eff, double p_base, int max_iter,
                     double tol) {
  const arma::uword n_user = h_eff.n_rows;
  const arma::uword n_base = h_eff.n_cols;
  const double f_mag = 1.0 / std::sqrt(double(n_user));
  const double w_mag = std::sqrt(p_base / double(n_base));

  auto unit_phases = [](const arma::cx_vec& x) -> arma::cx_vec {
    arma::cx_vec p(x.n_elem);
    for (arma::uword i = 0; i < x.n_elem; ++i) {
      const double mag = std::abs(x[i]);
      p[i] = mag > 0.0 ? x[i] / mag : cxd(1.0, 0.0);
    }
    return p;
  };

  FilterPair fw;
  fw.w = w_mag * arma::cx_vec(n_base, arma::fill::ones);
  fw.f = f_mag * unit_phases(h_eff * fw.w);
  double gain = std::abs(arma::cdot(fw.f, h_eff * fw.w));
  for (int it = 0; it < max_iter; ++it) {
    fw.w = w_mag * unit_phases(h_eff.t() * fw.f);
    fw.f = f_mag * unit_phases(h_eff * fw.w);
    const double next = std::abs(arma::cdot(fw.f, h_eff * fw.w));
    if (rel_change(next, gain) <= tol) {
      gain = next;
      break;
    }
    gain = next;
  }
  return fw;
}

JointResult joint_beamforming(const arma::cx_mat& g_dl,
                              const arma::cx_mat& scattering,
                              arma::uword n_user, arma::uword n_base,
                              double p_base, double amp_budget_sq,
                              SurfaceSolver solver, Rng& rng,
                              const JointOptions& opt) {
  const arma::uword n_cells = scattering.n_rows;
  const bool conventional = solver == SurfaceSolver::closed_form;
  const arma::uword expected_cols = conventional ? n_cells : n_cells * n_cells;
  if (g_dl.n_cols != expected_cols)
    throw config_error("equivalent channel format does not match the solver");
  if (g_dl.n_rows != n_user * n_base)
    throw config_error("equivalent channel row count does not match arrays");

  JointResult best;
  best.model_gain_sq = -1.0;

  arma::cx_vec gamma = random_surface_start(n_cells, amp_budget_sq, rng);
  double prev_obj = -1.0;
  for (int it = 0; it < opt.outer_max_iter; ++it) {
    const arma::cx_mat h_eff = effective_downlink(
        g_dl, gamma, scattering, conventional, n_user, n_base);
    const FilterPair fw = fw_digital(h_eff, p_base);

    // Surface subproblem for the refreshed filters.
    const arma::cx_vec t = g_dl.st() * arma::kron(fw.w, arma::conj(fw.f));
    bool failed = false;
    if (conventional) {
      const double t_norm = arma::norm(t);
      if (t_norm > 0.0)
        gamma = std::sqrt(amp_budget_sq) * arma::conj(t) / t_norm;
    } else {
      const SurfaceModel model = make_surface_model(t, scattering);
      SurfaceResult sr;
      if (solver == SurfaceSolver::sca)
        sr = sca_optimize(model, gamma, amp_budget_sq, opt.sca);
      else
        sr = gradient_optimize(model, gamma, amp_budget_sq, opt.gradient);
      gamma = sr.gamma;
      failed = sr.line_search_failed;
    }

    const arma::cx_mat h_next = effective_downlink(
        g_dl, gamma, scattering, conventional, n_user, n_base);
    const double obj =
        std::norm(arma::cdot(fw.f, h_next * fw.w));
    if (obj > best.model_gain_sq) {
      best.f = fw.f;
      best.w = fw.w;
      best.gamma = gamma;
      best.model_gain_sq = obj;
    }
    best.line_search_failed = best.line_search_failed || failed;
    best.outer_iterations = it + 1;
    if (it > 0 && rel_change(obj, prev_obj) <= opt.outer_tol) break;
    prev_obj = obj;
  }
  return best;
}

double downlink_snr_exact(const arma::cx_vec& f, const arma::cx_vec& w,
                          const arma::cx_vec& gamma, const arma::cx_mat& h_bi,
                          const arma::cx_mat& h_iu,
                          const arma::cx_mat& scattering, double sigma2_user,
                          double sigma2_surface) {
  const arma::cx_mat response = ris_response(gamma, scattering);
  const arma::cx_mat user_side = h_iu.st() * response;  // N_U x N_I
  const cxd gain = arma::as_scalar(f.t() * user_side * h_bi.st() * w);
  const double signal = std::norm(gain);
  const double noise =
      std::pow(arma::norm(f), 2) * sigma2_user +
      std::pow(arma::norm(f.t() * user_side), 2) * sigma2_surface;
  return signal / noise;
}

}  // namespace arisim
