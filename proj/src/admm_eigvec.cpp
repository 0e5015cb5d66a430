#include "gar/admm_eigvec.hpp"

#include <cmath>

namespace gar {

namespace {

double f_of_mu(const Eigen::Ref<const Vector>& t_sq,
               const Eigen::Ref<const Vector>& eig_sq, double mu) {
  double sum = 0.0;
  for (Eigen::Index i = 0; i < t_sq.size(); ++i) {
    const double denom = eig_sq[i] + 2.0 * mu;
    sum += t_sq[i] / (denom * denom);
  }
  return sum;
}

}  // namespace

MuRootResult mu_root_solve(const Eigen::Ref<const Vector>& t_tilde_sq,
                           const Eigen::Ref<const Vector>& shifted_eigs_sq) {
  const double t_total = t_tilde_sq.sum();
  if (!(t_total > 0.0))
    throw Error(ErrorCode::InvalidArgument, "mu_root_solve: ||t||^2 must be > 0");

  // Feasible branch: all denominators positive.
  double mu_low = -shifted_eigs_sq.minCoeff() / 2.0 + 1e-14;
  double mu_high = std::sqrt(t_total) / 2.0;  // f(mu_high) <= 1
  if (mu_high <= mu_low) mu_high = mu_low + 1.0;

  if (f_of_mu(t_tilde_sq, shifted_eigs_sq, mu_low) < 1.0) {
    // f < 1 on the entire branch: no root; the branch endpoint minimizes
    // |f - 1| since f is decreasing.
    return {mu_low, true};
  }

  // Bisection to localize, then bracket-guarded Newton. f is strictly
  // decreasing, so f(mu) >= 1 places the root to the right of mu.
  double lo = mu_low, hi = mu_high;
  for (int it = 0; it < 80; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (f_of_mu(t_tilde_sq, shifted_eigs_sq, mid) >= 1.0)
      lo = mid;
    else
      hi = mid;
  }
  double mu = 0.5 * (lo + hi);
  for (int it = 0; it < 50; ++it) {
    const double f = f_of_mu(t_tilde_sq, shifted_eigs_sq, mu);
    if (std::abs(f - 1.0) <= 1e-13) break;
    if (f >= 1.0)
      lo = mu;
    else
      hi = mu;
    double deriv = 0.0;
    for (Eigen::Index i = 0; i < t_tilde_sq.size(); ++i) {
      const double denom = shifted_eigs_sq[i] + 2.0 * mu;
      deriv += -4.0 * t_tilde_sq[i] / (denom * denom * denom);
    }
    double mu_next = mu - (f - 1.0) / deriv;
    if (!(mu_next > lo && mu_next < hi)) mu_next = 0.5 * (lo + hi);
    mu = mu_next;
  }
  return {mu, false};
}

EigvecSolveResult solve_positive_eigvec(const EigvecProblem& prob,
                                        const AdmmSettings& settings) {
  const int p = static_cast<int>(prob.s.rows());
  if (prob.s.rows() != prob.s.cols())
    throw Error(ErrorCode::DimensionMismatch, "solve_positive_eigvec: S not square");

  const double rho = settings.rho;
  const double eps = prob.eps_floor;
  const EigenDecomposition s_eig = eigen_sym(prob.s);
  const Vector shifted_sq =
      (s_eig.d.array() - prob.lambda_star).square().matrix();

  Vector w = Vector::Constant(p, eps);
  Vector u = Vector::Zero(p);
  Vector v = Vector::Zero(p);
  Vector w_prev = w;

  EigvecSolveResult out;
  out.trace.converged = false;
  for (int iter = 0; iter < settings.max_iter; ++iter) {
    // v-update: (C + 2 mu I) v = t on the unit sphere, C = (S - lambda* I)^2.
    const Vector t = rho * (w - u);
    const Vector t_tilde = s_eig.q.transpose() * t;
    const Vector t_sq = t_tilde.array().square().matrix();
    if (!(t_sq.sum() > 0.0)) {
      // t = 0 leaves the sphere constraint undetermined; keep the previous v
      // (or the flat feasible start).
      if (v.norm() == 0.0) v = Vector::Constant(p, 1.0 / std::sqrt(double(p)));
    } else {
      const MuRootResult root = mu_root_solve(t_sq, shifted_sq);
      out.boundary_mu_hit = out.boundary_mu_hit || root.on_boundary;
      Vector v_tilde(p);
      for (int i = 0; i < p; ++i)
        v_tilde[i] = t_tilde[i] / (shifted_sq[i] + 2.0 * root.mu);
      v = s_eig.q * v_tilde;
      const double norm = v.norm();
      if (norm > 0.0) v /= norm;  // exact renormalization of fp residue
    }

    // w-update: entrywise floor at eps.
    w = (v + u).cwiseMax(eps);

    // dual update
    u += v - w;

    const double primal = (v - w).norm();
    const double dual = rho * (w - w_prev).norm();
    const double eps_primal = std::sqrt(2.0 * p) * settings.eps_abs +
                              settings.eps_rel * std::max(v.norm(), w.norm());
    const double eps_dual =
        std::sqrt(double(p)) * settings.eps_abs + settings.eps_rel * rho * u.norm();
    out.trace.record(primal, dual, eps_primal, eps_dual);
    out.trace.iterations = iter + 1;
    w_prev = w;
    if (primal <= eps_primal && dual <= eps_dual) {
      out.trace.converged = true;
      break;
    }
  }

  out.v = v;
  out.objective =
      0.5 * (prob.s * v - prob.lambda_star * v).squaredNorm();
  return out;
}

}  // namespace gar
