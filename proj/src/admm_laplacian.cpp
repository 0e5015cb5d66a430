#include "gar/admm_laplacian.hpp"

#include <cmath>

namespace gar {

Vector z_update_eigen_shrink(double theta0, double rho,
                             const Eigen::Ref<const Vector>& eigvals) {
  Vector out(eigvals.size());
  for (Eigen::Index j = 0; j < eigvals.size(); ++j) {
    const double shifted = theta0 + eigvals[j];
    const double lambda_star_plus =
        (rho * shifted + std::sqrt(rho * rho * shifted * shifted + 8.0 * rho)) /
        (2.0 * rho);
    out[j] = std::max(0.0, lambda_star_plus - theta0);
  }
  return out;
}

LaplacianSolveResult solve_l_given_theta_v0(
    const SampleCovariance& sigma_hat, double theta0,
    const Eigen::Ref<const Vector>& v0, double lambda,
    const std::optional<NullSet>& null_set, const AdmmSettings& settings,
    const SplitState* warm_start) {
  const int p = sigma_hat.p;
  if (v0.size() != p)
    throw Error(ErrorCode::DimensionMismatch, "solve_l: v0 size mismatch");
  if (theta0 <= 0.0)
    throw Error(ErrorCode::InvalidArgument, "solve_l: theta0 must be > 0");
  if (null_set && lambda != 0.0)
    throw Error(ErrorCode::InvalidArgument,
                "solve_l: null-set variant requires lambda = 0");
  if (null_set && null_set->p() != p)
    throw Error(ErrorCode::DimensionMismatch, "solve_l: null set size mismatch");

  const double rho = settings.rho;
  const bool use_v0 = v0.norm() > 0.0;

  // C is iteration-independent; eigendecompose once.
  Matrix c = sigma_hat.sigma_hat + rho * Matrix::Identity(p, p);
  if (use_v0) c += (rho / 2.0) * (v0 * v0.transpose());
  const EigenDecomposition c_eig = eigen_sym(c);

  // constant part of D^(k): 2 theta0 Sigma_hat - lambda * Jtilde,
  // Jtilde = 2(1 1^T - I)
  Matrix d_const = 2.0 * theta0 * sigma_hat.sigma_hat;
  if (lambda != 0.0) {
    d_const -= lambda * 2.0 * (Matrix::Ones(p, p) - Matrix::Identity(p, p));
  }

  SplitState s = warm_start ? *warm_start : SplitState::zero(p);
  LaplacianSolveResult out;
  out.trace.converged = false;

  Matrix z_prev = s.z, w_prev = s.w;
  for (int iter = 0; iter < settings.max_iter; ++iter) {
    // L-update: solve C L + L C + D^(k) = 0 in the eigenbasis of C.
    Matrix d_k = d_const - rho * (s.z - s.u) + rho * (s.w + s.v);
    if (use_v0) {
      const Matrix rv = s.r * v0.transpose();
      d_k += (rho / 2.0) * (rv + rv.transpose());
    }
    s.l = sylvester_eig_solve(c_eig, d_k);
    if (!s.l.allFinite())
      throw Error(ErrorCode::NonFiniteObjective, "solve_l: non-finite iterate");

    // Z-update: eigen-shrinkage of L + U.
    const EigenDecomposition lu_eig = eigen_sym(s.l + s.u);
    const Vector shrunk = z_update_eigen_shrink(theta0, rho, lu_eig.d);
    s.z = lu_eig.q * shrunk.asDiagonal() * lu_eig.q.transpose();

    // W-update: projection, null-set entries pinned to zero.
    s.w = -(s.l + s.v);
    Vector w_diag = s.w.diagonal();
    s.w = s.w.cwiseMax(0.0);
    if (null_set) s.w.array() *= null_set->keep_mask();
    s.w.diagonal() = w_diag;

    // Dual updates.
    s.u += s.l - s.z;
    s.v += s.l + s.w;
    Vector lv0;
    if (use_v0) {
      lv0 = s.l * v0;
      s.r += lv0;
    }

    // Residuals and thresholds.
    const double lv0_sq = use_v0 ? lv0.squaredNorm() : 0.0;
    const double primal = std::sqrt((s.l - s.z).squaredNorm() +
                                    (s.l + s.w).squaredNorm() + lv0_sq);
    const double dual =
        rho * std::sqrt((s.z - z_prev + w_prev - s.w).squaredNorm());
    const double scale_lhs = std::sqrt(2.0 * s.l.squaredNorm() + lv0_sq);
    const double scale_rhs =
        std::sqrt(s.z.squaredNorm() + s.w.squaredNorm());
    const double eps_primal =
        std::sqrt(double(p) * (2.0 * p + 1.0)) * settings.eps_abs +
        settings.eps_rel * std::max(scale_lhs, scale_rhs);
    Matrix dual_scale = s.u + s.v;
    if (use_v0) dual_scale += s.r * v0.transpose();
    const double eps_dual = double(p) * settings.eps_abs +
                            settings.eps_rel * rho * dual_scale.norm();
    out.trace.record(primal, dual, eps_primal, eps_dual);
    out.trace.iterations = iter + 1;

    z_prev = s.z;
    w_prev = s.w;
    if (primal <= eps_primal && dual <= eps_dual) {
      out.trace.converged = true;
      break;
    }
  }

  // Project the reported estimate onto the sign/support constraints: the L
  // iterate satisfies them only up to the stopping thresholds.
  Matrix l_out = s.l;
  for (int i = 0; i < p; ++i)
    for (int j = 0; j < p; ++j)
      if (i != j) l_out(i, j) = std::min(l_out(i, j), 0.0);
  if (null_set) {
    Vector diag = l_out.diagonal();
    l_out.array() *= null_set->keep_mask();
    l_out.diagonal() = diag;
  }

  out.estimate.entries = std::move(l_out);
  out.estimate.space =
      null_set ? LaplacianSpace::Constrained : LaplacianSpace::Relaxed;
  if (null_set) out.estimate.support = null_set->kept_edges();
  if (use_v0) {
    out.estimate.space = LaplacianSpace::Final;
    out.estimate.v0 = v0;
  }
  out.state = std::move(s);
  return out;
}

}  // namespace gar
