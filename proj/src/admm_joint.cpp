#include "gar/admm_joint.hpp"

#include "gar/admm_laplacian.hpp"

#include <cassert>
#include <cmath>

namespace gar {

std::pair<Matrix, double> solve_bordered_system(
    const Eigen::Ref<const Vector>& d_eigvals,
    const Eigen::Ref<const Matrix>& sigma_tilde,
    const Eigen::Ref<const Matrix>& e_k, double rhs_scalar, double rho,
    double trace_sigma_hat) {
  const int p = static_cast<int>(d_eigvals.size());
  if (sigma_tilde.rows() != p || e_k.rows() != p)
    throw Error(ErrorCode::DimensionMismatch, "solve_bordered_system: size");
  for (int i = 0; i < p; ++i)
    if (d_eigvals[i] <= 0.0)
      throw Error(ErrorCode::InvalidArgument,
                  "solve_bordered_system: eigenvalues must be positive");

  const double delta_x = 2.0 * trace_sigma_hat + rho;

  // dstar = delta_x - S_x^T D_x^{-1} S_x with S_x = 2 vec(sigma_tilde).
  double dstar = delta_x;
  double dxinv_sx_dot_e = 0.0;
  Matrix dx_inv_sx(p, p);
  for (int j = 0; j < p; ++j) {
    for (int i = 0; i < p; ++i) {
      const double dx_inv = 1.0 / (d_eigvals[i] + d_eigvals[j]);
      dx_inv_sx(i, j) = dx_inv * 2.0 * sigma_tilde(i, j);
      dstar -= dx_inv_sx(i, j) * 2.0 * sigma_tilde(i, j);
      dxinv_sx_dot_e += dx_inv_sx(i, j) * e_k(i, j);
    }
  }
  if (dstar <= 1e-12)
    throw Error(ErrorCode::SchurSingular,
                "solve_bordered_system: Schur complement <= 1e-12");

  // theta0 = (rhs - S_x^T D_x^{-1} (-vec E)) / dstar
  const double theta0 = (rhs_scalar + dxinv_sx_dot_e) / dstar;

  // vec(Ltilde) = D_x^{-1} (-vec E - theta0 S_x)
  Matrix l_tilde(p, p);
  for (int j = 0; j < p; ++j)
    for (int i = 0; i < p; ++i)
      l_tilde(i, j) = -e_k(i, j) / (d_eigvals[i] + d_eigvals[j]) -
                      dx_inv_sx(i, j) * theta0;
  return {std::move(l_tilde), theta0};
}

namespace {

struct InnerResult {
  double phi;
  Vector lambda_star;
  bool converged;
};

// Alternating (phi, Lambda*) updates minimizing
//   -2 sum log(lambda*_j) + (rho/2) sum (lambda*_j - phi - lambda_j)^2
//   + (rho/2) (phi - (theta0 + t))^2,  lambda*_j >= phi >= eps.
InnerResult phi_z_inner(const Vector& lambda, double phi_init, double theta0,
                        double t, double rho, const InnerPhiZSettings& inner) {
  const int p = static_cast<int>(lambda.size());
  auto lambda_update = [&](double phi, Vector& out) {
    for (int j = 0; j < p; ++j) {
      const double shifted = phi + lambda[j];
      const double star_plus =
          (rho * shifted +
           std::sqrt(rho * rho * shifted * shifted + 8.0 * rho)) /
          (2.0 * rho);
      out[j] = std::max(phi, star_plus);
    }
  };

  double phi_c = phi_init;
  Vector lambda_c(p);
  lambda_update(phi_c, lambda_c);

  Vector lambda_new(p);
  for (int step = 0; step < inner.max_inner_iter; ++step) {
    const double phi_star =
        ((lambda_c - lambda).sum() + theta0 + t) / (p + 1.0);
    const double phi_new = std::max(inner.eps_floor, phi_star);
    lambda_update(phi_new, lambda_new);

    const double resid = std::sqrt((phi_new - phi_c) * (phi_new - phi_c) +
                                   (lambda_new - lambda_c).squaredNorm());
    const double scale_new =
        std::sqrt(phi_new * phi_new + lambda_new.squaredNorm());
    const double scale_c = std::sqrt(phi_c * phi_c + lambda_c.squaredNorm());
    const double eps_new = inner.delta_abs * std::sqrt(p + 1.0) +
                           inner.delta_rel * std::max(scale_new, scale_c);
    phi_c = phi_new;
    lambda_c = lambda_new;
    if (resid <= eps_new) return {phi_c, lambda_c, true};
  }
  return {phi_c, lambda_c, false};
}

}  // namespace

JointSolveResult solve_joint_theta_l(const SampleCovariance& sigma_hat,
                                     const Eigen::Ref<const Vector>& v0,
                                     const NullSet& null_set,
                                     const AdmmSettings& settings,
                                     const InnerPhiZSettings& inner,
                                     double phi_init) {
  const int p = sigma_hat.p;
  if (v0.size() != p || null_set.p() != p)
    throw Error(ErrorCode::DimensionMismatch, "solve_joint: size mismatch");
  if ((v0.array() <= 0.0).any())
    throw Error(ErrorCode::InvalidArgument, "solve_joint: v0 must be positive");

  const double rho = settings.rho;
  Matrix c = sigma_hat.sigma_hat + rho * Matrix::Identity(p, p) +
             (rho / 2.0) * (v0 * v0.transpose());
  const EigenDecomposition c_eig = eigen_sym(c);
  const Matrix sigma_tilde =
      c_eig.q.transpose() * sigma_hat.sigma_hat * c_eig.q;
  const double trace_sigma = sigma_hat.sigma_hat.trace();
  // The similarity transform preserves the trace; delta_x may use either.
  assert(std::abs(sigma_tilde.trace() - trace_sigma) <=
         1e-10 * std::max(1.0, std::abs(trace_sigma)));

  if (phi_init <= 0.0) {
    // Warm start at the Step 0 estimator 1/sqrt(lambda_max(Sigma_hat)).
    const double lambda_max =
        eigen_sym(sigma_hat.sigma_hat).d.maxCoeff();
    phi_init = lambda_max > 1e-14 ? 1.0 / std::sqrt(lambda_max)
                                  : inner.eps_floor;
  }

  SplitState s = SplitState::zero(p);
  double phi = std::max(inner.eps_floor, phi_init);
  double theta0 = phi;
  double t = 0.0;

  JointSolveResult out;
  out.trace.converged = false;

  Matrix z_prev = s.z, w_prev = s.w;
  double phi_prev = phi;
  for (int iter = 0; iter < settings.max_iter; ++iter) {
    // (theta0, L)-update via the bordered normal system.
    const Matrix rv = s.r * v0.transpose();
    const Matrix e_outer = -rho * (s.z - s.u) + rho * (s.w + s.v) +
                           (rho / 2.0) * (rv + rv.transpose());
    const Matrix e_k = c_eig.q.transpose() * e_outer * c_eig.q;
    auto [l_tilde, theta_new] = solve_bordered_system(
        c_eig.d, sigma_tilde, e_k, rho * (phi - t), rho, trace_sigma);
    theta0 = theta_new;
    s.l = c_eig.q * l_tilde * c_eig.q.transpose();
    s.l = ((s.l + s.l.transpose()) / 2.0).eval();
    if (!s.l.allFinite() || !std::isfinite(theta0))
      throw Error(ErrorCode::NonFiniteObjective, "solve_joint: non-finite");

    // (phi, Z)-update: inner alternation in the eigenbasis of L + U.
    const EigenDecomposition lu_eig = eigen_sym(s.l + s.u);
    const InnerResult in =
        phi_z_inner(lu_eig.d, phi, theta0, t, rho, inner);
    if (!in.converged) out.trace.inner_converged = false;
    phi = in.phi;
    const Vector z_diag = (in.lambda_star.array() - phi).matrix();
    s.z = lu_eig.q * z_diag.asDiagonal() * lu_eig.q.transpose();

    // W-update with null-set pinning.
    s.w = -(s.l + s.v);
    Vector w_diag = s.w.diagonal();
    s.w = s.w.cwiseMax(0.0);
    s.w.array() *= null_set.keep_mask();
    s.w.diagonal() = w_diag;

    // Dual updates.
    s.u += s.l - s.z;
    s.v += s.l + s.w;
    const Vector lv0 = s.l * v0;
    s.r += lv0;
    t += theta0 - phi;

    // Residuals and thresholds (scalar terms included).
    const double primal = std::sqrt(
        (s.l - s.z).squaredNorm() + (s.l + s.w).squaredNorm() +
        lv0.squaredNorm() + (theta0 - phi) * (theta0 - phi));
    const double dual =
        rho * std::sqrt((s.z - z_prev + w_prev - s.w).squaredNorm() +
                        (phi - phi_prev) * (phi - phi_prev));
    const double scale_lhs = std::sqrt(2.0 * s.l.squaredNorm() +
                                       lv0.squaredNorm() + theta0 * theta0);
    const double scale_rhs =
        std::sqrt(s.z.squaredNorm() + s.w.squaredNorm() + phi * phi);
    const double eps_primal =
        std::sqrt(double(p) * (2.0 * p + 1.0) + 1.0) * settings.eps_abs +
        settings.eps_rel * std::max(scale_lhs, scale_rhs);
    const Matrix dual_scale = s.u + s.v + s.r * v0.transpose();
    const double eps_dual =
        std::sqrt(double(p) * p + 1.0) * settings.eps_abs +
        settings.eps_rel * rho *
            std::sqrt(dual_scale.squaredNorm() + t * t);
    out.trace.record(primal, dual, eps_primal, eps_dual);
    out.trace.iterations = iter + 1;

    z_prev = s.z;
    w_prev = s.w;
    phi_prev = phi;
    if (primal <= eps_primal && dual <= eps_dual) {
      out.trace.converged = true;
      break;
    }
  }

  // Feasibility projection of the reported estimate.
  Matrix l_out = s.l;
  for (int i = 0; i < p; ++i)
    for (int j = 0; j < p; ++j)
      if (i != j) l_out(i, j) = std::min(l_out(i, j), 0.0);
  Vector diag = l_out.diagonal();
  l_out.array() *= null_set.keep_mask();
  l_out.diagonal() = diag;

  out.model.theta0 = theta0 > 0.0 ? theta0 : phi;
  out.model.laplacian.entries = std::move(l_out);
  out.model.laplacian.space = LaplacianSpace::Final;
  out.model.laplacian.support = null_set.kept_edges();
  out.model.laplacian.v0 = v0;
  out.model.v0 = v0;
  out.phi = phi;
  return out;
}

}  // namespace gar
