#pragma once

#include "gar/admm.hpp"
#include "gar/graph.hpp"
#include "gar/linalg.hpp"

#include <optional>

namespace gar {

/// Split variables and scaled duals of the L-problem ADMM
/// (constraints L - Z = 0, L + W = 0, L v0 = 0).
struct SplitState {
  Matrix l, z, w, u, v;
  Vector r;

  static SplitState zero(int p) {
    SplitState s;
    s.l = Matrix::Zero(p, p);
    s.z = s.l;
    s.w = s.l;
    s.u = s.l;
    s.v = s.l;
    s.r = Vector::Zero(p);
    return s;
  }
};

struct LaplacianSolveResult {
  NormalizedLaplacianEstimate estimate;
  AdmmTrace trace;
  SplitState state;  // final iterates, usable as a warm start
};

/// Closed-form Z-update eigenvalue shrinkage: each output is the unique
/// nonnegative minimizer of -2 log(theta0 + x) + (rho/2)(x - lambda_j)^2.
Vector z_update_eigen_shrink(double theta0, double rho,
                             const Eigen::Ref<const Vector>& eigvals);

/// ADMM minimizing trace((theta0 I + L)^2 Sigma_hat) - 2 log det(theta0 I + Z)
/// + penalty over the relaxed space {psd, symmetric, off-diag <= 0}, with an
/// optional L v0 = 0 constraint (pass v0 = 0 to drop it) and an optional null
/// set whose off-diagonals are pinned to zero (requires lambda = 0).
///
/// Non-convergence at max_iter is reported through the trace, not thrown; the
/// best (last) iterate is returned.
LaplacianSolveResult solve_l_given_theta_v0(
    const SampleCovariance& sigma_hat, double theta0,
    const Eigen::Ref<const Vector>& v0, double lambda,
    const std::optional<NullSet>& null_set, const AdmmSettings& settings,
    const SplitState* warm_start = nullptr);

}  // namespace gar
