#pragma once

#include "gar/admm.hpp"
#include "gar/linalg.hpp"

namespace gar {

/// Find a unit vector with entries >= eps_floor minimizing
/// (1/2) ||S v - lambda_star v||^2. With S a Laplacian estimate and
/// lambda_star = 0 this recovers the positive null eigenvector v0.
struct EigvecProblem {
  Matrix s;                  // symmetric psd
  double lambda_star = 0.0;  // target eigenvalue
  double eps_floor = 1e-6;
};

struct MuRootResult {
  double mu = 0.0;
  /// True when f < 1 over the whole feasible branch; mu is then the branch
  /// endpoint minimizing |f - 1| (solution on the constraint boundary).
  bool on_boundary = false;
};

/// Solves sum_i t_tilde_sq[i] / (shifted_eigs_sq[i] + 2 mu)^2 = 1 for mu on
/// the branch where all denominators are positive. f is strictly decreasing
/// there; bracketed bisection plus Newton polish gives |f(mu)-1| <= 1e-12.
MuRootResult mu_root_solve(const Eigen::Ref<const Vector>& t_tilde_sq,
                           const Eigen::Ref<const Vector>& shifted_eigs_sq);

struct EigvecSolveResult {
  Vector v;          // unit norm
  AdmmTrace trace;
  double objective = 0.0;  // (1/2)||S v - lambda_star v||^2 at the returned v
  bool boundary_mu_hit = false;
};

/// rho for this solver defaults to 1.0 (settings.rho).
EigvecSolveResult solve_positive_eigvec(const EigvecProblem& prob,
                                        const AdmmSettings& settings);

}  // namespace gar
