#pragma once

#include "gar/admm.hpp"
#include "gar/graph.hpp"
#include "gar/linalg.hpp"

#include <utility>

namespace gar {

/// Inner (phi, Z) alternation controls. eps_floor keeps phi numerically
/// positive.
struct InnerPhiZSettings {
  double delta_abs = 1e-5;  // in [1e-5, 1e-4]
  double delta_rel = 1e-3;  // in [1e-3, 1e-2]
  int max_inner_iter = 1000;
  double eps_floor = 1e-6;
};

struct JointSolveResult {
  GarModel model;
  AdmmTrace trace;
  double phi = 0.0;  // final phi iterate (|theta0 - phi| bounded by primal eps)
};

/// Solves the bordered normal system
///   [ D_x  S_x  ] [vec(Ltilde)]   [ -vec(E)    ]
///   [ S_x^T delta_x ] [theta0  ] = [ rhs_scalar ]
/// in the eigenbasis (D_x = I (x) D + D (x) I applied entrywise as d_i + d_j,
/// S_x = 2 vec(sigma_tilde), delta_x = 2 trace_sigma_hat + rho) by Schur
/// complement on the scalar block. Returns (Ltilde, theta0).
std::pair<Matrix, double> solve_bordered_system(
    const Eigen::Ref<const Vector>& d_eigvals,
    const Eigen::Ref<const Matrix>& sigma_tilde,
    const Eigen::Ref<const Matrix>& e_k, double rhs_scalar, double rho,
    double trace_sigma_hat);

/// Joint ADMM over (theta0, L) given a positive unit v0 and the null set from
/// Step 1 (lambda = 0 throughout). phi_init <= 0 selects the warm start
/// 1/sqrt(lambda_max(Sigma_hat)); pass inner.eps_floor for the literal
/// cold initialization.
JointSolveResult solve_joint_theta_l(const SampleCovariance& sigma_hat,
                                     const Eigen::Ref<const Vector>& v0,
                                     const NullSet& null_set,
                                     const AdmmSettings& settings,
                                     const InnerPhiZSettings& inner,
                                     double phi_init = -1.0);

}  // namespace gar
