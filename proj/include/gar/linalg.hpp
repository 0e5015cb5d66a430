#pragma once

#include "gar/types.hpp"

namespace gar {

/// Symmetric eigendecomposition M = Q diag(d) Q^T with eigenvalues ascending.
struct EigenDecomposition {
  Matrix q;  // columns are eigenvectors
  Vector d;  // ascending

  int p() const { return static_cast<int>(d.size()); }
  Matrix reconstruct() const { return q * d.asDiagonal() * q.transpose(); }
};

EigenDecomposition eigen_sym(const Eigen::Ref<const Matrix>& m);

/// Sample covariance with divisor n (not n-1), matching the likelihood
/// normalization used throughout.
struct SampleCovariance {
  Matrix sigma_hat;  // stored exactly symmetric
  int n = 0;
  int p = 0;
  Vector y_bar;
};

SampleCovariance sample_covariance(const Eigen::Ref<const Matrix>& data,
                                   bool center = true);

/// Solves C L + L C + D = 0 for symmetric L given the eigendecomposition of a
/// positive definite C. Works entrywise in the eigenbasis
/// (Ltilde_ij = -Dtilde_ij / (d_i + d_j)); the Kronecker system is never
/// materialized.
Matrix sylvester_eig_solve(const EigenDecomposition& c_eig,
                           const Eigen::Ref<const Matrix>& d);

/// sum_j log(theta + z_j); throws NonPositiveEigen if any shifted eigenvalue
/// is <= 0.
double log_det_shifted(double theta, const Eigen::Ref<const Vector>& z_eig);

}  // namespace gar
