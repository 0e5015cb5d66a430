#include "gar/linalg.hpp"

#include <atomic>
#include <cmath>
#include <mutex>
#include <thread>
#include <vector>

namespace gar {

void parallel_for(int n, int threads, const std::function<void(int)>& fn) {
  if (n <= 0) return;
  if (threads <= 1 || n == 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  const int workers = std::min(threads, n);
  std::atomic<int> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (;;) {
        const int i = next.fetch_add(1);
        if (i >= n) return;
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!first_error) first_error = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

EigenDecomposition eigen_sym(const Eigen::Ref<const Matrix>& m) {
  if (m.rows() != m.cols())
    throw Error(ErrorCode::DimensionMismatch, "eigen_sym: matrix not square");
  Eigen::SelfAdjointEigenSolver<Matrix> solver(m);
  if (solver.info() != Eigen::Success)
    throw Error(ErrorCode::NonFiniteObjective, "eigen_sym: solver failed");
  return {solver.eigenvectors(), solver.eigenvalues()};
}

SampleCovariance sample_covariance(const Eigen::Ref<const Matrix>& data,
                                   bool center) {
  const int n = static_cast<int>(data.rows());
  const int p = static_cast<int>(data.cols());
  if (n < 2 || p < 1)
    throw Error(ErrorCode::DimensionMismatch,
                "sample_covariance: need n >= 2 and p >= 1");
  SampleCovariance out;
  out.n = n;
  out.p = p;
  out.y_bar = center ? Vector(data.colwise().mean()) : Vector(Vector::Zero(p));
  Matrix centered = data.rowwise() - out.y_bar.transpose();
  out.sigma_hat = (centered.transpose() * centered) / double(n);
  out.sigma_hat = ((out.sigma_hat + out.sigma_hat.transpose()) / 2.0).eval();
  return out;
}

Matrix sylvester_eig_solve(const EigenDecomposition& c_eig,
                           const Eigen::Ref<const Matrix>& d) {
  const int p = c_eig.p();
  if (d.rows() != p || d.cols() != p)
    throw Error(ErrorCode::DimensionMismatch,
                "sylvester_eig_solve: dimension mismatch");
  Matrix d_tilde = c_eig.q.transpose() * d * c_eig.q;
  Matrix l_tilde(p, p);
  for (int j = 0; j < p; ++j) {
    for (int i = 0; i < p; ++i) {
      const double denom = c_eig.d[i] + c_eig.d[j];
      if (denom <= 1e-14)
        throw Error(ErrorCode::SingularPair,
                    "sylvester_eig_solve: eigenvalue pair sum <= 1e-14");
      l_tilde(i, j) = -d_tilde(i, j) / denom;
    }
  }
  Matrix l = c_eig.q * l_tilde * c_eig.q.transpose();
  return ((l + l.transpose()) / 2.0).eval();
}

double log_det_shifted(double theta, const Eigen::Ref<const Vector>& z_eig) {
  double sum = 0.0;
  for (Eigen::Index j = 0; j < z_eig.size(); ++j) {
    const double shifted = theta + z_eig[j];
    if (shifted <= 0.0)
      throw Error(ErrorCode::NonPositiveEigen,
                  "log_det_shifted: theta + eigenvalue <= 0");
    sum += std::log(shifted);
  }
  return sum;
}

}  // namespace gar
