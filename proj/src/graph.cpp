#include "gar/graph.hpp"

#include "gar/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

namespace gar {

Adjacency Adjacency::from_weights(Matrix w) {
  if (w.rows() != w.cols())
    throw Error(ErrorCode::DimensionMismatch, "Adjacency: matrix not square");
  if (((w - w.transpose()).array().abs() > kTolSym).any())
    throw Error(ErrorCode::InvalidArgument, "Adjacency: matrix not symmetric");
  if ((w.array() < 0.0).any())
    throw Error(ErrorCode::InvalidArgument, "Adjacency: negative weight");
  Adjacency a{std::move(w)};
  const Vector deg = a.degrees();
  for (int i = 0; i < a.p(); ++i) {
    if (deg[i] <= 0.0)
      throw Error(ErrorCode::IsolatedNode,
                  "Adjacency: isolated node " + std::to_string(i));
  }
  return a;
}

bool GraphTopology::has_edge(int i, int j) const {
  if (i > j) std::swap(i, j);
  return std::binary_search(edges.begin(), edges.end(), std::make_pair(i, j));
}

void GraphTopology::normalize() {
  for (auto& e : edges) {
    if (e.first > e.second) std::swap(e.first, e.second);
  }
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  std::erase_if(edges, [](const auto& e) { return e.first == e.second; });
}

NullSet NullSet::complement_of(const GraphTopology& topology) {
  NullSet ns;
  ns.keep_ = Eigen::ArrayXXd::Zero(topology.p, topology.p);
  ns.keep_.matrix().diagonal().setOnes();
  for (const auto& [i, j] : topology.edges) {
    ns.keep_(i, j) = 1.0;
    ns.keep_(j, i) = 1.0;
  }
  return ns;
}

NullSet NullSet::all_offdiag(int p) {
  GraphTopology empty;
  empty.p = p;
  return complement_of(empty);
}

GraphTopology NullSet::kept_edges() const {
  GraphTopology topo;
  topo.p = p();
  for (int i = 0; i < p(); ++i)
    for (int j = i + 1; j < p(); ++j)
      if (keep_(i, j) != 0.0) topo.edges.emplace_back(i, j);
  return topo;
}

std::string ValidationVerdict::summary() const {
  std::ostringstream os;
  os << (passed ? "pass" : "fail");
  auto mark = [&](const char* name, bool ok) {
    os << ' ' << name << '=' << (ok ? '1' : '0');
  };
  mark("sym", symmetric);
  mark("rowsum0", row_sums_zero);
  mark("offdiag<=0", offdiag_nonpositive);
  mark("diag01", diag_in_unit_interval);
  mark("offdiag>=-1", offdiag_geq_minus_one);
  mark("psd", psd);
  mark("eig0", has_zero_eigenvalue);
  mark("v0>0", positive_null_vector);
  if (degenerate_null_space) os << " [degenerate null space]";
  return os.str();
}

Matrix GarModel::shift() const {
  return theta0 * Matrix::Identity(p(), p()) + laplacian.entries;
}

Matrix GarModel::precision() const {
  Matrix m = shift();
  return m * m;
}

Matrix GarModel::covariance() const {
  const EigenDecomposition eig = eigen_sym(laplacian.entries);
  Vector inv_sq(eig.d.size());
  for (Eigen::Index j = 0; j < eig.d.size(); ++j) {
    const double shifted = theta0 + eig.d[j];
    if (shifted <= 0.0)
      throw Error(ErrorCode::NonPD, "GarModel: theta0 I + L not PD");
    inv_sq[j] = 1.0 / (shifted * shifted);
  }
  return eig.q * inv_sq.asDiagonal() * eig.q.transpose();
}

void GarModel::validate() const {
  if (theta0 <= 0.0)
    throw Error(ErrorCode::InvalidArgument, "GarModel: theta0 <= 0");
  if (v0.size() != p())
    throw Error(ErrorCode::DimensionMismatch, "GarModel: v0 size mismatch");
  if ((v0.array() <= 0.0).any())
    throw Error(ErrorCode::InvalidArgument, "GarModel: v0 not positive");
  if (std::abs(v0.norm() - 1.0) > 1e-12)
    throw Error(ErrorCode::InvalidArgument, "GarModel: v0 not unit norm");
  const Matrix prod = precision() * covariance();
  const double rel =
      (prod - Matrix::Identity(p(), p())).norm() / std::sqrt(double(p()));
  if (rel > 1e-8)
    throw Error(ErrorCode::InvalidArgument,
                "GarModel: Omega*Sigma != I beyond tolerance");
}

NormalizedLaplacianEstimate normalized_laplacian_from_adjacency(
    const Adjacency& a) {
  const Vector deg = a.degrees();
  for (int i = 0; i < a.p(); ++i) {
    if (deg[i] <= 0.0)
      throw Error(ErrorCode::IsolatedNode,
                  "normalized_laplacian_from_adjacency: isolated node " +
                      std::to_string(i));
  }
  const Vector dinv_sqrt = deg.array().rsqrt();
  Matrix l = -(dinv_sqrt.asDiagonal() * a.weights * dinv_sqrt.asDiagonal());
  l.diagonal().array() += 1.0;
  l = ((l + l.transpose()) / 2.0).eval();
  NormalizedLaplacianEstimate out;
  out.entries = std::move(l);
  out.space = LaplacianSpace::Final;
  Vector v0 = deg.array().sqrt();
  out.v0 = v0 / v0.norm();
  return out;
}

namespace {

// Searches the (near-)null space spanned by the columns of q0 for a strictly
// positive vector: alternate projection onto the span and the nonnegative
// orthant. Returns the candidate, sign-fixed.
Vector positive_null_candidate(const Matrix& q0) {
  const int p = static_cast<int>(q0.rows());
  Vector v = q0 * (q0.transpose() * Vector::Ones(p));
  if (v.norm() < 1e-14) v = q0.col(0);
  v.normalize();
  for (int it = 0; it < 200; ++it) {
    Vector clipped = v.cwiseMax(0.0);
    Vector projected = q0 * (q0.transpose() * clipped);
    const double norm = projected.norm();
    if (norm < 1e-14) break;
    projected /= norm;
    if ((projected - v).norm() < 1e-14) {
      v = projected;
      break;
    }
    v = projected;
  }
  // sign-fix: flip so the largest-magnitude entry is positive
  Eigen::Index imax;
  v.cwiseAbs().maxCoeff(&imax);
  if (v[imax] < 0.0) v = -v;
  return v;
}

}  // namespace

ValidationVerdict check_laplacian(const Eigen::Ref<const Matrix>& m,
                                  double tol) {
  if (m.rows() != m.cols())
    throw Error(ErrorCode::DimensionMismatch, "check_laplacian: not square");
  const int p = static_cast<int>(m.rows());
  ValidationVerdict v;
  v.symmetric = ((m - m.transpose()).array().abs() <= kTolSym).all();
  v.row_sums_zero = (m.rowwise().sum().array().abs() <= tol * std::max(1.0, m.norm())).all();
  v.offdiag_nonpositive = true;
  for (int i = 0; i < p && v.offdiag_nonpositive; ++i)
    for (int j = 0; j < p; ++j)
      if (i != j && m(i, j) > tol) {
        v.offdiag_nonpositive = false;
        break;
      }
  const Matrix sym = (m + m.transpose()) / 2.0;
  const EigenDecomposition eig = eigen_sym(sym);
  const double scale = std::max(1.0, eig.d.cwiseAbs().maxCoeff());
  v.psd = eig.d.minCoeff() >= -tol * scale;
  v.has_zero_eigenvalue = std::abs(eig.d.minCoeff()) <= tol * scale;
  v.passed = v.symmetric && v.row_sums_zero && v.offdiag_nonpositive;
  return v;
}

ValidationVerdict check_normalized_laplacian(const Eigen::Ref<const Matrix>& m,
                                             double tol) {
  if (m.rows() != m.cols())
    throw Error(ErrorCode::DimensionMismatch,
                "check_normalized_laplacian: not square");
  const int p = static_cast<int>(m.rows());
  ValidationVerdict v;
  v.symmetric = ((m - m.transpose()).array().abs() <= kTolSym).all();
  v.diag_in_unit_interval =
      (m.diagonal().array() >= -tol).all() && (m.diagonal().array() <= 1.0 + tol).all();
  v.offdiag_nonpositive = true;
  v.offdiag_geq_minus_one = true;
  for (int i = 0; i < p; ++i)
    for (int j = 0; j < p; ++j) {
      if (i == j) continue;
      if (m(i, j) > tol) v.offdiag_nonpositive = false;
      if (m(i, j) < -1.0 - tol) v.offdiag_geq_minus_one = false;
    }
  const Matrix sym = (m + m.transpose()) / 2.0;
  const EigenDecomposition eig = eigen_sym(sym);
  const double scale = std::max(1.0, eig.d.cwiseAbs().maxCoeff());
  v.psd = eig.d.minCoeff() >= -tol * scale;
  v.has_zero_eigenvalue = std::abs(eig.d.minCoeff()) <= tol * scale;

  if (v.has_zero_eigenvalue) {
    int multiplicity = 0;
    while (multiplicity < p && std::abs(eig.d[multiplicity]) <= tol * scale)
      ++multiplicity;
    v.degenerate_null_space = multiplicity > 1;
    const Matrix q0 = eig.q.leftCols(multiplicity);
    v.null_vector = positive_null_candidate(q0);
    v.positive_null_vector = (v.null_vector.array() > tol).all();
  }
  v.passed = v.symmetric && v.diag_in_unit_interval && v.offdiag_nonpositive &&
             v.offdiag_geq_minus_one && v.psd && v.has_zero_eigenvalue &&
             v.positive_null_vector;
  return v;
}

GraphTopology topology_from_laplacian(const Eigen::Ref<const Matrix>& l,
                                      double eps_thre) {
  if (eps_thre <= 0.0)
    throw Error(ErrorCode::InvalidArgument,
                "topology_from_laplacian: eps_thre must be > 0");
  GraphTopology topo;
  topo.p = static_cast<int>(l.rows());
  for (int i = 0; i < topo.p; ++i)
    for (int j = i + 1; j < topo.p; ++j)
      if (std::abs(l(i, j)) > eps_thre) topo.edges.emplace_back(i, j);
  return topo;
}

void write_edge_list(std::ostream& os, const Eigen::Ref<const Matrix>& l) {
  const int p = static_cast<int>(l.rows());
  os.precision(17);
  for (int i = 0; i < p; ++i)
    for (int j = i + 1; j < p; ++j)
      if (l(i, j) != 0.0) os << i << '\t' << j << '\t' << -l(i, j) << '\n';
}

Matrix read_edge_list_offdiag(std::istream& is, int p_hint) {
  struct Entry {
    int i, j;
    double w;
  };
  std::vector<Entry> entries;
  int max_index = p_hint - 1;
  std::string line;
  int line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream ls(line);
    Entry e;
    if (!(ls >> e.i >> e.j >> e.w) || e.i < 0 || e.j < 0 || e.i == e.j)
      throw Error(ErrorCode::IoError,
                  "edge list: bad line " + std::to_string(line_no));
    entries.push_back(e);
    max_index = std::max({max_index, e.i, e.j});
  }
  const int p = max_index + 1;
  Matrix l = Matrix::Zero(p, p);
  for (const auto& e : entries) {
    l(e.i, e.j) = -e.w;
    l(e.j, e.i) = -e.w;
  }
  return l;
}

}  // namespace gar
