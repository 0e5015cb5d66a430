#pragma once

#include "gar/types.hpp"

#include <iosfwd>
#include <optional>
#include <utility>
#include <vector>

namespace gar {

/// Weighted undirected graph given by its symmetric nonnegative weight matrix.
/// Diagonal entries are self-loop weights. No isolated nodes allowed.
struct Adjacency {
  Matrix weights;

  int p() const { return static_cast<int>(weights.rows()); }
  Vector degrees() const { return weights.rowwise().sum(); }

  /// Validates symmetry (to 1e-10), nonnegativity, and strictly positive
  /// degrees. Throws IsolatedNode naming the first offending node.
  static Adjacency from_weights(Matrix w);
};

/// Which parameter space a Laplacian estimate lives in: the relaxed space
/// (psd, symmetric, nonpositive off-diagonals), the null-set-constrained
/// space, or the final space that additionally satisfies L v0 = 0.
enum class LaplacianSpace { Relaxed, Constrained, Final };

/// Edge set of an undirected graph on nodes 0..p-1; pairs stored (i<j),
/// sorted, unique.
struct GraphTopology {
  int p = 0;
  std::vector<std::pair<int, int>> edges;

  std::size_t edge_count() const { return edges.size(); }
  bool has_edge(int i, int j) const;
  void normalize();  // sort pairs, order, dedupe; drops self-pairs
  bool operator==(const GraphTopology& other) const = default;
};

/// Off-diagonal positions pinned to zero by the constrained W-update. Stored
/// as the complementary keep-mask so the pinning is a single elementwise
/// product.
class NullSet {
 public:
  /// Pins every off-diagonal pair NOT present in `topology`.
  static NullSet complement_of(const GraphTopology& topology);
  /// Pins every off-diagonal pair (diagonal-only solutions).
  static NullSet all_offdiag(int p);

  int p() const { return static_cast<int>(keep_.rows()); }
  bool pinned(int i, int j) const { return keep_(i, j) == 0.0; }
  /// 1.0 on free entries (and the whole diagonal), 0.0 on pinned entries.
  const Eigen::ArrayXXd& keep_mask() const { return keep_; }
  /// Edges kept free (the complement of the null set).
  GraphTopology kept_edges() const;

 private:
  Eigen::ArrayXXd keep_;
};

/// Outcome of the Laplacian / normalized-Laplacian characterization checks.
/// Individual condition flags are always filled; `passed` aggregates the
/// defining ones.
struct ValidationVerdict {
  bool passed = false;
  bool symmetric = false;
  bool row_sums_zero = false;          // plain Laplacian only
  bool offdiag_nonpositive = false;
  bool diag_in_unit_interval = false;  // normalized only
  bool offdiag_geq_minus_one = false;  // normalized only
  bool psd = false;
  bool has_zero_eigenvalue = false;
  bool positive_null_vector = false;   // normalized only
  bool degenerate_null_space = false;  // warning: 0-eigenvalue multiplicity > 1
  Vector null_vector;                  // sign-fixed candidate v0 (may be empty)
  std::string summary() const;
};

struct NormalizedLaplacianEstimate {
  Matrix entries;
  LaplacianSpace space = LaplacianSpace::Relaxed;
  std::optional<GraphTopology> support;  // free edges, when constrained/final
  std::optional<Vector> v0;              // when final
};
using NormalizedLaplacian = NormalizedLaplacianEstimate;

/// Fitted GAR model: precision (theta0 I + L)^2, covariance its inverse.
struct GarModel {
  double theta0 = 0.0;
  NormalizedLaplacianEstimate laplacian;
  Vector v0;

  int p() const { return static_cast<int>(laplacian.entries.rows()); }
  Matrix shift() const;       // theta0 I + L
  Matrix precision() const;   // (theta0 I + L)^2
  Matrix covariance() const;  // (theta0 I + L)^-2
  /// Checks theta0 > 0, v0 positive unit vector, Omega*Sigma = I to 1e-8
  /// relative Frobenius. Throws InvalidArgument on violation.
  void validate() const;
};

// Tolerances: eigensolver noise at double precision.
inline constexpr double kTolSym = 1e-10;
inline constexpr double kTolEig = 1e-8;

/// I - D^{-1/2} A D^{-1/2}. Pre: all degrees strictly positive.
NormalizedLaplacianEstimate normalized_laplacian_from_adjacency(
    const Adjacency& a);

/// Conditions (i)-(iii) of the Laplacian characterization; (iv) psd with zero
/// smallest eigenvalue is reported as a consequence check.
ValidationVerdict check_laplacian(const Eigen::Ref<const Matrix>& m,
                                  double tol = kTolEig);

/// Normalized-Laplacian characterization: symmetry, diag in [0,1], off-diag
/// in [-1,0], psd with smallest eigenvalue ~ 0, and existence of a strictly
/// positive null vector. For a degenerate null space (disconnected graph) a
/// positive vector is searched by alternating projection and the verdict
/// carries a warning flag.
ValidationVerdict check_normalized_laplacian(const Eigen::Ref<const Matrix>& m,
                                             double tol = kTolEig);

/// Edge (i,j) present iff |L_ij| > eps_thre (strict: boundary values are
/// null).
GraphTopology topology_from_laplacian(const Eigen::Ref<const Matrix>& l,
                                      double eps_thre);
inline GraphTopology topology_from_laplacian(
    const NormalizedLaplacianEstimate& l, double eps_thre) {
  return topology_from_laplacian(l.entries, eps_thre);
}

/// Edge-list text format: one line per edge, `i<TAB>j<TAB>weight`, 0-based
/// indices (i<j), weight = -L_ij. Off-diagonal entries equal to zero are not
/// edges.
void write_edge_list(std::ostream& os, const Eigen::Ref<const Matrix>& l);
/// Reads the format back into (p, off-diagonal entries); p is taken as
/// max index + 1 unless a larger p_hint is given.
Matrix read_edge_list_offdiag(std::istream& is, int p_hint = 0);

}  // namespace gar
