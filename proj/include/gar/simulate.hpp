#pragma once

#include "gar/estimator.hpp"
#include "gar/graph.hpp"
#include "gar/rng.hpp"

#include <cstdint>
#include <iosfwd>

namespace gar {

/// Random-graph and data-generation design. Defaults are the baseline
/// setting: edge probability 2/p, no self-loops, weights U[0.5, 1],
/// theta0 = 1, theta1 = 2.
struct SimDesign {
  int p = 100;
  int n = 500;
  double edge_prob = -1.0;       // < 0 resolves to 2/p
  double self_loop_prob = 0.0;   // dense-self-loop variant: 40/p
  double weight_min = 0.5;
  double weight_max = 1.0;
  double theta0 = 1.0;
  double theta1 = 2.0;
  std::uint64_t seed = 0;

  double resolved_edge_prob() const { return edge_prob < 0.0 ? 2.0 / p : edge_prob; }
  void validate() const;
};

/// Graph-recovery and estimation-error metrics. Errors are squared:
/// |theta0_hat - theta0*|^2, ||v0_hat - v0*||^2, ||L_hat - L*||_F^2 /
/// ||L*||_F^2. Conventions for empty sets: FDR 0/0 -> 0, Power 0/0 -> 1,
/// F1 0/0 -> 0.
struct MetricsRow {
  double power = 0.0;
  double fdr = 0.0;
  double f1 = 0.0;
  double theta0_err = 0.0;
  double v0_err = 0.0;
  double l_err = 0.0;
};

/// Ground truth in the reparametrized form: l = theta1 * normalized
/// Laplacian, v0 unit.
struct Truth {
  double theta0 = 0.0;
  Vector v0;
  Matrix l;
  GraphTopology topology;
};

/// Draws the design's random graph; the whole graph is resampled while any
/// node is isolated (at most 1000 attempts). Identical seed, identical graph.
Adjacency generate_graph(const SimDesign& design);

/// Truth bundle for a generated adjacency under the design's filter
/// parameters.
Truth truth_from_adjacency(const SimDesign& design, const Adjacency& a);

/// n x p rows Y = (theta0 I + theta1 L)^{-1} Z with Z iid standard normal,
/// drawn through the eigenbasis of L.
Matrix sample_gar(const SimDesign& design,
                  const NormalizedLaplacianEstimate& l);

MetricsRow evaluate(const GarModel& model, const Truth& truth);

/// Documented non-GAR control: a sparse random precision matrix with
/// positive off-diagonals (positive entries cannot arise from any
/// (theta0 I + L)^2), made PD by diagonal dominance.
Matrix nongar_precision(const SimDesign& design);

/// Rows drawn from N(0, omega^{-1}).
Matrix sample_gaussian_precision(const Eigen::Ref<const Matrix>& omega, int n,
                                 std::uint64_t seed);

struct ReplicateRecord {
  MetricsRow metrics;
  bool converged = false;
  bool failed = false;
};

struct ExperimentResult {
  MetricsRow mean;  // over successful replicates
  std::vector<ReplicateRecord> replicates;
  int failures = 0;
};

/// Full pipeline per replicate: generate graph, draw data, fit with the grid,
/// evaluate against the truth. Replicate r uses the RNG stream
/// split(design.seed, r); replicates run concurrently.
ExperimentResult run_experiment(const SimDesign& design, int replicates,
                                const TuningGrid* grid,
                                const FitOptions& options);

/// CSV table: header replicate,theta0_err,v0_err,l_err,power,fdr,f1,converged
void write_replicate_table(std::ostream& os, const ExperimentResult& result);

}  // namespace gar
