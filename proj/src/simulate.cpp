#include "gar/simulate.hpp"

#include <cmath>
#include <ostream>

namespace gar {

void SimDesign::validate() const {
  if (p < 1) throw Error(ErrorCode::InvalidArgument, "SimDesign: p < 1");
  if (n < 2) throw Error(ErrorCode::InvalidArgument, "SimDesign: n < 2");
  const double ep = resolved_edge_prob();
  if (ep < 0.0 || ep > 1.0)
    throw Error(ErrorCode::InvalidArgument, "SimDesign: edge_prob outside [0,1]");
  if (self_loop_prob < 0.0 || self_loop_prob > 1.0)
    throw Error(ErrorCode::InvalidArgument,
                "SimDesign: self_loop_prob outside [0,1]");
  if (!(weight_min > 0.0) || weight_max < weight_min)
    throw Error(ErrorCode::InvalidArgument, "SimDesign: bad weight range");
  if (theta0 <= 0.0 || theta1 <= 0.0)
    throw Error(ErrorCode::InvalidArgument, "SimDesign: theta0, theta1 must be > 0");
}

Adjacency generate_graph(const SimDesign& design) {
  design.validate();
  const int p = design.p;
  const double edge_prob = design.resolved_edge_prob();
  Rng rng(design.seed, /*stream=*/0x67726170);  // graph stream
  for (int attempt = 0; attempt < 1000; ++attempt) {
    Matrix w = Matrix::Zero(p, p);
    for (int i = 0; i < p; ++i) {
      for (int j = i + 1; j < p; ++j) {
        if (rng.bernoulli(edge_prob)) {
          const double weight = rng.uniform(design.weight_min, design.weight_max);
          w(i, j) = weight;
          w(j, i) = weight;
        }
      }
      if (design.self_loop_prob > 0.0 && rng.bernoulli(design.self_loop_prob))
        w(i, i) = rng.uniform(design.weight_min, design.weight_max);
    }
    if ((w.rowwise().sum().array() > 0.0).all())
      return Adjacency{std::move(w)};
  }
  throw Error(ErrorCode::ResampleBudgetExceeded,
              "generate_graph: 1000 resamples, still an isolated node");
}

Truth truth_from_adjacency(const SimDesign& design, const Adjacency& a) {
  const NormalizedLaplacianEstimate ln = normalized_laplacian_from_adjacency(a);
  Truth truth;
  truth.theta0 = design.theta0;
  truth.l = design.theta1 * ln.entries;  // theta1 absorbed
  truth.v0 = *ln.v0;
  GraphTopology topo;
  topo.p = design.p;
  for (int i = 0; i < design.p; ++i)
    for (int j = i + 1; j < design.p; ++j)
      if (a.weights(i, j) > 0.0) topo.edges.emplace_back(i, j);
  truth.topology = std::move(topo);
  return truth;
}

Matrix sample_gar(const SimDesign& design,
                  const NormalizedLaplacianEstimate& l) {
  design.validate();
  const int p = static_cast<int>(l.entries.rows());
  const EigenDecomposition eig = eigen_sym(l.entries);
  Vector scale(p);
  for (int j = 0; j < p; ++j)
    scale[j] = 1.0 / (design.theta0 + design.theta1 * eig.d[j]);
  const Matrix filter = eig.q * scale.asDiagonal() * eig.q.transpose();
  Rng rng(design.seed, /*stream=*/0x64617461);  // data stream
  Matrix z(design.n, p);
  for (int i = 0; i < design.n; ++i)
    for (int j = 0; j < p; ++j) z(i, j) = rng.normal();
  return z * filter;
}

MetricsRow evaluate(const GarModel& model, const Truth& truth) {
  const int p = static_cast<int>(truth.l.rows());
  if (model.p() != p || model.v0.size() != truth.v0.size())
    throw Error(ErrorCode::DimensionMismatch, "evaluate: size mismatch");

  const GraphTopology detected =
      model.laplacian.support ? *model.laplacian.support
                              : topology_from_laplacian(model.laplacian.entries,
                                                        1e-12);
  std::size_t true_positive = 0;
  for (const auto& [i, j] : detected.edges)
    if (truth.topology.has_edge(i, j)) ++true_positive;
  const std::size_t detected_count = detected.edge_count();
  const std::size_t truth_count = truth.topology.edge_count();

  MetricsRow row;
  row.power = truth_count == 0
                  ? 1.0
                  : double(true_positive) / double(truth_count);
  row.fdr = detected_count == 0
                ? 0.0
                : double(detected_count - true_positive) / double(detected_count);
  const double precision = 1.0 - row.fdr;
  const double recall = row.power;
  row.f1 = (precision + recall) == 0.0
               ? 0.0
               : 2.0 * precision * recall / (precision + recall);

  row.theta0_err = (model.theta0 - truth.theta0) * (model.theta0 - truth.theta0);
  // both v0 are positive by construction; no further alignment
  row.v0_err = (model.v0 - truth.v0).squaredNorm();
  row.l_err = (model.laplacian.entries - truth.l).squaredNorm() /
              truth.l.squaredNorm();
  return row;
}

Matrix nongar_precision(const SimDesign& design) {
  design.validate();
  const int p = design.p;
  const double edge_prob = design.resolved_edge_prob();
  Rng rng(design.seed, /*stream=*/0x6e676172);  // non-GAR stream
  Matrix w = Matrix::Zero(p, p);
  for (int i = 0; i < p; ++i)
    for (int j = i + 1; j < p; ++j)
      if (rng.bernoulli(edge_prob)) {
        const double weight = rng.uniform(design.weight_min, design.weight_max);
        w(i, j) = weight;  // positive off-diagonals: incompatible with GAR
        w(j, i) = weight;
      }
  const Vector row_sums = w.cwiseAbs().rowwise().sum();
  w.diagonal() = (row_sums.array() + 0.5).matrix();
  return w;
}

Matrix sample_gaussian_precision(const Eigen::Ref<const Matrix>& omega, int n,
                                 std::uint64_t seed) {
  const int p = static_cast<int>(omega.rows());
  const EigenDecomposition eig = eigen_sym(omega);
  if (eig.d.minCoeff() <= 0.0)
    throw Error(ErrorCode::NonPD, "sample_gaussian_precision: omega not PD");
  const Vector scale = eig.d.array().rsqrt().matrix();
  const Matrix half = eig.q * scale.asDiagonal() * eig.q.transpose();
  Rng rng(seed, /*stream=*/0x64617461);
  Matrix z(n, p);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < p; ++j) z(i, j) = rng.normal();
  return z * half;
}

ExperimentResult run_experiment(const SimDesign& design, int replicates,
                                const TuningGrid* grid,
                                const FitOptions& options) {
  design.validate();
  const TuningGrid resolved_grid =
      grid ? *grid : TuningGrid::defaults(design.p, design.n);

  ExperimentResult result;
  result.replicates.resize(replicates);
  parallel_for(replicates, options.threads, [&](int r) {
    ReplicateRecord& record = result.replicates[r];
    try {
      SimDesign rep = design;
      rep.seed = Rng(design.seed).split(std::uint64_t(r) + 1)();
      const Adjacency graph = generate_graph(rep);
      const Truth truth = truth_from_adjacency(rep, graph);
      NormalizedLaplacianEstimate ln;
      ln.entries = truth.l / design.theta1;
      const Matrix data = sample_gar(rep, ln);
      FitOptions cell_options = options;
      cell_options.threads = 1;  // parallelism lives at the replicate level
      const FitReport report = fit_full(data, resolved_grid, cell_options);
      record.metrics = evaluate(report.model, truth);
      record.converged = true;
      for (const GridCell& cell : report.table)
        if (cell.selected) record.converged = cell.converged;
    } catch (const Error&) {
      record.failed = true;
    }
  });

  int successes = 0;
  for (const ReplicateRecord& record : result.replicates) {
    if (record.failed) {
      ++result.failures;
      continue;
    }
    ++successes;
    result.mean.power += record.metrics.power;
    result.mean.fdr += record.metrics.fdr;
    result.mean.f1 += record.metrics.f1;
    result.mean.theta0_err += record.metrics.theta0_err;
    result.mean.v0_err += record.metrics.v0_err;
    result.mean.l_err += record.metrics.l_err;
  }
  if (successes > 0) {
    result.mean.power /= successes;
    result.mean.fdr /= successes;
    result.mean.f1 /= successes;
    result.mean.theta0_err /= successes;
    result.mean.v0_err /= successes;
    result.mean.l_err /= successes;
  }
  return result;
}

void write_replicate_table(std::ostream& os, const ExperimentResult& result) {
  os << "replicate,theta0_err,v0_err,l_err,power,fdr,f1,converged\n";
  os.precision(17);
  for (std::size_t r = 0; r < result.replicates.size(); ++r) {
    const ReplicateRecord& record = result.replicates[r];
    if (record.failed) {
      os << r << ",,,,,,,failed\n";
      continue;
    }
    const MetricsRow& m = record.metrics;
    os << r << ',' << m.theta0_err << ',' << m.v0_err << ',' << m.l_err << ','
       << m.power << ',' << m.fdr << ',' << m.f1 << ','
       << (record.converged ? 1 : 0) << '\n';
  }
}

}  // namespace gar
