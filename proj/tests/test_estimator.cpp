#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "gar/estimator.hpp"
#include "gar/rng.hpp"
#include "gar/simulate.hpp"
#include "oracles.hpp"

using namespace gar;

namespace {

SampleCovariance cov_from_matrix(Matrix sigma, int n) {
  SampleCovariance cov;
  cov.p = int(sigma.rows());
  cov.n = n;
  cov.y_bar = Vector::Zero(cov.p);
  cov.sigma_hat = std::move(sigma);
  return cov;
}

Matrix baseline_data(int p, int n, std::uint64_t seed, Truth* truth_out) {
  SimDesign design;
  design.p = p;
  design.n = n;
  design.seed = seed;
  const Adjacency graph = generate_graph(design);
  const Truth truth = truth_from_adjacency(design, graph);
  if (truth_out) *truth_out = truth;
  NormalizedLaplacianEstimate ln;
  ln.entries = truth.l / design.theta1;
  return sample_gar(design, ln);
}

}  // namespace

TEST_CASE("theta0_initial examples") {
  CHECK(theta0_initial(cov_from_matrix(Matrix::Identity(3, 3), 10)) ==
        doctest::Approx(1.0));
  Matrix diag = Matrix::Zero(2, 2);
  diag(0, 0) = 4.0;
  diag(1, 1) = 1.0;
  CHECK(theta0_initial(cov_from_matrix(diag, 10)) == doctest::Approx(0.5));
  CHECK_THROWS_AS(theta0_initial(cov_from_matrix(Matrix::Zero(2, 2), 10)),
                  Error);
}

TEST_CASE("theta0_initial consistency against simulated GAR data") {
  SimDesign design;
  design.p = 4;
  design.n = 100000;
  design.edge_prob = 0.8;
  design.seed = 314;
  const Adjacency graph = generate_graph(design);
  const Truth truth = truth_from_adjacency(design, graph);
  NormalizedLaplacianEstimate ln;
  ln.entries = truth.l / design.theta1;
  const Matrix data = sample_gar(design, ln);
  const double estimate = theta0_initial(sample_covariance(data, true));
  // lambda_min(L) = 0 forces the answer to theta0
  CHECK(std::abs(estimate - design.theta0) < 0.02 * design.theta0);
}

TEST_CASE("neg_loglik examples") {
  CHECK(neg_loglik(1.0, Matrix::Zero(2, 2),
                   cov_from_matrix(Matrix::Identity(2, 2), 10)) ==
        doctest::Approx(1.0));
  CHECK(neg_loglik(1.0, Matrix::Zero(3, 3),
                   cov_from_matrix(Matrix::Zero(3, 3), 10)) ==
        doctest::Approx(0.0));
  Matrix neg = -2.0 * Matrix::Identity(2, 2);
  CHECK_THROWS_AS(
      neg_loglik(1.0, neg, cov_from_matrix(Matrix::Identity(2, 2), 10)),
      Error);
}

TEST_CASE("population optimum of the unpenalized loss") {
  SimDesign design;
  design.p = 3;
  design.edge_prob = 1.0;
  design.seed = 5;
  const Adjacency graph = generate_graph(design);
  const Truth truth = truth_from_adjacency(design, graph);
  GarModel population;
  population.theta0 = truth.theta0;
  population.laplacian.entries = truth.l;
  population.v0 = truth.v0;
  const SampleCovariance cov = cov_from_matrix(population.covariance(), 100);

  const double at_truth = neg_loglik(truth.theta0, truth.l, cov);
  Rng rng(17);
  for (int trial = 0; trial < 20; ++trial) {
    Matrix perturb(3, 3);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) perturb(i, j) = 0.05 * rng.normal();
    const Matrix candidate = truth.l + (perturb + perturb.transpose()) / 2.0;
    if (eigen_sym(candidate).d.minCoeff() + truth.theta0 <= 0.0) continue;
    CHECK(neg_loglik(truth.theta0, candidate, cov) > at_truth);
  }
}

TEST_CASE("ebic examples") {
  const EbicScore no_edges = ebic_from_neg_loglik(1.0, 100, 10, 0, 0.5);
  CHECK(no_edges.score == doctest::Approx(200.0));

  const EbicScore with_edges = ebic_from_neg_loglik(1.0, 100, 3, 2, 0.5);
  CHECK(with_edges.score ==
        doctest::Approx(200.0 + 2.0 * std::log(100.0) + std::log(3.0)));
  CHECK(with_edges.score == doctest::Approx(210.30895).epsilon(1e-6));

  // gamma = 0 reduces to BIC
  const EbicScore bic = ebic_from_neg_loglik(2.5, 50, 8, 5, 0.0);
  CHECK(bic.complexity_term == doctest::Approx(5.0 * std::log(50.0)));
}

TEST_CASE("ebic gamma auto rule") {
  CHECK(ebic_gamma_auto(100, 500) == 0.5);
  CHECK(ebic_gamma_auto(250, 250) == 1.0);
  CHECK(ebic_gamma_auto(100, 200) == 0.5);  // exactly 0.5 ratio
}

TEST_CASE("step1: p=1 scalar MLE at lambda=0") {
  Matrix sigma(1, 1);
  sigma << 0.8;
  AdmmSettings settings;
  settings.rho = 1.0;
  settings.eps_abs = 1e-6;
  settings.eps_rel = 1e-5;
  const auto res = fit_step1(cov_from_matrix(sigma, 100), 0.3, 0.0, settings);
  REQUIRE(res.trace.converged);
  const double expected = oracles::scalar_diag_newton(0.3, 0.8);
  CHECK(res.estimate.entries(0, 0) == doctest::Approx(expected).epsilon(1e-3));
}

TEST_CASE("step1: huge lambda drives the off-diagonals to zero") {
  Truth truth;
  const Matrix data = baseline_data(8, 200, 21, &truth);
  const SampleCovariance cov = sample_covariance(data, true);
  const double theta0 = theta0_initial(cov);
  const auto res =
      fit_step1(cov, theta0, 50.0, AdmmSettings::for_lambda(50.0));
  REQUIRE(res.trace.converged);
  double max_offdiag = 0.0;
  for (int i = 0; i < 8; ++i)
    for (int j = 0; j < 8; ++j)
      if (i != j)
        max_offdiag = std::max(max_offdiag, std::abs(res.estimate.entries(i, j)));
  CHECK(max_offdiag <= 1e-6);
}

TEST_CASE("step1: warm start lands on the cold-start solution") {
  Truth truth;
  const Matrix data = baseline_data(10, 300, 33, &truth);
  const SampleCovariance cov = sample_covariance(data, true);
  const double theta0 = theta0_initial(cov);
  const double lambda_a = 0.15, lambda_b = 0.12;

  const auto first =
      fit_step1(cov, theta0, lambda_a, AdmmSettings::for_lambda(lambda_a));
  const auto cold =
      fit_step1(cov, theta0, lambda_b, AdmmSettings::for_lambda(lambda_b));
  const auto warm = fit_step1(cov, theta0, lambda_b,
                              AdmmSettings::for_lambda(lambda_b), &first.state);
  REQUIRE(cold.trace.converged);
  REQUIRE(warm.trace.converged);
  CHECK((warm.estimate.entries - cold.estimate.entries).norm() < 1e-6 * 10);
}

TEST_CASE("step2 does not increase the restricted likelihood") {
  Truth truth;
  const Matrix data = baseline_data(12, 400, 55, &truth);
  const SampleCovariance cov = sample_covariance(data, true);
  const double theta0 = theta0_initial(cov);
  const double lambda = std::sqrt(std::log(12.0) / 400.0);
  const auto step1 =
      fit_step1(cov, theta0, lambda, AdmmSettings::for_lambda(lambda));
  REQUIRE(step1.trace.converged);

  const GraphTopology topo =
      topology_from_laplacian(step1.estimate.entries, 0.01);
  const NullSet null_set = NullSet::complement_of(topo);

  AdmmSettings settings23;
  settings23.rho = 1.0;
  const auto step2 = fit_step2(cov, theta0, null_set, settings23);
  REQUIRE(step2.trace.converged);

  Matrix restricted = step1.estimate.entries;
  restricted.array() *= null_set.keep_mask();
  restricted.diagonal() = step1.estimate.entries.diagonal();

  double g_restricted;
  try {
    g_restricted = neg_loglik(theta0, restricted, cov);
  } catch (const Error&) {
    g_restricted = std::numeric_limits<double>::infinity();
  }
  const double g_step2 = neg_loglik(theta0, step2.estimate.entries, cov);
  CHECK(g_step2 <= g_restricted + 1e-6);
}

TEST_CASE("default grid follows the C sqrt(log p / n) shape") {
  const TuningGrid grid = TuningGrid::defaults(100, 500);
  const double base = std::sqrt(std::log(100.0) / 500.0);
  REQUIRE(grid.lambda_values.size() == 2);
  CHECK(grid.lambda_values[0] == doctest::Approx(0.5 * base));
  CHECK(grid.lambda_values[1] == doctest::Approx(base));
  REQUIRE(grid.eps_thre_values.size() == 10);
  CHECK(grid.eps_thre_values.back() == doctest::Approx(0.05 * base));
  for (std::size_t i = 1; i < 10; ++i)
    CHECK(grid.eps_thre_values[i] > grid.eps_thre_values[i - 1]);

  CHECK(TuningGrid::c_star(100) == doctest::Approx(0.05));
  CHECK(TuningGrid::c_star(250) == doctest::Approx(0.075));
  CHECK(TuningGrid::c_star(500) == doctest::Approx(0.1));
  CHECK(TuningGrid::c_star(50) == doctest::Approx(0.05));   // clamped
  CHECK(TuningGrid::c_star(1000) == doctest::Approx(0.1));  // clamped
  const double mid = TuningGrid::c_star(160);
  CHECK(mid > 0.05);
  CHECK(mid < 0.075);
}

TEST_CASE("fit_full on a small strong-edge problem selects the edge") {
  SimDesign design;
  design.p = 2;
  design.n = 10000;
  design.edge_prob = 1.0;
  design.weight_min = design.weight_max = 1.0;
  design.seed = 2024;
  const Adjacency graph = generate_graph(design);
  const Truth truth = truth_from_adjacency(design, graph);
  NormalizedLaplacianEstimate ln;
  ln.entries = truth.l / design.theta1;
  const Matrix data = sample_gar(design, ln);

  const FitReport report =
      fit_full(data, TuningGrid::defaults(design.p, design.n));
  REQUIRE(report.model.laplacian.support.has_value());
  CHECK(report.model.laplacian.support->edge_count() == 1);
  CHECK(report.model.laplacian.support->has_edge(0, 1));

  // selected pair attains the table minimum over converged cells
  double best = std::numeric_limits<double>::infinity();
  double selected_score = 0.0;
  for (const GridCell& cell : report.table) {
    if (cell.converged) best = std::min(best, cell.ebic.score);
    if (cell.selected) selected_score = cell.ebic.score;
  }
  CHECK(selected_score == best);
}

TEST_CASE("fit_full on independent noise keeps the graph nearly empty") {
  Rng rng(777);
  int sparse_runs = 0;
  const int seeds = 5;
  for (int s = 0; s < seeds; ++s) {
    Matrix data(500, 10);
    Rng local = rng.split(s);
    for (int i = 0; i < 500; ++i)
      for (int j = 0; j < 10; ++j) data(i, j) = local.normal();
    const FitReport report = fit_full(data, TuningGrid::defaults(10, 500));
    if (report.model.laplacian.support->edge_count() <= 2) ++sparse_runs;
  }
  CHECK(sparse_runs == seeds);
}

TEST_CASE("fit_full is deterministic and thread-count independent") {
  Truth truth;
  const Matrix data = baseline_data(15, 200, 4321, &truth);
  FitOptions serial;
  serial.threads = 1;
  FitOptions parallel;
  parallel.threads = 4;
  const TuningGrid grid = TuningGrid::defaults(15, 200);
  const FitReport a = fit_full(data, grid, serial);
  const FitReport b = fit_full(data, grid, serial);
  const FitReport c = fit_full(data, grid, parallel);
  CHECK(a.lambda_star == b.lambda_star);
  CHECK(a.eps_star == b.eps_star);
  CHECK((a.model.laplacian.entries - b.model.laplacian.entries).norm() == 0.0);
  CHECK(a.model.theta0 == b.model.theta0);
  CHECK((a.model.laplacian.entries - c.model.laplacian.entries).norm() == 0.0);
  CHECK(a.model.theta0 == c.model.theta0);
}

TEST_CASE("goodness of fit: B=1 bootstrap below observed gives GF=1") {
  Truth truth;
  const Matrix data = baseline_data(10, 400, 88, &truth);
  const GfResult gf = goodness_of_fit(data, -1.0, 1, 12345);
  CHECK(gf.b == 1);
  CHECK((gf.gf == 0.0 || gf.gf == 1.0));
  if (gf.ell_boot[0] <= gf.ell_obs) CHECK(gf.gf == 1.0);
  CHECK(gf.gf >= 0.0);
  CHECK(gf.gf <= 1.0);
}

TEST_CASE("goodness of fit is invariant to row permutation") {
  Truth truth;
  const Matrix data = baseline_data(8, 120, 99, &truth);
  Matrix shuffled = data;
  // reverse the rows: same empirical distribution
  for (int i = 0; i < data.rows(); ++i)
    shuffled.row(i) = data.row(data.rows() - 1 - i);
  const GfResult a = goodness_of_fit(data, -1.0, 5, 4242);
  const GfResult b = goodness_of_fit(shuffled, -1.0, 5, 4242);
  CHECK(a.gf == b.gf);
  CHECK(a.ell_obs == doctest::Approx(b.ell_obs).epsilon(1e-9));
}

TEST_CASE("oracle fit: population covariance recovers the truth") {
  SimDesign design;
  design.p = 6;
  design.edge_prob = 0.6;
  design.seed = 11;
  const Adjacency graph = generate_graph(design);
  const Truth truth = truth_from_adjacency(design, graph);
  GarModel population;
  population.theta0 = truth.theta0;
  population.laplacian.entries = truth.l;
  population.v0 = truth.v0;
  const SampleCovariance cov = cov_from_matrix(population.covariance(), 500);

  AdmmSettings settings;
  settings.rho = 1.0;
  settings.eps_abs = 1e-6;
  settings.eps_rel = 1e-5;
  settings.max_iter = 20000;
  const GarModel fitted =
      oracle_fit(cov, truth.theta0, truth.v0, truth.topology, settings);
  CHECK((fitted.laplacian.entries - truth.l).norm() < 1e-3 * truth.l.norm());
  CHECK(fitted.theta0 == truth.theta0);
}

TEST_CASE("oracle fit: empty truth graph gives a diagonal solution") {
  Matrix sigma = Matrix::Identity(4, 4) * 0.7;
  GraphTopology empty;
  empty.p = 4;
  AdmmSettings settings;
  settings.rho = 1.0;
  const Vector v0 = Vector::Constant(4, 0.5);
  const GarModel fitted =
      oracle_fit(cov_from_matrix(sigma, 100), 1.0, v0, empty, settings);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j)
      if (i != j) CHECK(fitted.laplacian.entries(i, j) == 0.0);
}
