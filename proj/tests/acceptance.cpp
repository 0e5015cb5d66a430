// Acceptance suite: desk-scale replication of the reference experiments plus
// the solver/validator oracle checks. Prints one PASS/FAIL line per
// criterion; exits nonzero if any fail.

#include "gar/estimator.hpp"
#include "gar/io.hpp"
#include "gar/rng.hpp"
#include "gar/simulate.hpp"
#include "oracles.hpp"

#include <unsupported/Eigen/KroneckerProduct>

#include <chrono>
#include <cstdio>
#include <string>
#include <thread>
#include <vector>

using namespace gar;

namespace {

int worker_threads() {
  if (const char* env = std::getenv("GAR_ACCEPTANCE_THREADS"))
    return std::max(1, std::atoi(env));
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : int(hw);
}

struct Check {
  std::string label;
  bool ok;
};

struct CriterionResult {
  std::vector<Check> checks;
  bool passed() const {
    for (const Check& c : checks)
      if (!c.ok) return false;
    return !checks.empty();
  }
  void expect(bool ok, const std::string& label) {
    checks.push_back({label, ok});
  }
};

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.4g", v);
  return buf;
}

struct Replicate {
  Truth truth;
  Matrix data;
};

Replicate make_replicate(const SimDesign& base, int index) {
  SimDesign design = base;
  design.seed = Rng(base.seed).split(std::uint64_t(index) + 1)();
  const Adjacency graph = generate_graph(design);
  Replicate rep;
  rep.truth = truth_from_adjacency(design, graph);
  NormalizedLaplacianEstimate ln;
  ln.entries = rep.truth.l / design.theta1;
  rep.data = sample_gar(design, ln);
  return rep;
}

MetricsRow mean_metrics(const ExperimentResult& result) { return result.mean; }

// ---------------------------------------------------------------- criteria

CriterionResult baseline_n500() {
  SimDesign design;  // p=100, n=500 baseline
  design.seed = 1001;
  FitOptions options;
  options.threads = worker_threads();
  const ExperimentResult result = run_experiment(design, 20, nullptr, options);
  const MetricsRow m = mean_metrics(result);
  CriterionResult out;
  out.expect(result.failures == 0, "no failed replicates");
  out.expect(m.f1 >= 0.98, "mean F1 " + fmt(m.f1) + " >= 0.98");
  out.expect(m.fdr <= 0.03, "mean FDR " + fmt(m.fdr) + " <= 0.03");
  out.expect(m.l_err <= 0.006, "mean L error " + fmt(m.l_err) + " <= 0.006");
  out.expect(m.theta0_err <= 0.001,
             "mean theta0 sq error " + fmt(m.theta0_err) + " <= 0.001");
  return out;
}

CriterionResult baseline_n250() {
  SimDesign design;
  design.n = 250;
  design.seed = 1002;
  FitOptions options;
  options.threads = worker_threads();
  const ExperimentResult result = run_experiment(design, 20, nullptr, options);
  const MetricsRow m = mean_metrics(result);
  CriterionResult out;
  out.expect(result.failures == 0, "no failed replicates");
  out.expect(m.f1 >= 0.95, "mean F1 " + fmt(m.f1) + " >= 0.95");
  out.expect(m.l_err <= 0.012, "mean L error " + fmt(m.l_err) + " <= 0.012");
  return out;
}

CriterionResult oracle_and_step1() {
  SimDesign design;
  design.seed = 1003;
  const int replicates = 20;
  const double lambda = std::sqrt(std::log(double(design.p)) / design.n);

  std::vector<double> oracle_err(replicates), step1_err(replicates);
  parallel_for(replicates, worker_threads(), [&](int r) {
    const Replicate rep = make_replicate(design, r);
    const SampleCovariance cov = sample_covariance(rep.data, true);

    AdmmSettings oracle_settings;
    oracle_settings.rho = 1.0;
    const GarModel oracle = oracle_fit(cov, rep.truth.theta0, rep.truth.v0,
                                       rep.truth.topology, oracle_settings);
    oracle_err[r] = (oracle.laplacian.entries - rep.truth.l).squaredNorm() /
                    rep.truth.l.squaredNorm();

    const double theta0 = theta0_initial(cov);
    const LaplacianSolveResult step1 = fit_step1(
        cov, theta0, lambda, AdmmSettings::for_lambda(lambda));
    step1_err[r] = (step1.estimate.entries - rep.truth.l).squaredNorm() /
                   rep.truth.l.squaredNorm();
  });

  double oracle_mean = 0.0, step1_mean = 0.0;
  for (int r = 0; r < replicates; ++r) {
    oracle_mean += oracle_err[r] / replicates;
    step1_mean += step1_err[r] / replicates;
  }
  CriterionResult out;
  out.expect(oracle_mean <= 0.004,
             "oracle mean L error " + fmt(oracle_mean) + " <= 0.004");
  out.expect(step1_mean >= 0.008 && step1_mean <= 0.030,
             "step-1 mean L error " + fmt(step1_mean) + " in [0.008, 0.030]");
  return out;
}

CriterionResult goodness_of_fit_controls() {
  const int seeds = 20, b = 100;
  SimDesign design;
  design.n = 250;

  std::vector<double> gar_gf(seeds), nongar_gf(seeds);
  parallel_for(2 * seeds, worker_threads(), [&](int task) {
    const bool is_gar = task < seeds;
    const int s = task % seeds;
    SimDesign d = design;
    d.seed = Rng(is_gar ? 2001 : 2002).split(std::uint64_t(s) + 1)();
    Matrix data;
    if (is_gar) {
      const Adjacency graph = generate_graph(d);
      const Truth truth = truth_from_adjacency(d, graph);
      NormalizedLaplacianEstimate ln;
      ln.entries = truth.l / d.theta1;
      data = sample_gar(d, ln);
    } else {
      data = sample_gaussian_precision(nongar_precision(d), d.n, d.seed);
    }
    const GfResult gf =
        goodness_of_fit(data, -1.0, b, d.seed ^ 0x9e3779b9, AdmmSettings(), 1);
    (is_gar ? gar_gf : nongar_gf)[s] = gf.gf;
  });

  int gar_perfect = 0;
  bool nongar_all_low = true;
  double nongar_max = 0.0;
  for (int s = 0; s < seeds; ++s) {
    if (gar_gf[s] == 1.0) ++gar_perfect;
    nongar_max = std::max(nongar_max, nongar_gf[s]);
    if (nongar_gf[s] > 0.05) nongar_all_low = false;
  }
  CriterionResult out;
  out.expect(gar_perfect >= 19, "GF = 1 on " + std::to_string(gar_perfect) +
                                    "/20 GAR seeds (need >= 19)");
  out.expect(nongar_all_low, "non-GAR GF max " + fmt(nongar_max) + " <= 0.05");
  return out;
}

CriterionResult self_loop_variant() {
  SimDesign design;
  design.self_loop_prob = 40.0 / design.p;
  design.seed = 1005;
  FitOptions options;
  options.threads = worker_threads();
  const ExperimentResult result = run_experiment(design, 10, nullptr, options);
  const MetricsRow m = mean_metrics(result);
  CriterionResult out;
  out.expect(result.failures == 0, "no failed replicates");
  out.expect(m.f1 >= 0.97, "mean F1 " + fmt(m.f1) + " >= 0.97");
  return out;
}

CriterionResult dense_variant() {
  SimDesign design;
  design.edge_prob = 5.0 / design.p;
  design.seed = 1006;
  FitOptions options;
  options.threads = worker_threads();
  const ExperimentResult result = run_experiment(design, 10, nullptr, options);
  const MetricsRow m = mean_metrics(result);
  CriterionResult out;
  out.expect(result.failures == 0, "no failed replicates");
  out.expect(m.f1 >= 0.90, "mean F1 " + fmt(m.f1) + " >= 0.90");
  out.expect(m.power >= 0.88, "mean power " + fmt(m.power) + " >= 0.88");
  return out;
}

CriterionResult rate_monotonicity() {
  const int replicates = 20;
  const int sample_sizes[3] = {100, 250, 500};
  double mean_fro[3] = {0.0, 0.0, 0.0};

  for (int k = 0; k < 3; ++k) {
    SimDesign design;
    design.p = 50;
    design.n = sample_sizes[k];
    design.seed = 3000 + k;
    std::vector<double> fro(replicates);
    parallel_for(replicates, worker_threads(), [&](int r) {
      const Replicate rep = make_replicate(design, r);
      FitOptions options;
      options.threads = 1;
      const FitReport report =
          fit_full(rep.data, TuningGrid::defaults(design.p, design.n), options);
      fro[r] = (report.model.laplacian.entries - rep.truth.l).norm();
    });
    for (int r = 0; r < replicates; ++r) mean_fro[k] += fro[r] / replicates;
  }
  CriterionResult out;
  out.expect(mean_fro[1] < mean_fro[0],
             "mean ||L_hat - L*||_F: n=250 (" + fmt(mean_fro[1]) +
                 ") < n=100 (" + fmt(mean_fro[0]) + ")");
  out.expect(mean_fro[2] < mean_fro[1],
             "mean ||L_hat - L*||_F: n=500 (" + fmt(mean_fro[2]) +
                 ") < n=250 (" + fmt(mean_fro[1]) + ")");
  return out;
}

CriterionResult solver_oracles() {
  CriterionResult out;
  Rng rng(4001);

  // Step 1 vs projected-gradient reference, 50 random p in {2,3} problems.
  {
    int matched = 0;
    const int problems = 50;
    std::vector<char> match(problems, 0);
    parallel_for(problems, worker_threads(), [&](int trial) {
      Rng local = Rng(4002).split(trial);
      const int p = trial % 2 == 0 ? 2 : 3;
      Matrix base(p, p);
      for (int i = 0; i < p; ++i)
        for (int j = 0; j < p; ++j) base(i, j) = local.normal();
      const Matrix sigma =
          base * base.transpose() / p + 0.3 * Matrix::Identity(p, p);
      const double theta0 = local.uniform(0.5, 1.5);
      const double lambda = local.uniform(0.01, 0.25);

      SampleCovariance cov;
      cov.p = p;
      cov.n = 100;
      cov.y_bar = Vector::Zero(p);
      cov.sigma_hat = sigma;
      AdmmSettings settings = AdmmSettings::for_lambda(lambda);
      settings.eps_abs = 1e-6;
      settings.eps_rel = 1e-5;
      settings.max_iter = 50000;
      const auto res = solve_l_given_theta_v0(cov, theta0, Vector::Zero(p),
                                              lambda, std::nullopt, settings);
      const Matrix reference =
          oracles::projected_gradient_reference(sigma, theta0, lambda);
      match[trial] =
          res.trace.converged &&
          (res.estimate.entries - reference).norm() < 1e-4;
    });
    for (char c : match) matched += c;
    out.expect(matched == problems,
               "projected-gradient match " + std::to_string(matched) + "/50");
  }

  // Sylvester solve vs dense Kronecker solve, p <= 8.
  {
    bool all_ok = true;
    for (int trial = 0; trial < 20; ++trial) {
      const int p = 2 + int(rng.uniform() * 7);
      Matrix base(p, p);
      for (int i = 0; i < p; ++i)
        for (int j = 0; j < p; ++j) base(i, j) = rng.normal();
      const Matrix c = base * base.transpose() + 0.4 * Matrix::Identity(p, p);
      Matrix d(p, p);
      for (int i = 0; i < p; ++i)
        for (int j = 0; j < p; ++j) d(i, j) = rng.normal();
      d = ((d + d.transpose()) / 2.0).eval();

      const Matrix l = sylvester_eig_solve(eigen_sym(c), d);
      const Matrix identity = Matrix::Identity(p, p);
      const Matrix dx = Eigen::kroneckerProduct(identity, c) +
                        Eigen::kroneckerProduct(c, identity);
      const Vector vec_l = dx.colPivHouseholderQr().solve(
          Vector(-Eigen::Map<const Vector>(d.data(), p * p)));
      const Matrix dense = Eigen::Map<const Matrix>(vec_l.data(), p, p);
      all_ok = all_ok && (l - dense).norm() <= 1e-9 * std::max(1.0, dense.norm());
    }
    out.expect(all_ok, "sylvester matches dense solve to 1e-9");
  }

  // Bordered system vs dense (p^2+1) solve, p <= 8.
  {
    bool all_ok = true;
    for (int trial = 0; trial < 20; ++trial) {
      const int p = 2 + int(rng.uniform() * 7);
      Vector d(p);
      for (int i = 0; i < p; ++i) d[i] = rng.uniform(0.3, 3.0);
      Matrix s(p, p), e(p, p);
      for (int i = 0; i < p; ++i)
        for (int j = 0; j < p; ++j) {
          s(i, j) = rng.normal();
          e(i, j) = rng.normal();
        }
      const Matrix sigma_tilde = (s + s.transpose()) / 2.0;
      const Matrix e_sym = (e + e.transpose()) / 2.0;
      const double rhs = rng.normal();
      const double rho = rng.uniform(0.2, 2.0);

      const auto [l_tilde, theta] = solve_bordered_system(
          d, sigma_tilde, e_sym, rhs, rho, sigma_tilde.trace());

      const Matrix identity = Matrix::Identity(p, p);
      const Matrix dd = d.asDiagonal();
      const Matrix dx = Eigen::kroneckerProduct(identity, dd) +
                        Eigen::kroneckerProduct(dd, identity);
      Matrix block = Matrix::Zero(p * p + 1, p * p + 1);
      block.topLeftCorner(p * p, p * p) = dx;
      const Vector sx = 2.0 * Eigen::Map<const Vector>(sigma_tilde.data(), p * p);
      block.topRightCorner(p * p, 1) = sx;
      block.bottomLeftCorner(1, p * p) = sx.transpose();
      block(p * p, p * p) = 2.0 * sigma_tilde.trace() + rho;
      Vector rhs_vec(p * p + 1);
      rhs_vec.head(p * p) = -Eigen::Map<const Vector>(e_sym.data(), p * p);
      rhs_vec(p * p) = rhs;
      const Vector dense = block.colPivHouseholderQr().solve(rhs_vec);
      const Matrix l_dense = Eigen::Map<const Matrix>(dense.data(), p, p);
      all_ok = all_ok &&
               (l_tilde - l_dense).norm() <= 1e-9 * std::max(1.0, l_dense.norm()) &&
               std::abs(theta - dense(p * p)) <=
                   1e-9 * std::max(1.0, std::abs(dense(p * p)));
    }
    out.expect(all_ok, "bordered system matches dense solve to 1e-9");
  }

  // Z-update closed form beats a fine grid, 100 instances.
  {
    bool all_ok = true;
    for (int trial = 0; trial < 100; ++trial) {
      const double theta0 = rng.uniform(0.1, 5.0);
      const double rho = rng.uniform(0.05, 10.0);
      const double lambda_j = rng.uniform(-3.0, 10.0);
      Vector eig(1);
      eig << lambda_j;
      const double x_star = z_update_eigen_shrink(theta0, rho, eig)(0);
      auto objective = [&](double x) {
        return -2.0 * std::log(theta0 + x) +
               0.5 * rho * (x - lambda_j) * (x - lambda_j);
      };
      const double f_star = objective(x_star);
      for (double x = 0.0; x <= lambda_j + 10.0; x += 1e-4)
        if (f_star > objective(x) + 1e-9) {
          all_ok = false;
          break;
        }
    }
    out.expect(all_ok, "z-update closed form beats the 1-d grid");
  }

  // phi-update closed form beats a fine grid, 100 instances.
  {
    bool all_ok = true;
    const double eps_floor = 1e-6;
    for (int trial = 0; trial < 100; ++trial) {
      const int p = 1 + int(rng.uniform() * 8);
      const double rho = rng.uniform(0.1, 5.0);
      const double theta0 = rng.uniform(0.1, 3.0);
      const double t = rng.uniform(-0.5, 0.5);
      Vector lambda(p), lam_star(p);
      for (int j = 0; j < p; ++j) {
        lambda[j] = rng.uniform(-0.5, 3.0);
        lam_star[j] = rng.uniform(0.2, 4.0);
      }
      auto objective = [&](double phi) {
        double value = 0.5 * rho * (phi - (theta0 + t)) * (phi - (theta0 + t));
        for (int j = 0; j < p; ++j)
          value += 0.5 * rho * (lam_star[j] - phi - lambda[j]) *
                   (lam_star[j] - phi - lambda[j]);
        return value;
      };
      const double phi_star = std::max(
          eps_floor, ((lam_star - lambda).sum() + theta0 + t) / (p + 1.0));
      const double best = objective(phi_star);
      for (double phi = eps_floor; phi <= 5.0; phi += 1e-4)
        if (best > objective(phi) + 1e-9) {
          all_ok = false;
          break;
        }
    }
    out.expect(all_ok, "phi-update closed form beats the 1-d grid");
  }

  // mu-root residual <= 1e-12, 100 instances.
  {
    bool all_ok = true;
    for (int trial = 0; trial < 100; ++trial) {
      const int p = 1 + int(rng.uniform() * 8);
      Vector t_sq(p), eig_sq(p);
      for (int i = 0; i < p; ++i) {
        t_sq[i] = rng.uniform(0.01, 4.0);
        eig_sq[i] = rng.uniform(0.0, 9.0);
      }
      const MuRootResult root = mu_root_solve(t_sq, eig_sq);
      if (root.on_boundary) continue;
      double f = 0.0;
      for (int i = 0; i < p; ++i) {
        const double denom = eig_sq[i] + 2.0 * root.mu;
        f += t_sq[i] / (denom * denom);
      }
      all_ok = all_ok && std::abs(f - 1.0) <= 1e-12;
    }
    out.expect(all_ok, "mu-root residual <= 1e-12");
  }

  return out;
}

CriterionResult validator_suite() {
  CriterionResult out;
  Rng rng(5001);
  int round_trips = 0;
  bool null_residual_ok = true;
  const int trials = 200;
  for (int trial = 0; trial < trials; ++trial) {
    const int p = 2 + int(rng.uniform() * 49);
    const double edge_prob = rng.uniform(0.1, 0.9);
    const double loop_prob = rng.uniform() < 0.5 ? rng.uniform(0.0, 0.5) : 0.0;
    Matrix w;
    for (;;) {
      w = Matrix::Zero(p, p);
      for (int i = 0; i < p; ++i) {
        for (int j = i + 1; j < p; ++j)
          if (rng.uniform() < edge_prob) {
            const double weight = rng.uniform(0.2, 2.0);
            w(i, j) = weight;
            w(j, i) = weight;
          }
        if (rng.uniform() < loop_prob) w(i, i) = rng.uniform(0.2, 2.0);
      }
      if ((w.rowwise().sum().array() > 0.0).all()) break;
    }
    const Adjacency a = Adjacency::from_weights(w);
    const auto l = normalized_laplacian_from_adjacency(a);
    if (check_normalized_laplacian(l.entries, 1e-8).passed) ++round_trips;
    const Vector sqrt_deg = a.degrees().array().sqrt();
    if ((l.entries * sqrt_deg).norm() > 1e-10 * sqrt_deg.norm())
      null_residual_ok = false;
  }
  out.expect(round_trips == trials, "round-trip passes " +
                                        std::to_string(round_trips) + "/200");
  out.expect(null_residual_ok, "sqrt-degree null residual <= 1e-10");
  return out;
}

}  // namespace

int main() {
  struct Entry {
    const char* name;
    CriterionResult (*run)();
  };
  const Entry entries[] = {
      {"1 baseline p=100 n=500 (20 replicates)", baseline_n500},
      {"2 baseline p=100 n=250 (20 replicates)", baseline_n250},
      {"3 oracle + step-1 errors p=100 n=500 (20 replicates)",
       oracle_and_step1},
      {"4 goodness of fit p=100 n=250 (B=100, 20+20 seeds)",
       goodness_of_fit_controls},
      {"5 self-loop variant p=100 n=500 (10 replicates)", self_loop_variant},
      {"6 dense variant p=100 n=500 (10 replicates)", dense_variant},
      {"7 rate monotonicity p=50, n in {100,250,500} (20 replicates)",
       rate_monotonicity},
      {"8 solver oracle suite", solver_oracles},
      {"9 validator suite", validator_suite},
  };

  int failures = 0;
  for (const Entry& entry : entries) {
    const auto start = std::chrono::steady_clock::now();
    CriterionResult result;
    try {
      result = entry.run();
    } catch (const std::exception& e) {
      result.checks.push_back({std::string("exception: ") + e.what(), false});
    }
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
            .count();
    const bool ok = result.passed();
    failures += ok ? 0 : 1;
    std::printf("[%s] criterion %s (%.1f s)\n", ok ? "PASS" : "FAIL",
                entry.name, seconds);
    for (const Check& check : result.checks)
      std::printf("       %s %s\n", check.ok ? "ok  " : "FAIL",
                  check.label.c_str());
    std::fflush(stdout);
  }
  if (failures > 0)
    std::printf("%d criterion(s) failed\n", failures);
  else
    std::printf("all acceptance criteria passed\n");
  return failures == 0 ? 0 : 1;
}
