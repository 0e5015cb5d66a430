#include "gar/estimator.hpp"

#include "gar/rng.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>

namespace gar {

double TuningGrid::c_star(int p) {
  // Anchors from the experiment designs; log-linear in p between them.
  static constexpr double kP[3] = {100.0, 250.0, 500.0};
  static constexpr double kC[3] = {0.05, 0.075, 0.1};
  const double lp = std::log(std::max(1, p));
  double c;
  if (p <= 100) {
    c = kC[0];
  } else if (p >= 500) {
    c = kC[2];
  } else {
    const int seg = p <= 250 ? 0 : 1;
    const double w =
        (lp - std::log(kP[seg])) / (std::log(kP[seg + 1]) - std::log(kP[seg]));
    c = kC[seg] + w * (kC[seg + 1] - kC[seg]);
  }
  return std::clamp(c, 0.05, 0.1);
}

TuningGrid TuningGrid::defaults(int p, int n) {
  if (p < 1 || n < 2)
    throw Error(ErrorCode::InvalidArgument, "TuningGrid: need p >= 1, n >= 2");
  const double base = std::sqrt(std::log(double(p)) / double(n));
  TuningGrid grid;
  grid.lambda_values = {0.5 * base, 1.0 * base};
  const double c_hi = c_star(p);
  const double c_lo = c_hi / 10.0;  // one decade below the anchor
  const int count = 10;
  for (int i = 0; i < count; ++i) {
    const double frac = double(i) / double(count - 1);
    const double c = c_lo * std::pow(c_hi / c_lo, frac);
    grid.eps_thre_values.push_back(c * base);
  }
  return grid;
}

double theta0_initial(const SampleCovariance& sigma_hat) {
  const double lambda_max = eigen_sym(sigma_hat.sigma_hat).d.maxCoeff();
  if (lambda_max <= 1e-14)
    throw Error(ErrorCode::DegenerateCovariance,
                "theta0_initial: lambda_max(Sigma_hat) <= 1e-14");
  return 1.0 / std::sqrt(lambda_max);
}

double neg_loglik(double theta0, const Eigen::Ref<const Matrix>& l,
                  const SampleCovariance& sigma_hat) {
  const int p = sigma_hat.p;
  if (l.rows() != p || l.cols() != p)
    throw Error(ErrorCode::DimensionMismatch, "neg_loglik: size");
  const EigenDecomposition eig = eigen_sym(l);
  if (theta0 + eig.d.minCoeff() <= 0.0)
    throw Error(ErrorCode::NonPD, "neg_loglik: theta0 I + L not PD");
  const double logdet = log_det_shifted(theta0, eig.d);
  Matrix m = theta0 * Matrix::Identity(p, p) + l;
  const double trace_term = (m * m).cwiseProduct(sigma_hat.sigma_hat).sum();
  return 0.5 * trace_term - logdet;
}

double gaussian_loglik(const Eigen::Ref<const Matrix>& data, double theta0,
                       const Eigen::Ref<const Matrix>& l) {
  const int n = static_cast<int>(data.rows());
  const int p = static_cast<int>(data.cols());
  const EigenDecomposition eig = eigen_sym(l);
  Vector shifted = eig.d.array() + theta0;
  if ((shifted.array() <= 0.0).any())
    throw Error(ErrorCode::NonPD, "gaussian_loglik: theta0 I + L not PD");
  const double logdet_m = shifted.array().log().sum();
  const Matrix proj = data * eig.q;
  const double quad = (proj * shifted.asDiagonal()).squaredNorm();
  return -0.5 * n * p * std::log(2.0 * std::numbers::pi) + n * logdet_m -
         0.5 * quad;
}

LaplacianSolveResult fit_step1(const SampleCovariance& sigma_hat,
                               double theta0_init, double lambda,
                               const AdmmSettings& settings,
                               const SplitState* warm_start) {
  const Vector v0 = Vector::Zero(sigma_hat.p);
  return solve_l_given_theta_v0(sigma_hat, theta0_init, v0, lambda,
                                std::nullopt, settings, warm_start);
}

LaplacianSolveResult fit_step2(const SampleCovariance& sigma_hat,
                               double theta0_init, const NullSet& null_set,
                               const AdmmSettings& settings) {
  const Vector v0 = Vector::Zero(sigma_hat.p);
  return solve_l_given_theta_v0(sigma_hat, theta0_init, v0, 0.0, null_set,
                                settings);
}

Step3Result fit_step3(const SampleCovariance& sigma_hat,
                      const NormalizedLaplacianEstimate& l_step2,
                      const NullSet& null_set, const AdmmSettings& settings,
                      const InnerPhiZSettings& inner, double phi_init) {
  EigvecProblem prob;
  prob.s = l_step2.entries;
  prob.lambda_star = 0.0;
  prob.eps_floor = inner.eps_floor;
  AdmmSettings eig_settings = settings;
  eig_settings.rho = 1.0;
  const EigvecSolveResult vres = solve_positive_eigvec(prob, eig_settings);

  JointSolveResult jres = solve_joint_theta_l(sigma_hat, vres.v, null_set,
                                              settings, inner, phi_init);
  Step3Result out;
  out.model = std::move(jres.model);
  out.joint_trace = std::move(jres.trace);
  out.eigvec_trace = std::move(vres.trace);
  return out;
}

double ebic_gamma_auto(int p, int n) {
  return double(p) / double(n) <= 0.5 ? 0.5 : 1.0;
}

EbicScore ebic_from_neg_loglik(double g_value, int n, int p, long s_hat,
                               double gamma) {
  if (gamma < 0.0 || gamma > 1.0)
    throw Error(ErrorCode::InvalidArgument, "ebic: gamma outside [0, 1]");
  const double q = double(p) * (p - 1) / 2.0;
  if (s_hat < 0 || double(s_hat) > q)
    throw Error(ErrorCode::InvalidArgument, "ebic: s_hat outside [0, Q]");
  const double log_binom = std::lgamma(q + 1.0) -
                           std::lgamma(q - double(s_hat) + 1.0) -
                           std::lgamma(double(s_hat) + 1.0);
  EbicScore score;
  score.loglik_term = 2.0 * n * g_value;
  score.complexity_term = double(s_hat) * std::log(double(n)) +
                          2.0 * gamma * log_binom;
  score.score = score.loglik_term + score.complexity_term;
  score.s_hat = s_hat;
  score.gamma = gamma;
  return score;
}

EbicScore ebic(const GarModel& model, const SampleCovariance& sigma_hat, int n,
               const GraphTopology& topology, std::optional<double> gamma) {
  const double g = neg_loglik(model.theta0, model.laplacian.entries, sigma_hat);
  const double gamma_value =
      gamma ? *gamma : ebic_gamma_auto(sigma_hat.p, n);
  return ebic_from_neg_loglik(g, n, sigma_hat.p,
                              long(topology.edge_count()), gamma_value);
}

FitReport fit_full(const Eigen::Ref<const Matrix>& data, const TuningGrid& grid,
                   const FitOptions& options) {
  if (data.rows() < 2)
    throw Error(ErrorCode::DimensionMismatch, "fit_full: need n >= 2");
  if (grid.lambda_values.empty() || grid.eps_thre_values.empty())
    throw Error(ErrorCode::InvalidArgument, "fit_full: empty tuning grid");

  const SampleCovariance sigma_hat = sample_covariance(data, /*center=*/true);
  const int n = sigma_hat.n;
  const int p = sigma_hat.p;
  const double theta0_init = theta0_initial(sigma_hat);
  const double gamma =
      options.gamma ? *options.gamma : ebic_gamma_auto(p, n);

  // Step 1 once per lambda, warm-starting along the grid.
  struct Step1Entry {
    Matrix l;
    bool converged;
    int iterations;
  };
  std::vector<Step1Entry> step1(grid.lambda_values.size());
  {
    SplitState warm = SplitState::zero(p);
    bool have_warm = false;
    for (std::size_t i = 0; i < grid.lambda_values.size(); ++i) {
      AdmmSettings s1 = options.step1;
      s1.rho = std::max(grid.lambda_values[i], 0.01);
      LaplacianSolveResult res =
          fit_step1(sigma_hat, theta0_init, grid.lambda_values[i], s1,
                    have_warm ? &warm : nullptr);
      warm = res.state;
      have_warm = true;
      step1[i] = {std::move(res.estimate.entries), res.trace.converged,
                  res.trace.iterations};
    }
  }

  // Derive the null set per cell; steps 2-3 depend only on the null set, so
  // duplicate topologies across cells share one solve.
  struct Job {
    GraphTopology topology;
    GarModel model;
    EbicScore score;
    bool converged = false;
    bool inner_converged = true;
    int step2_iterations = 0;
    int step3_iterations = 0;
    int eigvec_iterations = 0;
    bool usable = false;
  };
  std::vector<Job> jobs;
  std::map<std::vector<std::pair<int, int>>, int> job_index;
  struct CellRef {
    std::size_t lambda_idx, eps_idx;
    int job;
  };
  std::vector<CellRef> cells;
  for (std::size_t li = 0; li < grid.lambda_values.size(); ++li) {
    for (std::size_t ei = 0; ei < grid.eps_thre_values.size(); ++ei) {
      GraphTopology topo =
          topology_from_laplacian(step1[li].l, grid.eps_thre_values[ei]);
      auto [it, inserted] =
          job_index.try_emplace(topo.edges, int(jobs.size()));
      if (inserted) {
        jobs.push_back({});
        jobs.back().topology = std::move(topo);
      }
      cells.push_back({li, ei, it->second});
    }
  }

  parallel_for(int(jobs.size()), options.threads, [&](int j) {
    Job& job = jobs[j];
    try {
      const NullSet null_set = NullSet::complement_of(job.topology);
      LaplacianSolveResult step2 =
          fit_step2(sigma_hat, theta0_init, null_set, options.step23);
      const double phi_init =
          options.literal_phi_init ? options.inner.eps_floor : theta0_init;
      Step3Result step3 =
          fit_step3(sigma_hat, step2.estimate, null_set, options.step23,
                    options.inner, phi_init);
      job.score = ebic(step3.model, sigma_hat, n, job.topology, gamma);
      job.model = std::move(step3.model);
      job.converged = step2.trace.converged && step3.joint_trace.converged &&
                      step3.eigvec_trace.converged;
      job.inner_converged = step3.joint_trace.inner_converged;
      job.step2_iterations = step2.trace.iterations;
      job.step3_iterations = step3.joint_trace.iterations;
      job.eigvec_iterations = step3.eigvec_trace.iterations;
      job.usable = true;
    } catch (const Error&) {
      job.usable = false;
      job.converged = false;
    }
  });

  FitReport report;
  report.theta0_init = theta0_init;
  int best_cell = -1;
  for (std::size_t c = 0; c < cells.size(); ++c) {
    const CellRef& ref = cells[c];
    const Job& job = jobs[ref.job];
    GridCell cell;
    cell.lambda = grid.lambda_values[ref.lambda_idx];
    cell.eps_thre = grid.eps_thre_values[ref.eps_idx];
    cell.s_hat = job.topology.edge_count();
    cell.step1_iterations = step1[ref.lambda_idx].iterations;
    cell.step2_iterations = job.step2_iterations;
    cell.step3_iterations = job.step3_iterations;
    cell.eigvec_iterations = job.eigvec_iterations;
    cell.inner_converged = job.inner_converged;
    cell.converged =
        job.usable && job.converged && step1[ref.lambda_idx].converged;
    if (job.usable) cell.ebic = job.score;
    report.table.push_back(cell);
    if (cell.converged &&
        (best_cell < 0 ||
         cell.ebic.score < report.table[best_cell].ebic.score)) {
      best_cell = int(c);
    }
  }
  if (best_cell < 0)
    throw Error(ErrorCode::AllCellsFailed, "fit_full: no cell converged");

  report.table[best_cell].selected = true;
  report.lambda_star = report.table[best_cell].lambda;
  report.eps_star = report.table[best_cell].eps_thre;
  report.model = jobs[cells[best_cell].job].model;
  const Matrix centered = data.rowwise() - sigma_hat.y_bar.transpose();
  report.loglik =
      gaussian_loglik(centered, report.model.theta0,
                      report.model.laplacian.entries);
  report.param_count = long(report.table[best_cell].s_hat) + p + 1;
  return report;
}

GfResult goodness_of_fit(const Eigen::Ref<const Matrix>& data, double lambda,
                         int b, std::uint64_t seed,
                         const AdmmSettings& settings, int threads) {
  if (b < 1)
    throw Error(ErrorCode::InvalidArgument, "goodness_of_fit: need B >= 1");
  const SampleCovariance sigma_hat = sample_covariance(data, /*center=*/true);
  const int n = sigma_hat.n;
  const int p = sigma_hat.p;
  if (lambda <= 0.0) lambda = std::sqrt(std::log(double(p)) / double(n));

  AdmmSettings s1 = settings;
  s1.rho = std::max(lambda, 0.01);
  const double theta0_init = theta0_initial(sigma_hat);
  const LaplacianSolveResult step1 =
      fit_step1(sigma_hat, theta0_init, lambda, s1);

  const Matrix centered = data.rowwise() - sigma_hat.y_bar.transpose();
  GfResult out;
  out.ell_obs =
      gaussian_loglik(centered, theta0_init, step1.estimate.entries);

  // Draw from N(0, Sigma_hat_lambda) via rows Z (theta0 I + L)^{-1}.
  const EigenDecomposition l_eig = eigen_sym(step1.estimate.entries);
  const Vector inv_shifted =
      (l_eig.d.array() + theta0_init).inverse().matrix();
  const Matrix sampler =
      l_eig.q * inv_shifted.asDiagonal() * l_eig.q.transpose();

  std::vector<double> ell(b);
  std::vector<char> ok(b, 0);
  parallel_for(b, threads, [&](int draw) {
    Rng rng = Rng(seed).split(std::uint64_t(draw) + 1);
    Matrix z(n, p);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < p; ++j) z(i, j) = rng.normal();
    const Matrix y = z * sampler;
    try {
      const SampleCovariance boot_cov = sample_covariance(y, /*center=*/true);
      const double boot_theta0 = theta0_initial(boot_cov);
      const LaplacianSolveResult boot_fit =
          fit_step1(boot_cov, boot_theta0, lambda, s1);
      ell[draw] =
          gaussian_loglik(y, boot_theta0, boot_fit.estimate.entries);
      ok[draw] = 1;
    } catch (const Error&) {
      ok[draw] = 0;
    }
  });

  int count_leq = 0, successes = 0;
  for (int draw = 0; draw < b; ++draw) {
    if (!ok[draw]) continue;
    ++successes;
    out.ell_boot.push_back(ell[draw]);
    if (ell[draw] <= out.ell_obs) ++count_leq;
  }
  out.failed_draws = b - successes;
  if (successes == 0)
    throw Error(ErrorCode::AllCellsFailed,
                "goodness_of_fit: every bootstrap refit failed");
  out.b = successes;
  out.gf = double(count_leq) / double(successes);
  return out;
}

GarModel oracle_fit(const SampleCovariance& sigma_hat, double true_theta0,
                    const Eigen::Ref<const Vector>& true_v0,
                    const GraphTopology& true_topology,
                    const AdmmSettings& settings) {
  const NullSet null_set = NullSet::complement_of(true_topology);
  LaplacianSolveResult res = solve_l_given_theta_v0(
      sigma_hat, true_theta0, true_v0, 0.0, null_set, settings);
  GarModel model;
  model.theta0 = true_theta0;
  model.laplacian = std::move(res.estimate);
  model.laplacian.space = LaplacianSpace::Final;
  model.v0 = true_v0;
  return model;
}

}  // namespace gar
