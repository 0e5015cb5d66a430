#pragma once

#include "gar/admm_eigvec.hpp"
#include "gar/admm_joint.hpp"
#include "gar/admm_laplacian.hpp"

#include <optional>
#include <vector>

namespace gar {

/// Tuning values; both lambda and eps_thre are of the form C sqrt(log p / n).
struct TuningGrid {
  std::vector<double> lambda_values;    // ascending
  std::vector<double> eps_thre_values;  // ascending

  /// Upper constant for the threshold grid. Anchored at 0.05 (p=100),
  /// 0.075 (p=250), 0.1 (p=500); elsewhere interpolated log-linearly in p and
  /// clamped to [0.05, 0.1].
  static double c_star(int p);
  /// lambda C in {0.5, 1}; eps_thre = 10 log-spaced values over
  /// [C*/10, C*] scaled by sqrt(log p / n).
  static TuningGrid defaults(int p, int n);
};

struct EbicScore {
  double score = 0.0;
  double loglik_term = 0.0;      // 2 n g
  double complexity_term = 0.0;  // s log n + 2 gamma log C(Q, s)
  long s_hat = 0;
  double gamma = 0.0;
};

struct GfResult {
  double gf = 0.0;
  int b = 0;  // successful bootstrap draws (the divisor)
  double ell_obs = 0.0;
  std::vector<double> ell_boot;
  int failed_draws = 0;
};

/// One (lambda, eps_thre) cell of the tuning sweep.
struct GridCell {
  double lambda = 0.0;
  double eps_thre = 0.0;
  bool converged = false;
  bool selected = false;
  EbicScore ebic;
  std::size_t s_hat = 0;
  int step1_iterations = 0;
  int step2_iterations = 0;
  int step3_iterations = 0;
  int eigvec_iterations = 0;
  bool inner_converged = true;
};

struct FitReport {
  double theta0_init = 0.0;
  double lambda_star = 0.0;
  double eps_star = 0.0;
  GarModel model;
  std::vector<GridCell> table;
  double loglik = 0.0;   // full-constant Gaussian loglik at the selected model
  long param_count = 0;  // s_hat + p (diagonal) + 1 (theta0)
  std::optional<GfResult> gf;
};

/// Step 0: 1 / sqrt(lambda_max(Sigma_hat)).
double theta0_initial(const SampleCovariance& sigma_hat);

/// g(theta0, L) = (1/2) trace((theta0 I + L)^2 Sigma_hat)
///              - log det(theta0 I + L). Throws NonPD.
double neg_loglik(double theta0, const Eigen::Ref<const Matrix>& l,
                  const SampleCovariance& sigma_hat);

/// Full-constant Gaussian log-likelihood of (mean-zero) rows under
/// N(0, (theta0 I + L)^-2).
double gaussian_loglik(const Eigen::Ref<const Matrix>& data, double theta0,
                       const Eigen::Ref<const Matrix>& l);

/// Step 1: penalized fit on the relaxed space (v0 constraint dropped).
LaplacianSolveResult fit_step1(const SampleCovariance& sigma_hat,
                               double theta0_init, double lambda,
                               const AdmmSettings& settings,
                               const SplitState* warm_start = nullptr);

/// Step 2: unpenalized constrained refit on the null-set space.
LaplacianSolveResult fit_step2(const SampleCovariance& sigma_hat,
                               double theta0_init, const NullSet& null_set,
                               const AdmmSettings& settings);

/// Step 3: v0 from the positive-eigenvector solver on the Step 2 estimate,
/// then the joint (theta0, L) solve. phi warm-started at phi_init
/// (<= 0 selects Step 0 internally).
struct Step3Result {
  GarModel model;
  AdmmTrace joint_trace;
  AdmmTrace eigvec_trace;
};
Step3Result fit_step3(const SampleCovariance& sigma_hat,
                      const NormalizedLaplacianEstimate& l_step2,
                      const NullSet& null_set, const AdmmSettings& settings,
                      const InnerPhiZSettings& inner, double phi_init = -1.0);

/// eBIC from pre-computed pieces; the log-binomial uses lgamma, never
/// factorials. Exposed so externally fitted models (e.g. a GGM) can be scored
/// with the same rule.
EbicScore ebic_from_neg_loglik(double g_value, int n, int p, long s_hat,
                               double gamma);

/// gamma rule when unset: 0.5 if p/n <= 0.5, else 1.
double ebic_gamma_auto(int p, int n);

EbicScore ebic(const GarModel& model, const SampleCovariance& sigma_hat, int n,
               const GraphTopology& topology,
               std::optional<double> gamma = std::nullopt);

struct FitOptions {
  AdmmSettings step1;   // rho replaced by max(lambda, 0.01) per lambda
  AdmmSettings step23;  // rho for the unpenalized refits and the joint solve;
                        // the eigenvector solve inside step 3 uses rho = 1
  InnerPhiZSettings inner;
  std::optional<double> gamma;    // empty = auto rule
  bool literal_phi_init = false;  // start phi at eps_floor instead of Step 0
  int threads = 1;

  FitOptions() { step23.rho = 1.0; }
};

/// The full pipeline: Step 0 once, Step 1 per lambda, Steps 2-3 per distinct
/// null set, eBIC selection over converged cells. Deterministic given data
/// and options (thread count does not change results).
FitReport fit_full(const Eigen::Ref<const Matrix>& data, const TuningGrid& grid,
                   const FitOptions& options = FitOptions());

/// Parametric-bootstrap goodness of fit at a single lambda
/// (lambda <= 0 selects sqrt(log p / n)).
GfResult goodness_of_fit(const Eigen::Ref<const Matrix>& data, double lambda,
                         int b, std::uint64_t seed,
                         const AdmmSettings& settings = AdmmSettings(),
                         int threads = 1);

/// Refit with everything but the edge weights known: lambda = 0, true theta0
/// and v0 fixed, null set = complement of the true topology.
GarModel oracle_fit(const SampleCovariance& sigma_hat, double true_theta0,
                    const Eigen::Ref<const Vector>& true_v0,
                    const GraphTopology& true_topology,
                    const AdmmSettings& settings);

}  // namespace gar
