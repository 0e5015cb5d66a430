#pragma once

#include "gar/types.hpp"

#include <algorithm>
#include <vector>

namespace gar {

/// Shared ADMM hyperparameters. rho stays fixed over a solve; the recommended
/// rule for the penalized L-problem is rho = max(lambda, 0.01).
struct AdmmSettings {
  double rho = 1.0;
  double eps_abs = 1e-4;   // in [1e-5, 1e-4]
  double eps_rel = 1e-3;   // in [1e-3, 1e-2]
  int max_iter = 5000;

  static AdmmSettings for_lambda(double lambda) {
    AdmmSettings s;
    s.rho = std::max(lambda, 0.01);
    return s;
  }
};

/// Per-iteration residual history. converged <=> final primal <= eps_primal
/// and final dual <= eps_dual.
struct AdmmTrace {
  std::vector<double> primal_residual;
  std::vector<double> dual_residual;
  std::vector<double> eps_primal;
  std::vector<double> eps_dual;
  bool converged = false;
  int iterations = 0;
  bool inner_converged = true;  // joint solver: false once any inner loop caps

  void record(double primal, double dual, double ep, double ed) {
    primal_residual.push_back(primal);
    dual_residual.push_back(dual);
    eps_primal.push_back(ep);
    eps_dual.push_back(ed);
  }
};

}  // namespace gar
