#pragma once

#include "poclm/likelihood.hpp"
#include "poclm/transform.hpp"

namespace poclm {

struct OptimOptions {
  int max_iterations = 200;
  double grad_tol = 1e-8;
  double rel_ll_tol = 1e-13;
  double param_cap = 30.0;
  // Require the raw-gamma score to satisfy grad_tol as well; only sensible
  // for surjective parametrizations without box constraints (full
  // unconstrained fits).
  bool strict_score = false;
};

struct OptimResult {
  Eigen::VectorXd psi;
  Eigen::VectorXd gamma;
  double value = 0.0;
  bool converged = false;
  bool quasi_separated = false;
  int iterations = 0;
  double proj_grad_norm = 0.0;
  Eigen::VectorXd score;  // raw-gamma score at the solution
};

// Projected Fisher-scoring ascent with Armijo backtracking: the metric is
// J' F J restricted to inactive coordinates, bound coordinates are clamped
// and frozen while their multiplier sign holds them at the bound.
OptimResult maximize_likelihood(LikelihoodEvaluator& ev, const Parametrization& par,
                                const Eigen::VectorXd& psi0, const OptimOptions& opts);

}  // namespace poclm
