#pragma once

#include <optional>

#include "poclm/likelihood.hpp"
#include "poclm/types.hpp"

namespace poclm {

struct FitOptions {
  int max_iterations = 200;
  double gradient_tolerance = 1e-8;
  double relative_ll_tolerance = 1e-13;
  double parameter_cap = 30.0;     // |gamma_j| beyond this with a large gradient flags separation
  double alpha_gap_floor = 1e-8;   // eps in the alpha chain reparametrization
  int max_direction_enumeration = 12;  // reject more than 2^12 direction subproblems
  std::optional<ParameterVector> initial;
  int threads = 0;  // parallel direction enumeration / grid rows; 0 = serial

  void validate() const;
};

enum class EstimatorKind { UMLE, CMLE, DMLE, PMLE };
const char* to_string(EstimatorKind k);

struct FitResult {
  EstimatorKind kind = EstimatorKind::UMLE;
  ParameterLayout layout;
  ParameterVector estimate;
  double log_likelihood = 0.0;
  bool converged = false;
  bool quasi_separated = false;
  int iterations = 0;
  double proj_grad_norm = 0.0;
  Eigen::MatrixXd fisher;  // expected information at the estimate
  FisherDiagnostics fisher_diag;
  std::optional<MonotoneDirection> directions;  // per ordinal predictor
  bool direction_tie = false;
  // Per ordinal predictor: which of the block's inequalities hold with
  // equality at the estimate (increment == 0); empty for blocks that were
  // not monotonicity-constrained in this fit.
  std::vector<std::vector<bool>> active_constraints;

  Eigen::VectorXd gamma() const { return estimate.to_flat(layout); }
};

// Maximum likelihood over U_UM (alpha strictly ordered, beta free).
FitResult fit_unconstrained(const DesignData& data, const ModelSpec& spec, const FitOptions& opts);

// Directions fixed for every monotonicity-constrained ordinal predictor.
FitResult fit_direction_constrained(const DesignData& data, const ModelSpec& spec,
                                    const MonotoneDirection& directions, const FitOptions& opts);

// Both directions admitted per EitherMonotone predictor: exhaustive
// enumeration of direction assignments, best log-likelihood wins, ties
// break toward Iso in declaration order.
FitResult fit_constrained(const DesignData& data, const ModelSpec& spec, const FitOptions& opts);

// Some directions fixed, the rest enumerated.
FitResult fit_partially_constrained(const DesignData& data, const ModelSpec& spec,
                                    const PartialDirections& fixed, const FitOptions& opts);

// ---- Nuisance profiling -------------------------------------------------

enum class ProfileMode { Unconstrained, Constrained };

// The fixed part of a profile optimization.
struct ProfileTarget {
  enum class Kind { FullVector, Block, PairContrast, DiffContrast };
  Kind kind = Kind::Block;
  int predictor = -1;       // ModelSpec predictor index (not used for FullVector)
  Eigen::VectorXd values;   // FullVector: gamma; Block: block values;
                            // PairContrast: (first, last); DiffContrast: adjacent differences

  static ProfileTarget full_vector(Eigen::VectorXd gamma);
  static ProfileTarget block(int predictor, Eigen::VectorXd values);
  static ProfileTarget pair_contrast(int predictor, double first, double last);
  static ProfileTarget diff_contrast(int predictor, Eigen::VectorXd diffs);
};

// Candidate position relative to the monotone cones, in the target's own
// coordinates (block values, pinned pair, or differences).
BlockClass classify_target(const ProfileTarget& target, const ModelSpec& spec);

struct ProfileResult {
  double loglik = 0.0;
  Eigen::VectorXd gamma;   // full parameter vector at the profiled optimum
  bool converged = false;
  int iterations = 0;
};

// Maximizes the log-likelihood over everything outside the target.  In
// Constrained mode the nuisance ordinal blocks obey their regimes (both
// directions enumerated for EitherMonotone) and the candidate itself must
// be compatible with the constrained set, else ConfigError.
ProfileResult profile_nuisance(const DesignData& data, const ModelSpec& spec, const ProfileTarget& target,
                               ProfileMode mode, const FitOptions& opts,
                               const Eigen::VectorXd* warm_start = nullptr);

// Starting values: alpha from logits of empirical cumulative response
// frequencies, beta zero.  Requires every category to appear.
Eigen::VectorXd default_initial_gamma(const DesignData& data);

}  // namespace poclm
