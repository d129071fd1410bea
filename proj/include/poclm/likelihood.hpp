#pragma once

#include <optional>

#include "poclm/types.hpp"

namespace poclm {

// Category probabilities pi_j = logistic(eta_j) - logistic(eta_{j-1}) for
// one observation row (beta part of gamma dotted with x).
Eigen::VectorXd category_probabilities(const ParameterVector& params, const ParameterLayout& layout,
                                       const Eigen::VectorXd& x_row);
// As above with eta offset w = x.beta already computed.
Eigen::VectorXd category_probabilities_at(const Eigen::VectorXd& alpha, double w);

// Status of a likelihood evaluation.  `underflow_row` is set when some
// pi_{z_i} fell below 1e-300, in which case loglik is -inf.
struct EvalStatus {
  double loglik = 0.0;
  std::optional<int> underflow_row;
  bool ok() const { return !underflow_row.has_value(); }
};

// Workspace for repeated likelihood evaluations on one dataset.  Pure
// functions of (gamma, data); safe to use one instance per thread.
class LikelihoodEvaluator {
 public:
  explicit LikelihoodEvaluator(const DesignData& data);

  // Value only; tolerates underflow (reported in the status).
  EvalStatus value(const Eigen::VectorXd& gamma);
  // Value plus score wrt raw gamma coordinates.
  EvalStatus value_and_score(const Eigen::VectorXd& gamma, Eigen::VectorXd& score);
  // Expected Fisher information at gamma (score covariance under the model).
  Eigen::MatrixXd fisher(const Eigen::VectorXd& gamma);

  const DesignData& data() const { return *data_; }

 private:
  const DesignData* data_;
  Eigen::VectorXd w_;      // n
  Eigen::VectorXd logpi_;  // n
  Eigen::VectorXd ra_, rb_, G_;
};

// Public operations (throw NumericError on probability underflow).
double log_likelihood(const ParameterVector& params, const DesignData& data);
Eigen::VectorXd score(const ParameterVector& params, const DesignData& data);
Eigen::MatrixXd fisher_information(const ParameterVector& params, const DesignData& data);

// Fisher singularity diagnostic: reciprocal condition number estimate and
// whether it falls below the reporting threshold.
struct FisherDiagnostics {
  double rcond = 0.0;
  bool near_singular = false;
};
FisherDiagnostics fisher_diagnostics(const Eigen::MatrixXd& fisher, double rcond_threshold = 1e-12);

// Membership checks for the three parameter sets.
enum class ParameterSet { Unconstrained, MonotoneEither, MonotoneFixed };

struct MembershipReport {
  bool member = false;
  bool alpha_ordered = false;
  std::vector<BlockClass> block_class;  // one entry per ordinal predictor
};

BlockClass classify_block(const Eigen::VectorXd& block);

// `directions` is required for MonotoneFixed and ignored otherwise.
// Blocks whose regime is Unconstrained are exempt from the monotone sets;
// Isotonic/Antitonic regimes pin a direction in both monotone sets.
MembershipReport check_membership(const ParameterVector& params, const ModelSpec& spec, ParameterSet set,
                                  const MonotoneDirection* directions = nullptr);

}  // namespace poclm
