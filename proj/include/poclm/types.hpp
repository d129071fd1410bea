#pragma once

#include <Eigen/Dense>

#include <optional>
#include <string>
#include <vector>

namespace poclm {

enum class Role { Ordinal, Nominal, Numeric };

// How an ordinal predictor's beta block is treated during constrained
// estimation.  EitherMonotone admits both directions (the direction is
// estimated), Isotonic/Antitonic pin it, Unconstrained exempts the block.
enum class ConstraintRegime { Unconstrained, EitherMonotone, Isotonic, Antitonic };

enum class Direction { Iso, Anti };

// Position of a beta block relative to the two monotone cones.
// Both = all coefficients zero (boundary shared by Iso and Anti).
enum class BlockClass { Iso, Anti, Both, Neither };

const char* to_string(Role r);
const char* to_string(ConstraintRegime c);
const char* to_string(Direction d);
const char* to_string(BlockClass c);

struct PredictorSpec {
  std::string name;
  Role role = Role::Numeric;
  // Ordered category labels for ordinal predictors, unordered level labels
  // for nominal ones; empty for numeric.  The first label is the baseline.
  std::vector<std::string> levels;
  ConstraintRegime regime = ConstraintRegime::Unconstrained;

  int n_levels() const { return static_cast<int>(levels.size()); }
  int block_size() const { return role == Role::Numeric ? 1 : n_levels() - 1; }

  static PredictorSpec ordinal(std::string name, std::vector<std::string> levels,
                               ConstraintRegime regime = ConstraintRegime::EitherMonotone);
  // Convenience: numeric level labels "1".."n".
  static PredictorSpec ordinal(std::string name, int n_categories,
                               ConstraintRegime regime = ConstraintRegime::EitherMonotone);
  static PredictorSpec nominal(std::string name, std::vector<std::string> levels);
  static PredictorSpec nominal(std::string name, int n_levels);
  static PredictorSpec numeric(std::string name);
};

struct ModelSpec {
  int k = 0;
  std::string response_name = "response";
  std::vector<std::string> response_levels;  // size k, ordered
  std::vector<PredictorSpec> predictors;

  void validate() const;  // throws ConfigError on an ill-formed spec

  int n_ordinal() const;
  // Ordinal predictors whose direction is estimated rather than pinned.
  int n_either_monotone() const;
  int total_dimension() const;

  static std::vector<std::string> numbered_levels(int n);
  static ModelSpec make(int k, std::vector<PredictorSpec> predictors);
};

// Fixed column/coordinate layout shared by DesignData and flat parameter
// vectors: alpha block first, then ordinal beta blocks in declaration
// order, then nominal blocks, then numeric coefficients.
struct ParameterLayout {
  struct Block {
    int predictor = -1;  // index into ModelSpec::predictors
    int beta_start = 0;  // column offset within the beta part
    int size = 0;
    Role role = Role::Numeric;
    ConstraintRegime regime = ConstraintRegime::Unconstrained;
    std::string name;
  };

  int k = 0;
  int m = 0;  // beta length
  int p = 0;  // k-1+m
  std::vector<Block> blocks;          // in layout order (ordinal, nominal, numeric)
  std::vector<int> ordinal_blocks;    // indices into `blocks`, declaration order

  int n_alpha() const { return k - 1; }
  const Block& block_for_predictor(int predictor_index) const;
  const Block& ordinal_block(int ordinal_index) const { return blocks[ordinal_blocks[ordinal_index]]; }
  int gamma_index(int beta_col) const { return k - 1 + beta_col; }

  static ParameterLayout from_spec(const ModelSpec& spec);
};

// gamma' = (alpha', beta_ord', beta_nonord') split by block.
struct ParameterVector {
  Eigen::VectorXd alpha;                 // k-1 intercepts, strictly increasing
  std::vector<Eigen::VectorXd> ord;      // one block per ordinal predictor, declaration order
  Eigen::VectorXd nonord;                // nominal dummy blocks then numeric coefficients

  bool alpha_strictly_increasing() const;
  int dimension() const;

  Eigen::VectorXd to_flat(const ParameterLayout& layout) const;
  static ParameterVector from_flat(const ParameterLayout& layout, const Eigen::VectorXd& gamma);
  static ParameterVector zeros(const ParameterLayout& layout);
};

// Monotonicity directions for every direction-estimated ordinal predictor.
// Indexed like ParameterLayout::ordinal_blocks; entries for predictors with
// a pinned or unconstrained regime are ignored.
struct MonotoneDirection {
  std::vector<Direction> dirs;

  static MonotoneDirection all(Direction d, int t) { return MonotoneDirection{std::vector<Direction>(static_cast<size_t>(t), d)}; }
};

// Partial assignment used by the partially constrained estimator.
struct PartialDirections {
  std::vector<std::optional<Direction>> dirs;
};

// Dummy-encoded observations.
struct DesignData {
  int n = 0;
  int k = 0;
  Eigen::VectorXi z;   // responses in 1..k
  Eigen::MatrixXd X;   // n x m, column order given by `layout`
  ParameterLayout layout;

  // y_ij = 1(z_i = j)
  double y(int i, int j) const { return z[i] == j ? 1.0 : 0.0; }
  void validate() const;  // throws DataError
  std::vector<int> category_counts() const;  // size k
};

}  // namespace poclm
