#pragma once

#include <cstdint>
#include <variant>

#include "poclm/inference.hpp"
#include "poclm/table.hpp"

namespace poclm {

// Sampling law for one predictor.
struct CategoricalDist {
  Eigen::VectorXd probs;  // over the declared levels
};
struct NormalDist {
  double mean = 0.0;
  double variance = 1.0;
};
using CovariateDist = std::variant<CategoricalDist, NormalDist>;

struct TruthSpec {
  ModelSpec model;
  ParameterVector truth;
  std::vector<CovariateDist> covariates;  // aligned with model.predictors

  void validate() const;
  // Uniform category distributions, standard normal numerics.
  static std::vector<CovariateDist> default_covariates(const ModelSpec& spec);
};

// Equally spaced monotone beta ladder used as the documented default truth
// family: block values run from -range/b to -range (Anti) or the mirror
// image (Iso), b = block size.
Eigen::VectorXd monotone_ladder(int block_size, double range, Direction dir);

// n iid rows: covariates from their laws, response from the category
// probabilities at the truth.  Identical (truth, n, seed) gives an
// identical table; draws are row-major, predictors in declaration order,
// response last.
RawTable generate_dataset(const TruthSpec& truth, int n, std::uint64_t seed);

enum class ExperimentMode { Coverage, Rejection, Both };

struct ExperimentConfig {
  TruthSpec truth;
  ExperimentMode mode = ExperimentMode::Coverage;
  std::vector<int> sample_sizes;
  int replicates = 500;
  double level = 0.95;
  std::vector<RegionKind> kinds = {RegionKind::UCCR, RegionKind::CCR, RegionKind::ACR};
  QuantileFamily family = QuantileFamily::PlainChiSq;
  std::uint64_t master_seed = 1;
  FitOptions fit;
  int threads = 0;

  void validate() const;
};

// ---- coverage ---------------------------------------------------------------

struct CoverageCell {
  int n = 0;
  RegionKind kind = RegionKind::UCCR;
  int same_covered = 0, same_total = 0;
  int diff_covered = 0, diff_total = 0;
  int excluded = 0;

  int total() const { return same_total + diff_total; }
  int covered() const { return same_covered + diff_covered; }
  double total_pct() const { return total() ? 100.0 * covered() / total() : 0.0; }
  double same_pct() const { return same_total ? 100.0 * same_covered / same_total : 0.0; }
  double diff_pct() const { return diff_total ? 100.0 * diff_covered / diff_total : 0.0; }
  double mc_se_pct() const;  // binomial MC standard error of total_pct
};

struct CoverageReport {
  std::uint64_t master_seed = 0;
  double level = 0.95;
  int df = 0;  // = p (the full parameter vector is assessed)
  QuantileFamily family = QuantileFamily::PlainChiSq;
  std::vector<CoverageCell> cells;  // sample-size major, kind order as configured

  const CoverageCell& cell(int n, RegionKind kind) const;
};

CoverageReport coverage_experiment(const ExperimentConfig& config);

// ---- rejection ----------------------------------------------------------------

enum class NullHypothesis { NoEffect, Monotone, DirectionIso, DirectionAnti };
const char* to_string(NullHypothesis h);

struct RejectionCell {
  int n = 0;
  int predictor = -1;
  NullHypothesis hypothesis = NullHypothesis::NoEffect;
  RegionKind basis = RegionKind::UCCR;  // UCCR or CCR decision rule
  int rejected = 0;
  int evaluated = 0;
  int excluded = 0;

  double pct() const { return evaluated ? 100.0 * rejected / evaluated : 0.0; }
};

struct RejectionReport {
  std::uint64_t master_seed = 0;
  double level = 0.95;
  QuantileFamily family = QuantileFamily::PlainChiSq;
  std::vector<RejectionCell> cells;

  const RejectionCell& cell(int n, int predictor, NullHypothesis h, RegionKind basis) const;
};

// Runs the three null hypotheses (no effect; monotone; each direction) for
// every monotonicity-constrained ordinal predictor under both the
// UCCR-based and CCR-based decision rules.
RejectionReport rejection_experiment(const ExperimentConfig& config);

}  // namespace poclm
