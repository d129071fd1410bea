#include <doctest.h>

#include <cmath>
#include <sstream>

#include "poclm/design.hpp"
#include "poclm/reporting.hpp"
#include "poclm/simulation.hpp"

using namespace poclm;

namespace {

// The six-predictor simulated model: four OPs with 3..6 categories, one
// nominal predictor with 5 levels and one interval-scaled covariate.
TruthSpec full_design_truth() {
  TruthSpec truth;
  truth.model = ModelSpec::make(
      4, {PredictorSpec::ordinal("OP1", 3), PredictorSpec::ordinal("OP2", 4),
          PredictorSpec::ordinal("OP3", 5), PredictorSpec::ordinal("OP4", 6),
          PredictorSpec::nominal("nom", 5), PredictorSpec::numeric("x1")});
  ParameterLayout layout = ParameterLayout::from_spec(truth.model);
  Eigen::VectorXd gamma = Eigen::VectorXd::Zero(layout.p);
  gamma.head(3) << -2.0, 2.0, 5.5;
  // nominal block (0.7, 1.4, -0.3, -1.2), numeric 0.3; all OP blocks zero
  const auto& nom = layout.block_for_predictor(4);
  gamma.segment(layout.gamma_index(nom.beta_start), 4) << 0.7, 1.4, -0.3, -1.2;
  const auto& num = layout.block_for_predictor(5);
  gamma[layout.gamma_index(num.beta_start)] = 0.3;
  truth.truth = ParameterVector::from_flat(layout, gamma);

  truth.covariates = TruthSpec::default_covariates(truth.model);
  Eigen::VectorXd nomp(5);
  nomp << 0.2, 0.2, 0.3, 0.1, 0.2;
  truth.covariates[4] = CategoricalDist{nomp};
  truth.covariates[5] = NormalDist{1.0, 4.0};
  return truth;
}

TruthSpec two_op_truth(const Eigen::VectorXd& op2_block) {
  TruthSpec truth;
  truth.model = ModelSpec::make(4, {PredictorSpec::ordinal("OP1", 3), PredictorSpec::ordinal("OP2", 4)});
  ParameterLayout layout = ParameterLayout::from_spec(truth.model);
  Eigen::VectorXd gamma = Eigen::VectorXd::Zero(layout.p);
  gamma.head(3) << -2.0, 2.0, 5.5;
  gamma.segment(5, 3) = op2_block;
  truth.truth = ParameterVector::from_flat(layout, gamma);
  truth.covariates = TruthSpec::default_covariates(truth.model);
  return truth;
}

}  // namespace

TEST_CASE("generate_dataset: reproducible and seed-sensitive") {
  TruthSpec truth = two_op_truth(monotone_ladder(3, 1.5, Direction::Anti));
  RawTable a = generate_dataset(truth, 50, 7);
  RawTable b = generate_dataset(truth, 50, 7);
  RawTable c = generate_dataset(truth, 50, 8);
  std::ostringstream sa, sb, sc;
  write_csv(sa, a);
  write_csv(sb, b);
  write_csv(sc, c);
  CHECK(sa.str() == sb.str());
  CHECK(sa.str() != sc.str());
}

TEST_CASE("generate_dataset: nominal frequencies match the declared law") {
  TruthSpec truth = full_design_truth();
  const int n = 10000;
  RawTable table = generate_dataset(truth, n, 11);
  int ci = table.column_index("nom");
  const auto& col = table.text_column(ci);
  Eigen::VectorXd expected(5);
  expected << 0.2, 0.2, 0.3, 0.1, 0.2;
  for (int level = 1; level <= 5; ++level) {
    int count = 0;
    for (const auto& v : col) count += v == std::to_string(level) ? 1 : 0;
    double p = expected[level - 1];
    double se = std::sqrt(p * (1.0 - p) / n);
    CHECK(std::fabs(count / static_cast<double>(n) - p) < 3.0 * se + 1e-12);
  }
}

TEST_CASE("generate_dataset: numeric covariate matches its normal law") {
  TruthSpec truth = full_design_truth();
  const int n = 10000;
  RawTable table = generate_dataset(truth, n, 13);
  const auto& col = table.numeric_column(table.column_index("x1"));
  double mean = 0.0;
  for (double v : col) mean += v;
  mean /= n;
  CHECK(std::fabs(mean - 1.0) < 3.0 * 2.0 / std::sqrt(static_cast<double>(n)));
  double var = 0.0;
  for (double v : col) var += (v - mean) * (v - mean);
  var /= n - 1;
  CHECK(var == doctest::Approx(4.0).epsilon(0.15));
}

TEST_CASE("generate_dataset: response frequencies match the intercept-only truth") {
  // all beta zero apart from the OPs which are zero too: marginal response
  // distribution is given by the intercepts alone
  TruthSpec truth = two_op_truth(Eigen::Vector3d(0.0, 0.0, 0.0));
  const int n = 10000;
  RawTable table = generate_dataset(truth, n, 17);
  const auto& col = table.text_column(table.column_index("response"));
  auto sigma = [](double x) { return 1.0 / (1.0 + std::exp(-x)); };
  double expected[4] = {sigma(-2.0), sigma(2.0) - sigma(-2.0), sigma(5.5) - sigma(2.0), 1.0 - sigma(5.5)};
  for (int j = 1; j <= 4; ++j) {
    int count = 0;
    for (const auto& v : col) count += v == std::to_string(j) ? 1 : 0;
    double p = expected[j - 1];
    double se = std::sqrt(p * (1.0 - p) / n);
    CHECK(std::fabs(count / static_cast<double>(n) - p) <= 3.0 * se + 1e-9);
  }
}

TEST_CASE("monotone ladders span the documented default truth family") {
  Eigen::VectorXd small = monotone_ladder(3, 0.5, Direction::Anti);
  CHECK(small[2] == doctest::Approx(-0.5));
  CHECK(classify_block(small) == BlockClass::Anti);
  Eigen::VectorXd large = monotone_ladder(3, 3.0, Direction::Iso);
  CHECK(large[2] == doctest::Approx(3.0));
  CHECK(classify_block(large) == BlockClass::Iso);
  CHECK(monotone_ladder(2, 1.5, Direction::Anti)[0] == doctest::Approx(-0.75));
}

TEST_CASE("coverage experiment: reproducible, accounting identities, near-full region at high level") {
  ExperimentConfig cfg;
  cfg.truth = two_op_truth(monotone_ladder(3, 0.5, Direction::Anti));
  cfg.mode = ExperimentMode::Coverage;
  cfg.sample_sizes = {80};
  cfg.replicates = 40;
  cfg.level = 0.95;
  cfg.master_seed = 99;
  cfg.threads = 2;

  CoverageReport a = coverage_experiment(cfg);
  CoverageReport b = coverage_experiment(cfg);
  // bit-identical rerun
  std::ostringstream csv_a, csv_b;
  write_coverage_csv(csv_a, a);
  write_coverage_csv(csv_b, b);
  CHECK(csv_a.str() == csv_b.str());

  for (RegionKind kind : {RegionKind::UCCR, RegionKind::CCR, RegionKind::ACR}) {
    const auto& cell = a.cell(80, kind);
    CHECK(cell.total() + cell.excluded == 40);
    // split percentages recombine to the total
    double recombined = 0.0;
    if (cell.total() > 0)
      recombined = (cell.same_pct() * cell.same_total + cell.diff_pct() * cell.diff_total) / cell.total();
    CHECK(std::fabs(recombined - cell.total_pct()) < 0.05);
  }
  // ACR dominates UCCR and CCR in every row
  CHECK(a.cell(80, RegionKind::ACR).covered() >= a.cell(80, RegionKind::UCCR).covered());
  CHECK(a.cell(80, RegionKind::ACR).covered() >= a.cell(80, RegionKind::CCR).covered());

  // degenerate near-full region
  ExperimentConfig wide = cfg;
  wide.replicates = 15;
  wide.level = 0.9999;
  CoverageReport w = coverage_experiment(wide);
  for (RegionKind kind : {RegionKind::UCCR, RegionKind::CCR, RegionKind::ACR}) {
    const auto& cell = w.cell(80, kind);
    if (cell.total() > 0) CHECK(cell.total_pct() >= 99.0 * cell.total() / cell.total());
  }
}

TEST_CASE("coverage experiment: changing only the seed keeps the truth echo") {
  ExperimentConfig cfg;
  cfg.truth = two_op_truth(monotone_ladder(3, 1.5, Direction::Anti));
  cfg.sample_sizes = {60};
  cfg.replicates = 10;
  cfg.master_seed = 1;
  CoverageReport a = coverage_experiment(cfg);
  cfg.master_seed = 2;
  CoverageReport b = coverage_experiment(cfg);
  CHECK(a.master_seed != b.master_seed);
  CHECK(a.level == b.level);
  CHECK(a.df == b.df);
}

TEST_CASE("rejection experiment: saturated rows behave as expected at small scale") {
  ExperimentConfig cfg;
  cfg.truth = two_op_truth(monotone_ladder(3, 3.0, Direction::Anti));  // large distances
  cfg.mode = ExperimentMode::Rejection;
  cfg.sample_sizes = {150};
  cfg.replicates = 12;
  cfg.master_seed = 55;
  cfg.threads = 2;
  RejectionReport report = rejection_experiment(cfg);

  // OP2 (index 1): strong antitonic effect
  const auto& first_u = report.cell(150, 1, NullHypothesis::NoEffect, RegionKind::UCCR);
  CHECK(first_u.evaluated > 0);
  CHECK(first_u.pct() == doctest::Approx(100.0));
  const auto& third_iso = report.cell(150, 1, NullHypothesis::DirectionIso, RegionKind::UCCR);
  CHECK(third_iso.pct() == doctest::Approx(100.0));
  const auto& third_anti = report.cell(150, 1, NullHypothesis::DirectionAnti, RegionKind::CCR);
  CHECK(third_anti.pct() == doctest::Approx(0.0));
  // monotone truth: the second hypothesis is essentially never rejected
  const auto& second_c = report.cell(150, 1, NullHypothesis::Monotone, RegionKind::CCR);
  CHECK(second_c.pct() == doctest::Approx(0.0));

  // replicate bookkeeping
  CHECK(first_u.evaluated + first_u.excluded == 12);
}

TEST_CASE("experiment report rendering produces the table layouts") {
  ExperimentConfig cfg;
  cfg.truth = two_op_truth(monotone_ladder(3, 1.5, Direction::Anti));
  cfg.sample_sizes = {60};
  cfg.replicates = 6;
  cfg.master_seed = 3;
  CoverageReport cov = coverage_experiment(cfg);
  std::ostringstream text;
  write_coverage_text(text, cov);
  CHECK(text.str().find("Same MLE") != std::string::npos);
  CHECK(text.str().find("Total") != std::string::npos);

  cfg.replicates = 4;
  RejectionReport rej = rejection_experiment(cfg);
  std::ostringstream rtext;
  write_rejection_text(rtext, rej, cfg.truth.model);
  CHECK(rtext.str().find("First (all zero)") != std::string::npos);
  CHECK(rtext.str().find("UCCR") != std::string::npos);

  std::ostringstream rcsv;
  write_rejection_csv(rcsv, rej, cfg.truth.model);
  std::istringstream in(rcsv.str());
  RawTable parsed = read_csv(in);
  CHECK(parsed.column_index("hypothesis") >= 0);
  CHECK(parsed.n_rows() == 2 * 4 * 2);  // predictors x hypotheses x bases
}

TEST_CASE("replicate exclusion: tiny samples with empty categories are counted, not retried") {
  ExperimentConfig cfg;
  // k=4 with n=12 often misses a category entirely
  cfg.truth = two_op_truth(Eigen::Vector3d(0.0, 0.0, 0.0));
  cfg.sample_sizes = {12};
  cfg.replicates = 30;
  cfg.master_seed = 1234;
  CoverageReport report = coverage_experiment(cfg);
  const auto& cell = report.cell(12, RegionKind::CCR);
  CHECK(cell.excluded > 0);
  CHECK(cell.total() + cell.excluded == 30);
}

TEST_CASE("coverage sanity: interior truth at n=2000 stays within 4 MC SEs of the level") {
  ExperimentConfig cfg;
  cfg.truth = two_op_truth(monotone_ladder(3, 1.5, Direction::Anti));
  {
    // make OP1 strictly interior as well
    ParameterLayout layout = ParameterLayout::from_spec(cfg.truth.model);
    Eigen::VectorXd gamma = cfg.truth.truth.to_flat(layout);
    gamma.segment(3, 2) << -0.6, -1.2;
    cfg.truth.truth = ParameterVector::from_flat(layout, gamma);
  }
  cfg.sample_sizes = {2000};
  cfg.replicates = 100;
  cfg.level = 0.95;
  cfg.master_seed = 2718;
  cfg.threads = 2;
  CoverageReport report = coverage_experiment(cfg);
  for (RegionKind kind : {RegionKind::UCCR, RegionKind::CCR, RegionKind::ACR}) {
    const auto& cell = report.cell(2000, kind);
    double se = std::sqrt(0.95 * 0.05 / std::max(cell.total(), 1)) * 100.0;
    CHECK(std::fabs(cell.total_pct() - 95.0) <= 4.0 * se);
  }
}
