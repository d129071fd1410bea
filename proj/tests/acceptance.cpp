// Acceptance suite: one test case per criterion, each printing a summary
// line.  Budgets are wall-clock seconds; tolerances are pinned in code.

#include <doctest.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>

#include <json.hpp>

#include "grid_oracle.hpp"
#include "poclm/config.hpp"
#include "poclm/design.hpp"
#include "poclm/inference.hpp"
#include "poclm/reporting.hpp"
#include "poclm/simulation.hpp"
#include "poclm/transform.hpp"
#include "test_helpers.hpp"

using namespace poclm;

namespace {

struct Stopwatch {
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  }
};

TruthSpec two_op_truth(double op2_range) {
  TruthSpec truth;
  truth.model = ModelSpec::make(4, {PredictorSpec::ordinal("OP1", 3), PredictorSpec::ordinal("OP2", 4)});
  ParameterLayout layout = ParameterLayout::from_spec(truth.model);
  Eigen::VectorXd gamma = Eigen::VectorXd::Zero(layout.p);
  gamma.head(3) << -2.0, 2.0, 5.5;
  gamma.segment(5, 3) = monotone_ladder(3, op2_range, Direction::Anti);
  truth.truth = ParameterVector::from_flat(layout, gamma);
  truth.covariates = TruthSpec::default_covariates(truth.model);
  return truth;
}

DesignData draw_complete(const TruthSpec& truth, int n, std::uint64_t seed) {
  for (std::uint64_t attempt = 0;; ++attempt) {
    RawTable t = generate_dataset(truth, n, derive_stream_seed(seed, attempt));
    DesignData d = encode_design(t, truth.model);
    auto counts = d.category_counts();
    bool ok = true;
    for (int c : counts) ok = ok && c > 0;
    if (ok) return d;
    if (attempt > 50) throw std::runtime_error("no complete dataset");
  }
}

}  // namespace

TEST_CASE("criterion 1: score matches central finite differences (100 draws)") {
  Stopwatch timer;
  Rng seeder(20240810);
  double worst = 0.0;
  for (int rep = 0; rep < 100; ++rep) {
    int k = 3 + rep % 2;
    int t = 1 + rep % 2;
    int n = rep % 2 == 0 ? 20 : 100;
    ModelSpec spec = poclm::test::small_spec(k, t);
    DesignData data = poclm::test::random_data(spec, n, 7000 + rep);
    ParameterVector pv = poclm::test::random_params(data.layout, seeder);
    Eigen::VectorXd gamma = pv.to_flat(data.layout);
    Eigen::VectorXd s = score(pv, data);
    for (int j = 0; j < data.layout.p; ++j) {
      double h = 1e-6 * std::max(1.0, std::fabs(gamma[j]));
      Eigen::VectorXd gp = gamma, gm = gamma;
      gp[j] += h;
      gm[j] -= h;
      double fp = log_likelihood(ParameterVector::from_flat(data.layout, gp), data);
      double fm = log_likelihood(ParameterVector::from_flat(data.layout, gm), data);
      double fd = (fp - fm) / (2.0 * h);
      worst = std::max(worst, std::fabs(s[j] - fd) / std::max(1.0, std::fabs(fd)));
    }
  }
  double secs = timer.seconds();
  CHECK(worst < 1e-6);
  CHECK(secs < 10.0);
  std::printf("[criterion 1] %s: max relative score error %.3g (budget 1e-6), %.2f s (budget 10 s)\n",
              worst < 1e-6 && secs < 10.0 ? "PASS" : "FAIL", worst, secs);
}

TEST_CASE("criterion 2: small-instance log-likelihoods match dense grid search (20 cases)") {
  Stopwatch timer;
  double worst_u = 0.0, worst_d = 0.0;
  int cases = 0;
  for (int rep = 0; rep < 40 && cases < 20; ++rep) {
    // k = 2 with one ordinal predictor of 2 or 3 categories: at most two
    // free beta coordinates next to the single intercept
    int p_s = 2 + rep % 2;
    ModelSpec spec = ModelSpec::make(2, {PredictorSpec::ordinal("op1", p_s)});
    TruthSpec truth;
    truth.model = spec;
    ParameterLayout layout = ParameterLayout::from_spec(spec);
    Eigen::VectorXd gamma = Eigen::VectorXd::Zero(layout.p);
    Rng rng(500 + rep);
    gamma[0] = -0.5 + rng.uniform();
    for (int j = 1; j < layout.p; ++j) gamma[j] = -1.5 + 3.0 * rng.uniform();
    truth.truth = ParameterVector::from_flat(layout, gamma);
    truth.covariates = TruthSpec::default_covariates(spec);
    DesignData data = draw_complete(truth, 30, 9100 + rep);

    FitResult umle = fit_unconstrained(data, spec, {});
    if (!umle.converged || umle.estimate.ord[0].lpNorm<Eigen::Infinity>() > 4.5) continue;
    auto collapsed = poclm::test::collapse(data);
    int b = p_s - 1;
    auto grid_u = poclm::test::oracle_grid_search(collapsed, b, 0.01, -5.0, 5.0, std::nullopt);
    worst_u = std::max(worst_u, std::fabs(umle.log_likelihood - grid_u.loglik));

    Direction dir = rep % 2 == 0 ? Direction::Iso : Direction::Anti;
    MonotoneDirection dirs{{dir}};
    FitResult dmle = fit_direction_constrained(data, spec, dirs, {});
    REQUIRE(dmle.converged);
    auto grid_d = poclm::test::oracle_grid_search(collapsed, b, 0.01, -5.0, 5.0, dir);
    worst_d = std::max(worst_d, std::fabs(dmle.log_likelihood - grid_d.loglik));
    ++cases;
  }
  double secs = timer.seconds();
  REQUIRE(cases == 20);
  CHECK(worst_u < 1e-3);
  CHECK(worst_d < 1e-3);
  CHECK(secs < 30.0);
  std::printf(
      "[criterion 2] %s: max |fit - grid| UMLE %.3g, DMLE %.3g (budget 1e-3), %.2f s (budget 30 s)\n",
      worst_u < 1e-3 && worst_d < 1e-3 && secs < 30.0 ? "PASS" : "FAIL", worst_u, worst_d, secs);
}

TEST_CASE("criterion 3: estimator nesting and feasibility on 200 seeded datasets") {
  Stopwatch timer;
  const double ranges[3] = {0.5, 1.5, 3.0};
  const int sizes[3] = {60, 100, 150};
  int checked = 0;
  for (int rep = 0; rep < 200; ++rep) {
    TruthSpec truth = two_op_truth(ranges[rep % 3]);
    DesignData data = draw_complete(truth, sizes[(rep / 3) % 3], 40000 + rep);
    FitResult umle = fit_unconstrained(data, truth.model, {});
    if (!umle.converged) continue;
    FitOptions warm;
    warm.initial = umle.estimate;
    FitResult cmle = fit_constrained(data, truth.model, warm);
    REQUIRE(cmle.converged);
    CHECK(cmle.log_likelihood <= umle.log_likelihood + 1e-8);
    CHECK(check_membership(cmle.estimate, truth.model, ParameterSet::MonotoneEither).member);

    bool u_feasible = check_membership(umle.estimate, truth.model, ParameterSet::MonotoneEither).member;
    bool uc_equal = std::fabs(cmle.log_likelihood - umle.log_likelihood) <= 1e-8;
    if (u_feasible) CHECK(uc_equal);
    if (uc_equal && !u_feasible) {
      // equality without exact feasibility only happens within floating
      // slack of the cone boundary
      double dist = 0.0;
      for (const auto& block : umle.estimate.ord) {
        double d_iso = (block - project_to_cone(block, Direction::Iso)).lpNorm<Eigen::Infinity>();
        double d_anti = (block - project_to_cone(block, Direction::Anti)).lpNorm<Eigen::Infinity>();
        dist = std::max(dist, std::min(d_iso, d_anti));
      }
      CHECK(dist < 1e-4);
    }

    for (Direction d1 : {Direction::Iso, Direction::Anti}) {
      for (Direction d2 : {Direction::Iso, Direction::Anti}) {
        MonotoneDirection dirs{{d1, d2}};
        FitResult dmle = fit_direction_constrained(data, truth.model, dirs, warm);
        CHECK(dmle.log_likelihood <= cmle.log_likelihood + 1e-8);
        CHECK(check_membership(dmle.estimate, truth.model, ParameterSet::MonotoneFixed, &dirs).member);
        bool c_feasible =
            check_membership(cmle.estimate, truth.model, ParameterSet::MonotoneFixed, &dirs).member;
        if (c_feasible) CHECK(std::fabs(dmle.log_likelihood - cmle.log_likelihood) <= 1e-8);
      }
    }
    ++checked;
  }
  double secs = timer.seconds();
  CHECK(checked >= 195);  // non-converged replicates are excluded, not hidden
  CHECK(secs < 120.0);
  std::printf("[criterion 3] PASS: %d/200 datasets checked, %.2f s (budget 120 s)\n", checked, secs);
}

TEST_CASE("criterion 4: parameter recovery at n=5000 (100 seeds, 3 SE, per coordinate)") {
  Stopwatch timer;
  // four OPs (3..6 categories, all-zero blocks), one nominal (5 levels),
  // one interval covariate
  TruthSpec truth;
  truth.model = ModelSpec::make(
      4, {PredictorSpec::ordinal("OP1", 3), PredictorSpec::ordinal("OP2", 4),
          PredictorSpec::ordinal("OP3", 5), PredictorSpec::ordinal("OP4", 6),
          PredictorSpec::nominal("nom", 5), PredictorSpec::numeric("x1")});
  ParameterLayout layout = ParameterLayout::from_spec(truth.model);
  Eigen::VectorXd gamma = Eigen::VectorXd::Zero(layout.p);
  gamma.head(3) << -2.0, 2.0, 5.5;
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

  std::vector<int> within(static_cast<size_t>(layout.p), 0);
  int usable = 0;
  for (int seed = 0; seed < 100; ++seed) {
    DesignData data = draw_complete(truth, 5000, 60000 + seed);
    FitResult fit = fit_unconstrained(data, truth.model, {});
    if (!fit.converged) continue;
    ++usable;
    Eigen::LDLT<Eigen::MatrixXd> ldlt(fit.fisher);
    REQUIRE(ldlt.info() == Eigen::Success);
    Eigen::MatrixXd cov = ldlt.solve(Eigen::MatrixXd::Identity(layout.p, layout.p));
    Eigen::VectorXd est = fit.gamma();
    for (int j = 0; j < layout.p; ++j) {
      double se = std::sqrt(std::max(cov(j, j), 0.0));
      if (std::fabs(est[j] - gamma[j]) <= 3.0 * se) within[static_cast<size_t>(j)]++;
    }
  }
  double secs = timer.seconds();
  REQUIRE(usable == 100);
  int worst_cover = 100;
  for (int j = 0; j < layout.p; ++j) worst_cover = std::min(worst_cover, within[static_cast<size_t>(j)]);
  CHECK(worst_cover >= 95);
  CHECK(secs < 300.0);
  std::printf(
      "[criterion 4] %s: weakest coordinate within 3 SE in %d/100 seeds (budget >= 95), %.2f s "
      "(budget 300 s)\n",
      worst_cover >= 95 && secs < 300.0 ? "PASS" : "FAIL", worst_cover, secs);
}

TEST_CASE("criterion 5: quantile reference values") {
  double e1 = std::fabs(chi2_quantile(1, 0.95) - 3.84146);
  double e2 = std::fabs(chi2_quantile(2, 0.95) - 5.99146);
  double e9 = std::fabs(chi2_quantile(9, 0.95) - 16.9190);
  double em = std::fabs(mixture_quantile(1, 0.95) - 2.70554);
  CHECK(e1 < 1e-4);
  CHECK(e2 < 1e-4);
  CHECK(e9 < 1e-4);
  CHECK(em < 1e-4);
  std::printf("[criterion 5] %s: chi2 errors %.2g / %.2g / %.2g, mixture %.2g (budget 1e-4)\n",
              e1 < 1e-4 && e2 < 1e-4 && e9 < 1e-4 && em < 1e-4 ? "PASS" : "FAIL", e1, e2, e9, em);
}

TEST_CASE("criterion 6: desk-scale coverage at n=500 (200 replicates, r = p)") {
  Stopwatch timer;
  // the bundled smoke configuration is the artifact under test here
  ExperimentConfig cfg = parse_experiment_config(std::string(POCLM_CONFIG_DIR) + "/table2_smoke.json");
  REQUIRE(cfg.replicates == 200);
  REQUIRE(cfg.level == 0.95);
  CoverageReport report = coverage_experiment(cfg);
  double ccr = report.cell(500, RegionKind::CCR).total_pct();
  double uccr = report.cell(500, RegionKind::UCCR).total_pct();
  double secs = timer.seconds();
  CHECK(std::fabs(ccr - 96.6) <= 3.5);
  CHECK(std::fabs(uccr - 96.0) <= 3.5);
  CHECK(secs < 1200.0);
  std::printf(
      "[criterion 6] %s: CCR coverage %.1f%% (target 96.6 +/- 3.5), UCCR %.1f%% (target 96.0 +/- "
      "3.5), %.2f s (budget 1200 s)\n",
      std::fabs(ccr - 96.6) <= 3.5 && std::fabs(uccr - 96.0) <= 3.5 ? "PASS" : "FAIL", ccr, uccr, secs);
}

TEST_CASE("criterion 7: desk-scale rejection rates at n=500 (100 replicates)") {
  Stopwatch timer;
  ExperimentConfig cfg;
  // the medium-distance ladder: the saturated 100%/0% cells of the target
  // tables need the stronger effect sizes of this truth family member
  cfg.truth = two_op_truth(1.5);
  cfg.mode = ExperimentMode::Rejection;
  cfg.sample_sizes = {500};
  cfg.replicates = 100;
  cfg.level = 0.95;
  cfg.master_seed = 424242;
  cfg.threads = 2;
  RejectionReport report = rejection_experiment(cfg);

  auto pct = [&](int predictor, NullHypothesis h, RegionKind basis) {
    return report.cell(500, predictor, h, basis).pct();
  };
  bool pass = true;
  for (RegionKind basis : {RegionKind::UCCR, RegionKind::CCR}) {
    CHECK(pct(1, NullHypothesis::NoEffect, basis) == doctest::Approx(100.0));
    CHECK(pct(1, NullHypothesis::DirectionIso, basis) == doctest::Approx(100.0));
    CHECK(pct(0, NullHypothesis::Monotone, basis) <= 2.0);
    CHECK(pct(1, NullHypothesis::Monotone, basis) <= 2.0);
    CHECK(pct(1, NullHypothesis::DirectionAnti, basis) <= 2.0);
    CHECK(pct(0, NullHypothesis::NoEffect, basis) <= 8.0);
    pass = pass && pct(1, NullHypothesis::NoEffect, basis) == 100.0 &&
           pct(1, NullHypothesis::DirectionIso, basis) == 100.0 &&
           pct(0, NullHypothesis::Monotone, basis) <= 2.0 &&
           pct(1, NullHypothesis::Monotone, basis) <= 2.0 &&
           pct(1, NullHypothesis::DirectionAnti, basis) <= 2.0 &&
           pct(0, NullHypothesis::NoEffect, basis) <= 8.0;
  }
  double secs = timer.seconds();
  CHECK(secs < 900.0);
  std::printf(
      "[criterion 7] %s: OP2 first/third-iso %.0f/%.0f%%, OP1 first %.1f%% (<=8), seconds %.2f "
      "(budget 900)\n",
      pass && secs < 900.0 ? "PASS" : "FAIL", pct(1, NullHypothesis::NoEffect, RegionKind::UCCR),
      pct(1, NullHypothesis::DirectionIso, RegionKind::UCCR),
      pct(0, NullHypothesis::NoEffect, RegionKind::UCCR), secs);
}

TEST_CASE("criterion 8: region structure properties on computed grids") {
  Stopwatch timer;
  TruthSpec truth = two_op_truth(1.5);
  DesignData data = draw_complete(truth, 300, 90001);
  ModelFits fits = ModelFits::fit(data, truth.model, {});

  int grids = 0;
  for (int predictor : {0, 1}) {
    const auto& block = fits.layout().block_for_predictor(predictor);
    RegionSpec spec;
    spec.predictor = predictor;
    spec.style = block.size <= 2 ? ContrastStyle::Coords : ContrastStyle::Diffs;
    spec.level = 0.95;
    spec.axis1.points = 11;
    spec.axis2.points = 11;
    RegionGrid grid = cr_grid(fits, spec);
    ++grids;

    double q50 = region_quantile(spec.family, grid.spec.df, 0.50);
    double q95 = region_quantile(spec.family, grid.spec.df, 0.95);
    for (const auto& pt : grid.points) {
      if (pt.m.uccr) CHECK(pt.m.ucr);
      CHECK(pt.m.acr == (pt.m.uccr || pt.m.ccr));
      if (pt.m.lr_unconstrained <= q50) CHECK(pt.m.lr_unconstrained <= q95);
      if (!std::isnan(pt.m.lr_constrained) && pt.m.lr_constrained <= q50)
        CHECK(pt.m.lr_constrained <= q95);
    }

    // the centered estimates belong to their own regions
    Membership m_u = cr_membership(fits, ProfileTarget::block(predictor, fits.umle_block(predictor)),
                                   0.95, grid.spec.df);
    CHECK(m_u.ucr);
    Membership m_c = cr_membership(fits, ProfileTarget::block(predictor, fits.cmle_block(predictor)),
                                   0.95, grid.spec.df);
    CHECK(m_c.ccr);
  }
  double secs = timer.seconds();
  CHECK(grids == 2);
  CHECK(secs < 60.0);
  std::printf("[criterion 8] PASS: %d grids, nesting/union/level-monotone properties hold, %.2f s "
              "(budget 60 s)\n",
              grids, secs);
}

TEST_CASE("criterion 9: synthetic school fixture reproduces the reference fits and decisions") {
  Stopwatch timer;
  ModelSpec spec;
  spec.k = 4;
  spec.response_name = "perf2019";
  spec.response_levels = {"Insufficient", "Medium-Low", "Medium", "High"};
  spec.predictors = {
      PredictorSpec::ordinal("perf2016", {"Insufficient", "Medium-Low", "Medium", "High"}),
      PredictorSpec::ordinal("funding", {"Public", "Mixed", "Private"}),
      PredictorSpec::numeric("regisRat"),
  };
  RawTable table = read_csv_file(std::string(POCLM_TEST_DATA_DIR) + "/school_synthetic.csv");
  DesignData data = encode_design(table, spec);
  REQUIRE(data.n == 5333);
  ModelFits fits = ModelFits::fit(data, spec, {});
  REQUIRE(fits.umle.converged);
  REQUIRE(fits.cmle.converged);

  nlohmann::json ref;
  {
    std::ifstream in(std::string(POCLM_TEST_DATA_DIR) + "/school_synthetic_reference.json");
    REQUIRE(in.good());
    in >> ref;
  }
  auto check_fit = [&](const FitResult& fit, const nlohmann::json& expect, const char* label) {
    Eigen::VectorXd est = fit.gamma();
    double worst = 0.0;
    auto alpha = expect.at("alpha").get<std::vector<double>>();
    for (size_t j = 0; j < alpha.size(); ++j)
      worst = std::max(worst, std::fabs(est[static_cast<int>(j)] - alpha[j]));
    auto beta = expect.at("beta").get<std::vector<double>>();
    for (size_t j = 0; j < beta.size(); ++j)
      worst = std::max(worst, std::fabs(est[3 + static_cast<int>(j)] - beta[j]));
    CHECK(worst < 1e-3);
    double ll_gap = std::fabs(fit.log_likelihood - expect.at("loglik").get<double>());
    CHECK(ll_gap < 1e-3);
    std::printf("  %s: max coordinate gap %.2e, loglik gap %.2e\n", label, worst, ll_gap);
    return worst < 1e-3 && ll_gap < 1e-3;
  };
  bool ok = check_fit(fits.umle, ref.at("umle"), "UMLE vs reference");
  ok = check_fit(fits.cmle, ref.at("cmle"), "CMLE vs reference") && ok;

  // the walkthrough decisions at level 0.95
  TestDecision no_effect = test_no_effect(fits, 1, 0.95, EstimatorKind::UMLE);
  CHECK(no_effect.reject);
  TestDecision no_effect_c = test_no_effect(fits, 1, 0.95, EstimatorKind::CMLE);
  CHECK(no_effect_c.reject);
  TestDecision mono = test_monotonicity(fits, 1, 0.95);
  CHECK_FALSE(mono.reject);
  TestDecision iso_ccr = test_direction(fits, 1, Direction::Iso, 0.95, RegionKind::CCR);
  CHECK(iso_ccr.reject);
  TestDecision iso_uccr = test_direction(fits, 1, Direction::Iso, 0.95, RegionKind::UCCR);
  CHECK(iso_uccr.reject);

  // the one-dimensional interval for the Private coefficient brackets the
  // reference value
  Interval ci = wald_ci(fits.umle, 7, 0.95);
  double ref_private = ref.at("umle").at("beta")[4].get<double>();
  CHECK(ci.contains(ref_private));

  ok = ok && no_effect.reject && no_effect_c.reject && !mono.reject && iso_ccr.reject && iso_uccr.reject;
  double secs = timer.seconds();
  std::printf("[criterion 9] %s: reference fits within 1e-3, decisions reject/fail-to-reject/reject, "
              "%.2f s\n",
              ok ? "PASS" : "FAIL", secs);
}
