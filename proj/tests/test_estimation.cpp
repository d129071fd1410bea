#include <doctest.h>

#include <cmath>
#include <sstream>

#include "grid_oracle.hpp"
#include "poclm/design.hpp"
#include "poclm/errors.hpp"
#include "poclm/estimation.hpp"
#include "poclm/transform.hpp"
#include "test_helpers.hpp"

using namespace poclm;
using poclm::test::random_data;
using poclm::test::small_spec;

namespace {

DesignData encode_csv(const std::string& csv, const ModelSpec& spec) {
  std::istringstream in(csv);
  return encode_design(read_csv(in), spec);
}

DesignData binary_dataset(int n1, int n) {
  ModelSpec spec = ModelSpec::make(2, {});
  std::string csv = "response\n";
  for (int i = 0; i < n; ++i) csv += i < n1 ? "1\n" : "2\n";
  return encode_csv(csv, spec);
}

// Two-OP model from the boundary simulation design: OP1 with 3 categories,
// OP2 with 4, response with 4 categories.
TruthSpec two_op_truth(const Eigen::VectorXd& op2_block) {
  TruthSpec truth;
  truth.model = ModelSpec::make(4, {PredictorSpec::ordinal("op1", 3), PredictorSpec::ordinal("op2", 4)});
  ParameterLayout layout = ParameterLayout::from_spec(truth.model);
  Eigen::VectorXd gamma = Eigen::VectorXd::Zero(layout.p);
  gamma.head(3) << -2.0, 2.0, 5.5;
  gamma.segment(5, 3) = op2_block;
  truth.truth = ParameterVector::from_flat(layout, gamma);
  truth.covariates = TruthSpec::default_covariates(truth.model);
  return truth;
}

DesignData draw_two_op(const TruthSpec& truth, int n, std::uint64_t seed) {
  for (std::uint64_t attempt = 0;; ++attempt) {
    RawTable t = generate_dataset(truth, n, derive_stream_seed(seed, attempt));
    DesignData d = encode_design(t, truth.model);
    auto counts = d.category_counts();
    bool ok = true;
    for (int c : counts) ok = ok && c > 0;
    if (ok) return d;
    if (attempt > 20) throw std::runtime_error("no complete dataset");
  }
}

}  // namespace

TEST_CASE("binomial closed form: intercept-only UMLE is the empirical logit") {
  DesignData data = binary_dataset(30, 100);
  ModelSpec spec = ModelSpec::make(2, {});
  FitResult fit = fit_unconstrained(data, spec, {});
  CHECK(fit.converged);
  CHECK(fit.estimate.alpha[0] == doctest::Approx(std::log(0.3 / 0.7)).epsilon(1e-8));
  CHECK(fit.log_likelihood == doctest::Approx(30 * std::log(0.3) + 70 * std::log(0.7)).epsilon(1e-10));
}

TEST_CASE("UMLE satisfies first-order optimality") {
  for (std::uint64_t seed : {1ULL, 2ULL, 3ULL}) {
    ModelSpec spec = small_spec(3, 2);
    DesignData data = random_data(spec, 150, seed);
    FitResult fit = fit_unconstrained(data, spec, {});
    CHECK(fit.converged);
    Eigen::VectorXd s = score(fit.estimate, data);
    CHECK(s.lpNorm<Eigen::Infinity>() < 1e-6);
    CHECK(fit.estimate.alpha_strictly_increasing());
  }
}

TEST_CASE("empty response category is a hard error with guidance") {
  ModelSpec spec = ModelSpec::make(3, {});
  std::string csv = "response\n1\n1\n3\n3\n";
  DesignData data = encode_csv(csv, spec);
  CHECK_THROWS_WITH_AS(fit_unconstrained(data, spec, {}),
                       doctest::Contains("merge or drop the category"), FitError);
}

TEST_CASE("quasi-separation is flagged, not silent") {
  ModelSpec spec = ModelSpec::make(2, {PredictorSpec::ordinal("op1", 2, ConstraintRegime::Unconstrained)});
  std::string csv = "op1,response\n";
  for (int i = 0; i < 8; ++i) csv += "1,1\n";
  for (int i = 0; i < 8; ++i) csv += "2,2\n";
  DesignData data = encode_csv(csv, spec);
  FitResult fit = fit_unconstrained(data, spec, {});
  CHECK(fit.quasi_separated);
  CHECK_FALSE(fit.converged);
}

TEST_CASE("DMLE equals UMLE when the unconstrained optimum is feasible") {
  TruthSpec truth = two_op_truth(Eigen::Vector3d(-0.8, -1.6, -2.4));
  DesignData data = draw_two_op(truth, 800, 42);
  FitResult umle = fit_unconstrained(data, truth.model, {});
  // with a strong antitonic truth the UMLE is antitonic on OP2 with high
  // probability at n=800; require it for this deterministic seed
  REQUIRE(classify_block(umle.estimate.ord[1]) == BlockClass::Anti);
  if (classify_block(umle.estimate.ord[0]) != BlockClass::Neither) {
    MonotoneDirection dirs;
    dirs.dirs = {classify_block(umle.estimate.ord[0]) == BlockClass::Anti ? Direction::Anti : Direction::Iso,
                 Direction::Anti};
    FitResult dmle = fit_direction_constrained(data, truth.model, dirs, {});
    CHECK(dmle.converged);
    CHECK((dmle.gamma() - umle.gamma()).lpNorm<Eigen::Infinity>() < 1e-6);
  }
}

TEST_CASE("DMLE stays in its cone and satisfies the KKT sampling check") {
  TruthSpec truth = two_op_truth(Eigen::Vector3d(-0.25, -0.5, -0.75));
  DesignData data = draw_two_op(truth, 120, 7);
  MonotoneDirection dirs{{Direction::Iso, Direction::Anti}};  // force a wrong direction on op1
  FitResult dmle = fit_direction_constrained(data, truth.model, dirs, {});
  CHECK(dmle.converged);
  auto member = check_membership(dmle.estimate, truth.model, ParameterSet::MonotoneFixed, &dirs);
  CHECK(member.member);

  // no feasible coordinate perturbation of size 1e-4 improves the likelihood
  Eigen::VectorXd gamma = dmle.gamma();
  const double base = dmle.log_likelihood;
  const auto& layout = data.layout;
  for (int j = 0; j < layout.p; ++j) {
    for (double sign : {1.0, -1.0}) {
      Eigen::VectorXd pert = gamma;
      pert[j] += sign * 1e-4;
      ParameterVector pv = ParameterVector::from_flat(layout, pert);
      if (!pv.alpha_strictly_increasing()) continue;
      if (!check_membership(pv, truth.model, ParameterSet::MonotoneFixed, &dirs).member) continue;
      CHECK(log_likelihood(pv, data) <= base + 1e-8);
    }
  }
}

TEST_CASE("grid-search oracle: UMLE and DMLE on 2-parameter instances") {
  // k=2 with a single ordinal predictor of 2 categories: p = 2
  ModelSpec spec = ModelSpec::make(2, {PredictorSpec::ordinal("op1", 2)});
  std::ostringstream csv;
  csv << "op1,response\n";
  Rng rng(99);
  for (int i = 0; i < 30; ++i) {
    int x = rng.uniform() < 0.5 ? 1 : 2;
    double p1 = x == 1 ? 0.7 : 0.35;
    csv << x << ',' << (rng.uniform() < p1 ? 1 : 2) << '\n';
  }
  DesignData data = encode_csv(csv.str(), spec);
  auto collapsed = poclm::test::collapse(data);

  FitResult umle = fit_unconstrained(data, spec, {});
  auto grid_u = poclm::test::oracle_grid_search(collapsed, 1, 0.01, -5.0, 5.0, std::nullopt);
  CHECK(umle.log_likelihood == doctest::Approx(grid_u.loglik).epsilon(1e-3));
  CHECK(umle.log_likelihood >= grid_u.loglik - 1e-9);  // the grid cannot beat the optimizer

  MonotoneDirection iso{{Direction::Iso}};
  FitResult dmle = fit_direction_constrained(data, spec, iso, {});
  auto grid_d = poclm::test::oracle_grid_search(collapsed, 1, 0.01, -5.0, 5.0, Direction::Iso);
  CHECK(dmle.log_likelihood == doctest::Approx(grid_d.loglik).epsilon(1e-3));
  CHECK(dmle.log_likelihood >= grid_d.loglik - 1e-9);
}

TEST_CASE("grid-search oracle: DMLE over a 2-coordinate cone") {
  ModelSpec spec = ModelSpec::make(2, {PredictorSpec::ordinal("op1", 3)});
  std::ostringstream csv;
  csv << "op1,response\n";
  Rng rng(123);
  for (int i = 0; i < 30; ++i) {
    double u = rng.uniform();
    int x = u < 0.34 ? 1 : (u < 0.67 ? 2 : 3);
    double p1 = x == 1 ? 0.65 : (x == 2 ? 0.5 : 0.3);
    csv << x << ',' << (rng.uniform() < p1 ? 1 : 2) << '\n';
  }
  DesignData data = encode_csv(csv.str(), spec);
  auto collapsed = poclm::test::collapse(data);

  MonotoneDirection iso{{Direction::Iso}};
  FitResult dmle = fit_direction_constrained(data, spec, iso, {});
  REQUIRE(dmle.estimate.ord[0].lpNorm<Eigen::Infinity>() < 4.5);
  auto grid = poclm::test::oracle_grid_search(collapsed, 2, 0.01, -5.0, 5.0, Direction::Iso);
  CHECK(dmle.log_likelihood == doctest::Approx(grid.loglik).epsilon(1e-3));
  CHECK(dmle.log_likelihood >= grid.loglik - 1e-9);
}

TEST_CASE("CMLE: shortcut when the UMLE is already monotone, tie on symmetric data") {
  // perfectly balanced data: the UMLE beta is 0, both directions tie
  ModelSpec spec = ModelSpec::make(2, {PredictorSpec::ordinal("op1", 2)});
  std::string csv = "op1,response\n1,1\n1,2\n2,1\n2,2\n";
  DesignData data = encode_csv(csv, spec);
  FitResult cmle = fit_constrained(data, spec, {});
  CHECK(cmle.kind == EstimatorKind::CMLE);
  CHECK(cmle.converged);
  CHECK(cmle.estimate.ord[0].lpNorm<Eigen::Infinity>() < 1e-8);
  CHECK(cmle.direction_tie);
  CHECK(cmle.directions->dirs[0] == Direction::Iso);  // deterministic tie-break
}

TEST_CASE("estimator nesting across random seeds") {
  for (std::uint64_t seed : {11ULL, 12ULL, 13ULL, 14ULL}) {
    TruthSpec truth = two_op_truth(Eigen::Vector3d(-0.5, -1.0, -1.5));
    DesignData data = draw_two_op(truth, 90, seed);
    FitResult umle = fit_unconstrained(data, truth.model, {});
    FitOptions warm;
    warm.initial = umle.estimate;
    FitResult cmle = fit_constrained(data, truth.model, warm);
    CHECK(cmle.log_likelihood <= umle.log_likelihood + 1e-8);
    auto member = check_membership(cmle.estimate, truth.model, ParameterSet::MonotoneEither);
    CHECK(member.member);
    for (Direction d1 : {Direction::Iso, Direction::Anti}) {
      for (Direction d2 : {Direction::Iso, Direction::Anti}) {
        MonotoneDirection dirs{{d1, d2}};
        FitResult dmle = fit_direction_constrained(data, truth.model, dirs, warm);
        CHECK(dmle.log_likelihood <= cmle.log_likelihood + 1e-8);
      }
    }
    // equality iff feasible (with boundary slack in the converse direction)
    bool u_feasible = check_membership(umle.estimate, truth.model, ParameterSet::MonotoneEither).member;
    bool equal = std::fabs(cmle.log_likelihood - umle.log_likelihood) <= 1e-8;
    if (u_feasible) CHECK(equal);
    if (equal) {
      bool near_feasible = true;
      for (auto& block : umle.estimate.ord) {
        Eigen::VectorXd proj_iso = project_to_cone(block, Direction::Iso);
        Eigen::VectorXd proj_anti = project_to_cone(block, Direction::Anti);
        double dist = std::min((block - proj_iso).lpNorm<Eigen::Infinity>(),
                               (block - proj_anti).lpNorm<Eigen::Infinity>());
        near_feasible = near_feasible && dist < 1e-4;
      }
      CHECK(near_feasible);
    }
  }
}

TEST_CASE("idempotence: refitting from the estimate converges immediately") {
  ModelSpec spec = small_spec(3, 1);
  DesignData data = random_data(spec, 200, 31);
  FitResult first = fit_unconstrained(data, spec, {});
  FitOptions again;
  again.initial = first.estimate;
  FitResult second = fit_unconstrained(data, spec, again);
  CHECK(second.converged);
  CHECK(second.iterations <= 2);
  CHECK((second.gamma() - first.gamma()).lpNorm<Eigen::Infinity>() < 1e-7);
}

TEST_CASE("PMLE degenerate forms") {
  TruthSpec truth = two_op_truth(Eigen::Vector3d(-0.5, -1.0, -1.5));
  DesignData data = draw_two_op(truth, 120, 55);

  PartialDirections all_fixed;
  all_fixed.dirs = {Direction::Anti, Direction::Anti};
  FitResult pmle_fixed = fit_partially_constrained(data, truth.model, all_fixed, {});
  MonotoneDirection dirs{{Direction::Anti, Direction::Anti}};
  FitResult dmle = fit_direction_constrained(data, truth.model, dirs, {});
  CHECK(pmle_fixed.log_likelihood == doctest::Approx(dmle.log_likelihood).epsilon(1e-9));

  PartialDirections none;
  none.dirs = {std::nullopt, std::nullopt};
  FitResult pmle_free = fit_partially_constrained(data, truth.model, none, {});
  FitResult cmle = fit_constrained(data, truth.model, {});
  CHECK(pmle_free.log_likelihood == doctest::Approx(cmle.log_likelihood).epsilon(1e-9));
  // nested feasible sets
  CHECK(pmle_fixed.log_likelihood <= pmle_free.log_likelihood + 1e-8);
}

TEST_CASE("profile at the maximizer returns the maximized likelihood") {
  ModelSpec spec = small_spec(3, 1);
  DesignData data = random_data(spec, 100, 61);
  FitResult umle = fit_unconstrained(data, spec, {});
  Eigen::VectorXd block = umle.estimate.ord[0];
  Eigen::VectorXd warm = umle.gamma();
  ProfileResult prof = profile_nuisance(data, spec, ProfileTarget::block(0, block),
                                        ProfileMode::Unconstrained, {}, &warm);
  CHECK(prof.converged);
  CHECK(prof.loglik == doctest::Approx(umle.log_likelihood).epsilon(1e-8));
}

TEST_CASE("constrained profile never beats the unconstrained profile") {
  TruthSpec truth = two_op_truth(Eigen::Vector3d(-0.4, -0.8, -1.2));
  DesignData data = draw_two_op(truth, 150, 77);
  FitResult umle = fit_unconstrained(data, truth.model, {});
  Eigen::VectorXd warm = umle.gamma();
  for (double v : {-0.5, -0.2, 0.0}) {
    Eigen::VectorXd cand = Eigen::Vector3d(v, v - 0.2, v - 0.4);
    ProfileTarget target = ProfileTarget::block(1, cand);
    ProfileResult pu = profile_nuisance(data, truth.model, target, ProfileMode::Unconstrained, {}, &warm);
    ProfileResult pc = profile_nuisance(data, truth.model, target, ProfileMode::Constrained, {}, &warm);
    CHECK(pu.converged);
    CHECK(pc.converged);
    CHECK(pc.loglik <= pu.loglik + 1e-8);
  }
}

TEST_CASE("constrained profile rejects an infeasible candidate") {
  TruthSpec truth = two_op_truth(Eigen::Vector3d(-0.4, -0.8, -1.2));
  DesignData data = draw_two_op(truth, 60, 78);
  Eigen::VectorXd nonmono(3);
  nonmono << 0.5, -0.3, 0.1;
  CHECK_THROWS_AS(profile_nuisance(data, truth.model, ProfileTarget::block(1, nonmono),
                                   ProfileMode::Constrained, {}, nullptr),
                  ConfigError);
}

TEST_CASE("UMLE equals CMLE with frequency growing toward one at interior truths") {
  // medium-distance antitonic ladder on OP2, OP1 strictly interior as well
  TruthSpec truth = two_op_truth(Eigen::Vector3d(-0.5, -1.0, -1.5));
  {
    ParameterLayout layout = ParameterLayout::from_spec(truth.model);
    Eigen::VectorXd gamma = truth.truth.to_flat(layout);
    gamma.segment(3, 2) << -0.5, -1.0;  // interior OP1 block
    truth.truth = ParameterVector::from_flat(layout, gamma);
  }
  int same_small = 0, same_large = 0;
  const int reps = 30;
  for (int rep = 0; rep < reps; ++rep) {
    for (int which : {0, 1}) {
      int n = which == 0 ? 200 : 1000;
      DesignData data = draw_two_op(truth, n, 3000 + static_cast<std::uint64_t>(rep) * 2 + which);
      FitResult umle = fit_unconstrained(data, truth.model, {});
      FitOptions warm;
      warm.initial = umle.estimate;
      FitResult cmle = fit_constrained(data, truth.model, warm);
      bool same = (umle.gamma() - cmle.gamma()).lpNorm<Eigen::Infinity>() < 1e-8;
      (which == 0 ? same_small : same_large) += same ? 1 : 0;
    }
  }
  CHECK(same_large >= same_small);
  CHECK(same_large >= static_cast<int>(0.95 * reps));
}

TEST_CASE("direction enumeration cap rejects combinatorially infeasible requests") {
  std::vector<PredictorSpec> preds;
  for (int s = 0; s < 13; ++s) preds.push_back(PredictorSpec::ordinal("op" + std::to_string(s + 1), 2));
  ModelSpec spec = ModelSpec::make(2, std::move(preds));
  TruthSpec truth;
  truth.model = spec;
  truth.truth = ParameterVector::zeros(ParameterLayout::from_spec(spec));
  {
    ParameterLayout layout = ParameterLayout::from_spec(spec);
    Eigen::VectorXd gamma = Eigen::VectorXd::Zero(layout.p);
    gamma[0] = 0.2;
    truth.truth = ParameterVector::from_flat(layout, gamma);
  }
  truth.covariates = TruthSpec::default_covariates(spec);
  RawTable table = generate_dataset(truth, 60, 5);
  DesignData data = encode_design(table, spec);
  CHECK_THROWS_AS(fit_constrained(data, spec, {}), FitError);
  FitOptions raised;
  raised.max_direction_enumeration = 13;
  CHECK_NOTHROW(fit_constrained(data, spec, raised));
}
