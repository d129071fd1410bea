#include "poclm/simulation.hpp"

#include <cmath>

#include "poclm/design.hpp"
#include "poclm/errors.hpp"
#include "poclm/likelihood.hpp"
#include "poclm/parallel.hpp"
#include "poclm/rng.hpp"

namespace poclm {

std::vector<CovariateDist> TruthSpec::default_covariates(const ModelSpec& spec) {
  std::vector<CovariateDist> out;
  for (const auto& pred : spec.predictors) {
    if (pred.role == Role::Numeric) {
      out.emplace_back(NormalDist{0.0, 1.0});
    } else {
      int L = pred.n_levels();
      out.emplace_back(CategoricalDist{Eigen::VectorXd::Constant(L, 1.0 / L)});
    }
  }
  return out;
}

void TruthSpec::validate() const {
  model.validate();
  ParameterLayout layout = ParameterLayout::from_spec(model);
  if (truth.dimension() != layout.p) throw ConfigError("truth parameter vector has wrong dimension");
  if (!truth.alpha_strictly_increasing())
    throw ConfigError("truth intercepts must be strictly increasing");
  if (covariates.size() != model.predictors.size())
    throw ConfigError("covariate law list must match the predictor list");
  for (size_t i = 0; i < covariates.size(); ++i) {
    const auto& pred = model.predictors[i];
    if (pred.role == Role::Numeric) {
      const auto* nd = std::get_if<NormalDist>(&covariates[i]);
      if (!nd) throw ConfigError("numeric predictor " + pred.name + " needs a normal law");
      if (!(nd->variance > 0.0)) throw ConfigError("variance must be positive for " + pred.name);
    } else {
      const auto* cd = std::get_if<CategoricalDist>(&covariates[i]);
      if (!cd) throw ConfigError("categorical predictor " + pred.name + " needs a probability vector");
      if (static_cast<int>(cd->probs.size()) != pred.n_levels())
        throw ConfigError("probability vector for " + pred.name + " has wrong length");
      if ((cd->probs.array() < 0.0).any())
        throw ConfigError("negative probability for " + pred.name);
      if (std::fabs(cd->probs.sum() - 1.0) > 1e-9)
        throw ConfigError("probabilities for " + pred.name + " must sum to 1");
    }
  }
}

Eigen::VectorXd monotone_ladder(int block_size, double range, Direction dir) {
  Eigen::VectorXd block(block_size);
  for (int j = 0; j < block_size; ++j) block[j] = range * (j + 1) / block_size;
  return dir == Direction::Iso ? block : (-block).eval();
}

RawTable generate_dataset(const TruthSpec& truth, int n, std::uint64_t seed) {
  truth.validate();
  if (n < 1) throw ConfigError("sample size must be positive");
  const auto& spec = truth.model;
  ParameterLayout layout = ParameterLayout::from_spec(spec);
  Eigen::VectorXd gamma = truth.truth.to_flat(layout);
  Eigen::VectorXd beta = gamma.tail(layout.m);

  Rng rng(seed);
  const int npred = static_cast<int>(spec.predictors.size());
  std::vector<std::vector<std::string>> cat_cols(static_cast<size_t>(npred));
  std::vector<std::vector<double>> num_cols(static_cast<size_t>(npred));
  std::vector<std::string> response(static_cast<size_t>(n));

  Eigen::VectorXd x(layout.m);
  for (int i = 0; i < n; ++i) {
    x.setZero();
    for (int pi = 0; pi < npred; ++pi) {
      const auto& pred = spec.predictors[static_cast<size_t>(pi)];
      const auto& block = layout.block_for_predictor(pi);
      if (pred.role == Role::Numeric) {
        const auto& nd = std::get<NormalDist>(truth.covariates[static_cast<size_t>(pi)]);
        double v = rng.normal(nd.mean, std::sqrt(nd.variance));
        num_cols[static_cast<size_t>(pi)].push_back(v);
        x[block.beta_start] = v;
      } else {
        const auto& cd = std::get<CategoricalDist>(truth.covariates[static_cast<size_t>(pi)]);
        int level = rng.categorical(cd.probs);
        cat_cols[static_cast<size_t>(pi)].push_back(pred.levels[static_cast<size_t>(level - 1)]);
        if (level > 1) x[block.beta_start + level - 2] = 1.0;
      }
    }
    // response category from the cumulative logits at the truth
    double w = beta.dot(x);
    double u = rng.uniform();
    int z = spec.k;
    for (int j = 0; j < spec.k - 1; ++j) {
      if (u < logistic(gamma[j] + w)) {
        z = j + 1;
        break;
      }
    }
    response[static_cast<size_t>(i)] = spec.response_levels[static_cast<size_t>(z - 1)];
  }

  RawTable table;
  for (int pi = 0; pi < npred; ++pi) {
    const auto& pred = spec.predictors[static_cast<size_t>(pi)];
    if (pred.role == Role::Numeric)
      table.add_numeric_column(pred.name, std::move(num_cols[static_cast<size_t>(pi)]));
    else
      table.add_text_column(pred.name, std::move(cat_cols[static_cast<size_t>(pi)]));
  }
  table.add_text_column(spec.response_name, std::move(response));
  return table;
}

void ExperimentConfig::validate() const {
  truth.validate();
  if (sample_sizes.empty()) throw ConfigError("experiment needs at least one sample size");
  for (int n : sample_sizes)
    if (n < 1) throw ConfigError("sample sizes must be positive");
  if (replicates < 1) throw ConfigError("replicates must be >= 1");
  if (!(level > 0.0 && level < 1.0)) throw ConfigError("level must lie in (0,1)");
  if (kinds.empty()) throw ConfigError("experiment needs at least one region kind");
  fit.validate();
}

double CoverageCell::mc_se_pct() const {
  int m = total();
  if (m == 0) return 0.0;
  double p = static_cast<double>(covered()) / m;
  return 100.0 * std::sqrt(p * (1.0 - p) / m);
}

const CoverageCell& CoverageReport::cell(int n, RegionKind kind) const {
  for (const auto& c : cells)
    if (c.n == n && c.kind == kind) return c;
  throw ConfigError("no coverage cell for the requested size/kind");
}

namespace {

struct ReplicateOutcome {
  bool usable = false;
  bool same = false;
  bool covered_u = false;  // truth within the unconstrained region (r = p)
  bool covered_c = false;  // truth within the CMLE-centered region
};

constexpr double kSameTol = 1e-8;

}  // namespace

CoverageReport coverage_experiment(const ExperimentConfig& config) {
  config.validate();
  const ModelSpec& spec = config.truth.model;
  ParameterLayout layout = ParameterLayout::from_spec(spec);
  Eigen::VectorXd truth_gamma = config.truth.truth.to_flat(layout);

  MembershipReport truth_member =
      check_membership(config.truth.truth, spec, ParameterSet::MonotoneEither);
  if (!truth_member.member)
    throw ConfigError("the truth must satisfy the constrained parameter set for a coverage run");

  CoverageReport report;
  report.master_seed = config.master_seed;
  report.level = config.level;
  report.df = layout.p;
  report.family = config.family;
  const double q = region_quantile(config.family, layout.p, config.level);

  for (size_t ni = 0; ni < config.sample_sizes.size(); ++ni) {
    const int n = config.sample_sizes[ni];
    std::vector<ReplicateOutcome> outcomes(static_cast<size_t>(config.replicates));

    auto run_replicate = [&](int rep) {
      std::uint64_t seed = derive_stream_seed(
          config.master_seed, static_cast<std::uint64_t>(ni) * static_cast<std::uint64_t>(config.replicates) +
                                  static_cast<std::uint64_t>(rep));
      ReplicateOutcome& out = outcomes[static_cast<size_t>(rep)];
      RawTable table = generate_dataset(config.truth, n, seed);
      DesignData data;
      try {
        data = encode_design(table, spec);
      } catch (const DataError&) {
        return;  // degenerate draw (e.g. an unseen level makes a column constant)
      }
      auto counts = data.category_counts();
      for (int c : counts)
        if (c == 0) return;  // empty response category: excluded, counted
      FitOptions opts = config.fit;
      opts.threads = 0;
      FitResult umle, cmle;
      try {
        umle = fit_unconstrained(data, spec, opts);
        FitOptions warm = opts;
        warm.initial = umle.estimate;
        cmle = fit_constrained(data, spec, warm);
      } catch (const FitError&) {
        return;
      }
      if (!umle.converged || !cmle.converged || umle.quasi_separated || cmle.quasi_separated) return;

      LikelihoodEvaluator ev(data);
      EvalStatus at_truth = ev.value(truth_gamma);
      if (!at_truth.ok()) return;

      out.usable = true;
      out.same = (umle.gamma() - cmle.gamma()).lpNorm<Eigen::Infinity>() < kSameTol;
      double lr_u = std::max(2.0 * (umle.log_likelihood - at_truth.loglik), 0.0);
      double lr_c = std::max(2.0 * (cmle.log_likelihood - at_truth.loglik), 0.0);
      out.covered_u = lr_u <= q;
      out.covered_c = lr_c <= q;
    };
    parallel_for(config.replicates, run_replicate, config.threads);

    for (RegionKind kind : config.kinds) {
      CoverageCell cell;
      cell.n = n;
      cell.kind = kind;
      for (const auto& out : outcomes) {
        if (!out.usable) {
          ++cell.excluded;
          continue;
        }
        bool covered = false;
        switch (kind) {
          case RegionKind::UCR:
          case RegionKind::UCCR:
            // the truth satisfies the constraints, so UCCR coverage is UCR
            // coverage
            covered = out.covered_u;
            break;
          case RegionKind::CCR:
            covered = out.covered_c;
            break;
          case RegionKind::ACR:
            covered = out.covered_u || out.covered_c;
            break;
        }
        if (out.same) {
          ++cell.same_total;
          cell.same_covered += covered ? 1 : 0;
        } else {
          ++cell.diff_total;
          cell.diff_covered += covered ? 1 : 0;
        }
      }
      report.cells.push_back(cell);
    }
  }
  return report;
}

const char* to_string(NullHypothesis h) {
  switch (h) {
    case NullHypothesis::NoEffect: return "first";
    case NullHypothesis::Monotone: return "second";
    case NullHypothesis::DirectionIso: return "third-isotonic";
    case NullHypothesis::DirectionAnti: return "third-antitonic";
  }
  return "?";
}

const RejectionCell& RejectionReport::cell(int n, int predictor, NullHypothesis h, RegionKind basis) const {
  for (const auto& c : cells)
    if (c.n == n && c.predictor == predictor && c.hypothesis == h && c.basis == basis) return c;
  throw ConfigError("no rejection cell for the requested combination");
}

namespace {

struct TestOutcome {
  bool usable = false;
  // [hypothesis][basis: 0 = UCCR rule, 1 = CCR rule]
  bool reject[4][2] = {{false, false}, {false, false}, {false, false}, {false, false}};
};

}  // namespace

RejectionReport rejection_experiment(const ExperimentConfig& config) {
  config.validate();
  const ModelSpec& spec = config.truth.model;
  ParameterLayout layout = ParameterLayout::from_spec(spec);

  std::vector<int> tested_predictors;
  for (int oi = 0; oi < static_cast<int>(layout.ordinal_blocks.size()); ++oi) {
    const auto& block = layout.ordinal_block(oi);
    if (block.regime != ConstraintRegime::Unconstrained) tested_predictors.push_back(block.predictor);
  }
  if (tested_predictors.empty())
    throw ConfigError("rejection experiment needs at least one constrained ordinal predictor");

  RejectionReport report;
  report.master_seed = config.master_seed;
  report.level = config.level;
  report.family = config.family;

  const NullHypothesis hyps[4] = {NullHypothesis::NoEffect, NullHypothesis::Monotone,
                                  NullHypothesis::DirectionIso, NullHypothesis::DirectionAnti};

  for (size_t ni = 0; ni < config.sample_sizes.size(); ++ni) {
    const int n = config.sample_sizes[ni];
    // per predictor, per replicate
    std::vector<std::vector<TestOutcome>> outcomes(
        tested_predictors.size(), std::vector<TestOutcome>(static_cast<size_t>(config.replicates)));

    auto run_replicate = [&](int rep) {
      std::uint64_t seed = derive_stream_seed(
          config.master_seed, 0x100000000ULL * (ni + 1) + static_cast<std::uint64_t>(rep));
      RawTable table = generate_dataset(config.truth, n, seed);
      DesignData data;
      try {
        data = encode_design(table, spec);
      } catch (const DataError&) {
        return;
      }
      auto counts = data.category_counts();
      for (int c : counts)
        if (c == 0) return;
      FitOptions opts = config.fit;
      opts.threads = 0;
      ModelFits fits;
      try {
        fits = ModelFits::fit(data, spec, opts);
      } catch (const FitError&) {
        return;
      }
      if (!fits.umle.converged || !fits.cmle.converged || fits.umle.quasi_separated ||
          fits.cmle.quasi_separated)
        return;

      for (size_t ti = 0; ti < tested_predictors.size(); ++ti) {
        int predictor = tested_predictors[ti];
        TestOutcome& out = outcomes[ti][static_cast<size_t>(rep)];
        try {
          const auto& block = layout.block_for_predictor(predictor);
          const int df = block.size;
          // no effect: membership of the zero block
          Membership m0 = cr_membership(fits, ProfileTarget::block(predictor, Eigen::VectorXd::Zero(df)),
                                        config.level, df, config.family);
          out.reject[0][0] = !m0.uccr;
          out.reject[0][1] = !m0.ccr;
          // monotone: membership of the CMLE block
          Membership m1 = cr_membership(fits, ProfileTarget::block(predictor, fits.cmle_block(predictor)),
                                        config.level, df, config.family);
          out.reject[1][0] = !m1.uccr;
          out.reject[1][1] = !m1.ccr;
          // directions: membership of the direction-pinned PMLE block
          for (int di = 0; di < 2; ++di) {
            Direction dir = di == 0 ? Direction::Iso : Direction::Anti;
            TestDecision uccr_rule =
                test_direction(fits, predictor, dir, config.level, RegionKind::UCCR, config.family);
            TestDecision ccr_rule =
                test_direction(fits, predictor, dir, config.level, RegionKind::CCR, config.family);
            out.reject[2 + di][0] = uccr_rule.reject;
            out.reject[2 + di][1] = ccr_rule.reject;
          }
          out.usable = true;
        } catch (const std::runtime_error&) {
          out.usable = false;
        }
      }
    };
    parallel_for(config.replicates, run_replicate, config.threads);

    for (size_t ti = 0; ti < tested_predictors.size(); ++ti) {
      for (int hi = 0; hi < 4; ++hi) {
        for (int bi = 0; bi < 2; ++bi) {
          RejectionCell cell;
          cell.n = n;
          cell.predictor = tested_predictors[ti];
          cell.hypothesis = hyps[hi];
          cell.basis = bi == 0 ? RegionKind::UCCR : RegionKind::CCR;
          for (const auto& out : outcomes[ti]) {
            if (!out.usable) {
              ++cell.excluded;
              continue;
            }
            ++cell.evaluated;
            cell.rejected += out.reject[hi][bi] ? 1 : 0;
          }
          report.cells.push_back(cell);
        }
      }
    }
  }
  return report;
}

}  // namespace poclm
