#include "poclm/estimation.hpp"

#include <cmath>

#include "poclm/errors.hpp"
#include "poclm/optimizer.hpp"
#include "poclm/parallel.hpp"
#include "poclm/special.hpp"

namespace poclm {

void FitOptions::validate() const {
  if (max_iterations < 1) throw ConfigError("max_iterations must be positive");
  if (!(gradient_tolerance > 0.0)) throw ConfigError("gradient tolerance must be positive");
  if (!(relative_ll_tolerance > 0.0)) throw ConfigError("relative log-likelihood tolerance must be positive");
  if (!(parameter_cap > 0.0)) throw ConfigError("parameter cap must be positive");
  if (!(alpha_gap_floor > 0.0)) throw ConfigError("alpha gap floor must be positive");
  if (max_direction_enumeration < 0 || max_direction_enumeration > 24)
    throw ConfigError("direction enumeration cap out of range");
}

const char* to_string(EstimatorKind k) {
  switch (k) {
    case EstimatorKind::UMLE: return "UMLE";
    case EstimatorKind::CMLE: return "CMLE";
    case EstimatorKind::DMLE: return "DMLE";
    case EstimatorKind::PMLE: return "PMLE";
  }
  return "?";
}

namespace {

constexpr double kTieTol = 1e-8;
constexpr double kActiveIncrementTol = 1e-9;

void require_all_categories(const DesignData& data) {
  auto counts = data.category_counts();
  for (int j = 0; j < data.k; ++j) {
    if (counts[static_cast<size_t>(j)] == 0)
      throw FitError("response category " + std::to_string(j + 1) +
                     " has no observations; merge or drop the category before fitting");
  }
}

OptimOptions to_optim(const FitOptions& opts, bool strict_score) {
  OptimOptions o;
  o.max_iterations = opts.max_iterations;
  o.grad_tol = opts.gradient_tolerance;
  o.rel_ll_tol = opts.relative_ll_tolerance;
  o.param_cap = opts.parameter_cap;
  o.strict_score = strict_score;
  return o;
}

Direction regime_direction(ConstraintRegime r) {
  return r == ConstraintRegime::Antitonic ? Direction::Anti : Direction::Iso;
}

// Treatment of each ordinal block in a fit: free, or monotone with a fixed
// direction.
struct BlockTreatment {
  bool monotone = false;
  Direction dir = Direction::Iso;
};

Parametrization build_fit_parametrization(const ParameterLayout& layout,
                                          const std::vector<BlockTreatment>& treat, double eps_alpha) {
  Parametrization par(layout.p, eps_alpha);
  par.add_alpha_chain(0, layout.n_alpha());
  for (const auto& block : layout.blocks) {
    int gstart = layout.gamma_index(block.beta_start);
    if (block.role != Role::Ordinal) {
      par.add_free(gstart, block.size);
      continue;
    }
    int oi = 0;
    for (size_t i = 0; i < layout.ordinal_blocks.size(); ++i)
      if (layout.blocks[static_cast<size_t>(layout.ordinal_blocks[i])].predictor == block.predictor)
        oi = static_cast<int>(i);
    const auto& t = treat[static_cast<size_t>(oi)];
    if (t.monotone)
      par.add_monotone(gstart, block.size, t.dir);
    else
      par.add_free(gstart, block.size);
  }
  par.finish();
  return par;
}

std::vector<std::vector<bool>> active_increments(const ParameterLayout& layout,
                                                 const std::vector<BlockTreatment>& treat,
                                                 const Eigen::VectorXd& gamma) {
  std::vector<std::vector<bool>> out;
  for (size_t oi = 0; oi < layout.ordinal_blocks.size(); ++oi) {
    const auto& block = layout.blocks[static_cast<size_t>(layout.ordinal_blocks[oi])];
    if (!treat[oi].monotone) {
      out.emplace_back();
      continue;
    }
    std::vector<bool> flags(static_cast<size_t>(block.size), false);
    double prev = 0.0;
    double scale = 1.0 + gamma.segment(layout.gamma_index(block.beta_start), block.size)
                             .lpNorm<Eigen::Infinity>();
    for (int j = 0; j < block.size; ++j) {
      double cur = gamma[layout.gamma_index(block.beta_start) + j];
      flags[static_cast<size_t>(j)] = std::fabs(cur - prev) <= kActiveIncrementTol * scale;
      prev = cur;
    }
    out.push_back(std::move(flags));
  }
  return out;
}

FitResult finish_fit(EstimatorKind kind, const DesignData& data, const OptimResult& opt,
                     const std::vector<BlockTreatment>& treat) {
  FitResult fit;
  fit.kind = kind;
  fit.layout = data.layout;
  fit.estimate = ParameterVector::from_flat(data.layout, opt.gamma);
  fit.log_likelihood = opt.value;
  fit.converged = opt.converged;
  fit.quasi_separated = opt.quasi_separated;
  fit.iterations = opt.iterations;
  fit.proj_grad_norm = opt.proj_grad_norm;
  LikelihoodEvaluator ev(data);
  fit.fisher = ev.fisher(opt.gamma);
  fit.fisher_diag = fisher_diagnostics(fit.fisher);
  fit.active_constraints = active_increments(data.layout, treat, opt.gamma);
  return fit;
}

Eigen::VectorXd starting_gamma(const DesignData& data, const FitOptions& opts) {
  if (opts.initial) return opts.initial->to_flat(data.layout);
  return default_initial_gamma(data);
}

struct DirectionFitSetup {
  std::vector<BlockTreatment> treat;
  MonotoneDirection dirs;  // resolved per ordinal predictor
};

DirectionFitSetup resolve_directions(const ParameterLayout& layout, const MonotoneDirection& directions) {
  const int t = static_cast<int>(layout.ordinal_blocks.size());
  if (static_cast<int>(directions.dirs.size()) != t)
    throw ConfigError("direction assignment must have one entry per ordinal predictor");
  DirectionFitSetup setup;
  setup.dirs = directions;
  for (int oi = 0; oi < t; ++oi) {
    const auto& block = layout.ordinal_block(oi);
    BlockTreatment bt;
    switch (block.regime) {
      case ConstraintRegime::Unconstrained:
        bt.monotone = false;
        break;
      case ConstraintRegime::Isotonic:
      case ConstraintRegime::Antitonic:
        bt.monotone = true;
        bt.dir = regime_direction(block.regime);
        if (directions.dirs[static_cast<size_t>(oi)] != bt.dir)
          throw ConfigError("direction for " + block.name + " conflicts with its declared regime");
        setup.dirs.dirs[static_cast<size_t>(oi)] = bt.dir;
        break;
      case ConstraintRegime::EitherMonotone:
        bt.monotone = true;
        bt.dir = directions.dirs[static_cast<size_t>(oi)];
        break;
    }
    setup.treat.push_back(bt);
  }
  return setup;
}

FitResult run_fit(EstimatorKind kind, const DesignData& data, const ModelSpec& spec,
                  const std::vector<BlockTreatment>& treat, const FitOptions& opts,
                  const Eigen::VectorXd& gamma0, bool strict_score) {
  (void)spec;
  Parametrization par = build_fit_parametrization(data.layout, treat, opts.alpha_gap_floor);
  LikelihoodEvaluator ev(data);
  OptimResult opt = maximize_likelihood(ev, par, par.psi_from_gamma(gamma0), to_optim(opts, strict_score));
  return finish_fit(kind, data, opt, treat);
}

// Direction labels for a report when no constraint fixed them: take the
// block's own shape, Both breaking toward Iso.
MonotoneDirection directions_from_estimate(const ParameterLayout& layout, const ParameterVector& pv) {
  MonotoneDirection dirs;
  for (size_t oi = 0; oi < layout.ordinal_blocks.size(); ++oi) {
    BlockClass cls = classify_block(pv.ord[oi]);
    dirs.dirs.push_back(cls == BlockClass::Anti ? Direction::Anti : Direction::Iso);
  }
  return dirs;
}

}  // namespace

Eigen::VectorXd default_initial_gamma(const DesignData& data) {
  require_all_categories(data);
  auto counts = data.category_counts();
  Eigen::VectorXd gamma = Eigen::VectorXd::Zero(data.layout.p);
  double cum = 0.0;
  for (int j = 0; j + 1 < data.k; ++j) {
    cum += counts[static_cast<size_t>(j)];
    double prop = cum / data.n;
    gamma[j] = std::log(prop / (1.0 - prop));
  }
  return gamma;
}

FitResult fit_unconstrained(const DesignData& data, const ModelSpec& spec, const FitOptions& opts) {
  opts.validate();
  require_all_categories(data);
  std::vector<BlockTreatment> treat(data.layout.ordinal_blocks.size());
  FitResult fit = run_fit(EstimatorKind::UMLE, data, spec, treat, opts, starting_gamma(data, opts),
                          /*strict_score=*/true);
  fit.directions = directions_from_estimate(data.layout, fit.estimate);
  return fit;
}

FitResult fit_direction_constrained(const DesignData& data, const ModelSpec& spec,
                                    const MonotoneDirection& directions, const FitOptions& opts) {
  opts.validate();
  require_all_categories(data);
  DirectionFitSetup setup = resolve_directions(data.layout, directions);
  FitResult fit = run_fit(EstimatorKind::DMLE, data, spec, setup.treat, opts, starting_gamma(data, opts),
                          /*strict_score=*/false);
  fit.directions = setup.dirs;
  return fit;
}

namespace {

FitResult enumerate_directions(EstimatorKind kind, const DesignData& data, const ModelSpec& spec,
                               const PartialDirections& fixed, const FitOptions& opts) {
  const auto& layout = data.layout;
  const int t = static_cast<int>(layout.ordinal_blocks.size());
  if (static_cast<int>(fixed.dirs.size()) != t)
    throw ConfigError("partial direction assignment must have one entry per ordinal predictor");

  {
    int open = 0;
    for (int oi = 0; oi < t; ++oi) {
      const auto& block = layout.ordinal_block(oi);
      if (block.regime == ConstraintRegime::EitherMonotone && !fixed.dirs[static_cast<size_t>(oi)])
        ++open;
    }
    if (open > opts.max_direction_enumeration)
      throw FitError("direction enumeration over " + std::to_string(open) +
                     " predictors exceeds the cap of " +
                     std::to_string(opts.max_direction_enumeration));
  }

  // Base fit for warm starts and the feasibility shortcut.
  FitOptions inner = opts;
  inner.initial.reset();
  FitResult umle = opts.initial
                       ? FitResult{}
                       : fit_unconstrained(data, spec, inner);
  Eigen::VectorXd base_gamma = opts.initial ? opts.initial->to_flat(layout)
                                            : umle.gamma();

  // Resolve the per-block treatment skeleton and the list of enumerated
  // blocks (EitherMonotone without a fixed direction).
  std::vector<BlockTreatment> treat(static_cast<size_t>(t));
  std::vector<int> enumerated;
  MonotoneDirection dirs;
  dirs.dirs.assign(static_cast<size_t>(t), Direction::Iso);
  for (int oi = 0; oi < t; ++oi) {
    const auto& block = layout.ordinal_block(oi);
    auto& bt = treat[static_cast<size_t>(oi)];
    switch (block.regime) {
      case ConstraintRegime::Unconstrained:
        bt.monotone = false;
        if (fixed.dirs[static_cast<size_t>(oi)])
          throw ConfigError("cannot fix a direction for unconstrained predictor " + block.name);
        break;
      case ConstraintRegime::Isotonic:
      case ConstraintRegime::Antitonic:
        bt.monotone = true;
        bt.dir = regime_direction(block.regime);
        if (fixed.dirs[static_cast<size_t>(oi)] && *fixed.dirs[static_cast<size_t>(oi)] != bt.dir)
          throw ConfigError("fixed direction for " + block.name + " conflicts with its declared regime");
        dirs.dirs[static_cast<size_t>(oi)] = bt.dir;
        break;
      case ConstraintRegime::EitherMonotone:
        bt.monotone = true;
        if (fixed.dirs[static_cast<size_t>(oi)]) {
          bt.dir = *fixed.dirs[static_cast<size_t>(oi)];
          dirs.dirs[static_cast<size_t>(oi)] = bt.dir;
        } else {
          enumerated.push_back(oi);
        }
        break;
    }
  }

  const int te = static_cast<int>(enumerated.size());
  if (te > opts.max_direction_enumeration)
    throw FitError("direction enumeration over " + std::to_string(te) +
                   " predictors exceeds the cap of " + std::to_string(opts.max_direction_enumeration));

  // Shortcut: the unconstrained optimum already satisfies the constraints.
  if (!opts.initial && umle.converged && !umle.quasi_separated) {
    MembershipReport member = check_membership(umle.estimate, spec, ParameterSet::MonotoneEither);
    bool fixed_ok = true;
    for (int oi = 0; oi < t; ++oi) {
      if (!treat[static_cast<size_t>(oi)].monotone) continue;
      bool is_enumerated =
          std::find(enumerated.begin(), enumerated.end(), oi) != enumerated.end();
      BlockClass cls = member.block_class[static_cast<size_t>(oi)];
      if (is_enumerated) continue;  // MonotoneEither membership above covers it
      Direction d = treat[static_cast<size_t>(oi)].dir;
      bool ok = cls == BlockClass::Both ||
                (d == Direction::Iso ? cls == BlockClass::Iso : cls == BlockClass::Anti);
      fixed_ok = fixed_ok && ok;
    }
    if (member.member && fixed_ok) {
      FitResult fit = umle;
      fit.kind = kind;
      bool tie = false;
      for (int oi : enumerated) {
        BlockClass cls = member.block_class[static_cast<size_t>(oi)];
        dirs.dirs[static_cast<size_t>(oi)] = cls == BlockClass::Anti ? Direction::Anti : Direction::Iso;
        tie = tie || cls == BlockClass::Both;
      }
      fit.directions = dirs;
      fit.direction_tie = tie;
      fit.active_constraints = active_increments(layout, treat, fit.gamma());
      return fit;
    }
  }

  const int n_assignments = 1 << te;
  std::vector<FitResult> fits(static_cast<size_t>(n_assignments));
  auto run_one = [&](int mask) {
    std::vector<BlockTreatment> local = treat;
    for (int b = 0; b < te; ++b) {
      // lexicographic over declaration order, Iso before Anti
      bool anti = ((mask >> (te - 1 - b)) & 1) != 0;
      local[static_cast<size_t>(enumerated[static_cast<size_t>(b)])].dir =
          anti ? Direction::Anti : Direction::Iso;
    }
    fits[static_cast<size_t>(mask)] =
        run_fit(kind, data, spec, local, opts, base_gamma, /*strict_score=*/false);
  };
  parallel_for(n_assignments, run_one, opts.threads);

  int best = 0;
  bool tie = false;
  for (int mask = 1; mask < n_assignments; ++mask) {
    double diff = fits[static_cast<size_t>(mask)].log_likelihood -
                  fits[static_cast<size_t>(best)].log_likelihood;
    if (diff > kTieTol)
      best = mask;
    else if (std::fabs(diff) <= kTieTol)
      tie = true;
  }

  FitResult fit = std::move(fits[static_cast<size_t>(best)]);
  for (int b = 0; b < te; ++b) {
    bool anti = ((best >> (te - 1 - b)) & 1) != 0;
    dirs.dirs[static_cast<size_t>(enumerated[static_cast<size_t>(b)])] =
        anti ? Direction::Anti : Direction::Iso;
  }
  fit.directions = dirs;
  fit.direction_tie = tie;
  return fit;
}

}  // namespace

FitResult fit_constrained(const DesignData& data, const ModelSpec& spec, const FitOptions& opts) {
  opts.validate();
  require_all_categories(data);
  PartialDirections none;
  none.dirs.assign(data.layout.ordinal_blocks.size(), std::nullopt);
  return enumerate_directions(EstimatorKind::CMLE, data, spec, none, opts);
}

FitResult fit_partially_constrained(const DesignData& data, const ModelSpec& spec,
                                    const PartialDirections& fixed, const FitOptions& opts) {
  opts.validate();
  require_all_categories(data);
  return enumerate_directions(EstimatorKind::PMLE, data, spec, fixed, opts);
}

// ---- profiling -----------------------------------------------------------

ProfileTarget ProfileTarget::full_vector(Eigen::VectorXd gamma) {
  ProfileTarget t;
  t.kind = Kind::FullVector;
  t.values = std::move(gamma);
  return t;
}

ProfileTarget ProfileTarget::block(int predictor, Eigen::VectorXd values) {
  ProfileTarget t;
  t.kind = Kind::Block;
  t.predictor = predictor;
  t.values = std::move(values);
  return t;
}

ProfileTarget ProfileTarget::pair_contrast(int predictor, double first, double last) {
  ProfileTarget t;
  t.kind = Kind::PairContrast;
  t.predictor = predictor;
  t.values = Eigen::Vector2d(first, last);
  return t;
}

ProfileTarget ProfileTarget::diff_contrast(int predictor, Eigen::VectorXd diffs) {
  ProfileTarget t;
  t.kind = Kind::DiffContrast;
  t.predictor = predictor;
  t.values = std::move(diffs);
  return t;
}

namespace {

BlockClass classify_pair(double first, double last) {
  bool iso = 0.0 <= first && first <= last;
  bool anti = 0.0 >= first && first >= last;
  if (iso && anti) return BlockClass::Both;
  if (iso) return BlockClass::Iso;
  if (anti) return BlockClass::Anti;
  return BlockClass::Neither;
}

BlockClass classify_diffs(const Eigen::VectorXd& diffs) {
  bool iso = (diffs.array() >= 0.0).all();
  bool anti = (diffs.array() <= 0.0).all();
  if (iso && anti) return BlockClass::Both;
  if (iso) return BlockClass::Iso;
  if (anti) return BlockClass::Anti;
  return BlockClass::Neither;
}

}  // namespace

BlockClass classify_target(const ProfileTarget& target, const ModelSpec& spec) {
  switch (target.kind) {
    case ProfileTarget::Kind::Block:
      return classify_block(target.values);
    case ProfileTarget::Kind::PairContrast:
      return classify_pair(target.values[0], target.values[1]);
    case ProfileTarget::Kind::DiffContrast:
      return classify_diffs(target.values);
    case ProfileTarget::Kind::FullVector: {
      ParameterLayout layout = ParameterLayout::from_spec(spec);
      ParameterVector pv = ParameterVector::from_flat(layout, target.values);
      MembershipReport rep = check_membership(pv, spec, ParameterSet::MonotoneEither);
      return rep.member ? BlockClass::Both : BlockClass::Neither;
    }
  }
  return BlockClass::Neither;
}

namespace {

// Directions a constrained-mode candidate admits for its own block.
std::vector<Direction> admissible_target_directions(BlockClass cls, ConstraintRegime regime) {
  std::vector<Direction> out;
  auto allow = [&](Direction d) {
    if (regime == ConstraintRegime::Isotonic && d != Direction::Iso) return;
    if (regime == ConstraintRegime::Antitonic && d != Direction::Anti) return;
    out.push_back(d);
  };
  switch (cls) {
    case BlockClass::Iso: allow(Direction::Iso); break;
    case BlockClass::Anti: allow(Direction::Anti); break;
    case BlockClass::Both:
      allow(Direction::Iso);
      allow(Direction::Anti);
      break;
    case BlockClass::Neither: break;
  }
  return out;
}

struct ProfilePlan {
  Parametrization par;
  explicit ProfilePlan(int p, double eps) : par(p, eps) {}
};

}  // namespace

ProfileResult profile_nuisance(const DesignData& data, const ModelSpec& spec, const ProfileTarget& target,
                               ProfileMode mode, const FitOptions& opts, const Eigen::VectorXd* warm_start) {
  opts.validate();
  const auto& layout = data.layout;

  if (target.kind == ProfileTarget::Kind::FullVector) {
    if (static_cast<int>(target.values.size()) != layout.p)
      throw ConfigError("full-vector candidate has wrong dimension");
    ParameterVector pv = ParameterVector::from_flat(layout, target.values);
    if (!pv.alpha_strictly_increasing())
      throw ConfigError("full-vector candidate has unordered intercepts");
    if (mode == ProfileMode::Constrained) {
      MembershipReport rep = check_membership(pv, spec, ParameterSet::MonotoneEither);
      if (!rep.member)
        throw ConfigError("candidate violates the constrained parameter set");
    }
    LikelihoodEvaluator ev(data);
    EvalStatus st = ev.value(target.values);
    ProfileResult res;
    res.gamma = target.values;
    res.converged = st.ok();
    res.loglik = st.loglik;
    return res;
  }

  if (target.predictor < 0 || target.predictor >= static_cast<int>(spec.predictors.size()))
    throw ConfigError("profile target predictor index out of range");
  const auto& tblock = layout.block_for_predictor(target.predictor);
  if (tblock.role != Role::Ordinal &&
      (target.kind == ProfileTarget::Kind::PairContrast || target.kind == ProfileTarget::Kind::DiffContrast))
    throw ConfigError("contrast targets require an ordinal predictor");

  switch (target.kind) {
    case ProfileTarget::Kind::Block:
      if (static_cast<int>(target.values.size()) != tblock.size)
        throw ConfigError("candidate block has wrong length for " + tblock.name);
      break;
    case ProfileTarget::Kind::PairContrast:
      if (tblock.size < 2) throw ConfigError("pair contrast needs a block with at least 2 coefficients");
      break;
    case ProfileTarget::Kind::DiffContrast:
      if (static_cast<int>(target.values.size()) != tblock.size - 1)
        throw ConfigError("difference contrast needs exactly " + std::to_string(tblock.size - 1) + " values");
      break;
    default:
      break;
  }

  BlockClass target_class = classify_target(target, spec);
  const bool target_constrained =
      mode == ProfileMode::Constrained && tblock.regime != ConstraintRegime::Unconstrained;

  std::vector<Direction> target_dirs;
  if (target_constrained) {
    target_dirs = admissible_target_directions(target_class, tblock.regime);
    if (target_dirs.empty()) throw ConfigError("candidate violates the constrained parameter set");
  } else {
    target_dirs = {Direction::Iso};  // placeholder, unconstrained build ignores it
  }

  if (target_constrained && target.kind == ProfileTarget::Kind::PairContrast && tblock.size > 3)
    throw ConfigError(
        "constrained profiling of a pair contrast is only supported for blocks of up to 3 "
        "coefficients (interior coefficients would be mutually ordered)");

  // Nuisance ordinal blocks: enumerated directions under Constrained mode.
  std::vector<int> enumerated;
  const int t = static_cast<int>(layout.ordinal_blocks.size());
  for (int oi = 0; oi < t; ++oi) {
    const auto& block = layout.ordinal_block(oi);
    if (block.predictor == target.predictor) continue;
    if (mode == ProfileMode::Constrained && block.regime == ConstraintRegime::EitherMonotone)
      enumerated.push_back(oi);
  }
  if (static_cast<int>(enumerated.size()) > opts.max_direction_enumeration)
    throw FitError("direction enumeration exceeds the cap");

  auto build = [&](Direction target_dir, int mask) {
    Parametrization par(layout.p, opts.alpha_gap_floor);
    par.add_alpha_chain(0, layout.n_alpha());
    for (const auto& block : layout.blocks) {
      int gstart = layout.gamma_index(block.beta_start);
      if (block.predictor == target.predictor) {
        switch (target.kind) {
          case ProfileTarget::Kind::Block:
            par.add_pinned(gstart, target.values);
            break;
          case ProfileTarget::Kind::PairContrast: {
            double first = target.values[0];
            double last = target.values[1];
            par.add_pinned(gstart, Eigen::VectorXd::Constant(1, first));
            if (block.size > 2) {
              if (target_constrained) {
                double lo = std::min(first, last);
                double hi = std::max(first, last);
                par.add_free(gstart + 1, block.size - 2, lo, hi);
              } else {
                par.add_free(gstart + 1, block.size - 2);
              }
            }
            par.add_pinned(gstart + block.size - 1, Eigen::VectorXd::Constant(1, last));
            break;
          }
          case ProfileTarget::Kind::DiffContrast: {
            if (target_constrained) {
              double sign = target_dir == Direction::Iso ? 1.0 : -1.0;
              std::vector<bool> pinned(static_cast<size_t>(block.size), true);
              pinned[0] = false;
              Eigen::VectorXd pv = Eigen::VectorXd::Zero(block.size);
              pv.tail(block.size - 1) = sign * target.values;
              par.add_monotone(gstart, block.size, target_dir, pinned, pv);
            } else {
              Eigen::VectorXd offsets = Eigen::VectorXd::Zero(block.size);
              for (int j = 1; j < block.size; ++j) offsets[j] = offsets[j - 1] + target.values[j - 1];
              par.add_level_shift(gstart, offsets, -std::numeric_limits<double>::infinity(),
                                  std::numeric_limits<double>::infinity());
            }
            break;
          }
          default:
            break;
        }
        continue;
      }
      // nuisance block
      if (block.role != Role::Ordinal || mode == ProfileMode::Unconstrained ||
          block.regime == ConstraintRegime::Unconstrained) {
        par.add_free(gstart, block.size);
        continue;
      }
      Direction d;
      if (block.regime == ConstraintRegime::EitherMonotone) {
        int pos = -1;
        for (size_t e = 0; e < enumerated.size(); ++e) {
          const auto& eb = layout.ordinal_block(enumerated[e]);
          if (eb.predictor == block.predictor) pos = static_cast<int>(e);
        }
        bool anti = ((mask >> (static_cast<int>(enumerated.size()) - 1 - pos)) & 1) != 0;
        d = anti ? Direction::Anti : Direction::Iso;
      } else {
        d = regime_direction(block.regime);
      }
      par.add_monotone(gstart, block.size, d);
    }
    par.finish();
    return par;
  };

  Eigen::VectorXd base = warm_start ? *warm_start : default_initial_gamma(data);
  LikelihoodEvaluator ev(data);

  ProfileResult best;
  best.loglik = -std::numeric_limits<double>::infinity();
  bool first_run = true;
  const int n_masks = 1 << static_cast<int>(enumerated.size());
  for (Direction td : target_dirs) {
    for (int mask = 0; mask < n_masks; ++mask) {
      Parametrization par = build(td, mask);
      OptimResult opt = maximize_likelihood(ev, par, par.psi_from_gamma(base), to_optim(opts, false));
      if (first_run || opt.value > best.loglik) {
        best.loglik = opt.value;
        best.gamma = opt.gamma;
        best.converged = opt.converged;
        best.iterations = opt.iterations;
      }
      first_run = false;
    }
    if (!target_constrained) break;  // a single pass covers the unconstrained build
  }
  return best;
}

}  // namespace poclm
