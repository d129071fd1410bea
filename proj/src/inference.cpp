#include "poclm/inference.hpp"

#include <cmath>
#include <ostream>

#include "poclm/errors.hpp"
#include "poclm/optimizer.hpp"
#include "poclm/parallel.hpp"

namespace poclm {

namespace {
constexpr double kLrNoise = 1e-8;
constexpr double kSameTol = 1e-8;
}  // namespace

double lr_statistic(double loglik_full, double loglik_null) {
  double r = 2.0 * (loglik_full - loglik_null);
  if (r < -kLrNoise)
    throw FitError("negative likelihood-ratio statistic (" + std::to_string(r) +
                   "): the null fit is not nested in the full fit or one of them did not converge");
  return std::max(r, 0.0);
}

double lr_statistic(const FitResult& full, const FitResult& null_fit) {
  return lr_statistic(full.log_likelihood, null_fit.log_likelihood);
}

double wald_statistic(const LinearHypothesis& hyp, const FitResult& fit) {
  const int r = static_cast<int>(hyp.C.rows());
  if (hyp.C.cols() != fit.layout.p) throw ConfigError("hypothesis matrix has wrong number of columns");
  if (hyp.xi.size() != r) throw ConfigError("hypothesis right-hand side has wrong length");
  Eigen::FullPivLU<Eigen::MatrixXd> lu(hyp.C);
  if (lu.rank() < r) throw ConfigError("hypothesis matrix is rank deficient");

  Eigen::LDLT<Eigen::MatrixXd> fisher_ldlt(fit.fisher);
  if (fisher_ldlt.info() != Eigen::Success || fit.fisher_diag.near_singular)
    throw FitError("Fisher information is numerically singular (rcond " +
                   std::to_string(fit.fisher_diag.rcond) + ")");
  Eigen::MatrixXd FinvCt = fisher_ldlt.solve(hyp.C.transpose());
  Eigen::MatrixXd M = hyp.C * FinvCt;
  Eigen::VectorXd dev = hyp.C * fit.gamma() - hyp.xi;
  Eigen::LDLT<Eigen::MatrixXd> mldlt(M);
  if (mldlt.info() != Eigen::Success) throw FitError("C F^-1 C' is not positive definite");
  double w = dev.dot(mldlt.solve(dev));
  return std::max(w, 0.0);
}

Interval wald_ci(const FitResult& fit, int gamma_index, double level) {
  if (gamma_index < 0 || gamma_index >= fit.layout.p) throw ConfigError("coordinate index out of range");
  if (!(level > 0.0 && level < 1.0)) throw ConfigError("confidence level must lie in (0,1)");
  Eigen::LDLT<Eigen::MatrixXd> ldlt(fit.fisher);
  if (ldlt.info() != Eigen::Success || fit.fisher_diag.near_singular)
    throw FitError("Fisher information is numerically singular");
  Eigen::VectorXd e = Eigen::VectorXd::Zero(fit.layout.p);
  e[gamma_index] = 1.0;
  double var = e.dot(ldlt.solve(e));
  double se = std::sqrt(std::max(var, 0.0));
  double z = normal_quantile(1.0 - 0.5 * (1.0 - level));
  double est = fit.gamma()[gamma_index];
  return Interval{est - z * se, est + z * se};
}

const char* to_string(RegionKind k) {
  switch (k) {
    case RegionKind::UCR: return "ucr";
    case RegionKind::UCCR: return "uccr";
    case RegionKind::CCR: return "ccr";
    case RegionKind::ACR: return "acr";
  }
  return "?";
}

RegionKind region_kind_from_string(const std::string& s) {
  if (s == "ucr") return RegionKind::UCR;
  if (s == "uccr") return RegionKind::UCCR;
  if (s == "ccr") return RegionKind::CCR;
  if (s == "acr") return RegionKind::ACR;
  throw ConfigError("unknown region kind: " + s);
}

double region_quantile(QuantileFamily family, int df, double level) {
  return family == QuantileFamily::PlainChiSq ? chi2_quantile(df, level) : mixture_quantile(df, level);
}

ModelFits ModelFits::fit(DesignData data, ModelSpec spec, FitOptions opts) {
  ModelFits fits{std::move(data), std::move(spec), std::move(opts), {}, {}};
  fits.umle = fit_unconstrained(fits.data, fits.spec, fits.opts);
  FitOptions warm = fits.opts;
  warm.initial = fits.umle.estimate;
  fits.cmle = fit_constrained(fits.data, fits.spec, warm);
  return fits;
}

Eigen::VectorXd ModelFits::umle_block(int predictor) const {
  const auto& b = layout().block_for_predictor(predictor);
  return umle.gamma().segment(layout().gamma_index(b.beta_start), b.size);
}

Eigen::VectorXd ModelFits::cmle_block(int predictor) const {
  const auto& b = layout().block_for_predictor(predictor);
  return cmle.gamma().segment(layout().gamma_index(b.beta_start), b.size);
}

bool Membership::flag(RegionKind k) const {
  switch (k) {
    case RegionKind::UCR: return ucr;
    case RegionKind::UCCR: return uccr;
    case RegionKind::CCR: return ccr;
    case RegionKind::ACR: return acr;
  }
  return false;
}

namespace {

// Candidate compatibility with the constrained set, honoring the block's
// declared regime.
bool regime_compatible(BlockClass cls, ConstraintRegime regime) {
  switch (regime) {
    case ConstraintRegime::Unconstrained: return true;
    case ConstraintRegime::EitherMonotone: return cls != BlockClass::Neither;
    case ConstraintRegime::Isotonic: return cls == BlockClass::Iso || cls == BlockClass::Both;
    case ConstraintRegime::Antitonic: return cls == BlockClass::Anti || cls == BlockClass::Both;
  }
  return false;
}

}  // namespace

Membership cr_membership(const ModelFits& fits, const ProfileTarget& candidate, double level, int df,
                         QuantileFamily family, const Eigen::VectorXd* warm_u, const Eigen::VectorXd* warm_c,
                         Eigen::VectorXd* next_warm_u, Eigen::VectorXd* next_warm_c) {
  if (!(level > 0.0 && level < 1.0)) throw ConfigError("confidence level must lie in (0,1)");
  if (df < 1) throw ConfigError("degrees of freedom must be >= 1");
  const double q = region_quantile(family, df, level);

  Membership m;
  m.cls = classify_target(candidate, fits.spec);

  ConstraintRegime regime = ConstraintRegime::EitherMonotone;
  if (candidate.kind != ProfileTarget::Kind::FullVector)
    regime = fits.layout().block_for_predictor(candidate.predictor).regime;
  const bool constrained_ok = candidate.kind == ProfileTarget::Kind::FullVector
                                  ? m.cls != BlockClass::Neither
                                  : regime_compatible(m.cls, regime);

  Eigen::VectorXd umle_gamma = fits.umle.gamma();
  const Eigen::VectorXd* wu = warm_u ? warm_u : &umle_gamma;
  ProfileResult pu =
      profile_nuisance(fits.data, fits.spec, candidate, ProfileMode::Unconstrained, fits.opts, wu);
  double lr_u = 2.0 * (fits.umle.log_likelihood - pu.loglik);
  if (!pu.converged || lr_u < -kLrNoise) m.indeterminate = true;
  m.lr_unconstrained = std::max(lr_u, 0.0);
  m.ucr = m.lr_unconstrained <= q;
  m.uccr = m.ucr && constrained_ok;
  if (next_warm_u && pu.converged) *next_warm_u = pu.gamma;

  if (constrained_ok) {
    Eigen::VectorXd cmle_gamma = fits.cmle.gamma();
    const Eigen::VectorXd* wc = warm_c ? warm_c : &cmle_gamma;
    ProfileResult pc =
        profile_nuisance(fits.data, fits.spec, candidate, ProfileMode::Constrained, fits.opts, wc);
    double lr_c = 2.0 * (fits.cmle.log_likelihood - pc.loglik);
    if (!pc.converged || lr_c < -kLrNoise) m.indeterminate = true;
    m.lr_constrained = std::max(lr_c, 0.0);
    m.ccr = m.lr_constrained <= q;
    if (next_warm_c && pc.converged) *next_warm_c = pc.gamma;
  } else {
    m.ccr = false;
  }
  m.acr = m.uccr || m.ccr;
  return m;
}

namespace {

double contrast_se(const FitResult& fit, const Eigen::VectorXd& c) {
  Eigen::LDLT<Eigen::MatrixXd> ldlt(fit.fisher);
  if (ldlt.info() != Eigen::Success) throw FitError("Fisher information is numerically singular");
  double var = c.dot(ldlt.solve(c));
  return std::sqrt(std::max(var, 1e-300));
}

struct AxisPlan {
  std::string name;
  double center = 0.0;
  double se = 1.0;
};

void resolve_axis(GridAxis& axis, const AxisPlan& plan) {
  if (axis.points <= 0) axis.points = 61;
  // bounds left unset (or non-increasing) default to estimate +/- 4 SE
  if (axis.points > 1 && !(axis.hi > axis.lo)) {
    axis.lo = plan.center - 4.0 * plan.se;
    axis.hi = plan.center + 4.0 * plan.se;
  }
}

double axis_value(const GridAxis& axis, int i) {
  if (axis.points == 1) return axis.lo;
  return axis.lo + (axis.hi - axis.lo) * i / (axis.points - 1);
}

}  // namespace

RegionGrid cr_grid(const ModelFits& fits, const RegionSpec& spec_in) {
  RegionGrid grid;
  grid.spec = spec_in;
  RegionSpec& spec = grid.spec;
  if (spec.predictor < 0 || spec.predictor >= static_cast<int>(fits.spec.predictors.size()))
    throw ConfigError("region predictor index out of range");
  const auto& tblock = fits.layout().block_for_predictor(spec.predictor);
  const int b = tblock.size;
  if (spec.df == 0) spec.df = b;

  Eigen::VectorXd ublock = fits.umle_block(spec.predictor);
  const int palpha = fits.layout().n_alpha();
  auto unit = [&](int block_coord) {
    Eigen::VectorXd e = Eigen::VectorXd::Zero(fits.layout().p);
    e[palpha + tblock.beta_start + block_coord] = 1.0;
    return e;
  };

  AxisPlan plan1, plan2;
  bool two_axes = true;
  switch (spec.style) {
    case ContrastStyle::Coords: {
      if (b > 2)
        throw ConfigError("coords view needs a block with at most 2 coefficients; use pair or diffs");
      plan1 = {tblock.name + "[2]", ublock[0], contrast_se(fits.umle, unit(0))};
      if (b == 2)
        plan2 = {tblock.name + "[3]", ublock[1], contrast_se(fits.umle, unit(1))};
      else
        two_axes = false;
      break;
    }
    case ContrastStyle::Pair: {
      if (b < 2) throw ConfigError("pair view needs a block with at least 2 coefficients");
      plan1 = {tblock.name + "[2]", ublock[0], contrast_se(fits.umle, unit(0))};
      plan2 = {tblock.name + "[" + std::to_string(b + 1) + "]", ublock[b - 1],
               contrast_se(fits.umle, unit(b - 1))};
      break;
    }
    case ContrastStyle::Diffs: {
      if (b != 3)
        throw ConfigError("diffs view is a 2-axis grid and needs a block with exactly 3 coefficients");
      Eigen::VectorXd c2 = unit(2) - unit(1);
      Eigen::VectorXd c1 = unit(1) - unit(0);
      plan1 = {"d(" + tblock.name + "[4]-[3])", ublock[2] - ublock[1], contrast_se(fits.umle, c2)};
      plan2 = {"d(" + tblock.name + "[3]-[2])", ublock[1] - ublock[0], contrast_se(fits.umle, c1)};
      break;
    }
  }

  resolve_axis(spec.axis1, plan1);
  if (two_axes)
    resolve_axis(spec.axis2, plan2);
  else
    spec.axis2 = GridAxis{0.0, 0.0, 1};
  grid.axis1_name = plan1.name;
  grid.axis2_name = two_axes ? plan2.name : "";

  grid.n1 = spec.axis1.points;
  grid.n2 = spec.axis2.points;
  long total = static_cast<long>(grid.n1) * grid.n2;
  if (total > spec.max_grid_points)
    throw ConfigError("grid of " + std::to_string(total) + " points exceeds the cap of " +
                      std::to_string(spec.max_grid_points));
  grid.points.resize(static_cast<size_t>(total));

  auto candidate_at = [&](double v1, double v2) {
    switch (spec.style) {
      case ContrastStyle::Coords: {
        Eigen::VectorXd vals(b);
        vals[0] = v1;
        if (b == 2) vals[1] = v2;
        return ProfileTarget::block(spec.predictor, vals);
      }
      case ContrastStyle::Pair:
        if (b == 2) {
          Eigen::VectorXd vals(2);
          vals << v1, v2;
          return ProfileTarget::block(spec.predictor, vals);
        }
        return ProfileTarget::pair_contrast(spec.predictor, v1, v2);
      case ContrastStyle::Diffs: {
        Eigen::VectorXd diffs(2);
        diffs << v2, v1;  // axis2 is the lower difference beta3-beta2
        return ProfileTarget::diff_contrast(spec.predictor, diffs);
      }
    }
    throw ConfigError("unreachable contrast style");
  };

  Eigen::VectorXd umle_gamma = fits.umle.gamma();
  Eigen::VectorXd cmle_gamma = fits.cmle.gamma();

  auto run_row = [&](int i1) {
    double v1 = axis_value(spec.axis1, i1);
    Eigen::VectorXd warm_u = umle_gamma;
    Eigen::VectorXd warm_c = cmle_gamma;
    for (int i2 = 0; i2 < grid.n2; ++i2) {
      double v2 = axis_value(spec.axis2, i2);
      ProfileTarget cand = candidate_at(v1, v2);
      RegionPoint& pt = grid.points[static_cast<size_t>(i1) * grid.n2 + i2];
      pt.axis1 = v1;
      pt.axis2 = v2;
      pt.m = cr_membership(fits, cand, spec.level, spec.df, spec.family, &warm_u, &warm_c, &warm_u,
                           &warm_c);
    }
  };
  parallel_for(grid.n1, run_row, fits.opts.threads);
  return grid;
}

int RegionGrid::count(RegionKind k) const {
  int c = 0;
  for (const auto& pt : points) c += pt.m.flag(k) ? 1 : 0;
  return c;
}

int RegionGrid::count_indeterminate() const {
  int c = 0;
  for (const auto& pt : points) c += pt.m.indeterminate ? 1 : 0;
  return c;
}

namespace {

void write_stat(std::ostream& out, double v) {
  if (std::isnan(v)) {
    out << "nan";
    return;
  }
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  out << buf;
}

}  // namespace

void write_region_csv(std::ostream& out, const RegionGrid& grid) {
  out << "axis1,axis2,lr_unconstrained,lr_constrained,ucr,uccr,ccr,acr,direction_class,indeterminate\n";
  for (const auto& pt : grid.points) {
    write_stat(out, pt.axis1);
    out << ',';
    write_stat(out, pt.axis2);
    out << ',';
    write_stat(out, pt.m.lr_unconstrained);
    out << ',';
    write_stat(out, pt.m.lr_constrained);
    out << ',' << (pt.m.ucr ? 1 : 0) << ',' << (pt.m.uccr ? 1 : 0) << ',' << (pt.m.ccr ? 1 : 0) << ','
        << (pt.m.acr ? 1 : 0) << ',' << to_string(pt.m.cls) << ',' << (pt.m.indeterminate ? 1 : 0) << '\n';
  }
}

// ---- hypothesis tests ------------------------------------------------------

namespace {


}  // namespace

TestDecision test_no_effect(const ModelFits& fits, int predictor, double level, EstimatorKind basis,
                            QuantileFamily family) {
  const auto& block = fits.layout().block_for_predictor(predictor);
  const int df = block.size;
  ProfileTarget zero = ProfileTarget::block(predictor, Eigen::VectorXd::Zero(df));
  Membership m = cr_membership(fits, zero, level, df, family);

  TestDecision d;
  d.df = df;
  d.threshold = region_quantile(family, df, level);
  d.hypothesis = "no effect of " + block.name;
  if (basis == EstimatorKind::CMLE) {
    d.kind = RegionKind::CCR;
    d.statistic = m.lr_constrained;
    d.reject = !m.ccr;
  } else {
    d.kind = RegionKind::UCCR;
    d.statistic = m.lr_unconstrained;
    d.reject = !m.uccr;
  }
  d.has_p_value = family == QuantileFamily::PlainChiSq;
  if (d.has_p_value) d.p_value = 1.0 - chi2_cdf(df, d.statistic);
  return d;
}

TestDecision test_monotonicity(const ModelFits& fits, int predictor, double level, QuantileFamily family) {
  const auto& block = fits.layout().block_for_predictor(predictor);
  ProfileTarget cand = ProfileTarget::block(predictor, fits.cmle_block(predictor));
  const int df = block.size;
  Membership m = cr_membership(fits, cand, level, df, family);
  TestDecision d;
  d.df = df;
  d.threshold = region_quantile(family, df, level);
  d.hypothesis = block.name + " is monotone";
  d.kind = RegionKind::UCR;
  d.statistic = m.lr_unconstrained;
  d.reject = !m.ucr;
  return d;
}

TestDecision test_non_monotonicity(const ModelFits& fits, int predictor, double level,
                                   QuantileFamily family) {
  const auto& block = fits.layout().block_for_predictor(predictor);
  const int df = block.size;
  TestDecision d;
  d.df = df;
  d.threshold = region_quantile(family, df, level);
  d.hypothesis = block.name + " is not monotone";
  d.kind = RegionKind::UCR;

  // If the unconstrained block itself violates monotonicity the statistic
  // is zero.  A single coefficient is always monotone: the complement is
  // empty and the hypothesis can never be rejected.
  BlockClass ucls = classify_block(fits.umle_block(predictor));
  if (df < 2) {
    d.statistic = 0.0;
    d.reject = false;
    return d;
  }
  if (ucls == BlockClass::Neither) {
    d.statistic = 0.0;
    d.reject = false;
    return d;
  }

  // The closure of the non-monotone set meets the cones on their faces
  // (one increment pinned at zero); the profile maximum over that closure
  // is attained on one of these faces.
  double best = -std::numeric_limits<double>::infinity();
  Eigen::VectorXd warm = fits.umle.gamma();
  LikelihoodEvaluator ev(fits.data);
  for (Direction dir : {Direction::Iso, Direction::Anti}) {
    for (int face = 0; face < df; ++face) {
      Parametrization par(fits.layout().p, fits.opts.alpha_gap_floor);
      par.add_alpha_chain(0, fits.layout().n_alpha());
      for (const auto& blk : fits.layout().blocks) {
        int gstart = fits.layout().gamma_index(blk.beta_start);
        if (blk.predictor == predictor) {
          std::vector<bool> pinned(static_cast<size_t>(blk.size), false);
          pinned[static_cast<size_t>(face)] = true;
          par.add_monotone(gstart, blk.size, dir, pinned, Eigen::VectorXd::Zero(blk.size));
        } else {
          par.add_free(gstart, blk.size);
        }
      }
      par.finish();
      OptimOptions oo;
      oo.max_iterations = fits.opts.max_iterations;
      oo.grad_tol = fits.opts.gradient_tolerance;
      oo.rel_ll_tol = fits.opts.relative_ll_tolerance;
      oo.param_cap = fits.opts.parameter_cap;
      OptimResult opt = maximize_likelihood(ev, par, par.psi_from_gamma(warm), oo);
      best = std::max(best, opt.value);
    }
  }
  d.statistic = lr_statistic(fits.umle.log_likelihood, best);
  d.reject = d.statistic > d.threshold;
  return d;
}

TestDecision test_direction(const ModelFits& fits, int predictor, Direction dir, double level,
                            RegionKind kind, QuantileFamily family) {
  const auto& layout = fits.layout();
  const auto& block = layout.block_for_predictor(predictor);
  if (block.role != Role::Ordinal) throw ConfigError("direction tests need an ordinal predictor");

  // PMLE with the tested predictor pinned to the hypothesized direction.
  PartialDirections partial;
  partial.dirs.assign(layout.ordinal_blocks.size(), std::nullopt);
  bool found = false;
  for (size_t oi = 0; oi < layout.ordinal_blocks.size(); ++oi) {
    if (layout.ordinal_block(static_cast<int>(oi)).predictor == predictor) {
      partial.dirs[oi] = dir;
      found = true;
    }
  }
  if (!found) throw ConfigError("predictor is not ordinal in the layout");
  if (block.regime == ConstraintRegime::Unconstrained)
    throw ConfigError("direction tests need a monotonicity-constrained predictor: " + block.name);
  if ((block.regime == ConstraintRegime::Isotonic && dir != Direction::Iso) ||
      (block.regime == ConstraintRegime::Antitonic && dir != Direction::Anti))
    throw ConfigError("hypothesized direction conflicts with the declared regime of " + block.name);

  FitOptions opts = fits.opts;
  opts.initial = fits.cmle.estimate;
  FitResult pmle = fit_partially_constrained(fits.data, fits.spec, partial, opts);

  Eigen::VectorXd pblock =
      pmle.gamma().segment(layout.gamma_index(block.beta_start), block.size);
  const int df = block.size;
  Membership m = cr_membership(fits, ProfileTarget::block(predictor, pblock), level, df, family);

  TestDecision d;
  d.df = df;
  d.threshold = region_quantile(family, df, level);
  d.kind = kind;
  d.hypothesis = block.name + std::string(" is ") + (dir == Direction::Iso ? "isotonic" : "antitonic");
  d.statistic = kind == RegionKind::CCR ? m.lr_constrained : m.lr_unconstrained;
  d.reject = !m.flag(kind);
  return d;
}

CaseClassification classify_case(const ModelFits& fits, const RegionGrid& grid, int predictor) {
  CaseClassification out;
  const double same_gap = (fits.umle.gamma() - fits.cmle.gamma()).lpNorm<Eigen::Infinity>();
  const bool same = same_gap < kSameTol;

  int n_iso = 0, n_anti = 0, n_both = 0, n_neither = 0, n_indet = 0;
  for (const auto& pt : grid.points) {
    if (pt.m.indeterminate) {
      ++n_indet;
      continue;
    }
    if (!pt.m.ucr) continue;
    switch (pt.m.cls) {
      case BlockClass::Iso: ++n_iso; break;
      case BlockClass::Anti: ++n_anti; break;
      case BlockClass::Both: ++n_both; break;
      case BlockClass::Neither: ++n_neither; break;
    }
  }
  out.low_confidence = n_indet > static_cast<int>(grid.points.size()) / 100;

  BlockClass ref = classify_block(fits.cmle_block(predictor));
  if (same) {
    int opposite = 0;
    if (ref == BlockClass::Iso)
      opposite = n_anti;
    else if (ref == BlockClass::Anti)
      opposite = n_iso;
    else
      opposite = (n_iso > 0 && n_anti > 0) ? std::min(n_iso, n_anti) : 0;
    if (opposite > 0) {
      out.label = 3;
      out.description = "UMLE = CMLE; the region reaches the opposite monotonicity direction";
    } else if (n_neither > 0) {
      out.label = 2;
      out.description = "UMLE = CMLE; the region contains non-monotone points";
    } else {
      out.label = 1;
      out.description = "UMLE = CMLE; every region point shares the estimated direction";
    }
    return out;
  }

  BlockClass ucls = classify_block(fits.umle_block(predictor));
  if (ucls != BlockClass::Neither) {
    out.label = 6;
    out.description = "UMLE monotone on this block; the difference comes from other constraints";
    return out;
  }
  Membership m = cr_membership(fits, ProfileTarget::block(predictor, fits.cmle_block(predictor)),
                               grid.spec.level, grid.spec.df, grid.spec.family);
  if (!m.ucr) {
    out.label = 5;
    out.description = "UMLE != CMLE and no monotone point lies in the unconstrained region";
    return out;
  }
  out.label = 4;
  out.description = "UMLE != CMLE; the region mixes monotone and non-monotone points";
  return out;
}

}  // namespace poclm
