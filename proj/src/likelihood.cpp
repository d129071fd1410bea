#include "poclm/likelihood.hpp"

#include <cmath>

#include "poclm/errors.hpp"
#include "poclm/kernels.hpp"
#include "poclm/special.hpp"

namespace poclm {

Eigen::VectorXd category_probabilities_at(const Eigen::VectorXd& alpha, double w) {
  const int k = static_cast<int>(alpha.size()) + 1;
  Eigen::VectorXd pi(k);
  pi[0] = logistic(alpha[0] + w);
  for (int j = 1; j < k - 1; ++j) pi[j] = logistic_difference(alpha[j - 1] + w, alpha[j] + w);
  pi[k - 1] = logistic(-(alpha[k - 2] + w));
  return pi;
}

Eigen::VectorXd category_probabilities(const ParameterVector& params, const ParameterLayout& layout,
                                       const Eigen::VectorXd& x_row) {
  if (!params.alpha_strictly_increasing()) throw NumericError("alpha intercepts are not strictly increasing");
  Eigen::VectorXd beta = params.to_flat(layout).tail(layout.m);
  if (x_row.size() != layout.m) throw DataError("covariate row has wrong length");
  return category_probabilities_at(params.alpha, beta.dot(x_row));
}

LikelihoodEvaluator::LikelihoodEvaluator(const DesignData& data) : data_(&data) {
  w_.resize(data.n);
  logpi_.resize(data.n);
  ra_.resize(data.n);
  rb_.resize(data.n);
  G_.resize(data.n);
}

namespace {

EvalStatus reduce_loglik(const Eigen::VectorXd& logpi, int n) {
  EvalStatus st;
  double sum = 0.0;
  for (int i = 0; i < n; ++i) {
    double v = logpi[i];
    if (v <= kernels::LOG_UNDERFLOW || std::isnan(v)) {
      st.underflow_row = i;
      st.loglik = -std::numeric_limits<double>::infinity();
      return st;
    }
    sum += v;
  }
  st.loglik = sum;
  return st;
}

}  // namespace

EvalStatus LikelihoodEvaluator::value(const Eigen::VectorXd& gamma) {
  const auto& d = *data_;
  const int na = d.layout.n_alpha();
  w_.noalias() = d.X * gamma.tail(d.layout.m);
  kernels::EvalInput in{w_.data(), d.z.data(), gamma.data(), d.n, d.k};
  kernels::EvalOutput out{logpi_.data(), nullptr, nullptr};
  kernels::select_eval()(in, out);
  (void)na;
  return reduce_loglik(logpi_, d.n);
}

EvalStatus LikelihoodEvaluator::value_and_score(const Eigen::VectorXd& gamma, Eigen::VectorXd& score_out) {
  const auto& d = *data_;
  const int na = d.layout.n_alpha();
  w_.noalias() = d.X * gamma.tail(d.layout.m);
  kernels::EvalInput in{w_.data(), d.z.data(), gamma.data(), d.n, d.k};
  kernels::EvalOutput out{logpi_.data(), ra_.data(), rb_.data()};
  kernels::select_eval()(in, out);

  EvalStatus st = reduce_loglik(logpi_, d.n);
  score_out.setZero(d.layout.p);
  if (!st.ok()) return st;

  // alpha score: +rb at index z, -ra at index z-1 (1-based categories).
  for (int i = 0; i < d.n; ++i) {
    const int z = d.z[i];
    if (z < d.k) score_out[z - 1] += rb_[i];
    if (z > 1) score_out[z - 2] -= ra_[i];
    G_[i] = rb_[i] - ra_[i];
  }
  score_out.tail(d.layout.m).noalias() = d.X.transpose() * G_;
  (void)na;
  return st;
}

Eigen::MatrixXd LikelihoodEvaluator::fisher(const Eigen::VectorXd& gamma) {
  const auto& d = *data_;
  const int ka = d.k - 1;
  const int m = d.layout.m;
  w_.noalias() = d.X * gamma.tail(m);

  Eigen::MatrixXd F = Eigen::MatrixXd::Zero(d.layout.p, d.layout.p);
  Eigen::MatrixXd W(d.n, ka);    // per-observation alpha-beta cross weights
  Eigen::VectorXd q(d.n);        // per-observation beta weight
  Eigen::VectorXd dens(ka), pi(d.k), Gz(d.k);

  for (int i = 0; i < d.n; ++i) {
    const double w = w_[i];
    for (int j = 0; j < ka; ++j) {
      double c = logistic(gamma[j] + w);
      dens[j] = c * (1.0 - c);
    }
    pi[0] = logistic(gamma[0] + w);
    for (int j = 1; j < ka; ++j) pi[j] = logistic_difference(gamma[j - 1] + w, gamma[j] + w);
    pi[d.k - 1] = logistic(-(gamma[ka - 1] + w));

    // G(z) = (d_z - d_{z-1}) / pi_z with d_0 = d_k = 0
    double qi = 0.0;
    for (int z = 1; z <= d.k; ++z) {
      double dz = z < d.k ? dens[z - 1] : 0.0;
      double dzm = z > 1 ? dens[z - 2] : 0.0;
      double g = (dz - dzm) / pi[z - 1];
      Gz[z - 1] = g;
      qi += pi[z - 1] * g * g;
    }
    q[i] = qi;

    for (int j = 1; j <= ka; ++j) {
      // Omega diagonal and first off-diagonal; u_z has +d_j/pi_j at z=j
      // and -d_j/pi_{j+1} at z=j+1.
      double dj = dens[j - 1];
      F(j - 1, j - 1) += dj * dj * (1.0 / pi[j - 1] + 1.0 / pi[j]);
      if (j < ka) F(j - 1, j) += -dj * dens[j] / pi[j];
      W(i, j - 1) = dj * (Gz[j - 1] - Gz[j]);
    }
  }

  F.topRightCorner(ka, m).noalias() = W.transpose() * d.X;
  F.bottomRightCorner(m, m).noalias() = d.X.transpose() * q.asDiagonal() * d.X;
  F.triangularView<Eigen::StrictlyLower>() = F.transpose();
  return F;
}

double log_likelihood(const ParameterVector& params, const DesignData& data) {
  if (!params.alpha_strictly_increasing()) throw NumericError("alpha intercepts are not strictly increasing");
  LikelihoodEvaluator ev(data);
  EvalStatus st = ev.value(params.to_flat(data.layout));
  if (!st.ok())
    throw NumericError("category probability underflow at row " + std::to_string(*st.underflow_row + 1));
  return st.loglik;
}

Eigen::VectorXd score(const ParameterVector& params, const DesignData& data) {
  if (!params.alpha_strictly_increasing()) throw NumericError("alpha intercepts are not strictly increasing");
  LikelihoodEvaluator ev(data);
  Eigen::VectorXd s;
  EvalStatus st = ev.value_and_score(params.to_flat(data.layout), s);
  if (!st.ok())
    throw NumericError("category probability underflow at row " + std::to_string(*st.underflow_row + 1));
  return s;
}

Eigen::MatrixXd fisher_information(const ParameterVector& params, const DesignData& data) {
  if (!params.alpha_strictly_increasing()) throw NumericError("alpha intercepts are not strictly increasing");
  LikelihoodEvaluator ev(data);
  return ev.fisher(params.to_flat(data.layout));
}

FisherDiagnostics fisher_diagnostics(const Eigen::MatrixXd& fisher, double rcond_threshold) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(fisher, Eigen::EigenvaluesOnly);
  double lo = es.eigenvalues().minCoeff();
  double hi = es.eigenvalues().maxCoeff();
  FisherDiagnostics diag;
  diag.rcond = hi > 0.0 ? std::max(lo, 0.0) / hi : 0.0;
  diag.near_singular = diag.rcond < rcond_threshold;
  return diag;
}

BlockClass classify_block(const Eigen::VectorXd& block) {
  bool iso = block[0] >= 0.0;
  bool anti = block[0] <= 0.0;
  for (int i = 1; i < block.size(); ++i) {
    iso = iso && block[i] >= block[i - 1];
    anti = anti && block[i] <= block[i - 1];
  }
  if (iso && anti) return BlockClass::Both;
  if (iso) return BlockClass::Iso;
  if (anti) return BlockClass::Anti;
  return BlockClass::Neither;
}

MembershipReport check_membership(const ParameterVector& params, const ModelSpec& spec, ParameterSet set,
                                  const MonotoneDirection* directions) {
  ParameterLayout layout = ParameterLayout::from_spec(spec);
  if (params.dimension() != layout.p) throw ConfigError("parameter dimension does not match spec");
  MembershipReport report;
  report.alpha_ordered = params.alpha_strictly_increasing();
  report.member = report.alpha_ordered;

  const int t = static_cast<int>(layout.ordinal_blocks.size());
  if (set == ParameterSet::MonotoneFixed) {
    if (!directions || static_cast<int>(directions->dirs.size()) != t)
      throw ConfigError("direction assignment must cover every ordinal predictor");
  }
  for (int oi = 0; oi < t; ++oi) {
    BlockClass cls = classify_block(params.ord[static_cast<size_t>(oi)]);
    report.block_class.push_back(cls);
    if (set == ParameterSet::Unconstrained) continue;
    const auto& blk = layout.ordinal_block(oi);
    if (blk.regime == ConstraintRegime::Unconstrained) continue;

    bool ok = true;
    auto satisfies = [&](Direction d) {
      return cls == BlockClass::Both || (d == Direction::Iso ? cls == BlockClass::Iso : cls == BlockClass::Anti);
    };
    switch (blk.regime) {
      case ConstraintRegime::Isotonic: ok = satisfies(Direction::Iso); break;
      case ConstraintRegime::Antitonic: ok = satisfies(Direction::Anti); break;
      case ConstraintRegime::EitherMonotone:
        if (set == ParameterSet::MonotoneEither)
          ok = cls != BlockClass::Neither;
        else
          ok = satisfies(directions->dirs[static_cast<size_t>(oi)]);
        break;
      case ConstraintRegime::Unconstrained: break;
    }
    report.member = report.member && ok;
  }
  return report;
}

}  // namespace poclm
