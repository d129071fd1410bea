#include "poclm/optimizer.hpp"

#include <cmath>

#include "poclm/errors.hpp"

namespace poclm {

namespace {

Eigen::VectorXd clamp(const Eigen::VectorXd& psi, const Eigen::VectorXd& lo, const Eigen::VectorXd& hi) {
  return psi.cwiseMax(lo).cwiseMin(hi);
}

constexpr double kActiveTol = 1e-12;
constexpr double kArmijo = 1e-4;

}  // namespace

OptimResult maximize_likelihood(LikelihoodEvaluator& ev, const Parametrization& par,
                                const Eigen::VectorXd& psi0, const OptimOptions& opts) {
  const int q = par.psi_dim();
  const Eigen::VectorXd& lo = par.lower();
  const Eigen::VectorXd& hi = par.upper();

  OptimResult res;
  res.psi = clamp(psi0, lo, hi);
  res.gamma = par.to_gamma(res.psi);

  Eigen::VectorXd s;
  EvalStatus st = ev.value_and_score(res.gamma, s);
  if (!st.ok())
    throw FitError("likelihood underflow at the starting point (row " +
                   std::to_string(*st.underflow_row + 1) + ")");
  res.value = st.loglik;
  res.score = s;

  if (q == 0) {  // fully pinned: nothing to optimize
    res.converged = true;
    return res;
  }

  double prev_value = res.value;
  int small_change_streak = 0;

  for (int iter = 1; iter <= opts.max_iterations; ++iter) {
    res.iterations = iter;
    Eigen::MatrixXd J = par.jacobian(res.psi);
    Eigen::VectorXd g = J.transpose() * s;

    std::vector<int> free_idx;
    free_idx.reserve(static_cast<size_t>(q));
    Eigen::VectorXd pg = g;
    for (int i = 0; i < q; ++i) {
      bool at_lo = res.psi[i] - lo[i] <= kActiveTol && g[i] < 0.0;
      bool at_hi = hi[i] - res.psi[i] <= kActiveTol && g[i] > 0.0;
      if (at_lo || at_hi)
        pg[i] = 0.0;
      else
        free_idx.push_back(i);
    }
    res.proj_grad_norm = pg.lpNorm<Eigen::Infinity>();

    bool grad_ok = res.proj_grad_norm < opts.grad_tol;
    if (grad_ok && opts.strict_score) grad_ok = s.lpNorm<Eigen::Infinity>() < opts.grad_tol;
    if (grad_ok) {
      res.converged = true;
      break;
    }

    if (res.gamma.lpNorm<Eigen::Infinity>() > opts.param_cap) {
      res.quasi_separated = true;
      break;
    }

    // Fisher metric on the free coordinates.
    Eigen::VectorXd d = Eigen::VectorXd::Zero(q);
    bool have_newton = false;
    double newton_decrement = std::numeric_limits<double>::infinity();
    if (!free_idx.empty()) {
      Eigen::MatrixXd F = ev.fisher(res.gamma);
      if (F.allFinite()) {
        Eigen::MatrixXd H = J.transpose() * F * J;
        const int nf = static_cast<int>(free_idx.size());
        Eigen::MatrixXd Hf(nf, nf);
        Eigen::VectorXd gf(nf);
        for (int a = 0; a < nf; ++a) {
          gf[a] = g[free_idx[static_cast<size_t>(a)]];
          for (int b = 0; b < nf; ++b)
            Hf(a, b) = H(free_idx[static_cast<size_t>(a)], free_idx[static_cast<size_t>(b)]);
        }
        double ridge = 1e-10 * (1.0 + Hf.trace() / nf);
        Hf.diagonal().array() += ridge;
        Eigen::LDLT<Eigen::MatrixXd> ldlt(Hf);
        if (ldlt.info() == Eigen::Success) {
          Eigen::VectorXd df = ldlt.solve(gf);
          if (df.allFinite() && df.dot(gf) > 0.0) {
            for (int a = 0; a < nf; ++a) d[free_idx[static_cast<size_t>(a)]] = df[a];
            have_newton = true;
            newton_decrement = 0.5 * df.dot(gf);
          }
        }
      }
    }

    bool accepted = false;
    Eigen::VectorXd psi_new, gamma_new;
    double value_new = res.value;
    for (int attempt = 0; attempt < 2 && !accepted; ++attempt) {
      if (attempt == 1 || !have_newton) {
        // projected-gradient fallback, scaled to a unit-ish first step
        double norm = pg.lpNorm<Eigen::Infinity>();
        if (norm == 0.0) break;
        d = pg / norm;
      }
      double t = 1.0;
      for (int ls = 0; ls < 60; ++ls, t *= 0.5) {
        psi_new = clamp(res.psi + t * d, lo, hi);
        Eigen::VectorXd step = psi_new - res.psi;
        double m = g.dot(step);
        if (step.lpNorm<Eigen::Infinity>() == 0.0) break;
        gamma_new = par.to_gamma(psi_new);
        EvalStatus trial = ev.value(gamma_new);
        if (!trial.ok() || !std::isfinite(trial.loglik)) continue;
        if (trial.loglik >= res.value + kArmijo * std::max(m, 0.0) && trial.loglik > res.value) {
          value_new = trial.loglik;
          accepted = true;
          break;
        }
      }
    }

    if (!accepted) {
      // No ascent step of any length improved the value.  Either the
      // iterate is optimal up to floating noise (the quadratic model
      // predicts a negligible attainable gain) or the problem is
      // ill-behaved.  A plain gradient-norm check is unreliable here:
      // strongly anisotropic curvature can leave a sizable projected
      // gradient at a numerically optimal point.
      res.converged = newton_decrement < 1e-7 ||
                      res.proj_grad_norm < std::max(1e3 * opts.grad_tol, 1e-5);
      break;
    }

    res.psi = psi_new;
    res.gamma = gamma_new;
    res.value = value_new;
    st = ev.value_and_score(res.gamma, s);
    if (!st.ok()) throw FitError("likelihood underflow after an accepted step");
    res.score = s;

    double rel_change = std::fabs(res.value - prev_value) / (std::fabs(res.value) + 1.0);
    small_change_streak = rel_change <= opts.rel_ll_tol ? small_change_streak + 1 : 0;
    prev_value = res.value;
    if (small_change_streak >= 2) {
      res.converged = true;
      // refresh the projected gradient for diagnostics
      Eigen::MatrixXd Jf = par.jacobian(res.psi);
      Eigen::VectorXd gf = Jf.transpose() * s;
      for (int i = 0; i < q; ++i) {
        bool at_lo = res.psi[i] - lo[i] <= kActiveTol && gf[i] < 0.0;
        bool at_hi = hi[i] - res.psi[i] <= kActiveTol && gf[i] > 0.0;
        if (at_lo || at_hi) gf[i] = 0.0;
      }
      res.proj_grad_norm = gf.lpNorm<Eigen::Infinity>();
      break;
    }
  }

  return res;
}

}  // namespace poclm
