#include <cmath>

#include "poclm/kernels.hpp"

namespace poclm::kernels {

namespace {

// log(logistic(x)) and log(logistic(-x)) share exp(-|x|).
inline void log_logistic_pair(double x, double& lpos, double& lneg) {
  double t = std::log1p(std::exp(-std::fabs(x)));
  lpos = (x < 0.0 ? x : 0.0) - t;   // log logistic(x)
  lneg = (x > 0.0 ? -x : 0.0) - t;  // log logistic(-x)
}

// log(expm1(g)) for g > 0; above 36 the -exp(-g) correction is below
// double precision.
inline double log_expm1(double g) {
  return g > 36.0 ? g : std::log(std::expm1(g));
}

}  // namespace

void eval_scalar(const EvalInput& in, const EvalOutput& out) {
  const int k = in.k;
  for (int i = 0; i < in.n; ++i) {
    const int z = in.z[i];
    const double w = in.w[i];
    double logpi, ra, rb;
    if (z == 1) {
      double lb, lnb;
      log_logistic_pair(in.alpha[0] + w, lb, lnb);
      logpi = lb;
      ra = 0.0;
      rb = std::exp(lnb);
    } else if (z == k) {
      double la, lna;
      log_logistic_pair(in.alpha[k - 2] + w, la, lna);
      logpi = lna;
      ra = std::exp(la);
      rb = 0.0;
    } else {
      const double a = in.alpha[z - 2] + w;
      const double b = in.alpha[z - 1] + w;
      double la, lna, lb, lnb;
      log_logistic_pair(a, la, lna);
      log_logistic_pair(b, lb, lnb);
      const double le = log_expm1(b - a);
      logpi = la + lnb + le;
      ra = std::exp(lna - lnb - le);
      rb = std::exp(lb - la - le);
    }
    out.logpi[i] = logpi;
    if (out.ra) out.ra[i] = ra;
    if (out.rb) out.rb[i] = rb;
  }
}

}  // namespace poclm::kernels
