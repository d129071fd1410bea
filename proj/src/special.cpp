#include "poclm/special.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "poclm/errors.hpp"

namespace poclm {

double logistic(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  double e = std::exp(x);
  return e / (1.0 + e);
}

double log_logistic(double x) {
  // -softplus(-x)
  if (x >= 0.0) return -std::log1p(std::exp(-x));
  return x - std::log1p(std::exp(x));
}

double logistic_difference(double a, double b) {
  return logistic(a) * logistic(-b) * std::expm1(b - a);
}

namespace {

// Lower regularized incomplete gamma via series (x < a+1) or Lentz
// continued fraction for the upper tail.
double gamma_p_series(double a, double x) {
  double ap = a;
  double sum = 1.0 / a;
  double del = sum;
  for (int i = 0; i < 500; ++i) {
    ap += 1.0;
    del *= x / ap;
    sum += del;
    if (std::fabs(del) < std::fabs(sum) * 1e-16) break;
  }
  return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

double gamma_q_cf(double a, double x) {
  const double tiny = 1e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i <= 500; ++i) {
    double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::fabs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    double delta = d * c;
    h *= delta;
    if (std::fabs(delta - 1.0) < 1e-16) break;
  }
  return h * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

}  // namespace

double gamma_p(double a, double x) {
  if (!(a > 0.0)) throw NumericError("gamma_p: shape must be positive");
  if (x <= 0.0) return 0.0;
  if (x < a + 1.0) return gamma_p_series(a, x);
  return 1.0 - gamma_q_cf(a, x);
}

double chi2_cdf(int r, double x) {
  if (r < 1) throw NumericError("chi2_cdf: df must be >= 1");
  if (x <= 0.0) return 0.0;
  return gamma_p(0.5 * r, 0.5 * x);
}

namespace {

double chi2_pdf(int r, double x) {
  if (x <= 0.0) return 0.0;
  double a = 0.5 * r;
  return std::exp((a - 1.0) * std::log(x) - 0.5 * x - a * std::log(2.0) - std::lgamma(a));
}

// Invert an increasing CDF by bisection plus Newton polish.
template <typename Cdf, typename Pdf>
double invert_cdf(Cdf cdf, Pdf pdf, double prob, double hi_guess) {
  double lo = 0.0;
  double hi = hi_guess;
  while (cdf(hi) < prob) {
    lo = hi;
    hi *= 2.0;
    if (hi > 1e8) throw NumericError("quantile inversion bracket failed");
  }
  for (int i = 0; i < 200; ++i) {
    double mid = 0.5 * (lo + hi);
    if (cdf(mid) < prob)
      lo = mid;
    else
      hi = mid;
    if (hi - lo < 1e-12 * (1.0 + hi)) break;
  }
  double x = 0.5 * (lo + hi);
  for (int i = 0; i < 30; ++i) {
    double f = cdf(x) - prob;
    double d = pdf(x);
    if (d <= 0.0) break;
    double step = f / d;
    double xn = x - step;
    if (xn <= lo || xn >= hi) break;
    x = xn;
    if (std::fabs(f) < 1e-13 && std::fabs(step) < 1e-12 * (1.0 + x)) break;
  }
  return x;
}

}  // namespace

double chi2_quantile(int r, double prob) {
  if (r < 1) throw NumericError("chi2_quantile: df must be >= 1, got " + std::to_string(r));
  if (!(prob > 0.0 && prob < 1.0))
    throw NumericError("chi2_quantile: probability must lie in (0,1)");
  double guess = r + 3.0 * std::sqrt(2.0 * r);
  return invert_cdf([&](double x) { return chi2_cdf(r, x); }, [&](double x) { return chi2_pdf(r, x); },
                    prob, guess);
}

double mixture_quantile(int r, double prob) {
  if (r < 1) throw NumericError("mixture_quantile: df must be >= 1");
  if (!(prob > 0.0 && prob < 1.0))
    throw NumericError("mixture_quantile: probability must lie in (0,1)");
  if (r == 1) {
    // 0.5*chi2_1 + 0.5*(point mass at 0)
    if (prob <= 0.5) return 0.0;
    return chi2_quantile(1, 2.0 * prob - 1.0);
  }
  auto cdf = [&](double x) { return 0.5 * chi2_cdf(r, x) + 0.5 * chi2_cdf(r - 1, x); };
  auto pdf = [&](double x) { return 0.5 * chi2_pdf(r, x) + 0.5 * chi2_pdf(r - 1, x); };
  return invert_cdf(cdf, pdf, prob, r + 3.0 * std::sqrt(2.0 * r));
}

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) throw NumericError("normal_quantile: probability must lie in (0,1)");
  if (p == 0.5) return 0.0;
  double q = p < 0.5 ? 1.0 - p : p;
  double z = std::sqrt(chi2_quantile(1, 2.0 * q - 1.0));
  return p < 0.5 ? -z : z;
}

}  // namespace poclm
