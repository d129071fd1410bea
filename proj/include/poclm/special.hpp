#pragma once

namespace poclm {

// Logistic CDF, stable for any finite x.
double logistic(double x);
// log(logistic(x)) without underflow for very negative x.
double log_logistic(double x);
// logistic(b) - logistic(a) for b >= a, evaluated as
// logistic(a) * logistic(-b) * expm1(b - a) to avoid cancellation.
double logistic_difference(double a, double b);

// Regularized lower incomplete gamma P(a, x).
double gamma_p(double a, double x);

// Chi-square CDF with r degrees of freedom (r >= 1).
double chi2_cdf(int r, double x);

// Quantile of chi2_r by numeric inversion of gamma_p, |F(x)-prob| <= 1e-10.
double chi2_quantile(int r, double prob);

// Quantile of the 0.5*chi2_r + 0.5*chi2_{r-1} mixture; chi2_0 is a point
// mass at zero, so for r=1 any prob <= 0.5 maps to 0.
double mixture_quantile(int r, double prob);

// Standard normal quantile.
double normal_quantile(double p);

}  // namespace poclm
