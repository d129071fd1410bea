#pragma once

#include <cstdint>

namespace poclm::kernels {

// Elementwise evaluation of the cumulative-logit category log-probability
// and its derivative weights at eta_j = alpha_j + w_i.  With a = eta_{z-1}
// and b = eta_z (eta_0 = -inf, eta_k = +inf):
//
//   logpi[i] = log(logistic(b) - logistic(a))
//   ra[i]    = logistic'(a) / pi   (0 when z_i == 1)
//   rb[i]    = logistic'(b) / pi   (0 when z_i == k)
//
// Reductions (log-likelihood, alpha score, beta chain weights rb-ra) are
// done by the caller in a fixed order, so kernel variants only have to
// agree elementwise.  A pi underflow shows up as logpi[i] <= LOG_UNDERFLOW.
struct EvalInput {
  const double* w;      // n linear predictor offsets x_i . beta
  const int32_t* z;     // n responses in 1..k
  const double* alpha;  // k-1 ascending intercepts
  int n = 0;
  int k = 0;
};

struct EvalOutput {
  double* logpi;  // n, required
  double* ra;     // n, or nullptr when only the value is needed
  double* rb;     // n, or nullptr
};

inline constexpr double LOG_UNDERFLOW = -690.7755278982137;  // log(1e-300)

using EvalFn = void (*)(const EvalInput&, const EvalOutput&);

void eval_scalar(const EvalInput& in, const EvalOutput& out);

bool avx2_available();
#if defined(__x86_64__) || defined(_M_X64)
void eval_avx2(const EvalInput& in, const EvalOutput& out);
#endif

// Dispatch: AVX2 when the CPU supports it, scalar otherwise.  The
// POCLM_KERNELS environment variable ("scalar" or "avx2") overrides.
EvalFn select_eval();
const char* active_kernel_name();

}  // namespace poclm::kernels
