#include <cstdlib>
#include <cstring>

#include "poclm/kernels.hpp"

namespace poclm::kernels {

bool avx2_available() {
#if defined(__x86_64__) || defined(_M_X64)
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

namespace {

struct Selection {
  EvalFn fn;
  const char* name;
};

Selection pick() {
  const char* env = std::getenv("POCLM_KERNELS");
  if (env && std::strcmp(env, "scalar") == 0) return {eval_scalar, "scalar"};
#if defined(__x86_64__) || defined(_M_X64)
  bool want_avx2 = env ? std::strcmp(env, "avx2") == 0 : true;
  if (want_avx2 && avx2_available()) return {eval_avx2, "avx2"};
#endif
  return {eval_scalar, "scalar"};
}

const Selection& selection() {
  static const Selection s = pick();
  return s;
}

}  // namespace

EvalFn select_eval() { return selection().fn; }

const char* active_kernel_name() { return selection().name; }

}  // namespace poclm::kernels
