#if defined(__x86_64__) || defined(_M_X64)

#include <immintrin.h>

#include <cmath>

#include "poclm/kernels.hpp"

namespace poclm::kernels {

namespace {

inline __m256d splat(double v) { return _mm256_set1_pd(v); }

inline __m256d blend(__m256d mask, __m256d if_true, __m256d if_false) {
  return _mm256_blendv_pd(if_false, if_true, mask);
}

// exp(x) after Cody-Waite range reduction and a Pade rational on the
// reduced argument (double-precision Cephes coefficients, ~1 ulp).
inline __m256d exp_pd(__m256d x) {
  const __m256d max_x = splat(709.43);
  const __m256d min_x = splat(-708.39);
  const __m256d log2e = splat(1.4426950408889634073599);
  const __m256d c1 = splat(6.93145751953125e-1);
  const __m256d c2 = splat(1.42860682030941723212e-6);

  __m256d xc = _mm256_min_pd(_mm256_max_pd(x, splat(-745.0)), splat(710.0));
  __m256d n = _mm256_round_pd(_mm256_mul_pd(xc, log2e), _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC);
  __m256d r = _mm256_fnmadd_pd(n, c1, xc);
  r = _mm256_fnmadd_pd(n, c2, r);
  __m256d rr = _mm256_mul_pd(r, r);

  __m256d p = splat(1.26177193074810590878e-4);
  p = _mm256_fmadd_pd(p, rr, splat(3.02994407707441961300e-2));
  p = _mm256_fmadd_pd(p, rr, splat(9.99999999999999999910e-1));
  p = _mm256_mul_pd(p, r);

  __m256d q = splat(3.00198505138664455042e-6);
  q = _mm256_fmadd_pd(q, rr, splat(2.52448340349684104192e-3));
  q = _mm256_fmadd_pd(q, rr, splat(2.27265548208155028766e-1));
  q = _mm256_fmadd_pd(q, rr, splat(2.00000000000000000005e0));

  __m256d e = _mm256_div_pd(p, _mm256_sub_pd(q, p));
  e = _mm256_fmadd_pd(splat(2.0), e, splat(1.0));

  // scale by 2^n
  __m128i n32 = _mm256_cvtpd_epi32(n);
  __m256i n64 = _mm256_cvtepi32_epi64(n32);
  __m256i pow2 = _mm256_slli_epi64(_mm256_add_epi64(n64, _mm256_set1_epi64x(1023)), 52);
  e = _mm256_mul_pd(e, _mm256_castsi256_pd(pow2));

  e = blend(_mm256_cmp_pd(x, min_x, _CMP_LT_OQ), _mm256_setzero_pd(), e);
  e = blend(_mm256_cmp_pd(x, max_x, _CMP_GT_OQ), splat(HUGE_VAL), e);
  return e;
}

// log(x) for normal positive x (Cephes rational).  0 -> -inf, +inf -> +inf.
inline __m256d log_pd(__m256d x) {
  const __m256d one = splat(1.0);
  const __m256d half = splat(0.5);

  __m256i bits = _mm256_castpd_si256(x);
  __m256i expo_bits = _mm256_srli_epi64(bits, 52);
  expo_bits = _mm256_and_si256(expo_bits, _mm256_set1_epi64x(0x7FF));
  __m256i mant_bits = _mm256_and_si256(bits, _mm256_set1_epi64x(0x000FFFFFFFFFFFFFLL));
  mant_bits = _mm256_or_si256(mant_bits, _mm256_set1_epi64x(0x3FE0000000000000LL));
  __m256d m = _mm256_castsi256_pd(mant_bits);  // in [0.5, 1)

  // exponent as double; lanes are small so the int64->double conversion
  // can go through int32.
  __m256i expo_sub = _mm256_sub_epi64(expo_bits, _mm256_set1_epi64x(1022));
  alignas(32) long long ebuf[4];
  _mm256_store_si256(reinterpret_cast<__m256i*>(ebuf), expo_sub);
  __m256d e = _mm256_set_pd(static_cast<double>(ebuf[3]), static_cast<double>(ebuf[2]),
                            static_cast<double>(ebuf[1]), static_cast<double>(ebuf[0]));

  const __m256d sqrth = splat(0.70710678118654752440);
  __m256d small = _mm256_cmp_pd(m, sqrth, _CMP_LT_OQ);
  m = blend(small, _mm256_add_pd(m, m), m);
  e = blend(small, _mm256_sub_pd(e, one), e);

  __m256d f = _mm256_sub_pd(m, one);
  __m256d z = _mm256_mul_pd(f, f);

  __m256d p = splat(1.01875663804580931796e-4);
  p = _mm256_fmadd_pd(p, f, splat(4.97494994976747001425e-1));
  p = _mm256_fmadd_pd(p, f, splat(4.70579119878881725854e0));
  p = _mm256_fmadd_pd(p, f, splat(1.44989225341610930846e1));
  p = _mm256_fmadd_pd(p, f, splat(1.79368678507819816313e1));
  p = _mm256_fmadd_pd(p, f, splat(7.70838733755885391666e0));

  __m256d q = f;
  q = _mm256_add_pd(q, splat(1.12873587189167450590e1));
  q = _mm256_fmadd_pd(q, f, splat(4.52279145837532221105e1));
  q = _mm256_fmadd_pd(q, f, splat(8.29875266912776603211e1));
  q = _mm256_fmadd_pd(q, f, splat(7.11544750618563894466e1));
  q = _mm256_fmadd_pd(q, f, splat(2.31251620126765340583e1));

  __m256d y = _mm256_mul_pd(_mm256_mul_pd(z, f), _mm256_div_pd(p, q));
  y = _mm256_fnmadd_pd(half, z, y);

  __m256d r = _mm256_add_pd(f, y);
  r = _mm256_fmadd_pd(e, splat(-2.121944400546905827679e-4), r);
  r = _mm256_fmadd_pd(e, splat(0.693359375), r);

  r = blend(_mm256_cmp_pd(x, _mm256_setzero_pd(), _CMP_LE_OQ), splat(-HUGE_VAL), r);
  r = blend(_mm256_cmp_pd(x, splat(HUGE_VAL), _CMP_EQ_OQ), splat(HUGE_VAL), r);
  return r;
}

// log logistic(x) and log logistic(-x) via the shared exp(-|x|).
inline void log_logistic_pair_pd(__m256d x, __m256d& lpos, __m256d& lneg) {
  const __m256d zero = _mm256_setzero_pd();
  __m256d ax = _mm256_andnot_pd(splat(-0.0), x);
  __m256d t = log_pd(_mm256_add_pd(splat(1.0), exp_pd(_mm256_sub_pd(zero, ax))));
  lpos = _mm256_sub_pd(_mm256_min_pd(x, zero), t);
  lneg = _mm256_sub_pd(_mm256_min_pd(_mm256_sub_pd(zero, x), zero), t);
}

// log(expm1(g)) for g > 0: log(exp(g)-1) above 0.5, log(g) + log(expm1(g)/g)
// below (Taylor polynomial), and g itself above 36.
inline __m256d log_expm1_pd(__m256d g) {
  __m256d big = _mm256_cmp_pd(g, splat(36.0), _CMP_GT_OQ);
  __m256d mid = _mm256_cmp_pd(g, splat(0.5), _CMP_GE_OQ);

  __m256d em1 = _mm256_sub_pd(exp_pd(g), splat(1.0));
  __m256d upper = log_pd(em1);

  // expm1(g)/g = sum_{n>=1} g^(n-1)/n!
  __m256d p = splat(1.0 / 1307674368000.0);  // 1/15!
  p = _mm256_fmadd_pd(p, g, splat(1.0 / 87178291200.0));
  p = _mm256_fmadd_pd(p, g, splat(1.0 / 6227020800.0));
  p = _mm256_fmadd_pd(p, g, splat(1.0 / 479001600.0));
  p = _mm256_fmadd_pd(p, g, splat(1.0 / 39916800.0));
  p = _mm256_fmadd_pd(p, g, splat(1.0 / 3628800.0));
  p = _mm256_fmadd_pd(p, g, splat(1.0 / 362880.0));
  p = _mm256_fmadd_pd(p, g, splat(1.0 / 40320.0));
  p = _mm256_fmadd_pd(p, g, splat(1.0 / 5040.0));
  p = _mm256_fmadd_pd(p, g, splat(1.0 / 720.0));
  p = _mm256_fmadd_pd(p, g, splat(1.0 / 120.0));
  p = _mm256_fmadd_pd(p, g, splat(1.0 / 24.0));
  p = _mm256_fmadd_pd(p, g, splat(1.0 / 6.0));
  p = _mm256_fmadd_pd(p, g, splat(0.5));
  p = _mm256_fmadd_pd(p, g, splat(1.0));
  __m256d lower = _mm256_add_pd(log_pd(g), log_pd(p));

  __m256d r = blend(mid, upper, lower);
  return blend(big, g, r);
}

}  // namespace

void eval_avx2(const EvalInput& in, const EvalOutput& out) {
  const int k = in.k;
  const __m256d zero = _mm256_setzero_pd();
  const __m128i one32 = _mm_set1_epi32(1);
  const __m128i kvec = _mm_set1_epi32(k);
  const __m128i idx_max = _mm_set1_epi32(k - 2);

  int i = 0;
  for (; i + 4 <= in.n; i += 4) {
    __m128i z = _mm_loadu_si128(reinterpret_cast<const __m128i*>(in.z + i));
    __m256d w = _mm256_loadu_pd(in.w + i);

    __m128i ia = _mm_min_epi32(_mm_max_epi32(_mm_sub_epi32(z, _mm_set1_epi32(2)), _mm_setzero_si128()), idx_max);
    __m128i ib = _mm_min_epi32(_mm_sub_epi32(z, one32), idx_max);
    __m256d a = _mm256_add_pd(_mm256_i32gather_pd(in.alpha, ia, 8), w);
    __m256d b = _mm256_add_pd(_mm256_i32gather_pd(in.alpha, ib, 8), w);

    __m256d has_a = _mm256_castsi256_pd(_mm256_cvtepi32_epi64(_mm_cmpgt_epi32(z, one32)));
    __m256d has_b = _mm256_castsi256_pd(_mm256_cvtepi32_epi64(_mm_cmplt_epi32(z, kvec)));

    __m256d la, lna, lb, lnb;
    log_logistic_pair_pd(a, la, lna);
    log_logistic_pair_pd(b, lb, lnb);
    __m256d le = log_expm1_pd(_mm256_sub_pd(b, a));

    __m256d logpi_mid = _mm256_add_pd(_mm256_add_pd(la, lnb), le);
    __m256d logpi = blend(has_a, blend(has_b, logpi_mid, lna), lb);
    _mm256_storeu_pd(out.logpi + i, logpi);

    if (out.ra) {
      __m256d ra_mid = exp_pd(_mm256_sub_pd(_mm256_sub_pd(lna, lnb), le));
      __m256d ra = blend(has_a, blend(has_b, ra_mid, exp_pd(la)), zero);
      _mm256_storeu_pd(out.ra + i, ra);
    }
    if (out.rb) {
      __m256d rb_mid = exp_pd(_mm256_sub_pd(_mm256_sub_pd(lb, la), le));
      __m256d rb = blend(has_b, blend(has_a, rb_mid, exp_pd(lnb)), zero);
      _mm256_storeu_pd(out.rb + i, rb);
    }
  }

  if (i < in.n) {
    EvalInput tail = in;
    tail.w = in.w + i;
    tail.z = in.z + i;
    tail.n = in.n - i;
    EvalOutput tail_out;
    tail_out.logpi = out.logpi + i;
    tail_out.ra = out.ra ? out.ra + i : nullptr;
    tail_out.rb = out.rb ? out.rb + i : nullptr;
    eval_scalar(tail, tail_out);
  }
}

}  // namespace poclm::kernels

#endif  // x86_64
