// Compiled with -mavx2 (no FMA); only reached after a runtime CPU check.
#include <immintrin.h>

#include "decomposer/simd/kernels.hpp"

namespace decomposer::simd {
namespace {

constexpr std::size_t kLanes = 4;

inline double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

inline __m256d vabs(__m256d v) { return _mm256_andnot_pd(_mm256_set1_pd(-0.0), v); }

// exp(x) for x in [-708, 708]: Cody-Waite reduction and the Cephes rational
// approximation, then scaling by 2^n through the exponent field.
inline __m256d vexp(__m256d x) {
  const __m256d log2e = _mm256_set1_pd(1.4426950408889634073599);
  const __m256d ln2_hi = _mm256_set1_pd(6.93145751953125e-1);
  const __m256d ln2_lo = _mm256_set1_pd(1.42860682030941723212e-6);
  const __m256d n = _mm256_round_pd(_mm256_mul_pd(x, log2e),
                                    _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC);
  __m256d r = _mm256_sub_pd(x, _mm256_mul_pd(n, ln2_hi));
  r = _mm256_sub_pd(r, _mm256_mul_pd(n, ln2_lo));
  const __m256d rr = _mm256_mul_pd(r, r);

  __m256d p = _mm256_set1_pd(1.26177193074810590878e-4);
  p = _mm256_add_pd(_mm256_mul_pd(p, rr), _mm256_set1_pd(3.02994407707441961300e-2));
  p = _mm256_add_pd(_mm256_mul_pd(p, rr), _mm256_set1_pd(9.99999999999999999910e-1));
  p = _mm256_mul_pd(p, r);

  __m256d q = _mm256_set1_pd(3.00198505138664455042e-6);
  q = _mm256_add_pd(_mm256_mul_pd(q, rr), _mm256_set1_pd(2.52448340349684104192e-3));
  q = _mm256_add_pd(_mm256_mul_pd(q, rr), _mm256_set1_pd(2.27265548208155028766e-1));
  q = _mm256_add_pd(_mm256_mul_pd(q, rr), _mm256_set1_pd(2.00000000000000000009e0));

  __m256d e = _mm256_div_pd(p, _mm256_sub_pd(q, p));
  e = _mm256_add_pd(_mm256_set1_pd(1.0), _mm256_add_pd(e, e));

  const __m128i n32 = _mm256_cvtpd_epi32(n);
  __m256i bits = _mm256_cvtepi32_epi64(n32);
  bits = _mm256_add_epi64(bits, _mm256_set1_epi64x(1023));
  bits = _mm256_slli_epi64(bits, 52);
  return _mm256_mul_pd(e, _mm256_castsi256_pd(bits));
}

void axpy(double* y, const double* x, double a, std::size_t n) {
  const __m256d va = _mm256_set1_pd(a);
  std::size_t i = 0;
  for (; i + kLanes <= n; i += kLanes) {
    const __m256d vy = _mm256_loadu_pd(y + i);
    _mm256_storeu_pd(y + i, _mm256_add_pd(vy, _mm256_mul_pd(va, _mm256_loadu_pd(x + i))));
  }
  for (; i < n; ++i) y[i] = y[i] + a * x[i];
}

void multiply(const double* a, const double* b, double* out, std::size_t n) {
  std::size_t i = 0;
  for (; i + kLanes <= n; i += kLanes) {
    _mm256_storeu_pd(out + i, _mm256_mul_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
  }
  for (; i < n; ++i) out[i] = a[i] * b[i];
}

void sl_compose(const double* oi, const double* s, const double* l, double* out, std::size_t n) {
  std::size_t i = 0;
  for (; i + kLanes <= n; i += kLanes) {
    const __m256d p = _mm256_mul_pd(_mm256_loadu_pd(oi + i), _mm256_loadu_pd(s + i));
    _mm256_storeu_pd(out + i, _mm256_add_pd(p, _mm256_loadu_pd(l + i)));
  }
  for (; i < n; ++i) out[i] = oi[i] * s[i] + l[i];
}

void blend(const double* sl, const double* occ, const double* m, double* out, std::size_t n) {
  const __m256d one = _mm256_set1_pd(1.0);
  std::size_t i = 0;
  for (; i + kLanes <= n; i += kLanes) {
    const __m256d vm = _mm256_loadu_pd(m + i);
    const __m256d a = _mm256_mul_pd(_mm256_loadu_pd(sl + i), _mm256_sub_pd(one, vm));
    const __m256d b = _mm256_mul_pd(_mm256_loadu_pd(occ + i), vm);
    _mm256_storeu_pd(out + i, _mm256_add_pd(a, b));
  }
  for (; i < n; ++i) out[i] = sl[i] * (1.0 - m[i]) + occ[i] * m[i];
}

void sigmoid(const double* theta, double* out, std::size_t n) {
  const __m256d one = _mm256_set1_pd(1.0);
  const __m256d lo = _mm256_set1_pd(-708.0);
  const __m256d hi = _mm256_set1_pd(708.0);
  const __m256d neg = _mm256_set1_pd(-0.0);
  std::size_t i = 0;
  for (; i + kLanes <= n; i += kLanes) {
    __m256d z = _mm256_xor_pd(_mm256_loadu_pd(theta + i), neg);
    z = _mm256_min_pd(hi, _mm256_max_pd(lo, z));
    _mm256_storeu_pd(out + i, _mm256_div_pd(one, _mm256_add_pd(one, vexp(z))));
  }
  if (i < n) {
    // Tail through the vector path too so every element sees the same exp.
    alignas(32) double in_buf[kLanes] = {0.0, 0.0, 0.0, 0.0};
    alignas(32) double out_buf[kLanes];
    for (std::size_t k = 0; i + k < n; ++k) in_buf[k] = theta[i + k];
    __m256d z = _mm256_xor_pd(_mm256_load_pd(in_buf), neg);
    z = _mm256_min_pd(hi, _mm256_max_pd(lo, z));
    _mm256_store_pd(out_buf, _mm256_div_pd(one, _mm256_add_pd(one, vexp(z))));
    for (std::size_t k = 0; i + k < n; ++k) out[i + k] = out_buf[k];
  }
}

void scale_by_sigmoid_slope(double* g, const double* x, std::size_t n) {
  const __m256d one = _mm256_set1_pd(1.0);
  std::size_t i = 0;
  for (; i + kLanes <= n; i += kLanes) {
    const __m256d vx = _mm256_loadu_pd(x + i);
    const __m256d slope = _mm256_mul_pd(vx, _mm256_sub_pd(one, vx));
    _mm256_storeu_pd(g + i, _mm256_mul_pd(_mm256_loadu_pd(g + i), slope));
  }
  for (; i < n; ++i) g[i] = g[i] * (x[i] * (1.0 - x[i]));
}

double sum(const double* a, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + kLanes <= n; i += kLanes) acc = _mm256_add_pd(acc, _mm256_loadu_pd(a + i));
  double total = hsum(acc);
  for (; i < n; ++i) total += a[i];
  return total;
}

double sum_abs_diff(const double* a, const double* b, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + kLanes <= n; i += kLanes) {
    acc = _mm256_add_pd(acc, vabs(_mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i))));
  }
  double total = hsum(acc);
  for (; i < n; ++i) {
    const double d = a[i] - b[i];
    total += d < 0.0 ? -d : d;
  }
  return total;
}

double sum_sq_diff(const double* a, const double* b, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + kLanes <= n; i += kLanes) {
    const __m256d d = _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
    acc = _mm256_add_pd(acc, _mm256_mul_pd(d, d));
  }
  double total = hsum(acc);
  for (; i < n; ++i) {
    const double d = a[i] - b[i];
    total += d * d;
  }
  return total;
}

double residual_grad(const ResidualArgs& a) {
  const __m256d one = _mm256_set1_pd(1.0);
  const __m256d minus_one = _mm256_set1_pd(-1.0);
  const __m256d zero = _mm256_setzero_pd();
  const __m256d neg_coef = _mm256_set1_pd(-a.coef);
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + kLanes <= a.n; i += kLanes) {
    const __m256d m = _mm256_loadu_pd(a.mask + i);
    const __m256d om = _mm256_sub_pd(one, m);
    const __m256d oi = _mm256_loadu_pd(a.oi + i);
    const __m256d s = _mm256_loadu_pd(a.shadow + i);
    const __m256d occ = _mm256_loadu_pd(a.occ + i);
    const __m256d sl = _mm256_add_pd(_mm256_mul_pd(oi, s), _mm256_loadu_pd(a.light + i));
    const __m256d y = _mm256_add_pd(_mm256_mul_pd(sl, om), _mm256_mul_pd(occ, m));
    const __m256d r = _mm256_sub_pd(_mm256_loadu_pd(a.view + i), y);
    const __m256d pos = _mm256_and_pd(_mm256_cmp_pd(r, zero, _CMP_GT_OQ), one);
    const __m256d negv = _mm256_and_pd(_mm256_cmp_pd(r, zero, _CMP_LT_OQ), minus_one);
    const __m256d e = _mm256_mul_pd(neg_coef, _mm256_add_pd(pos, negv));

    _mm256_storeu_pd(a.g_oi + i, _mm256_add_pd(_mm256_loadu_pd(a.g_oi + i),
                                               _mm256_mul_pd(_mm256_mul_pd(e, s), om)));
    _mm256_storeu_pd(a.g_shadow + i, _mm256_add_pd(_mm256_loadu_pd(a.g_shadow + i),
                                                   _mm256_mul_pd(_mm256_mul_pd(e, oi), om)));
    _mm256_storeu_pd(a.g_light + i,
                     _mm256_add_pd(_mm256_loadu_pd(a.g_light + i), _mm256_mul_pd(e, om)));
    _mm256_storeu_pd(a.g_mask + i, _mm256_add_pd(_mm256_loadu_pd(a.g_mask + i),
                                                 _mm256_mul_pd(e, _mm256_sub_pd(occ, sl))));
    _mm256_storeu_pd(a.g_occ + i, _mm256_mul_pd(e, m));
    acc = _mm256_add_pd(acc, vabs(r));
  }
  double total = hsum(acc);
  const double nc = -a.coef;
  for (; i < a.n; ++i) {
    const double m = a.mask[i];
    const double om = 1.0 - m;
    const double sl = a.oi[i] * a.shadow[i] + a.light[i];
    const double y = sl * om + a.occ[i] * m;
    const double r = a.view[i] - y;
    const double sign = (r > 0.0 ? 1.0 : 0.0) + (r < 0.0 ? -1.0 : 0.0);
    const double e = nc * sign;
    a.g_oi[i] = a.g_oi[i] + (e * a.shadow[i]) * om;
    a.g_shadow[i] = a.g_shadow[i] + (e * a.oi[i]) * om;
    a.g_light[i] = a.g_light[i] + e * om;
    a.g_mask[i] = a.g_mask[i] + e * (a.occ[i] - sl);
    a.g_occ[i] = e * m;
    total += r < 0.0 ? -r : r;
  }
  return total;
}

void adam_update(double* theta, const double* grad, double* m, double* v, std::size_t n,
                 const AdamCoefs& c) {
  const double one_minus_b1 = 1.0 - c.beta1;
  const double one_minus_b2 = 1.0 - c.beta2;
  const __m256d b1 = _mm256_set1_pd(c.beta1);
  const __m256d b2 = _mm256_set1_pd(c.beta2);
  const __m256d omb1 = _mm256_set1_pd(one_minus_b1);
  const __m256d omb2 = _mm256_set1_pd(one_minus_b2);
  const __m256d bias1 = _mm256_set1_pd(c.bias1);
  const __m256d bias2 = _mm256_set1_pd(c.bias2);
  const __m256d eps = _mm256_set1_pd(c.eps);
  const __m256d step = _mm256_set1_pd(c.step);
  std::size_t i = 0;
  for (; i + kLanes <= n; i += kLanes) {
    const __m256d g = _mm256_loadu_pd(grad + i);
    const __m256d vm = _mm256_add_pd(_mm256_mul_pd(b1, _mm256_loadu_pd(m + i)),
                                     _mm256_mul_pd(omb1, g));
    const __m256d vv = _mm256_add_pd(_mm256_mul_pd(b2, _mm256_loadu_pd(v + i)),
                                     _mm256_mul_pd(omb2, _mm256_mul_pd(g, g)));
    _mm256_storeu_pd(m + i, vm);
    _mm256_storeu_pd(v + i, vv);
    const __m256d m_hat = _mm256_div_pd(vm, bias1);
    const __m256d v_hat = _mm256_div_pd(vv, bias2);
    const __m256d upd = _mm256_div_pd(m_hat, _mm256_add_pd(_mm256_sqrt_pd(v_hat), eps));
    _mm256_storeu_pd(theta + i, _mm256_sub_pd(_mm256_loadu_pd(theta + i), _mm256_mul_pd(step, upd)));
  }
  for (; i < n; ++i) {
    const double g = grad[i];
    m[i] = c.beta1 * m[i] + one_minus_b1 * g;
    v[i] = c.beta2 * v[i] + one_minus_b2 * (g * g);
    const double m_hat = m[i] / c.bias1;
    const double v_hat = v[i] / c.bias2;
    const __m128d sq = _mm_sqrt_sd(_mm_setzero_pd(), _mm_set_sd(v_hat));
    theta[i] = theta[i] - c.step * (m_hat / (_mm_cvtsd_f64(sq) + c.eps));
  }
}

double ssim_sum(const double* mu1, const double* mu2, const double* e11, const double* e22,
                const double* e12, std::size_t n, double c1, double c2) {
  const __m256d vc1 = _mm256_set1_pd(c1);
  const __m256d vc2 = _mm256_set1_pd(c2);
  const __m256d two = _mm256_set1_pd(2.0);
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + kLanes <= n; i += kLanes) {
    const __m256d a = _mm256_loadu_pd(mu1 + i);
    const __m256d b = _mm256_loadu_pd(mu2 + i);
    const __m256d m11 = _mm256_mul_pd(a, a);
    const __m256d m22 = _mm256_mul_pd(b, b);
    const __m256d m12 = _mm256_mul_pd(a, b);
    const __m256d s1 = _mm256_sub_pd(_mm256_loadu_pd(e11 + i), m11);
    const __m256d s2 = _mm256_sub_pd(_mm256_loadu_pd(e22 + i), m22);
    const __m256d s12 = _mm256_sub_pd(_mm256_loadu_pd(e12 + i), m12);
    const __m256d num = _mm256_mul_pd(_mm256_add_pd(_mm256_mul_pd(two, m12), vc1),
                                      _mm256_add_pd(_mm256_mul_pd(two, s12), vc2));
    const __m256d den = _mm256_mul_pd(_mm256_add_pd(_mm256_add_pd(m11, m22), vc1),
                                      _mm256_add_pd(_mm256_add_pd(s1, s2), vc2));
    acc = _mm256_add_pd(acc, _mm256_div_pd(num, den));
  }
  double total = hsum(acc);
  for (; i < n; ++i) {
    const double m11 = mu1[i] * mu1[i];
    const double m22 = mu2[i] * mu2[i];
    const double m12 = mu1[i] * mu2[i];
    const double num = (2.0 * m12 + c1) * (2.0 * (e12[i] - m12) + c2);
    const double den = (m11 + m22 + c1) * ((e11[i] - m11) + (e22[i] - m22) + c2);
    total += num / den;
  }
  return total;
}

}  // namespace

namespace detail {

const KernelTable& avx2_table() {
  static const KernelTable table{
      Isa::avx2,   axpy,          multiply,    sl_compose,   blend,
      sigmoid,     scale_by_sigmoid_slope,     sum,          sum_abs_diff,
      sum_sq_diff, residual_grad, adam_update, ssim_sum,
  };
  return table;
}

}  // namespace detail
}  // namespace decomposer::simd
