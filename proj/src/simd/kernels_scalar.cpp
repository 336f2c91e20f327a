#include <algorithm>
#include <cmath>

#include "decomposer/simd/kernels.hpp"

namespace decomposer::simd {
namespace {

void axpy(double* y, const double* x, double a, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] = y[i] + a * x[i];
}

void multiply(const double* a, const double* b, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = a[i] * b[i];
}

void sl_compose(const double* oi, const double* s, const double* l, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = oi[i] * s[i] + l[i];
}

void blend(const double* sl, const double* occ, const double* m, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = sl[i] * (1.0 - m[i]) + occ[i] * m[i];
}

void sigmoid(const double* theta, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    const double z = std::min(708.0, std::max(-708.0, -theta[i]));
    out[i] = 1.0 / (1.0 + std::exp(z));
  }
}

void scale_by_sigmoid_slope(double* g, const double* x, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) g[i] = g[i] * (x[i] * (1.0 - x[i]));
}

double sum(const double* a, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += a[i];
  return acc;
}

double sum_abs_diff(const double* a, const double* b, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += std::abs(a[i] - b[i]);
  return acc;
}

double sum_sq_diff(const double* a, const double* b, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = a[i] - b[i];
    acc += d * d;
  }
  return acc;
}

double residual_grad(const ResidualArgs& a) {
  const double neg_coef = -a.coef;
  double acc = 0.0;
  for (std::size_t i = 0; i < a.n; ++i) {
    const double m = a.mask[i];
    const double om = 1.0 - m;
    const double sl = a.oi[i] * a.shadow[i] + a.light[i];
    const double y = sl * om + a.occ[i] * m;
    const double r = a.view[i] - y;
    const double sign = (r > 0.0 ? 1.0 : 0.0) + (r < 0.0 ? -1.0 : 0.0);
    const double e = neg_coef * sign;
    a.g_oi[i] = a.g_oi[i] + (e * a.shadow[i]) * om;
    a.g_shadow[i] = a.g_shadow[i] + (e * a.oi[i]) * om;
    a.g_light[i] = a.g_light[i] + e * om;
    a.g_mask[i] = a.g_mask[i] + e * (a.occ[i] - sl);
    a.g_occ[i] = e * m;
    acc += std::abs(r);
  }
  return acc;
}

void adam_update(double* theta, const double* grad, double* m, double* v, std::size_t n,
                 const AdamCoefs& c) {
  const double one_minus_b1 = 1.0 - c.beta1;
  const double one_minus_b2 = 1.0 - c.beta2;
  for (std::size_t i = 0; i < n; ++i) {
    const double g = grad[i];
    m[i] = c.beta1 * m[i] + one_minus_b1 * g;
    v[i] = c.beta2 * v[i] + one_minus_b2 * (g * g);
    const double m_hat = m[i] / c.bias1;
    const double v_hat = v[i] / c.bias2;
    theta[i] = theta[i] - c.step * (m_hat / (std::sqrt(v_hat) + c.eps));
  }
}

double ssim_sum(const double* mu1, const double* mu2, const double* e11, const double* e22,
                const double* e12, std::size_t n, double c1, double c2) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double m11 = mu1[i] * mu1[i];
    const double m22 = mu2[i] * mu2[i];
    const double m12 = mu1[i] * mu2[i];
    const double s1 = e11[i] - m11;
    const double s2 = e22[i] - m22;
    const double s12 = e12[i] - m12;
    const double num = (2.0 * m12 + c1) * (2.0 * s12 + c2);
    const double den = (m11 + m22 + c1) * (s1 + s2 + c2);
    acc += num / den;
  }
  return acc;
}

}  // namespace

namespace detail {

const KernelTable& scalar_table() {
  static const KernelTable table{
      Isa::scalar, axpy,         multiply,     sl_compose,    blend,
      sigmoid,     scale_by_sigmoid_slope,     sum,           sum_abs_diff,
      sum_sq_diff, residual_grad, adam_update, ssim_sum,
  };
  return table;
}

}  // namespace detail
}  // namespace decomposer::simd
