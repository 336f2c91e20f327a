#pragma once

// Data-parallel inner loops shared by the blur, composition, gradient,
// optimizer and SSIM code. Every kernel has a scalar reference
// implementation; an AVX2 variant is picked at runtime when the CPU has it.
//
// Elementwise kernels perform the same IEEE operations in the same order in
// both variants and therefore agree bit-for-bit. Reductions differ only in
// summation order. `sigmoid` uses a polynomial exp in the AVX2 variant and
// agrees with the scalar one to a few ulp.

#include <cstddef>
#include <string_view>
#include <vector>

namespace decomposer::simd {

enum class Isa { scalar, avx2 };

std::string_view isa_name(Isa isa);

// One channel plane of one view for the fused residual/gradient pass of the
// composition loss. `coef` is the loss weight of a single |residual| term.
// Gradient outputs marked += are accumulated, `g_occ` is overwritten.
struct ResidualArgs {
  const double* view = nullptr;
  const double* oi = nullptr;
  const double* shadow = nullptr;
  const double* light = nullptr;
  const double* mask = nullptr;
  const double* occ = nullptr;
  double coef = 0.0;
  double* g_oi = nullptr;      // +=
  double* g_shadow = nullptr;  // +=
  double* g_light = nullptr;   // +=
  double* g_mask = nullptr;    // +=
  double* g_occ = nullptr;     // =
  std::size_t n = 0;
};

struct AdamCoefs {
  double step = 0.0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double bias1 = 1.0;  // 1 - beta1^t
  double bias2 = 1.0;  // 1 - beta2^t
  double eps = 1e-8;
};

struct KernelTable {
  Isa isa = Isa::scalar;

  // y += a * x
  void (*axpy)(double* y, const double* x, double a, std::size_t n);
  // out = a * b
  void (*multiply)(const double* a, const double* b, double* out, std::size_t n);
  // out = oi * s + l
  void (*sl_compose)(const double* oi, const double* s, const double* l, double* out, std::size_t n);
  // out = sl * (1 - m) + occ * m
  void (*blend)(const double* sl, const double* occ, const double* m, double* out, std::size_t n);
  // out = 1 / (1 + exp(-theta)), exp argument clamped to [-708, 708]
  void (*sigmoid)(const double* theta, double* out, std::size_t n);
  // g *= x * (1 - x)
  void (*scale_by_sigmoid_slope)(double* g, const double* x, std::size_t n);

  double (*sum)(const double* a, std::size_t n);
  double (*sum_abs_diff)(const double* a, const double* b, std::size_t n);
  double (*sum_sq_diff)(const double* a, const double* b, std::size_t n);

  // Returns sum |view - compose| over the plane and accumulates gradients.
  double (*residual_grad)(const ResidualArgs& args);

  // Bias-corrected adaptive-moment update, in place.
  void (*adam_update)(double* theta, const double* grad, double* m, double* v, std::size_t n,
                      const AdamCoefs& c);

  // Sum of the local SSIM map given windowed first and second moments.
  double (*ssim_sum)(const double* mu1, const double* mu2, const double* e11, const double* e22,
                     const double* e12, std::size_t n, double c1, double c2);
};

// The active table. Chosen once: DECOMPOSER_SIMD=scalar|avx2 forces a
// variant (an unsupported request falls back to scalar), otherwise the best
// supported one is used.
const KernelTable& kernels();

// A specific variant, or nullptr if this build/CPU cannot run it.
const KernelTable* kernels_for(Isa isa);

std::vector<Isa> supported_isas();

namespace detail {
const KernelTable& scalar_table();
#if defined(DECOMPOSER_HAVE_AVX2)
const KernelTable& avx2_table();
#endif
}  // namespace detail

}  // namespace decomposer::simd
