#include <gtest/gtest.h>

#include <cmath>
#include <cstring>

#include "decomposer/simd/kernels.hpp"
#include "oracles.hpp"

using namespace decomposer::simd;

namespace {

// Lengths that exercise empty input, partial vectors and the scalar tail.
const std::size_t kLengths[] = {0, 1, 2, 3, 4, 5, 7, 8, 9, 15, 16, 17, 31, 33, 100, 1023};

bool bits_equal(const std::vector<double>& a, const std::vector<double>& b) {
  return a.size() == b.size() && std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

std::vector<const KernelTable*> variants() {
  std::vector<const KernelTable*> out;
  for (Isa isa : supported_isas()) {
    if (isa != Isa::scalar) out.push_back(kernels_for(isa));
  }
  return out;
}

class SimdEquivalence : public ::testing::Test {
 protected:
  void SetUp() override {
    if (variants().empty()) GTEST_SKIP() << "no SIMD variant on this CPU";
  }
  const KernelTable& ref = *kernels_for(Isa::scalar);
};

}  // namespace

TEST(SimdDispatch, ScalarAlwaysSupported) {
  const auto isas = supported_isas();
  ASSERT_FALSE(isas.empty());
  EXPECT_EQ(isas.front(), Isa::scalar);
  EXPECT_NE(kernels_for(Isa::scalar), nullptr);
  EXPECT_EQ(isa_name(Isa::avx2), "avx2");
}

TEST(SimdDispatch, ActiveTableHonorsForcedScalar) {
  const char* forced = std::getenv("DECOMPOSER_SIMD");
  if (forced != nullptr && std::string_view(forced) == "scalar") {
    EXPECT_EQ(kernels().isa, Isa::scalar);
  } else {
    EXPECT_EQ(kernels().isa, supported_isas().back());
  }
}

TEST_F(SimdEquivalence, ElementwiseKernelsAreBitExact) {
  for (const KernelTable* k : variants()) {
    for (std::size_t n : kLengths) {
      // Offset by one element so loads are not 32-byte aligned.
      auto a = oracle::random_vector(n + 1, n + 1, -1.0, 1.0);
      auto b = oracle::random_vector(n + 2, n + 1, 0.0, 1.0);
      auto c = oracle::random_vector(n + 3, n + 1, 0.0, 1.0);
      std::vector<double> y1 = oracle::random_vector(n + 4, n + 1, -1.0, 1.0);
      std::vector<double> y2 = y1;
      ref.axpy(y1.data() + 1, a.data() + 1, 0.37, n);
      k->axpy(y2.data() + 1, a.data() + 1, 0.37, n);
      EXPECT_TRUE(bits_equal(y1, y2)) << "axpy n=" << n;

      std::vector<double> o1(n + 1), o2(n + 1);
      ref.multiply(a.data() + 1, b.data() + 1, o1.data() + 1, n);
      k->multiply(a.data() + 1, b.data() + 1, o2.data() + 1, n);
      EXPECT_TRUE(bits_equal(o1, o2)) << "multiply n=" << n;

      ref.sl_compose(a.data() + 1, b.data() + 1, c.data() + 1, o1.data() + 1, n);
      k->sl_compose(a.data() + 1, b.data() + 1, c.data() + 1, o2.data() + 1, n);
      EXPECT_TRUE(bits_equal(o1, o2)) << "sl_compose n=" << n;

      ref.blend(a.data() + 1, b.data() + 1, c.data() + 1, o1.data() + 1, n);
      k->blend(a.data() + 1, b.data() + 1, c.data() + 1, o2.data() + 1, n);
      EXPECT_TRUE(bits_equal(o1, o2)) << "blend n=" << n;

      std::vector<double> g1 = a, g2 = a;
      ref.scale_by_sigmoid_slope(g1.data(), b.data(), n + 1);
      k->scale_by_sigmoid_slope(g2.data(), b.data(), n + 1);
      EXPECT_TRUE(bits_equal(g1, g2)) << "scale_by_sigmoid_slope n=" << n;
    }
  }
}

TEST_F(SimdEquivalence, ResidualGradientIsBitExactPerElement) {
  for (const KernelTable* k : variants()) {
    for (std::size_t n : kLengths) {
      const auto view = oracle::random_vector(10 + n, n, 0.0, 1.0);
      const auto oi = oracle::random_vector(11 + n, n, 0.0, 1.0);
      const auto s = oracle::random_vector(12 + n, n, 0.0, 1.0);
      const auto l = oracle::random_vector(13 + n, n, 0.0, 1.0);
      const auto m = oracle::random_vector(14 + n, n, 0.0, 1.0);
      const auto occ = oracle::random_vector(15 + n, n, 0.0, 1.0);
      std::vector<std::vector<double>> g1(5), g2(5);
      for (int j = 0; j < 5; ++j) g1[j] = g2[j] = oracle::random_vector(20 + j, n, -1.0, 1.0);
      auto run = [&](const KernelTable& t, std::vector<std::vector<double>>& g) {
        ResidualArgs args{view.data(), oi.data(), s.data(), l.data(), m.data(), occ.data(), 0.125,
                          g[0].data(), g[1].data(), g[2].data(), g[3].data(), g[4].data(), n};
        return t.residual_grad(args);
      };
      const double r1 = run(ref, g1);
      const double r2 = run(*k, g2);
      for (int j = 0; j < 5; ++j) EXPECT_TRUE(bits_equal(g1[j], g2[j])) << "gradient " << j << " n=" << n;
      EXPECT_NEAR(r1, r2, 1e-12 * std::max(1.0, std::abs(r1))) << "n=" << n;
    }
  }
}

TEST_F(SimdEquivalence, ResidualGradientTreatsZeroResidualAsZeroSlope) {
  for (const KernelTable* k : variants()) {
    const std::size_t n = 9;
    std::vector<double> oi(n, 0.5), s(n, 0.5), l(n, 0.25), m(n, 0.0), occ(n, 0.3);
    std::vector<double> view(n, 0.5);  // 0.5 * 0.5 + 0.25 exactly
    std::vector<double> g0(n, 0.0), g1(n, 0.0), g2(n, 0.0), g3(n, 0.0), g4(n, 7.0);
    ResidualArgs args{view.data(), oi.data(), s.data(), l.data(), m.data(), occ.data(), 1.0,
                      g0.data(), g1.data(), g2.data(), g3.data(), g4.data(), n};
    EXPECT_EQ(k->residual_grad(args), 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      EXPECT_EQ(g0[i], 0.0);
      EXPECT_EQ(g3[i], 0.0);
      EXPECT_EQ(g4[i], 0.0);
    }
  }
}

TEST_F(SimdEquivalence, AdamUpdateIsBitExact) {
  for (const KernelTable* k : variants()) {
    for (std::size_t n : kLengths) {
      auto th1 = oracle::random_vector(30 + n, n, -3.0, 3.0);
      auto g = oracle::random_vector(31 + n, n, -1.0, 1.0);
      auto m1 = oracle::random_vector(32 + n, n, -0.1, 0.1);
      auto v1 = oracle::random_vector(33 + n, n, 0.0, 0.1);
      auto th2 = th1, m2 = m1, v2 = v1;
      AdamCoefs c{0.02, 0.9, 0.999, 1.0 - std::pow(0.9, 3), 1.0 - std::pow(0.999, 3), 1e-8};
      ref.adam_update(th1.data(), g.data(), m1.data(), v1.data(), n, c);
      k->adam_update(th2.data(), g.data(), m2.data(), v2.data(), n, c);
      EXPECT_TRUE(bits_equal(th1, th2)) << "n=" << n;
      EXPECT_TRUE(bits_equal(m1, m2)) << "n=" << n;
      EXPECT_TRUE(bits_equal(v1, v2)) << "n=" << n;
    }
  }
}

TEST_F(SimdEquivalence, ReductionsAgreeToRoundoff) {
  for (const KernelTable* k : variants()) {
    for (std::size_t n : kLengths) {
      const auto a = oracle::random_vector(40 + n, n, -1.0, 1.0);
      const auto b = oracle::random_vector(41 + n, n, -1.0, 1.0);
      const double tol = 1e-12 * std::max<double>(1.0, double(n));
      EXPECT_NEAR(ref.sum(a.data(), n), k->sum(a.data(), n), tol);
      EXPECT_NEAR(ref.sum_abs_diff(a.data(), b.data(), n), k->sum_abs_diff(a.data(), b.data(), n), tol);
      EXPECT_NEAR(ref.sum_sq_diff(a.data(), b.data(), n), k->sum_sq_diff(a.data(), b.data(), n), tol);
    }
  }
}

TEST_F(SimdEquivalence, SsimSumAgreesToRoundoff) {
  for (const KernelTable* k : variants()) {
    for (std::size_t n : kLengths) {
      const auto mu1 = oracle::random_vector(50 + n, n, 0.0, 1.0);
      const auto mu2 = oracle::random_vector(51 + n, n, 0.0, 1.0);
      std::vector<double> e11(n), e22(n), e12(n);
      const auto v = oracle::random_vector(52 + n, n, 0.0, 0.05);
      for (std::size_t i = 0; i < n; ++i) {
        e11[i] = mu1[i] * mu1[i] + v[i];
        e22[i] = mu2[i] * mu2[i] + v[i];
        e12[i] = mu1[i] * mu2[i] + 0.5 * v[i];
      }
      const double a = ref.ssim_sum(mu1.data(), mu2.data(), e11.data(), e22.data(), e12.data(), n,
                                    1e-4, 9e-4);
      const double b = k->ssim_sum(mu1.data(), mu2.data(), e11.data(), e22.data(), e12.data(), n,
                                   1e-4, 9e-4);
      EXPECT_NEAR(a, b, 1e-12 * std::max<double>(1.0, double(n))) << "n=" << n;
    }
  }
}

TEST_F(SimdEquivalence, SigmoidAgreesToFewUlp) {
  for (const KernelTable* k : variants()) {
    std::vector<double> theta = oracle::random_vector(60, 4096, -40.0, 40.0);
    for (double extreme : {-1e6, -800.0, -708.0, -37.0, 0.0, 1e-300, 37.0, 708.0, 800.0, 1e6}) {
      theta.push_back(extreme);
    }
    std::vector<double> a(theta.size()), b(theta.size());
    ref.sigmoid(theta.data(), a.data(), theta.size());
    k->sigmoid(theta.data(), b.data(), theta.size());
    for (std::size_t i = 0; i < theta.size(); ++i) {
      EXPECT_NEAR(a[i], b[i], 4e-16 + 1e-14 * a[i]) << "theta=" << theta[i];
      EXPECT_GT(b[i], 0.0);
      EXPECT_LE(b[i], 1.0);
    }
  }
}
