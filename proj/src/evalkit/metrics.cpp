#include "decomposer/evalkit/metrics.hpp"

#include <string>
#include <vector>

#include "decomposer/errors.hpp"
#include "decomposer/imgcore/ops.hpp"
#include "decomposer/simd/kernels.hpp"

namespace decomposer::eval {
namespace {

// Gaussian-weighted sums over every fully contained window; output is
// (H - window + 1) x (W - window + 1), row-major.
std::vector<double> valid_filter(std::span<const double> in, int h, int w,
                                 const std::vector<double>& taps) {
  const auto& k = simd::kernels();
  const int n = static_cast<int>(taps.size());
  const int oh = h - n + 1;
  const int ow = w - n + 1;
  std::vector<double> horiz(static_cast<std::size_t>(h) * ow, 0.0);
  for (int y = 0; y < h; ++y) {
    double* dst = horiz.data() + static_cast<std::size_t>(y) * ow;
    const double* src = in.data() + static_cast<std::size_t>(y) * w;
    for (int t = 0; t < n; ++t) k.axpy(dst, src + t, taps[t], ow);
  }
  std::vector<double> out(static_cast<std::size_t>(oh) * ow, 0.0);
  for (int y = 0; y < oh; ++y) {
    double* dst = out.data() + static_cast<std::size_t>(y) * ow;
    for (int t = 0; t < n; ++t) {
      k.axpy(dst, horiz.data() + static_cast<std::size_t>(y + t) * ow, taps[t], ow);
    }
  }
  return out;
}

Image zero_excluded(const Image& img, const BinaryMask& exclude) {
  Image out = img;
  const auto e = exclude.data();
  for (int c = 0; c < out.channels(); ++c) {
    auto p = out.plane(c);
    for (std::size_t i = 0; i < p.size(); ++i) {
      if (e[i]) p[i] = 0.0;
    }
  }
  return out;
}

}  // namespace

double mse255(const Image& a, const Image& b) {
  require_same_shape(a, b, "mse255");
  if (a.empty()) throw DimensionError("mse255: empty image");
  const auto x = a.data();
  const auto y = b.data();
  double acc = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double d = 255.0 * x[i] - 255.0 * y[i];
    acc += d * d;
  }
  return acc / double(x.size());
}

double ssim(const Image& a, const Image& b) {
  require_same_shape(a, b, "ssim");
  constexpr int win = SsimParams::window;
  if (a.height() < win || a.width() < win) {
    throw DimensionError("ssim: image " + std::to_string(a.height()) + "x" +
                         std::to_string(a.width()) + " is smaller than the 11x11 window");
  }
  const int h = a.height();
  const int w = a.width();
  const ScalarMask la = to_gray(a);
  const ScalarMask lb = to_gray(b);
  const auto x = la.data();
  const auto y = lb.data();

  const auto taps = gaussian_kernel(SsimParams::sigma);
  const auto& k = simd::kernels();
  std::vector<double> xx(x.size());
  std::vector<double> yy(x.size());
  std::vector<double> xy(x.size());
  k.multiply(x.data(), x.data(), xx.data(), x.size());
  k.multiply(y.data(), y.data(), yy.data(), x.size());
  k.multiply(x.data(), y.data(), xy.data(), x.size());

  const auto mu1 = valid_filter(x, h, w, taps);
  const auto mu2 = valid_filter(y, h, w, taps);
  const auto e11 = valid_filter(xx, h, w, taps);
  const auto e22 = valid_filter(yy, h, w, taps);
  const auto e12 = valid_filter(xy, h, w, taps);

  const double c1 = (SsimParams::k1 * SsimParams::dynamic_range) *
                    (SsimParams::k1 * SsimParams::dynamic_range);
  const double c2 = (SsimParams::k2 * SsimParams::dynamic_range) *
                    (SsimParams::k2 * SsimParams::dynamic_range);
  const double total = k.ssim_sum(mu1.data(), mu2.data(), e11.data(), e22.data(), e12.data(),
                                   mu1.size(), c1, c2);
  return total / double(mu1.size());
}

MetricPair masked_metrics(const Image& a, const Image& b, const BinaryMask& exclude) {
  require_same_shape(a, b, "masked_metrics");
  require_same_extent(a, exclude, "masked_metrics");
  const Image ma = zero_excluded(a, exclude);
  const Image mb = zero_excluded(b, exclude);
  return {mse255(ma, mb), ssim(ma, mb)};
}

double false_positive_rate(const BinaryMask& pred, const BinaryMask& gt) {
  require_same_extent(pred, gt, "false_positive_rate");
  const auto p = pred.data();
  const auto g = gt.data();
  std::size_t negatives = 0;
  std::size_t false_pos = 0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (g[i]) continue;
    ++negatives;
    if (p[i]) ++false_pos;
  }
  return negatives == 0 ? 0.0 : double(false_pos) / double(negatives);
}

double iou(const BinaryMask& pred, const BinaryMask& gt) {
  require_same_extent(pred, gt, "iou");
  const auto p = pred.data();
  const auto g = gt.data();
  std::size_t inter = 0;
  std::size_t uni = 0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    inter += (p[i] & g[i]);
    uni += (p[i] | g[i]);
  }
  return uni == 0 ? 1.0 : double(inter) / double(uni);
}

}  // namespace decomposer::eval
