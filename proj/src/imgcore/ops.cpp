#include "decomposer/imgcore/ops.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "decomposer/errors.hpp"
#include "decomposer/simd/kernels.hpp"

namespace decomposer {
namespace {

double clamp_unit(double v) { return std::min(1.0, std::max(0.0, v)); }

double quantize_unit(double v) { return double(std::lround(clamp_unit(v) * 255.0)) / 255.0; }

template <typename F>
Image map_values(const Image& img, F f) {
  std::vector<double> out(img.size());
  std::transform(img.data().begin(), img.data().end(), out.begin(), f);
  return Image::unclamped(img.height(), img.width(), img.channels(), std::move(out));
}

template <typename F>
Image zip_values(const Image& a, const Image& b, std::string_view what, F f) {
  require_same_shape(a, b, what);
  std::vector<double> out(a.size());
  std::transform(a.data().begin(), a.data().end(), b.data().begin(), out.begin(), f);
  return Image::unclamped(a.height(), a.width(), a.channels(), std::move(out));
}

// Blur one row-major plane in place of `dst` using `scratch` for the pass
// in between. Both passes are sums of shifted rows scaled by a tap, so each
// is a sequence of axpy calls.
void blur_plane(const double* src, double* dst, int height, int width,
                const std::vector<double>& taps, std::vector<double>& tmp,
                std::vector<double>& padded) {
  const auto& k = simd::kernels();
  const int radius = static_cast<int>(taps.size() / 2);
  const std::size_t w = static_cast<std::size_t>(width);

  padded.resize(w + 2 * static_cast<std::size_t>(radius));
  tmp.assign(static_cast<std::size_t>(height) * w, 0.0);
  for (int y = 0; y < height; ++y) {
    const double* row = src + static_cast<std::size_t>(y) * w;
    for (int x = -radius; x < width + radius; ++x) padded[x + radius] = row[reflect101(x, width)];
    double* out = tmp.data() + static_cast<std::size_t>(y) * w;
    for (std::size_t t = 0; t < taps.size(); ++t) k.axpy(out, padded.data() + t, taps[t], w);
  }

  std::fill(dst, dst + static_cast<std::size_t>(height) * w, 0.0);
  for (int y = 0; y < height; ++y) {
    double* out = dst + static_cast<std::size_t>(y) * w;
    for (std::size_t t = 0; t < taps.size(); ++t) {
      const int sy = reflect101(y + static_cast<int>(t) - radius, height);
      k.axpy(out, tmp.data() + static_cast<std::size_t>(sy) * w, taps[t], w);
    }
  }
}

void check_crop(int h, int w, int y0, int x0, int height, int width) {
  if (height <= 0 || width <= 0 || y0 < 0 || x0 < 0 || y0 + height > h || x0 + width > w) {
    throw DimensionError("crop: window outside raster");
  }
}

}  // namespace

Image clamp01(const Image& img) { return map_values(img, clamp_unit); }

ScalarMask clamp01(const ScalarMask& mask) {
  return ScalarMask::from_values(mask.height(), mask.width(),
                                 std::vector<double>(mask.data().begin(), mask.data().end()));
}

Image invert(const Image& img) {
  return map_values(img, [](double v) { return 1.0 - v; });
}

Image subtract_clip(const Image& a, const Image& b) {
  return zip_values(a, b, "subtract_clip", [](double x, double y) { return std::max(x - y, 0.0); });
}

Image abs_diff(const Image& a, const Image& b) {
  return zip_values(a, b, "abs_diff", [](double x, double y) { return std::abs(x - y); });
}

int reflect101(int i, int n) {
  if (n == 1) return 0;
  const int period = 2 * (n - 1);
  i %= period;
  if (i < 0) i += period;
  return i < n ? i : period - i;
}

std::vector<double> gaussian_kernel(double sigma) {
  if (!(sigma > 0.0) || !std::isfinite(sigma)) {
    throw ArgumentError("gaussian_blur: sigma must be positive, got " + std::to_string(sigma));
  }
  const int radius = static_cast<int>(std::ceil(3.0 * sigma));
  std::vector<double> taps(2 * static_cast<std::size_t>(radius) + 1);
  double total = 0.0;
  for (int i = -radius; i <= radius; ++i) {
    const double v = std::exp(-double(i) * double(i) / (2.0 * sigma * sigma));
    taps[i + radius] = v;
    total += v;
  }
  for (double& t : taps) t /= total;
  return taps;
}

Image gaussian_blur(const Image& img, double sigma) {
  const auto taps = gaussian_kernel(sigma);
  std::vector<double> out(img.size());
  std::vector<double> tmp;
  std::vector<double> padded;
  for (int c = 0; c < img.channels(); ++c) {
    blur_plane(img.plane(c).data(), out.data() + c * img.pixels(), img.height(), img.width(), taps,
               tmp, padded);
  }
  return Image::unclamped(img.height(), img.width(), img.channels(), std::move(out));
}

ScalarMask gaussian_blur(const ScalarMask& mask, double sigma) {
  const auto taps = gaussian_kernel(sigma);
  std::vector<double> out(mask.pixels());
  std::vector<double> tmp;
  std::vector<double> padded;
  blur_plane(mask.data().data(), out.data(), mask.height(), mask.width(), taps, tmp, padded);
  return ScalarMask::unclamped(mask.height(), mask.width(), std::move(out));
}

BinaryMask threshold(const ScalarMask& mask, double tau) {
  if (!(tau > 0.0 && tau < 1.0)) {
    throw ArgumentError("threshold: tau must lie in (0, 1), got " + std::to_string(tau));
  }
  std::vector<std::uint8_t> out(mask.pixels());
  std::transform(mask.data().begin(), mask.data().end(), out.begin(),
                 [tau](double v) { return std::uint8_t(v > tau ? 1 : 0); });
  return BinaryMask::from_values(mask.height(), mask.width(), std::move(out));
}

BinaryMask threshold(const Image& img, double tau) { return threshold(to_gray(img), tau); }

ScalarMask to_gray(const Image& img) {
  if (img.channels() == 1) {
    return ScalarMask::from_values(img.height(), img.width(),
                                   std::vector<double>(img.data().begin(), img.data().end()));
  }
  if (img.channels() != 3) {
    throw ArgumentError("to_gray: unsupported channel count " + std::to_string(img.channels()));
  }
  const auto r = img.plane(0);
  const auto g = img.plane(1);
  const auto b = img.plane(2);
  std::vector<double> out(img.pixels());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = 0.2126 * r[i] + 0.7152 * g[i] + 0.0722 * b[i];
  }
  return ScalarMask::from_values(img.height(), img.width(), std::move(out));
}

Image crop(const Image& img, int y0, int x0, int height, int width) {
  check_crop(img.height(), img.width(), y0, x0, height, width);
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(height) * width * img.channels());
  for (int c = 0; c < img.channels(); ++c)
    for (int y = y0; y < y0 + height; ++y)
      for (int x = x0; x < x0 + width; ++x) out.push_back(img.at(y, x, c));
  return Image::unclamped(height, width, img.channels(), std::move(out));
}

ScalarMask crop(const ScalarMask& mask, int y0, int x0, int height, int width) {
  check_crop(mask.height(), mask.width(), y0, x0, height, width);
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(height) * width);
  for (int y = y0; y < y0 + height; ++y)
    for (int x = x0; x < x0 + width; ++x) out.push_back(mask.at(y, x));
  return ScalarMask::unclamped(height, width, std::move(out));
}

BinaryMask crop(const BinaryMask& mask, int y0, int x0, int height, int width) {
  check_crop(mask.height(), mask.width(), y0, x0, height, width);
  std::vector<std::uint8_t> out;
  out.reserve(static_cast<std::size_t>(height) * width);
  for (int y = y0; y < y0 + height; ++y)
    for (int x = x0; x < x0 + width; ++x) out.push_back(mask.at(y, x));
  return BinaryMask::from_values(height, width, std::move(out));
}

Image quantize8(const Image& img) { return map_values(img, quantize_unit); }

ScalarMask quantize8(const ScalarMask& mask) {
  std::vector<double> out(mask.pixels());
  std::transform(mask.data().begin(), mask.data().end(), out.begin(), quantize_unit);
  return ScalarMask::unclamped(mask.height(), mask.width(), std::move(out));
}

}  // namespace decomposer
