#include "decomposer/imgcore/image.hpp"

#include <algorithm>
#include <string>

#include "decomposer/errors.hpp"

namespace decomposer {
namespace {

void check_extent(int height, int width, std::string_view what) {
  if (height <= 0 || width <= 0) {
    throw ArgumentError(std::string(what) + ": height and width must be positive");
  }
}

void check_channels(int channels) {
  if (channels != 1 && channels != 3) {
    throw ArgumentError("Image: channels must be 1 or 3, got " + std::to_string(channels));
  }
}

void check_length(std::size_t got, std::size_t want, std::string_view what) {
  if (got != want) {
    throw DimensionError(std::string(what) + ": buffer length " + std::to_string(got) +
                         " != " + std::to_string(want));
  }
}

double clamp_unit(double v) { return std::min(1.0, std::max(0.0, v)); }

}  // namespace

Image::Image(int height, int width, int channels, double fill)
    : height_(height), width_(width), channels_(channels) {
  check_extent(height, width, "Image");
  check_channels(channels);
  data_.assign(static_cast<std::size_t>(height) * width * channels, clamp_unit(fill));
}

Image Image::unclamped(int height, int width, int channels, std::vector<double> planar) {
  check_extent(height, width, "Image");
  check_channels(channels);
  check_length(planar.size(), static_cast<std::size_t>(height) * width * channels, "Image");
  Image img;
  img.height_ = height;
  img.width_ = width;
  img.channels_ = channels;
  img.data_ = std::move(planar);
  return img;
}

Image Image::from_values(int height, int width, int channels, std::vector<double> planar) {
  Image img = unclamped(height, width, channels, std::move(planar));
  for (double& v : img.data_) v = clamp_unit(v);
  return img;
}

ScalarMask::ScalarMask(int height, int width, double fill) : height_(height), width_(width) {
  check_extent(height, width, "ScalarMask");
  data_.assign(static_cast<std::size_t>(height) * width, clamp_unit(fill));
}

ScalarMask ScalarMask::unclamped(int height, int width, std::vector<double> values) {
  check_extent(height, width, "ScalarMask");
  check_length(values.size(), static_cast<std::size_t>(height) * width, "ScalarMask");
  ScalarMask mask;
  mask.height_ = height;
  mask.width_ = width;
  mask.data_ = std::move(values);
  return mask;
}

ScalarMask ScalarMask::from_values(int height, int width, std::vector<double> values) {
  ScalarMask mask = unclamped(height, width, std::move(values));
  for (double& v : mask.data_) v = clamp_unit(v);
  return mask;
}

BinaryMask::BinaryMask(int height, int width, std::uint8_t fill) : height_(height), width_(width) {
  check_extent(height, width, "BinaryMask");
  if (fill > 1) throw ArgumentError("BinaryMask: fill must be 0 or 1");
  data_.assign(static_cast<std::size_t>(height) * width, fill);
}

BinaryMask BinaryMask::from_values(int height, int width, std::vector<std::uint8_t> values) {
  check_extent(height, width, "BinaryMask");
  check_length(values.size(), static_cast<std::size_t>(height) * width, "BinaryMask");
  if (std::any_of(values.begin(), values.end(), [](std::uint8_t v) { return v > 1; })) {
    throw ArgumentError("BinaryMask: values must be exactly 0 or 1");
  }
  BinaryMask mask;
  mask.height_ = height;
  mask.width_ = width;
  mask.data_ = std::move(values);
  return mask;
}

std::size_t BinaryMask::count() const {
  return static_cast<std::size_t>(std::count(data_.begin(), data_.end(), std::uint8_t{1}));
}

void require_same_shape(const Image& a, const Image& b, std::string_view what) {
  if (!a.same_shape(b)) {
    throw DimensionError(std::string(what) + ": shape mismatch (" + std::to_string(a.height()) +
                         "x" + std::to_string(a.width()) + "x" + std::to_string(a.channels()) +
                         " vs " + std::to_string(b.height()) + "x" + std::to_string(b.width()) +
                         "x" + std::to_string(b.channels()) + ")");
  }
}

Image to_image(const ScalarMask& mask) {
  auto values = std::vector<double>(mask.data().begin(), mask.data().end());
  return Image::unclamped(mask.height(), mask.width(), 1, std::move(values));
}

ScalarMask to_scalar(const BinaryMask& mask) {
  std::vector<double> values(mask.pixels());
  std::transform(mask.data().begin(), mask.data().end(), values.begin(),
                 [](std::uint8_t v) { return double(v); });
  return ScalarMask::unclamped(mask.height(), mask.width(), std::move(values));
}

ScalarMask plane_as_mask(const Image& img, int channel) {
  if (channel < 0 || channel >= img.channels()) throw ArgumentError("plane_as_mask: bad channel");
  auto p = img.plane(channel);
  return ScalarMask::unclamped(img.height(), img.width(), std::vector<double>(p.begin(), p.end()));
}

}  // namespace decomposer
