#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

namespace decomposer {

// H x W x C raster of doubles. Storage is channel-planar: plane c occupies
// data[c*H*W, (c+1)*H*W) and each plane is row-major. Public constructors
// clamp into [0, 1]; `unclamped` keeps raw values for intermediate
// arithmetic (e.g. an SL composition before export).
class Image {
 public:
  Image() = default;
  Image(int height, int width, int channels, double fill = 0.0);

  static Image from_values(int height, int width, int channels, std::vector<double> planar);
  static Image unclamped(int height, int width, int channels, std::vector<double> planar);

  int height() const { return height_; }
  int width() const { return width_; }
  int channels() const { return channels_; }
  std::size_t pixels() const { return static_cast<std::size_t>(height_) * width_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  std::span<const double> data() const { return data_; }
  std::span<double> data() { return data_; }
  std::span<const double> plane(int c) const { return {data_.data() + c * pixels(), pixels()}; }
  std::span<double> plane(int c) { return {data_.data() + c * pixels(), pixels()}; }

  double at(int y, int x, int c = 0) const { return data_[index(y, x, c)]; }
  double& at(int y, int x, int c = 0) { return data_[index(y, x, c)]; }

  bool same_shape(const Image& other) const {
    return height_ == other.height_ && width_ == other.width_ && channels_ == other.channels_;
  }

  bool operator==(const Image&) const = default;

 private:
  std::size_t index(int y, int x, int c) const {
    return static_cast<std::size_t>(c) * pixels() + static_cast<std::size_t>(y) * width_ + x;
  }

  int height_ = 0;
  int width_ = 0;
  int channels_ = 0;
  std::vector<double> data_;
};

// Single-channel H x W raster in [0, 1].
class ScalarMask {
 public:
  ScalarMask() = default;
  ScalarMask(int height, int width, double fill = 0.0);

  static ScalarMask from_values(int height, int width, std::vector<double> values);
  static ScalarMask unclamped(int height, int width, std::vector<double> values);

  int height() const { return height_; }
  int width() const { return width_; }
  std::size_t pixels() const { return data_.size(); }

  std::span<const double> data() const { return data_; }
  std::span<double> data() { return data_; }

  double at(int y, int x) const { return data_[static_cast<std::size_t>(y) * width_ + x]; }
  double& at(int y, int x) { return data_[static_cast<std::size_t>(y) * width_ + x]; }

  template <typename Raster>
  bool same_extent(const Raster& other) const {
    return height_ == other.height() && width_ == other.width();
  }

  bool operator==(const ScalarMask&) const = default;

 private:
  int height_ = 0;
  int width_ = 0;
  std::vector<double> data_;
};

// H x W raster of exact 0/1 values.
class BinaryMask {
 public:
  BinaryMask() = default;
  BinaryMask(int height, int width, std::uint8_t fill = 0);

  // Throws ArgumentError if any value is not 0 or 1.
  static BinaryMask from_values(int height, int width, std::vector<std::uint8_t> values);

  int height() const { return height_; }
  int width() const { return width_; }
  std::size_t pixels() const { return data_.size(); }

  std::span<const std::uint8_t> data() const { return data_; }

  std::uint8_t at(int y, int x) const { return data_[static_cast<std::size_t>(y) * width_ + x]; }
  void set(int y, int x, bool on) { data_[static_cast<std::size_t>(y) * width_ + x] = on ? 1 : 0; }
  void set(std::size_t i, bool on) { data_[i] = on ? 1 : 0; }

  std::size_t count() const;
  double coverage() const { return data_.empty() ? 0.0 : double(count()) / double(data_.size()); }

  template <typename Raster>
  bool same_extent(const Raster& other) const {
    return height_ == other.height() && width_ == other.width();
  }

  bool operator==(const BinaryMask&) const = default;

 private:
  int height_ = 0;
  int width_ = 0;
  std::vector<std::uint8_t> data_;
};

// Shape validation shared by every module; `what` names the operation in the message.
void require_same_shape(const Image& a, const Image& b, std::string_view what);

template <typename A, typename B>
void require_same_extent(const A& a, const B& b, std::string_view what);

// Conversions between raster kinds (no value changes beyond the 0/1 mapping).
Image to_image(const ScalarMask& mask);
ScalarMask to_scalar(const BinaryMask& mask);
ScalarMask plane_as_mask(const Image& img, int channel);

}  // namespace decomposer

#include "decomposer/imgcore/image_inl.hpp"
