#pragma once

#include "decomposer/imgcore/image.hpp"

namespace decomposer::eval {

// Fixed SSIM parameterization, reported alongside every result.
struct SsimParams {
  static constexpr int window = 11;
  static constexpr double sigma = 1.5;
  static constexpr double k1 = 0.01;
  static constexpr double k2 = 0.03;
  static constexpr double dynamic_range = 1.0;
};

// Mean over pixels and channels of (255 a - 255 b)^2.
double mse255(const Image& a, const Image& b);

// Mean local SSIM on luma over all fully contained 11x11 Gaussian windows.
// Throws DimensionError when either side is smaller than the window.
double ssim(const Image& a, const Image& b);

struct MetricPair {
  double mse = 0.0;
  double ssim = 0.0;
};

// Both images get zeros where `exclude` is 1 before scoring.
MetricPair masked_metrics(const Image& a, const Image& b, const BinaryMask& exclude);

// #(pred & !gt) / #(!gt); 0 when gt has no negatives.
double false_positive_rate(const BinaryMask& pred, const BinaryMask& gt);

// #(pred & gt) / #(pred | gt); 1 when both are empty.
double iou(const BinaryMask& pred, const BinaryMask& gt);

}  // namespace decomposer::eval
