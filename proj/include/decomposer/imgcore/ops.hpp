#pragma once

#include <vector>

#include "decomposer/imgcore/image.hpp"

namespace decomposer {

Image clamp01(const Image& img);
ScalarMask clamp01(const ScalarMask& mask);

// 1 - x per value.
Image invert(const Image& img);

// max(a - b, 0) per value.
Image subtract_clip(const Image& a, const Image& b);

// |a - b| per value.
Image abs_diff(const Image& a, const Image& b);

// Normalized Gaussian taps, radius ceil(3 sigma), length 2*radius + 1.
std::vector<double> gaussian_kernel(double sigma);

// Separable Gaussian blur with reflect-101 borders (dcb|abcdefgh|gfe).
// Throws ArgumentError for sigma <= 0.
Image gaussian_blur(const Image& img, double sigma);
ScalarMask gaussian_blur(const ScalarMask& mask, double sigma);

// Reflect-101 index into [0, n); handles offsets larger than n.
int reflect101(int i, int n);

// 1 where value > tau (strict), else 0. Three-channel input is reduced to
// luma first. Throws ArgumentError unless 0 < tau < 1.
BinaryMask threshold(const Image& img, double tau);
BinaryMask threshold(const ScalarMask& mask, double tau);

// BT.709 luma for three channels, identity copy for one.
ScalarMask to_gray(const Image& img);

Image crop(const Image& img, int y0, int x0, int height, int width);
ScalarMask crop(const ScalarMask& mask, int y0, int x0, int height, int width);
BinaryMask crop(const BinaryMask& mask, int y0, int x0, int height, int width);

// Round-trip through 8-bit storage: round(255 x) / 255 after clamping.
Image quantize8(const Image& img);
ScalarMask quantize8(const ScalarMask& mask);

}  // namespace decomposer
