#pragma once

#include <filesystem>

#include "decomposer/imgcore/image.hpp"

namespace decomposer {

// 8-bit grayscale or RGB PNG -> Image with byte v mapped to v / 255.
// Alpha channels, palettes and bit depths other than 8 raise FormatError;
// a missing file raises IoError.
Image read_png(const std::filesystem::path& path);

// Value x is stored as round(255 * clamp(x)). Output bytes depend only on
// the pixel values (no timestamps or text chunks).
void write_png(const std::filesystem::path& path, const Image& img);
void write_png(const std::filesystem::path& path, const ScalarMask& mask);
void write_png(const std::filesystem::path& path, const BinaryMask& mask);

// Grayscale-only readers for mask files. Binary masks map bytes >= 128 to 1.
ScalarMask read_scalar_mask_png(const std::filesystem::path& path);
BinaryMask read_binary_mask_png(const std::filesystem::path& path);

}  // namespace decomposer
