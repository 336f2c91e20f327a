#include "decomposer/imgcore/png_io.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <csetjmp>
#include <cstdio>
#include <memory>
#include <string>
#include <vector>

#include "decomposer/errors.hpp"

namespace decomposer {
namespace {

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f != nullptr) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

FilePtr open_file(const std::filesystem::path& path, const char* mode) {
  FilePtr f(std::fopen(path.c_str(), mode));
  if (!f) throw IoError("cannot open '" + path.string() + "'");
  return f;
}

struct Raw8 {
  int height = 0;
  int width = 0;
  int channels = 0;
  std::vector<std::uint8_t> interleaved;
};

void on_png_error(png_structp png, png_const_charp msg) {
  auto* buf = static_cast<std::string*>(png_get_error_ptr(png));
  if (buf != nullptr) *buf = msg;
  png_longjmp(png, 1);
}

void on_png_warning(png_structp, png_const_charp) {}

Raw8 read_raw(const std::filesystem::path& path) {
  FilePtr file = open_file(path, "rb");
  png_byte sig[8];
  if (std::fread(sig, 1, 8, file.get()) != 8 || png_sig_cmp(sig, 0, 8) != 0) {
    throw FormatError("'" + path.string() + "' is not a PNG file");
  }

  std::string error;
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, &error, on_png_error,
                                           on_png_warning);
  if (png == nullptr) throw IoError("png_create_read_struct failed");
  png_infop info = png_create_info_struct(png);
  Raw8 raw;
  std::vector<png_bytep> rows;
  std::string rejection;

  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw FormatError("malformed PNG '" + path.string() + "': " + error);
  }
  png_init_io(png, file.get());
  png_set_sig_bytes(png, 8);
  png_read_info(png, info);

  png_uint_32 width = 0;
  png_uint_32 height = 0;
  int bit_depth = 0;
  int color_type = 0;
  png_get_IHDR(png, info, &width, &height, &bit_depth, &color_type, nullptr, nullptr, nullptr);

  if (bit_depth != 8) {
    rejection = "unsupported bit depth " + std::to_string(bit_depth);
  } else if (color_type == PNG_COLOR_TYPE_GRAY) {
    raw.channels = 1;
  } else if (color_type == PNG_COLOR_TYPE_RGB) {
    raw.channels = 3;
  } else if (color_type & PNG_COLOR_MASK_ALPHA) {
    rejection = "alpha channel not supported";
  } else {
    rejection = "unsupported color type " + std::to_string(color_type);
  }
  if (rejection.empty() && png_get_valid(png, info, PNG_INFO_tRNS)) {
    rejection = "transparency chunk not supported";
  }
  if (!rejection.empty()) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw FormatError("'" + path.string() + "': " + rejection);
  }

  raw.width = static_cast<int>(width);
  raw.height = static_cast<int>(height);
  raw.interleaved.resize(std::size_t(width) * height * raw.channels);
  rows.resize(height);
  for (png_uint_32 y = 0; y < height; ++y) {
    rows[y] = raw.interleaved.data() + std::size_t(y) * width * raw.channels;
  }
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  return raw;
}

void write_raw(const std::filesystem::path& path, const Raw8& raw) {
  FilePtr file = open_file(path, "wb");
  std::string error;
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, &error, on_png_error,
                                            on_png_warning);
  if (png == nullptr) throw IoError("png_create_write_struct failed");
  png_infop info = png_create_info_struct(png);
  std::vector<png_bytep> rows(raw.height);

  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw IoError("writing '" + path.string() + "' failed: " + error);
  }
  png_init_io(png, file.get());
  png_set_compression_level(png, 6);
  png_set_IHDR(png, info, raw.width, raw.height, 8,
               raw.channels == 3 ? PNG_COLOR_TYPE_RGB : PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  for (int y = 0; y < raw.height; ++y) {
    rows[y] = const_cast<png_bytep>(raw.interleaved.data() +
                                    std::size_t(y) * raw.width * raw.channels);
  }
  png_write_image(png, rows.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  if (std::fflush(file.get()) != 0) throw IoError("writing '" + path.string() + "' failed");
}

std::uint8_t to_byte(double v) {
  return static_cast<std::uint8_t>(std::lround(std::min(1.0, std::max(0.0, v)) * 255.0));
}

Raw8 gray_raw(const ScalarMask& mask) {
  Raw8 raw{mask.height(), mask.width(), 1, std::vector<std::uint8_t>(mask.pixels())};
  std::transform(mask.data().begin(), mask.data().end(), raw.interleaved.begin(), to_byte);
  return raw;
}

Raw8 read_gray(const std::filesystem::path& path) {
  Raw8 raw = read_raw(path);
  if (raw.channels != 1) throw FormatError("'" + path.string() + "': expected a grayscale mask");
  return raw;
}

}  // namespace

Image read_png(const std::filesystem::path& path) {
  const Raw8 raw = read_raw(path);
  const std::size_t px = std::size_t(raw.width) * raw.height;
  std::vector<double> planar(px * raw.channels);
  for (std::size_t i = 0; i < px; ++i) {
    for (int c = 0; c < raw.channels; ++c) {
      planar[c * px + i] = raw.interleaved[i * raw.channels + c] / 255.0;
    }
  }
  return Image::unclamped(raw.height, raw.width, raw.channels, std::move(planar));
}

void write_png(const std::filesystem::path& path, const Image& img) {
  Raw8 raw{img.height(), img.width(), img.channels(), std::vector<std::uint8_t>(img.size())};
  const std::size_t px = img.pixels();
  for (std::size_t i = 0; i < px; ++i) {
    for (int c = 0; c < img.channels(); ++c) {
      raw.interleaved[i * img.channels() + c] = to_byte(img.data()[c * px + i]);
    }
  }
  write_raw(path, raw);
}

void write_png(const std::filesystem::path& path, const ScalarMask& mask) {
  write_raw(path, gray_raw(mask));
}

void write_png(const std::filesystem::path& path, const BinaryMask& mask) {
  Raw8 raw{mask.height(), mask.width(), 1, std::vector<std::uint8_t>(mask.pixels())};
  std::transform(mask.data().begin(), mask.data().end(), raw.interleaved.begin(),
                 [](std::uint8_t v) { return std::uint8_t(v ? 255 : 0); });
  write_raw(path, raw);
}

ScalarMask read_scalar_mask_png(const std::filesystem::path& path) {
  const Raw8 raw = read_gray(path);
  std::vector<double> values(raw.interleaved.size());
  std::transform(raw.interleaved.begin(), raw.interleaved.end(), values.begin(),
                 [](std::uint8_t v) { return v / 255.0; });
  return ScalarMask::unclamped(raw.height, raw.width, std::move(values));
}

BinaryMask read_binary_mask_png(const std::filesystem::path& path) {
  const Raw8 raw = read_gray(path);
  std::vector<std::uint8_t> values(raw.interleaved.size());
  std::transform(raw.interleaved.begin(), raw.interleaved.end(), values.begin(),
                 [](std::uint8_t v) { return std::uint8_t(v >= 128 ? 1 : 0); });
  return BinaryMask::from_values(raw.height, raw.width, std::move(values));
}

}  // namespace decomposer
