#include <algorithm>
#include <cmath>
#include <csetjmp>
#include <cstdio>
#include <memory>
#include <string>
#include <vector>

#include <png.h>

#include "nucleikit/io.hpp"

namespace nucleikit {

namespace {

struct FileCloser {
  void operator()(std::FILE* f) const { std::fclose(f); }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

FilePtr open_file(const fs::path& path, const char* mode) {
  FilePtr f(std::fopen(path.c_str(), mode));
  if (!f) throw Error(ErrorCode::io, "cannot open " + path.string());
  return f;
}

// libpng reports errors by longjmp; the message is parked here and rethrown
// as an Error once control is back in C++.
struct PngErrorSlot {
  std::jmp_buf jump;
  char message[256] = {};
};

void on_png_error(png_structp png, png_const_charp msg) {
  auto* slot = static_cast<PngErrorSlot*>(png_get_error_ptr(png));
  std::snprintf(slot->message, sizeof(slot->message), "%s", msg);
  std::longjmp(slot->jump, 1);
}

void on_png_warning(png_structp, png_const_charp) {}

struct RawGray {
  int width = 0;
  int height = 0;
  int bit_depth = 8;
  std::vector<std::uint16_t> samples;
};

// Reads a single-channel PNG (bit depths 1..16, expanded to 8 or 16).
void read_raw_gray(const fs::path& path, RawGray& out, bool header_only) {
  FilePtr file = open_file(path, "rb");
  auto slot = std::make_unique<PngErrorSlot>();
  png_structp png =
      png_create_read_struct(PNG_LIBPNG_VER_STRING, slot.get(), on_png_error, on_png_warning);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw Error(ErrorCode::io, "cannot initialise PNG reader");
  }
  auto buffer = std::make_unique<std::vector<png_byte>>();
  if (setjmp(slot->jump)) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw Error(ErrorCode::parse, path.string() + ": " + slot->message);
  }
  png_init_io(png, file.get());
  png_read_info(png, info);
  const auto color_type = png_get_color_type(png, info);
  const int depth = png_get_bit_depth(png, info);
  out.width = static_cast<int>(png_get_image_width(png, info));
  out.height = static_cast<int>(png_get_image_height(png, info));
  out.bit_depth = depth == 16 ? 16 : 8;
  if (color_type != PNG_COLOR_TYPE_GRAY) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw Error(ErrorCode::parse, path.string() + ": expected a single-channel gray PNG");
  }
  if (header_only) {
    png_destroy_read_struct(&png, &info, nullptr);
    return;
  }
  if (depth < 8) png_set_expand_gray_1_2_4_to_8(png);
  if (depth == 16) png_set_swap(png);  // host order (little-endian) samples
  png_read_update_info(png, info);
  const std::size_t row_bytes = png_get_rowbytes(png, info);
  buffer->resize(row_bytes * static_cast<std::size_t>(out.height));
  for (int y = 0; y < out.height; ++y) {
    png_read_row(png, buffer->data() + row_bytes * static_cast<std::size_t>(y), nullptr);
  }
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);

  const std::size_t n = static_cast<std::size_t>(out.width) * static_cast<std::size_t>(out.height);
  out.samples.resize(n);
  if (out.bit_depth == 16) {
    for (std::size_t i = 0; i < n; ++i) {
      out.samples[i] = static_cast<std::uint16_t>((*buffer)[2 * i] | ((*buffer)[2 * i + 1] << 8));
    }
  } else {
    for (std::size_t i = 0; i < n; ++i) out.samples[i] = (*buffer)[i];
  }
}

void write_raw_gray(const fs::path& path, int width, int height, int bit_depth,
                    const std::vector<png_byte>& rows) {
  FilePtr file = open_file(path, "wb");
  auto slot = std::make_unique<PngErrorSlot>();
  png_structp png =
      png_create_write_struct(PNG_LIBPNG_VER_STRING, slot.get(), on_png_error, on_png_warning);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_write_struct(&png, &info);
    throw Error(ErrorCode::io, "cannot initialise PNG writer");
  }
  if (setjmp(slot->jump)) {
    png_destroy_write_struct(&png, &info);
    throw Error(ErrorCode::io, path.string() + ": " + slot->message);
  }
  png_init_io(png, file.get());
  png_set_IHDR(png, info, static_cast<png_uint_32>(width), static_cast<png_uint_32>(height),
               bit_depth, PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  if (bit_depth == 16) png_set_swap(png);
  const std::size_t row_bytes = static_cast<std::size_t>(width) * (bit_depth == 16 ? 2 : 1);
  for (int y = 0; y < height; ++y) {
    png_write_row(png, rows.data() + row_bytes * static_cast<std::size_t>(y));
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

}  // namespace

void write_label_mask(const fs::path& path, const LabelMask& mask) {
  const Dims d = mask.dims();
  if (d.width <= 0 || d.height <= 0) throw Error(ErrorCode::invalid_argument, "empty label mask");
  if ((mask.codes >= kLabelClassCount).any()) {
    throw Error(ErrorCode::invariant, "label mask holds codes outside 0..3");
  }
  std::vector<png_byte> rows(mask.codes.data(), mask.codes.data() + mask.codes.size());
  write_raw_gray(path, d.width, d.height, 8, rows);
}

LabelMask read_label_mask(const fs::path& path) {
  RawGray raw;
  read_raw_gray(path, raw, false);
  if (raw.bit_depth != 8) throw Error(ErrorCode::parse, path.string() + ": label mask must be 8-bit");
  LabelMask mask{Plane<std::uint8_t>(raw.height, raw.width)};
  for (std::size_t i = 0; i < raw.samples.size(); ++i) {
    if (raw.samples[i] >= kLabelClassCount) {
      throw Error(ErrorCode::invariant, path.string() + ": code outside 0..3");
    }
    mask.codes.data()[i] = static_cast<std::uint8_t>(raw.samples[i]);
  }
  return mask;
}

GrayPng read_gray_png(const fs::path& path) {
  RawGray raw;
  read_raw_gray(path, raw, false);
  const double full = raw.bit_depth == 16 ? 65535.0 : 255.0;
  GrayPng out{Plane<double>(raw.height, raw.width), raw.bit_depth};
  for (std::size_t i = 0; i < raw.samples.size(); ++i) out.values.data()[i] = raw.samples[i] / full;
  return out;
}

void write_gray_png(const fs::path& path, const Plane<double>& values, int bit_depth) {
  if (bit_depth != 8 && bit_depth != 16) {
    throw Error(ErrorCode::invalid_argument, "PNG bit depth must be 8 or 16");
  }
  if (values.size() == 0) throw Error(ErrorCode::invalid_argument, "empty image");
  const double full = bit_depth == 16 ? 65535.0 : 255.0;
  const std::size_t n = static_cast<std::size_t>(values.size());
  std::vector<png_byte> rows(n * (bit_depth == 16 ? 2 : 1));
  for (std::size_t i = 0; i < n; ++i) {
    const double v = std::clamp(values.data()[i], 0.0, 1.0);
    const auto q = static_cast<std::uint16_t>(std::lround(v * full));
    if (bit_depth == 16) {
      rows[2 * i] = static_cast<png_byte>(q & 0xff);
      rows[2 * i + 1] = static_cast<png_byte>(q >> 8);
    } else {
      rows[i] = static_cast<png_byte>(q);
    }
  }
  write_raw_gray(path, static_cast<int>(values.cols()), static_cast<int>(values.rows()), bit_depth,
                 rows);
}

Dims png_dims(const fs::path& path) {
  RawGray raw;
  read_raw_gray(path, raw, true);
  return {raw.width, raw.height};
}

}  // namespace nucleikit
