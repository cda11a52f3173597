#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "nucleikit/types.hpp"

namespace nucleikit {

namespace fs = std::filesystem;

// ---------------------------------------------------------------------------
// Annotation CSV: header `id,x_px,y_px`, one point per row.

AnnotationSet read_annotations(const fs::path& path, ResolutionSpec resolution, Dims image_dims);
AnnotationSet parse_annotations(std::string_view text, ResolutionSpec resolution, Dims image_dims);
void write_annotations(const fs::path& path, const AnnotationSet& annotations);

// Number of data rows in an annotation CSV. Rows are parsed but not
// bounds-checked, so this works without knowing the image size.
std::size_t count_annotations(const fs::path& path);

// ---------------------------------------------------------------------------
// Detection CSV: header `x_px,y_px,score`. Values are written with the
// shortest representation that round-trips exactly.

void write_detections(const fs::path& path, const DetectionSet& detections);
DetectionSet read_detections(const fs::path& path, ResolutionSpec resolution);
std::string format_detections(const DetectionSet& detections);
DetectionSet parse_detections(std::string_view text, ResolutionSpec resolution);

// ---------------------------------------------------------------------------
// PMAP container, little-endian:
//   "PMAP" | u16 version=1 | u8 dtype=1 (float32) | u8 channels (1 or 4)
//   | u32 height | u32 width | channels*height*width float32, planar, row-major

inline constexpr std::uint16_t kPmapVersion = 1;
inline constexpr std::uint8_t kPmapDtypeFloat32 = 1;
inline constexpr std::size_t kPmapHeaderSize = 16;

std::string encode_pmap(std::span<const Plane<float>> channels);
std::vector<Plane<float>> decode_pmap(std::string_view bytes);

void write_pmap(const PosteriorMap& map, const fs::path& path);
void write_pmap(const WeightMap& map, const fs::path& path);
std::vector<Plane<float>> read_pmap(const fs::path& path);
PosteriorMap read_posterior_map(const fs::path& path);
WeightMap read_weight_map(const fs::path& path);
Dims pmap_dims(const fs::path& path);

// ---------------------------------------------------------------------------
// PNG: label masks are 8-bit gray with codes stored verbatim; intensity
// images are 8- or 16-bit gray scaled to [0, 1] on read.

void write_label_mask(const fs::path& path, const LabelMask& mask);
LabelMask read_label_mask(const fs::path& path);

struct GrayPng {
  Plane<double> values;  // in [0, 1]
  int bit_depth = 8;
};

GrayPng read_gray_png(const fs::path& path);
// Values are clamped to [0, 1] and scaled to the full integer range.
void write_gray_png(const fs::path& path, const Plane<double>& values, int bit_depth);
Dims png_dims(const fs::path& path);

// Dimensions of a PNG or PMAP image, chosen by extension.
Dims image_dims(const fs::path& path);

// ---------------------------------------------------------------------------

std::string read_file(const fs::path& path);
void write_file(const fs::path& path, std::string_view contents);

}  // namespace nucleikit
