#include "nucleikit/io.hpp"

#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <set>
#include <sstream>
#include <unordered_set>

namespace nucleikit {

namespace {

static_assert(std::endian::native == std::endian::little,
              "PMAP encoding assumes a little-endian host");

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

// Splits text into lines (LF or CRLF), dropping a leading UTF-8 BOM.
std::vector<std::string_view> split_lines(std::string_view text) {
  if (text.starts_with("\xEF\xBB\xBF")) text.remove_prefix(3);
  std::vector<std::string_view> lines;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    lines.push_back(text.substr(0, nl));
    if (nl == std::string_view::npos) break;
    text.remove_prefix(nl + 1);
  }
  return lines;
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> fields;
  while (true) {
    const auto comma = line.find(',');
    fields.push_back(trim(line.substr(0, comma)));
    if (comma == std::string_view::npos) break;
    line.remove_prefix(comma + 1);
  }
  return fields;
}

template <typename T>
bool parse_number(std::string_view field, T& out) {
  if (field.starts_with('+')) field.remove_prefix(1);
  const auto* end = field.data() + field.size();
  const auto [ptr, ec] = std::from_chars(field.data(), end, out);
  return ec == std::errc{} && ptr == end && !field.empty();
}

Error row_error(std::size_t line, const std::string& what) {
  return Error(ErrorCode::parse, "line " + std::to_string(line) + ": " + what);
}

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

void check_header(const std::vector<std::string_view>& lines, std::string_view expected) {
  if (lines.empty() || trim(lines.front()) != expected) {
    throw row_error(1, "expected header '" + std::string(expected) + "'");
  }
}

std::vector<Annotation> parse_annotation_rows(std::string_view text,
                                              std::vector<std::size_t>* line_numbers) {
  const auto lines = split_lines(text);
  check_header(lines, "id,x_px,y_px");
  std::vector<Annotation> points;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (trim(lines[i]).empty()) continue;
    const auto fields = split_fields(lines[i]);
    Annotation a;
    double x = 0.0;
    double y = 0.0;
    if (fields.size() != 3 || !parse_number(fields[0], a.id) || !parse_number(fields[1], x) ||
        !parse_number(fields[2], y) || !std::isfinite(x) || !std::isfinite(y)) {
      throw row_error(i + 1, "unparseable annotation row '" + std::string(lines[i]) + "'");
    }
    a.position = Point(x, y);
    points.push_back(a);
    if (line_numbers) line_numbers->push_back(i + 1);
  }
  return points;
}

template <typename T>
void put_le(std::string& out, T value) {
  char bytes[sizeof(T)];
  std::memcpy(bytes, &value, sizeof(T));
  out.append(bytes, sizeof(T));
}

template <typename T>
T get_le(std::string_view bytes, std::size_t offset) {
  T value;
  std::memcpy(&value, bytes.data() + offset, sizeof(T));
  return value;
}

}  // namespace

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::io, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& path, std::string_view contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::io, "cannot write " + path.string());
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  if (!out) throw Error(ErrorCode::io, "write failed for " + path.string());
}

// ---------------------------------------------------------------------------

AnnotationSet parse_annotations(std::string_view text, ResolutionSpec resolution, Dims image_dims) {
  std::vector<std::size_t> line_of;
  auto points = parse_annotation_rows(text, &line_of);
  std::unordered_set<std::int64_t> ids;
  std::set<std::pair<double, double>> coords;
  for (std::size_t i = 0; i < points.size(); ++i) {
    const auto& p = points[i];
    const std::string where =
        "line " + std::to_string(line_of[i]) + ": annotation id " + std::to_string(p.id);
    if (!(p.position.x() >= 0.0 && p.position.x() < image_dims.width &&
          p.position.y() >= 0.0 && p.position.y() < image_dims.height)) {
      throw Error(ErrorCode::out_of_bounds, where + " lies outside the " +
                                                std::to_string(image_dims.width) + "x" +
                                                std::to_string(image_dims.height) + " image");
    }
    if (!ids.insert(p.id).second) throw Error(ErrorCode::duplicate, where + " repeats an id");
    if (!coords.emplace(p.position.x(), p.position.y()).second) {
      throw Error(ErrorCode::duplicate, where + " repeats the coordinates of an earlier point");
    }
  }
  return AnnotationSet(std::move(points), resolution, image_dims);
}

AnnotationSet read_annotations(const fs::path& path, ResolutionSpec resolution, Dims image_dims) {
  try {
    return parse_annotations(read_file(path), resolution, image_dims);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::io) throw;
    throw Error(e.code(), path.string() + ": " + e.what());
  }
}

std::size_t count_annotations(const fs::path& path) {
  try {
    return parse_annotation_rows(read_file(path), nullptr).size();
  } catch (const Error& e) {
    if (e.code() == ErrorCode::io) throw;
    throw Error(e.code(), path.string() + ": " + e.what());
  }
}

void write_annotations(const fs::path& path, const AnnotationSet& annotations) {
  std::string out = "id,x_px,y_px\n";
  for (const auto& p : annotations.points()) {
    out += std::to_string(p.id) + ',' + format_double(p.position.x()) + ',' +
           format_double(p.position.y()) + '\n';
  }
  write_file(path, out);
}

// ---------------------------------------------------------------------------

std::string format_detections(const DetectionSet& detections) {
  std::string out = "x_px,y_px,score\n";
  for (const auto& d : detections.detections) {
    out += format_double(d.position.x()) + ',' + format_double(d.position.y()) + ',' +
           format_double(d.score) + '\n';
  }
  return out;
}

DetectionSet parse_detections(std::string_view text, ResolutionSpec resolution) {
  const auto lines = split_lines(text);
  check_header(lines, "x_px,y_px,score");
  DetectionSet out{{}, resolution};
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (trim(lines[i]).empty()) continue;
    const auto fields = split_fields(lines[i]);
    double x = 0.0;
    double y = 0.0;
    double score = 0.0;
    if (fields.size() != 3 || !parse_number(fields[0], x) || !parse_number(fields[1], y) ||
        !parse_number(fields[2], score) || !std::isfinite(x) || !std::isfinite(y)) {
      throw row_error(i + 1, "unparseable detection row '" + std::string(lines[i]) + "'");
    }
    if (!(score >= 0.0 && score <= 1.0)) throw row_error(i + 1, "score outside [0, 1]");
    out.detections.push_back({Point(x, y), score});
  }
  return out;
}

void write_detections(const fs::path& path, const DetectionSet& detections) {
  write_file(path, format_detections(detections));
}

DetectionSet read_detections(const fs::path& path, ResolutionSpec resolution) {
  try {
    return parse_detections(read_file(path), resolution);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::io) throw;
    throw Error(e.code(), path.string() + ": " + e.what());
  }
}

// ---------------------------------------------------------------------------

std::string encode_pmap(std::span<const Plane<float>> channels) {
  if (channels.size() != 1 && channels.size() != kPosteriorChannels) {
    throw Error(ErrorCode::bad_channels, "PMAP holds 1 or 4 channels, got " +
                                             std::to_string(channels.size()));
  }
  const auto rows = channels[0].rows();
  const auto cols = channels[0].cols();
  std::string out;
  out.reserve(kPmapHeaderSize + channels.size() * static_cast<std::size_t>(rows * cols) * 4);
  out.append("PMAP", 4);
  put_le<std::uint16_t>(out, kPmapVersion);
  put_le<std::uint8_t>(out, kPmapDtypeFloat32);
  put_le<std::uint8_t>(out, static_cast<std::uint8_t>(channels.size()));
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(rows));
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(cols));
  for (const auto& c : channels) {
    if (c.rows() != rows || c.cols() != cols) {
      throw Error(ErrorCode::invalid_argument, "PMAP channels differ in size");
    }
    if (!c.isFinite().all()) throw Error(ErrorCode::invalid_argument, "PMAP values must be finite");
    out.append(reinterpret_cast<const char*>(c.data()), static_cast<std::size_t>(c.size()) * 4);
  }
  return out;
}

std::vector<Plane<float>> decode_pmap(std::string_view bytes) {
  if (bytes.size() < kPmapHeaderSize) throw Error(ErrorCode::truncated, "PMAP header truncated");
  if (bytes.substr(0, 4) != "PMAP") throw Error(ErrorCode::bad_magic, "not a PMAP file");
  const auto version = get_le<std::uint16_t>(bytes, 4);
  if (version != kPmapVersion) {
    throw Error(ErrorCode::version_mismatch, "unsupported PMAP version " + std::to_string(version));
  }
  if (get_le<std::uint8_t>(bytes, 6) != kPmapDtypeFloat32) {
    throw Error(ErrorCode::version_mismatch, "unsupported PMAP dtype");
  }
  const int channels = get_le<std::uint8_t>(bytes, 7);
  if (channels != 1 && channels != kPosteriorChannels) {
    throw Error(ErrorCode::bad_channels, "PMAP channel count " + std::to_string(channels));
  }
  const std::uint64_t height = get_le<std::uint32_t>(bytes, 8);
  const std::uint64_t width = get_le<std::uint32_t>(bytes, 12);
  const std::uint64_t plane_bytes = height * width * 4;
  const std::uint64_t expected = kPmapHeaderSize + plane_bytes * static_cast<std::uint64_t>(channels);
  if (bytes.size() < expected) throw Error(ErrorCode::truncated, "PMAP payload truncated");
  if (bytes.size() > expected) throw Error(ErrorCode::parse, "trailing bytes after PMAP payload");
  std::vector<Plane<float>> out;
  for (int c = 0; c < channels; ++c) {
    Plane<float> plane(static_cast<Eigen::Index>(height), static_cast<Eigen::Index>(width));
    std::memcpy(plane.data(), bytes.data() + kPmapHeaderSize + plane_bytes * c, plane_bytes);
    out.push_back(std::move(plane));
  }
  return out;
}

void write_pmap(const PosteriorMap& map, const fs::path& path) {
  write_file(path, encode_pmap(map.channels()));
}

void write_pmap(const WeightMap& map, const fs::path& path) {
  write_file(path, encode_pmap(std::span(&map.weights(), 1)));
}

std::vector<Plane<float>> read_pmap(const fs::path& path) {
  try {
    return decode_pmap(read_file(path));
  } catch (const Error& e) {
    if (e.code() == ErrorCode::io) throw;
    throw Error(e.code(), path.string() + ": " + e.what());
  }
}

PosteriorMap read_posterior_map(const fs::path& path) {
  auto channels = read_pmap(path);
  if (channels.size() != kPosteriorChannels) {
    throw Error(ErrorCode::bad_channels, path.string() + ": posterior map needs 4 channels");
  }
  try {
    return PosteriorMap({std::move(channels[0]), std::move(channels[1]), std::move(channels[2]),
                         std::move(channels[3])});
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + e.what());
  }
}

WeightMap read_weight_map(const fs::path& path) {
  auto channels = read_pmap(path);
  if (channels.size() != 1) {
    throw Error(ErrorCode::bad_channels, path.string() + ": weight map needs 1 channel");
  }
  return WeightMap(std::move(channels[0]));
}

Dims pmap_dims(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::io, "cannot open " + path.string());
  std::string header(kPmapHeaderSize, '\0');
  in.read(header.data(), static_cast<std::streamsize>(header.size()));
  if (in.gcount() != static_cast<std::streamsize>(kPmapHeaderSize)) {
    throw Error(ErrorCode::truncated, path.string() + ": PMAP header truncated");
  }
  if (header.substr(0, 4) != "PMAP") throw Error(ErrorCode::bad_magic, path.string() + ": not a PMAP file");
  return {static_cast<int>(get_le<std::uint32_t>(header, 12)),
          static_cast<int>(get_le<std::uint32_t>(header, 8))};
}

Dims image_dims(const fs::path& path) {
  if (path.extension() == ".pmap") return pmap_dims(path);
  return png_dims(path);
}

}  // namespace nucleikit
