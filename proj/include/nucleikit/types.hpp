#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "nucleikit/error.hpp"

namespace nucleikit {

// Row-major 2D raster: rows are image rows (y), columns are image columns (x).
template <typename Scalar>
using Plane = Eigen::Array<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

using Point = Eigen::Vector2d;  // (x, y) in pixels

struct Dims {
  int width = 0;
  int height = 0;

  bool operator==(const Dims&) const = default;
  std::int64_t pixel_count() const { return std::int64_t{width} * height; }
  bool contains(int x, int y) const { return x >= 0 && y >= 0 && x < width && y < height; }
};

template <typename Derived>
Dims dims_of(const Eigen::DenseBase<Derived>& plane) {
  return {static_cast<int>(plane.cols()), static_cast<int>(plane.rows())};
}

class ResolutionSpec {
 public:
  explicit ResolutionSpec(double microns_per_pixel);

  double microns_per_pixel() const { return microns_per_pixel_; }
  double to_microns(double pixels) const { return pixels * microns_per_pixel_; }
  double to_pixels(double microns) const { return microns / microns_per_pixel_; }

  bool operator==(const ResolutionSpec&) const = default;

 private:
  double microns_per_pixel_;
};

struct Annotation {
  std::int64_t id = 0;
  Point position = Point::Zero();
};

/// Point annotations of nuclei centers. Validated on construction: ids are
/// unique, points lie inside the image and no two points coincide.
class AnnotationSet {
 public:
  AnnotationSet(std::vector<Annotation> points, ResolutionSpec resolution, Dims image_dims);

  const std::vector<Annotation>& points() const { return points_; }
  const ResolutionSpec& resolution() const { return resolution_; }
  const Dims& image_dims() const { return image_dims_; }
  std::size_t size() const { return points_.size(); }
  bool empty() const { return points_.empty(); }
  const Point& position(std::size_t i) const { return points_[i].position; }

 private:
  std::vector<Annotation> points_;
  ResolutionSpec resolution_;
  Dims image_dims_;
};

enum class LabelCode : std::uint8_t { background = 0, object = 1, edge = 2, center = 3 };

inline constexpr int kLabelClassCount = 4;

struct LabelMask {
  Plane<std::uint8_t> codes;

  Dims dims() const { return dims_of(codes); }
  LabelCode at(int x, int y) const { return static_cast<LabelCode>(codes(y, x)); }
};

class WeightMap {
 public:
  explicit WeightMap(Plane<float> weights);

  const Plane<float>& weights() const { return weights_; }
  Dims dims() const { return dims_of(weights_); }

 private:
  Plane<float> weights_;
};

enum class PosteriorChannel : int { background = 0, object = 1, edge = 2, center = 3 };

inline constexpr int kPosteriorChannels = 4;
inline constexpr double kPosteriorSumTolerance = 1e-3;

/// Four-channel class posterior field in (background, object, edge, center)
/// order. Each channel lies in [0, 1] and the channels of a pixel sum to one
/// within kPosteriorSumTolerance.
class PosteriorMap {
 public:
  explicit PosteriorMap(std::array<Plane<float>, kPosteriorChannels> channels);

  const Plane<float>& channel(PosteriorChannel c) const { return channels_[static_cast<int>(c)]; }
  const std::array<Plane<float>, kPosteriorChannels>& channels() const { return channels_; }
  Dims dims() const { return dims_of(channels_[0]); }

 private:
  std::array<Plane<float>, kPosteriorChannels> channels_;
};

struct Detection {
  Point position = Point::Zero();  // pixel-center coordinates
  double score = 0.0;              // center posterior at the candidate pixel
};

struct DetectionSet {
  std::vector<Detection> detections;
  ResolutionSpec resolution{1.0};

  std::size_t size() const { return detections.size(); }
  bool empty() const { return detections.empty(); }
};

struct Thresholds {
  Thresholds(double kappa_e, double kappa_c);

  double kappa_e;
  double kappa_c;

  bool operator==(const Thresholds&) const = default;
};

}  // namespace nucleikit
