#include "nucleikit/types.hpp"

#include <cmath>
#include <set>
#include <string>
#include <unordered_set>
#include <utility>

namespace nucleikit {

namespace {

bool in_unit_interval(double v) { return v > 0.0 && v < 1.0; }

}  // namespace

ResolutionSpec::ResolutionSpec(double microns_per_pixel) : microns_per_pixel_(microns_per_pixel) {
  if (!std::isfinite(microns_per_pixel) || microns_per_pixel <= 0.0) {
    throw Error(ErrorCode::invalid_argument,
                "microns_per_pixel must be positive and finite, got " +
                    std::to_string(microns_per_pixel));
  }
}

AnnotationSet::AnnotationSet(std::vector<Annotation> points, ResolutionSpec resolution,
                             Dims image_dims)
    : points_(std::move(points)), resolution_(resolution), image_dims_(image_dims) {
  if (image_dims_.width <= 0 || image_dims_.height <= 0) {
    throw Error(ErrorCode::invalid_argument, "image dimensions must be positive");
  }
  std::unordered_set<std::int64_t> ids;
  std::set<std::pair<double, double>> coords;
  for (const auto& p : points_) {
    const double x = p.position.x();
    const double y = p.position.y();
    if (!(x >= 0.0 && x < image_dims_.width && y >= 0.0 && y < image_dims_.height)) {
      throw Error(ErrorCode::out_of_bounds,
                  "annotation id " + std::to_string(p.id) + " at (" + std::to_string(x) + ", " +
                      std::to_string(y) + ") lies outside the " +
                      std::to_string(image_dims_.width) + "x" +
                      std::to_string(image_dims_.height) + " image");
    }
    if (!ids.insert(p.id).second) {
      throw Error(ErrorCode::duplicate, "duplicate annotation id " + std::to_string(p.id));
    }
    if (!coords.emplace(x, y).second) {
      throw Error(ErrorCode::duplicate, "duplicate annotation coordinates for id " +
                                            std::to_string(p.id));
    }
  }
}

WeightMap::WeightMap(Plane<float> weights) : weights_(std::move(weights)) {
  if (weights_.size() == 0) return;
  if (!weights_.isFinite().all() || (weights_ < 0.0f).any()) {
    throw Error(ErrorCode::invariant, "weights must be finite and non-negative");
  }
  if (weights_.maxCoeff() <= 0.0f) {
    throw Error(ErrorCode::invariant, "weight map is identically zero");
  }
}

PosteriorMap::PosteriorMap(std::array<Plane<float>, kPosteriorChannels> channels)
    : channels_(std::move(channels)) {
  const auto rows = channels_[0].rows();
  const auto cols = channels_[0].cols();
  Plane<double> sum = Plane<double>::Zero(rows, cols);
  for (const auto& c : channels_) {
    if (c.rows() != rows || c.cols() != cols) {
      throw Error(ErrorCode::invariant, "posterior channels differ in size");
    }
    if (!c.isFinite().all() || (c < 0.0f).any() || (c > 1.0f).any()) {
      throw Error(ErrorCode::invariant, "posterior values must lie in [0, 1]");
    }
    sum += c.cast<double>();
  }
  if (sum.size() > 0 && ((sum - 1.0).abs() > kPosteriorSumTolerance).any()) {
    throw Error(ErrorCode::invariant, "posterior channels do not sum to 1 at every pixel");
  }
}

Thresholds::Thresholds(double kappa_e_, double kappa_c_) : kappa_e(kappa_e_), kappa_c(kappa_c_) {
  if (!in_unit_interval(kappa_e) || !in_unit_interval(kappa_c)) {
    throw Error(ErrorCode::invalid_argument, "thresholds must lie strictly inside (0, 1)");
  }
}

}  // namespace nucleikit
