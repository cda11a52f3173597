#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "nucleikit/types.hpp"

namespace nucleikit {

template <typename Scalar>
using GrayImage = Plane<Scalar>;

/// Nearest-rank percentile of the pixel values: the value at rank
/// ceil(pct / 100 * n) (1-based, at least 1) of the sorted multiset.
template <typename Scalar>
Scalar percentile_nearest_rank(const GrayImage<Scalar>& img, double pct) {
  if (img.size() == 0) throw Error(ErrorCode::insufficient_data, "percentile of an empty image");
  std::vector<Scalar> values(img.data(), img.data() + img.size());
  const auto n = static_cast<double>(values.size());
  auto rank = static_cast<std::size_t>(std::ceil(pct / 100.0 * n));
  rank = std::clamp<std::size_t>(rank, 1, values.size());
  std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(rank - 1),
                   values.end());
  return values[rank - 1];
}

/// Linear min/max intensity normalization. The low/high percentiles (0 and
/// 100 by default, i.e. plain min and max) map to 0 and 1 and values outside
/// are clamped. A constant image normalizes to all zeros.
template <typename Scalar>
GrayImage<Scalar> normalize_linear(const GrayImage<Scalar>& img, double low_pct = 0.0,
                                   double high_pct = 100.0) {
  if (img.size() == 0) throw Error(ErrorCode::insufficient_data, "cannot normalize an empty image");
  if (!(low_pct >= 0.0 && low_pct < high_pct && high_pct <= 100.0)) {
    throw Error(ErrorCode::invalid_argument, "percentiles must satisfy 0 <= low < high <= 100");
  }
  if (!img.isFinite().all()) throw Error(ErrorCode::invalid_argument, "image holds non-finite values");
  const Scalar lo = low_pct == 0.0 ? img.minCoeff() : percentile_nearest_rank(img, low_pct);
  const Scalar hi = high_pct == 100.0 ? img.maxCoeff() : percentile_nearest_rank(img, high_pct);
  if (!(hi > lo)) return GrayImage<Scalar>::Zero(img.rows(), img.cols());
  return ((img - lo) / (hi - lo)).max(Scalar(0)).min(Scalar(1));
}

}  // namespace nucleikit
