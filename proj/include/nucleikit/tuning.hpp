#pragma once

#include <span>
#include <vector>

#include "nucleikit/matching.hpp"
#include "nucleikit/types.hpp"

namespace nucleikit {

struct GridSpec {
  std::vector<double> kappa_e_values = default_axis();
  std::vector<double> kappa_c_values = default_axis();

  // 0.05, 0.10, ..., 0.95
  static std::vector<double> default_axis();
  void validate() const;
};

struct ValidationItem {
  PosteriorMap posteriors;
  AnnotationSet annotations;
};

struct GridPoint {
  double kappa_e = 0.0;
  double kappa_c = 0.0;
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  Metrics metrics;
};

struct TuningResult {
  Thresholds thresholds{0.5, 0.5};
  Metrics metrics;
  std::vector<GridPoint> table;  // kappa_e major, kappa_c minor
};

/// Micro-f1 of detect_centers + match_hungarian over a validation set.
GridPoint evaluate_thresholds(std::span<const ValidationItem> validation,
                              const Thresholds& thresholds, double cap_um);

/// Exhaustive grid search maximizing validation micro-f1. Ties go to the
/// higher kappa_c, then the higher kappa_e.
TuningResult grid_search(std::span<const ValidationItem> validation, const GridSpec& grid,
                         double cap_um = kDefaultMatchCapMicrons, unsigned threads = 1);

}  // namespace nucleikit
