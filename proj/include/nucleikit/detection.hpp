#pragma once

#include <cstdint>
#include <vector>

#include "nucleikit/types.hpp"

namespace nucleikit {

/// 4-connected components of {x : p_bg(x) + p_edge(x) < kappa_e}. Label 0 is
/// "not a cell"; components are numbered 1..count in row-major order of
/// their first pixel.
struct EstimatedCells {
  Plane<std::int32_t> labels;
  std::int32_t count = 0;

  Dims dims() const { return dims_of(labels); }
  std::int64_t area() const { return (labels > 0).count(); }
};

struct CenterCandidate {
  int x = 0;
  int y = 0;
  double score = 0.0;
};

EstimatedCells estimate_cells(const PosteriorMap& posteriors, double kappa_e);

/// One candidate per component: the pixel of maximal center posterior, ties
/// resolved to the lowest (y, x). Indexed by component label minus one.
std::vector<CenterCandidate> select_candidates(const PosteriorMap& posteriors,
                                               const EstimatedCells& cells);

/// Keeps candidates with score >= kappa_c and places them at pixel centers.
DetectionSet accept_candidates(const std::vector<CenterCandidate>& candidates, double kappa_c,
                               const ResolutionSpec& resolution);

DetectionSet detect_centers(const PosteriorMap& posteriors, const Thresholds& thresholds,
                            const ResolutionSpec& resolution);

}  // namespace nucleikit
