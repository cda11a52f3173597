#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <vector>

#include "nucleikit/types.hpp"

namespace nucleikit {

// Pixel (x, y) of the raster sits at the point (x, y) for all distance
// computations of the labeling module.

/// Per-pixel index of the nearest annotated center. Ties go to the lowest
/// annotation index.
struct CellIndexMap {
  Plane<std::int32_t> index;

  Dims dims() const { return dims_of(index); }
};

struct NeighborDistances {
  static constexpr double kNoNeighbor = std::numeric_limits<double>::infinity();

  std::vector<double> max_distance;              // d_i in pixels, kNoNeighbor when isolated
  std::vector<std::vector<std::int32_t>> neighbors;  // sorted ascending
};

struct LabelParams {
  double center_radius_px = 2.0;
  std::array<double, kLabelClassCount> class_weights{1.0, 1.0, 5.0, 10.0};  // bg, obj, edge, center

  void validate() const;
};

CellIndexMap assign_cells(const AnnotationSet& annotations);

/// Cells are neighbors when they share a 4-adjacent pixel pair inside the
/// image; d_i is the largest center distance to any neighbor.
NeighborDistances neighbor_max_distance(const AnnotationSet& annotations, const CellIndexMap& cells);

/// Four-class mask with precedence center > edge > background > object.
LabelMask generate_label_mask(const AnnotationSet& annotations, const LabelParams& params = {});

WeightMap generate_weight_map(const LabelMask& mask, const LabelParams& params = {});

/// True when some 4-neighbor of (x, y) lies in a different cell.
bool touches_other_cell(const CellIndexMap& cells, int x, int y);

}  // namespace nucleikit
