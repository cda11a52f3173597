#include "nucleikit/voronoi.hpp"

#include <algorithm>
#include <cmath>

namespace nucleikit {

namespace {

double squared_distance(int x, int y, const Point& c) {
  const double dx = x - c.x();
  const double dy = y - c.y();
  return dx * dx + dy * dy;
}

// Uniform bucket grid over the centers. Nearest-center queries scan square
// rings of buckets outward and stop once no unvisited bucket can hold a
// center at a distance less than or equal to the current best, so results
// are exact including ties.
class CenterGrid {
 public:
  CenterGrid(const AnnotationSet& annotations, Dims dims) : annotations_(annotations) {
    const double area = static_cast<double>(dims.pixel_count());
    const double per_center = area / static_cast<double>(annotations.size());
    bucket_ = std::max(1, static_cast<int>(std::ceil(std::sqrt(per_center))));
    cols_ = (dims.width + bucket_ - 1) / bucket_;
    rows_ = (dims.height + bucket_ - 1) / bucket_;
    buckets_.resize(static_cast<std::size_t>(cols_) * rows_);
    for (std::size_t i = 0; i < annotations.size(); ++i) {
      const Point& c = annotations.position(i);
      const int bx = std::min(cols_ - 1, static_cast<int>(c.x()) / bucket_);
      const int by = std::min(rows_ - 1, static_cast<int>(c.y()) / bucket_);
      buckets_[static_cast<std::size_t>(by) * cols_ + bx].push_back(static_cast<std::int32_t>(i));
    }
  }

  std::int32_t nearest(int x, int y) const {
    const int bx = x / bucket_;
    const int by = y / bucket_;
    const int max_ring = std::max({bx, cols_ - 1 - bx, by, rows_ - 1 - by});
    std::int32_t best = -1;
    double best_sq = 0.0;
    for (int r = 0; r <= max_ring; ++r) {
      for (int gy = by - r; gy <= by + r; ++gy) {
        if (gy < 0 || gy >= rows_) continue;
        const bool full_row = gy == by - r || gy == by + r;
        for (int gx = bx - r; gx <= bx + r; gx += full_row ? 1 : 2 * r) {
          if (gx >= 0 && gx < cols_) scan_bucket(gx, gy, x, y, best, best_sq);
          if (r == 0) break;
        }
      }
      const double reach = static_cast<double>(r) * bucket_;
      if (best >= 0 && best_sq <= reach * reach) break;
    }
    return best;
  }

 private:
  void scan_bucket(int gx, int gy, int x, int y, std::int32_t& best, double& best_sq) const {
    for (const std::int32_t i : buckets_[static_cast<std::size_t>(gy) * cols_ + gx]) {
      const double sq = squared_distance(x, y, annotations_.position(static_cast<std::size_t>(i)));
      if (best < 0 || sq < best_sq || (sq == best_sq && i < best)) {
        best = i;
        best_sq = sq;
      }
    }
  }

  const AnnotationSet& annotations_;
  int bucket_ = 1;
  int cols_ = 1;
  int rows_ = 1;
  std::vector<std::vector<std::int32_t>> buckets_;
};

void require_annotations(const AnnotationSet& annotations) {
  if (annotations.empty()) {
    throw Error(ErrorCode::insufficient_data, "labeling requires at least one annotation");
  }
}

}  // namespace

void LabelParams::validate() const {
  if (!std::isfinite(center_radius_px) || center_radius_px <= 0.0) {
    throw Error(ErrorCode::invalid_argument, "center radius must be positive");
  }
  for (const double w : class_weights) {
    if (!std::isfinite(w) || w < 0.0) {
      throw Error(ErrorCode::invalid_argument, "class weights must be finite and non-negative");
    }
  }
}

CellIndexMap assign_cells(const AnnotationSet& annotations) {
  require_annotations(annotations);
  const Dims dims = annotations.image_dims();
  const CenterGrid grid(annotations, dims);
  CellIndexMap cells{Plane<std::int32_t>(dims.height, dims.width)};
  for (int y = 0; y < dims.height; ++y) {
    for (int x = 0; x < dims.width; ++x) cells.index(y, x) = grid.nearest(x, y);
  }
  return cells;
}

bool touches_other_cell(const CellIndexMap& cells, int x, int y) {
  const auto& idx = cells.index;
  const std::int32_t own = idx(y, x);
  return (x > 0 && idx(y, x - 1) != own) || (x + 1 < idx.cols() && idx(y, x + 1) != own) ||
         (y > 0 && idx(y - 1, x) != own) || (y + 1 < idx.rows() && idx(y + 1, x) != own);
}

NeighborDistances neighbor_max_distance(const AnnotationSet& annotations, const CellIndexMap& cells) {
  const std::size_t n = annotations.size();
  if (cells.dims() != annotations.image_dims()) {
    throw Error(ErrorCode::mismatch, "cell map does not match the annotated image");
  }
  NeighborDistances out;
  out.max_distance.assign(n, NeighborDistances::kNoNeighbor);
  out.neighbors.assign(n, {});

  const auto link = [&](std::int32_t a, std::int32_t b) {
    if (a == b) return;
    out.neighbors[static_cast<std::size_t>(a)].push_back(b);
    out.neighbors[static_cast<std::size_t>(b)].push_back(a);
  };
  const auto& idx = cells.index;
  for (Eigen::Index y = 0; y < idx.rows(); ++y) {
    for (Eigen::Index x = 0; x < idx.cols(); ++x) {
      if (x + 1 < idx.cols()) link(idx(y, x), idx(y, x + 1));
      if (y + 1 < idx.rows()) link(idx(y, x), idx(y + 1, x));
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    auto& nb = out.neighbors[i];
    std::sort(nb.begin(), nb.end());
    nb.erase(std::unique(nb.begin(), nb.end()), nb.end());
    if (nb.empty()) continue;
    double d = 0.0;
    for (const std::int32_t j : nb) {
      const Point delta = annotations.position(static_cast<std::size_t>(j)) - annotations.position(i);
      d = std::max(d, std::sqrt(delta.x() * delta.x() + delta.y() * delta.y()));
    }
    out.max_distance[i] = d;
  }
  return out;
}

LabelMask generate_label_mask(const AnnotationSet& annotations, const LabelParams& params) {
  params.validate();
  const CellIndexMap cells = assign_cells(annotations);
  const NeighborDistances reach = neighbor_max_distance(annotations, cells);
  const Dims dims = annotations.image_dims();

  LabelMask mask{Plane<std::uint8_t>(dims.height, dims.width)};
  for (int y = 0; y < dims.height; ++y) {
    for (int x = 0; x < dims.width; ++x) {
      const auto cell = static_cast<std::size_t>(cells.index(y, x));
      const double d = std::sqrt(squared_distance(x, y, annotations.position(cell)));
      LabelCode code = LabelCode::object;
      if (d <= params.center_radius_px) {
        code = LabelCode::center;
      } else if (touches_other_cell(cells, x, y)) {
        code = LabelCode::edge;
      } else if (d > reach.max_distance[cell]) {
        code = LabelCode::background;
      }
      mask.codes(y, x) = static_cast<std::uint8_t>(code);
    }
  }
  return mask;
}

WeightMap generate_weight_map(const LabelMask& mask, const LabelParams& params) {
  params.validate();
  const auto& w = params.class_weights;
  Plane<float> weights = mask.codes.unaryExpr([&](std::uint8_t code) {
    if (code >= kLabelClassCount) {
      throw Error(ErrorCode::invariant, "label mask holds codes outside 0..3");
    }
    return static_cast<float>(w[code]);
  });
  return WeightMap(std::move(weights));
}

}  // namespace nucleikit
