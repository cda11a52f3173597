#include "nucleikit/detection.hpp"

#include <vector>

namespace nucleikit {

EstimatedCells estimate_cells(const PosteriorMap& posteriors, double kappa_e) {
  if (!(kappa_e > 0.0 && kappa_e < 1.0)) {
    throw Error(ErrorCode::invalid_argument, "kappa_e must lie strictly inside (0, 1)");
  }
  const auto& bg = posteriors.channel(PosteriorChannel::background);
  const auto& edge = posteriors.channel(PosteriorChannel::edge);
  // Summed in double so the threshold test does not depend on float rounding.
  const Plane<bool> inside = (bg.cast<double>() + edge.cast<double>()) < kappa_e;

  const auto rows = inside.rows();
  const auto cols = inside.cols();
  EstimatedCells cells{Plane<std::int32_t>::Zero(rows, cols), 0};
  std::vector<std::pair<Eigen::Index, Eigen::Index>> stack;
  for (Eigen::Index y = 0; y < rows; ++y) {
    for (Eigen::Index x = 0; x < cols; ++x) {
      if (!inside(y, x) || cells.labels(y, x) != 0) continue;
      const std::int32_t label = ++cells.count;
      cells.labels(y, x) = label;
      stack.emplace_back(y, x);
      while (!stack.empty()) {
        const auto [cy, cx] = stack.back();
        stack.pop_back();
        const auto visit = [&](Eigen::Index ny, Eigen::Index nx) {
          if (ny < 0 || nx < 0 || ny >= rows || nx >= cols) return;
          if (!inside(ny, nx) || cells.labels(ny, nx) != 0) return;
          cells.labels(ny, nx) = label;
          stack.emplace_back(ny, nx);
        };
        visit(cy, cx - 1);
        visit(cy, cx + 1);
        visit(cy - 1, cx);
        visit(cy + 1, cx);
      }
    }
  }
  return cells;
}

std::vector<CenterCandidate> select_candidates(const PosteriorMap& posteriors,
                                               const EstimatedCells& cells) {
  if (cells.dims() != posteriors.dims()) {
    throw Error(ErrorCode::mismatch, "cell labels do not match the posterior map");
  }
  const auto& center = posteriors.channel(PosteriorChannel::center);
  std::vector<CenterCandidate> best(static_cast<std::size_t>(cells.count));
  std::vector<bool> seen(best.size(), false);
  // Row-major scan with a strict comparison keeps the lowest (y, x) on ties.
  for (Eigen::Index y = 0; y < center.rows(); ++y) {
    for (Eigen::Index x = 0; x < center.cols(); ++x) {
      const std::int32_t label = cells.labels(y, x);
      if (label == 0) continue;
      const auto k = static_cast<std::size_t>(label - 1);
      const double p = center(y, x);
      if (!seen[k] || p > best[k].score) {
        best[k] = {static_cast<int>(x), static_cast<int>(y), p};
        seen[k] = true;
      }
    }
  }
  return best;
}

DetectionSet accept_candidates(const std::vector<CenterCandidate>& candidates, double kappa_c,
                               const ResolutionSpec& resolution) {
  DetectionSet out{{}, resolution};
  for (const auto& c : candidates) {
    if (c.score < kappa_c) continue;
    out.detections.push_back({Point(c.x + 0.5, c.y + 0.5), c.score});
  }
  return out;
}

DetectionSet detect_centers(const PosteriorMap& posteriors, const Thresholds& thresholds,
                            const ResolutionSpec& resolution) {
  const EstimatedCells cells = estimate_cells(posteriors, thresholds.kappa_e);
  return accept_candidates(select_candidates(posteriors, cells), thresholds.kappa_c, resolution);
}

}  // namespace nucleikit
