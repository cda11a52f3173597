#include "nucleikit/matching.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

namespace nucleikit {

double MatchResult::total_distance_um() const {
  double total = 0.0;
  for (const auto& p : pairs) total += p.distance_um;
  return total;
}

std::vector<Eigen::Index> solve_assignment(const Eigen::MatrixXd& cost) {
  const Eigen::Index n = cost.rows();
  const Eigen::Index m = cost.cols();
  if (n > m) throw Error(ErrorCode::invalid_argument, "assignment needs rows <= cols");
  if (n == 0) return {};
  constexpr double inf = std::numeric_limits<double>::infinity();

  // Shortest augmenting paths with row/column potentials; index 0 is a
  // virtual column used as the root of each augmentation.
  std::vector<double> u(static_cast<std::size_t>(n + 1), 0.0);
  std::vector<double> v(static_cast<std::size_t>(m + 1), 0.0);
  std::vector<Eigen::Index> owner(static_cast<std::size_t>(m + 1), 0);  // column -> row
  std::vector<Eigen::Index> way(static_cast<std::size_t>(m + 1), 0);
  for (Eigen::Index row = 1; row <= n; ++row) {
    owner[0] = row;
    Eigen::Index col0 = 0;
    std::vector<double> minv(static_cast<std::size_t>(m + 1), inf);
    std::vector<bool> used(static_cast<std::size_t>(m + 1), false);
    do {
      used[static_cast<std::size_t>(col0)] = true;
      const Eigen::Index row0 = owner[static_cast<std::size_t>(col0)];
      double delta = inf;
      Eigen::Index col1 = 0;
      for (Eigen::Index j = 1; j <= m; ++j) {
        const auto js = static_cast<std::size_t>(j);
        if (used[js]) continue;
        const double reduced = cost(row0 - 1, j - 1) - u[static_cast<std::size_t>(row0)] - v[js];
        if (reduced < minv[js]) {
          minv[js] = reduced;
          way[js] = col0;
        }
        if (minv[js] < delta) {
          delta = minv[js];
          col1 = j;
        }
      }
      for (Eigen::Index j = 0; j <= m; ++j) {
        const auto js = static_cast<std::size_t>(j);
        if (used[js]) {
          u[static_cast<std::size_t>(owner[js])] += delta;
          v[js] -= delta;
        } else {
          minv[js] -= delta;
        }
      }
      col0 = col1;
    } while (owner[static_cast<std::size_t>(col0)] != 0);
    do {
      const Eigen::Index col1 = way[static_cast<std::size_t>(col0)];
      owner[static_cast<std::size_t>(col0)] = owner[static_cast<std::size_t>(col1)];
      col0 = col1;
    } while (col0 != 0);
  }

  std::vector<Eigen::Index> assignment(static_cast<std::size_t>(n), -1);
  for (Eigen::Index j = 1; j <= m; ++j) {
    const Eigen::Index row = owner[static_cast<std::size_t>(j)];
    if (row != 0) assignment[static_cast<std::size_t>(row - 1)] = j - 1;
  }
  return assignment;
}

MatchResult match_hungarian(const DetectionSet& detections, const AnnotationSet& annotations,
                            double cap_um) {
  if (!(cap_um > 0.0) || !std::isfinite(cap_um)) {
    throw Error(ErrorCode::invalid_argument, "matching cap must be positive");
  }
  if (!(detections.resolution == annotations.resolution())) {
    throw Error(ErrorCode::mismatch, "detections and annotations use different resolutions");
  }
  const std::size_t nd = detections.size();
  const std::size_t na = annotations.size();
  const ResolutionSpec& res = annotations.resolution();

  Eigen::MatrixXd distance(static_cast<Eigen::Index>(nd), static_cast<Eigen::Index>(na));
  for (std::size_t i = 0; i < nd; ++i) {
    for (std::size_t j = 0; j < na; ++j) {
      const Point delta = detections.detections[i].position - annotations.position(j);
      distance(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          res.to_microns(std::sqrt(delta.x() * delta.x() + delta.y() * delta.y()));
    }
  }

  // Infeasible pairs cost more than any complete set of feasible pairs, so
  // the minimum-cost assignment maximizes the feasible count first.
  const double smaller = static_cast<double>(std::min(nd, na));
  const double infeasible = 2.0 * (smaller + 1.0) * cap_um + 1.0;
  const Eigen::MatrixXd cost =
      (distance.array() <= cap_um).select(distance, Eigen::MatrixXd::Constant(distance.rows(),
                                                                               distance.cols(),
                                                                               infeasible));

  MatchResult out;
  out.cap_um = cap_um;
  const bool by_detection = nd <= na;
  const auto assignment = solve_assignment(by_detection ? cost : Eigen::MatrixXd(cost.transpose()));
  for (std::size_t r = 0; r < assignment.size(); ++r) {
    const auto c = static_cast<std::size_t>(assignment[r]);
    const std::size_t det = by_detection ? r : c;
    const std::size_t ann = by_detection ? c : r;
    const double d = distance(static_cast<Eigen::Index>(det), static_cast<Eigen::Index>(ann));
    if (d <= cap_um) out.pairs.push_back({det, ann, d});
  }
  std::sort(out.pairs.begin(), out.pairs.end(),
            [](const MatchPair& a, const MatchPair& b) { return a.detection < b.detection; });
  out.tp = out.pairs.size();
  out.fp = nd - out.tp;
  out.fn = na - out.tp;
  return out;
}

Metrics metrics_from_counts(std::size_t tp, std::size_t fp, std::size_t fn) {
  const auto ratio = [](std::size_t num, std::size_t den) {
    return den == 0 ? 1.0 : static_cast<double>(num) / static_cast<double>(den);
  };
  Metrics m;
  m.precision = ratio(tp, tp + fp);
  m.recall = ratio(tp, tp + fn);
  // Both sides empty counts as a perfect result; otherwise the usual formula.
  m.f1 = ratio(2 * tp, 2 * tp + fp + fn);
  return m;
}

Metrics compute_metrics(const MatchResult& match) {
  return metrics_from_counts(match.tp, match.fp, match.fn);
}

Metrics aggregate_micro(std::span<const MatchResult> results) {
  if (results.empty()) throw Error(ErrorCode::insufficient_data, "no match results to aggregate");
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  for (const auto& r : results) {
    if (r.cap_um != results.front().cap_um) {
      throw Error(ErrorCode::mismatch, "match results use different caps");
    }
    tp += r.tp;
    fp += r.fp;
    fn += r.fn;
  }
  return metrics_from_counts(tp, fp, fn);
}

}  // namespace nucleikit
