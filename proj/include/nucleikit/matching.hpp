#pragma once

#include <span>
#include <vector>

#include <Eigen/Core>

#include "nucleikit/types.hpp"

namespace nucleikit {

inline constexpr double kDefaultMatchCapMicrons = 5.0;

struct MatchPair {
  std::size_t detection = 0;
  std::size_t annotation = 0;
  double distance_um = 0.0;

  bool operator==(const MatchPair&) const = default;
};

struct MatchResult {
  std::vector<MatchPair> pairs;  // ascending detection index
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  double cap_um = kDefaultMatchCapMicrons;

  double total_distance_um() const;
  bool operator==(const MatchResult&) const = default;
};

struct Metrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;

  bool operator==(const Metrics&) const = default;
};

/// Minimum-cost assignment of every row to a distinct column. Requires
/// rows <= cols; returns the column of each row.
std::vector<Eigen::Index> solve_assignment(const Eigen::MatrixXd& cost);

/// One-to-one matching using only pairs within cap_um: maximizes the number
/// of pairs first, then minimizes their summed distance.
MatchResult match_hungarian(const DetectionSet& detections, const AnnotationSet& annotations,
                            double cap_um = kDefaultMatchCapMicrons);

Metrics metrics_from_counts(std::size_t tp, std::size_t fp, std::size_t fn);
Metrics compute_metrics(const MatchResult& match);

/// Micro average: tp/fp/fn are summed over images before computing metrics.
Metrics aggregate_micro(std::span<const MatchResult> results);

}  // namespace nucleikit
