#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace nucleikit {

struct PairedTTest {
  std::size_t n = 0;
  double mean_difference = 0.0;
  double t = 0.0;        // NaN when degenerate
  double p_value = 1.0;  // two-sided
  // Differences have (numerically) zero spread, so t is undefined; p is
  // reported as 1.0.
  bool degenerate = false;
};

/// Two-sided paired Student t-test on a[i] - b[i]. Needs >= 2 pairs.
PairedTTest paired_t_test(std::span<const double> a, std::span<const double> b);

/// One evaluated run of one supervision condition.
struct RunRecord {
  std::string mode;  // inter | intra | cross
  std::size_t n_target = 0;
  std::uint64_t seed = 0;
  double cap_um = 5.0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::filesystem::path source;
};

struct CurveRow {
  std::string mode;
  std::size_t n_target = 0;
  std::size_t runs = 0;
  double f1_mean = 0.0;
  double f1_std = 0.0;  // sample standard deviation, 0 for a single run
  double precision_mean = 0.0;
  double recall_mean = 0.0;
};

struct ComparisonRow {
  std::size_t n_target = 0;
  std::string method;
  std::string baseline;
  double method_f1 = 0.0;
  double baseline_f1 = 0.0;
  double relative_improvement = 0.0;  // (method - baseline) / baseline
  std::size_t paired_runs = 0;        // runs paired by seed
  bool tested = false;                // false when fewer than 2 pairs
  PairedTTest test;
};

struct CurveReport {
  std::vector<CurveRow> curves;            // sorted by (n_target, mode)
  std::vector<ComparisonRow> comparisons;  // inter/intra, cross/intra, cross/inter
};

/// Reads metrics.json from an eval run directory (or the file itself).
RunRecord load_run(const std::filesystem::path& run);

/// Groups runs by (mode, n_target). Inter-domain runs do not depend on the
/// amount of target data and serve as the inter condition at every n_target.
CurveReport report_curves(std::span<const RunRecord> runs);

std::string format_curves_csv(const CurveReport& report);
std::string format_comparisons_csv(const CurveReport& report);

}  // namespace nucleikit
