#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "nucleikit/matching.hpp"
#include "nucleikit/tuning.hpp"
#include "nucleikit/voronoi.hpp"

namespace nucleikit::cli {

namespace fs = std::filesystem;

inline constexpr const char* kVersion = "0.1.0";

enum class Command { label, normalize, detect, eval, tune, dataset_build, report, fixtures };

/// Everything a subcommand needs; filled from the command line and the
/// optional JSON config file.
struct RunConfig {
  Command command = Command::label;

  unsigned threads = 1;
  std::uint64_t seed = 0;
  std::string log_level = "warn";

  fs::path manifest;
  fs::path in;
  fs::path out;
  fs::path pmap;
  fs::path pmaps;
  fs::path detections;
  fs::path tuned;
  std::vector<fs::path> runs;
  std::string split;  // empty: per-command default

  double kappa_e = 0.5;
  double kappa_c = 0.5;
  std::optional<double> mpp;
  double cap_um = kDefaultMatchCapMicrons;
  LabelParams label;
  GridSpec grid;
  double low_pct = 0.0;
  double high_pct = 100.0;
  int bits = 0;  // 0: same as input

  std::string mode;  // eval: empty leaves the run untagged
  std::optional<std::size_t> n_target;

  // fixtures
  int n_images = 20;
  int n_validation = 5;
  int n_test = 5;
  int n_variants = 3;
  int n_nuclei = 15;
  int width = 96;
  int height = 96;
  double min_separation_px = 12.0;
  double bump_sigma_px = 2.0;
  double noise = 0.05;
  double fixture_mpp = 0.5;
  int repeats = 1;
};

/// Executes one subcommand. Library errors propagate as nucleikit::Error.
void run_pipeline(const RunConfig& config, std::ostream& out);

/// Full command-line entry point: parses arguments, runs, and reports any
/// failure as a single `error: code=... message=...` line on `err`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace nucleikit::cli
