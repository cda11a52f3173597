#include "nucleikit/tuning.hpp"

#include <algorithm>
#include <string>
#include <tuple>

#include "nucleikit/detection.hpp"
#include "nucleikit/parallel.hpp"

namespace nucleikit {

namespace {

void validate_axis(const std::vector<double>& axis, const char* name) {
  if (axis.empty()) throw Error(ErrorCode::invalid_argument, std::string(name) + " grid is empty");
  for (std::size_t i = 0; i < axis.size(); ++i) {
    if (!(axis[i] > 0.0 && axis[i] < 1.0)) {
      throw Error(ErrorCode::invalid_argument, std::string(name) + " values must lie in (0, 1)");
    }
    if (i > 0 && !(axis[i] > axis[i - 1])) {
      throw Error(ErrorCode::invalid_argument, std::string(name) + " values must strictly increase");
    }
  }
}

GridPoint summarize(double kappa_e, double kappa_c, std::span<const MatchResult> matches) {
  GridPoint point;
  point.kappa_e = kappa_e;
  point.kappa_c = kappa_c;
  for (const auto& m : matches) {
    point.tp += m.tp;
    point.fp += m.fp;
    point.fn += m.fn;
  }
  point.metrics = aggregate_micro(matches);
  return point;
}

void require_validation(std::span<const ValidationItem> validation) {
  if (validation.empty()) throw Error(ErrorCode::insufficient_data, "validation set is empty");
}

}  // namespace

std::vector<double> GridSpec::default_axis() {
  std::vector<double> axis;
  for (int k = 1; k <= 19; ++k) axis.push_back(k / 20.0);
  return axis;
}

void GridSpec::validate() const {
  validate_axis(kappa_e_values, "kappa_e");
  validate_axis(kappa_c_values, "kappa_c");
}

GridPoint evaluate_thresholds(std::span<const ValidationItem> validation,
                              const Thresholds& thresholds, double cap_um) {
  require_validation(validation);
  std::vector<MatchResult> matches;
  for (const auto& item : validation) {
    const auto detections =
        detect_centers(item.posteriors, thresholds, item.annotations.resolution());
    matches.push_back(match_hungarian(detections, item.annotations, cap_um));
  }
  return summarize(thresholds.kappa_e, thresholds.kappa_c, matches);
}

TuningResult grid_search(std::span<const ValidationItem> validation, const GridSpec& grid,
                         double cap_um, unsigned threads) {
  require_validation(validation);
  grid.validate();
  const auto& es = grid.kappa_e_values;
  const auto& cs = grid.kappa_c_values;

  TuningResult result;
  result.table.resize(es.size() * cs.size());
  // Cells and candidates depend on kappa_e only; kappa_c merely filters them.
  parallel_for(es.size(), threads, [&](std::size_t ei) {
    std::vector<std::vector<CenterCandidate>> candidates;
    for (const auto& item : validation) {
      candidates.push_back(
          select_candidates(item.posteriors, estimate_cells(item.posteriors, es[ei])));
    }
    std::vector<MatchResult> matches(validation.size());
    for (std::size_t ci = 0; ci < cs.size(); ++ci) {
      for (std::size_t k = 0; k < validation.size(); ++k) {
        const auto& gt = validation[k].annotations;
        matches[k] =
            match_hungarian(accept_candidates(candidates[k], cs[ci], gt.resolution()), gt, cap_um);
      }
      result.table[ei * cs.size() + ci] = summarize(es[ei], cs[ci], matches);
    }
  });

  const auto rank = [](const GridPoint& p) { return std::tuple(p.metrics.f1, p.kappa_c, p.kappa_e); };
  const auto best = std::max_element(result.table.begin(), result.table.end(),
                                     [&](const GridPoint& a, const GridPoint& b) {
                                       return rank(a) < rank(b);
                                     });
  result.thresholds = Thresholds(best->kappa_e, best->kappa_c);
  result.metrics = best->metrics;
  return result;
}

}  // namespace nucleikit
