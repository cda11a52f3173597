#include "nucleikit/report.hpp"

#include <charconv>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <set>

#include <boost/math/distributions/students_t.hpp>
#include <nlohmann/json.hpp>

#include "nucleikit/error.hpp"
#include "nucleikit/io.hpp"

namespace nucleikit {

namespace {

using Condition = std::pair<std::size_t, std::string>;  // (n_target, mode)

double mean_of(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double sample_std(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = mean_of(v);
  double ss = 0.0;
  for (const double x : v) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

std::string num(double v) {
  if (std::isnan(v)) return "";
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

}  // namespace

PairedTTest paired_t_test(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw Error(ErrorCode::mismatch, "paired samples differ in length");
  if (a.size() < 2) throw Error(ErrorCode::insufficient_data, "paired t-test needs >= 2 pairs");
  std::vector<double> diff(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) diff[i] = a[i] - b[i];

  PairedTTest out;
  out.n = diff.size();
  out.mean_difference = mean_of(diff);
  const double sd = sample_std(diff);
  // Differences that agree up to rounding noise count as zero spread.
  if (sd <= 1e-12 * std::max(1.0, std::abs(out.mean_difference))) {
    out.degenerate = true;
    out.t = std::numeric_limits<double>::quiet_NaN();
    out.p_value = 1.0;
    return out;
  }
  out.t = out.mean_difference / (sd / std::sqrt(static_cast<double>(out.n)));
  const boost::math::students_t dist(static_cast<double>(out.n - 1));
  out.p_value = 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(out.t)));
  return out;
}

RunRecord load_run(const std::filesystem::path& run) {
  const auto file = std::filesystem::is_directory(run) ? run / "metrics.json" : run;
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(read_file(file));
    RunRecord r;
    const auto& cond = doc.at("condition");
    r.mode = cond.at("mode").get<std::string>();
    r.n_target = cond.at("n_target").get<std::size_t>();
    r.seed = cond.at("seed").get<std::uint64_t>();
    r.cap_um = doc.at("cap_um").get<double>();
    const auto& micro = doc.at("micro");
    r.precision = micro.at("precision").get<double>();
    r.recall = micro.at("recall").get<double>();
    r.f1 = micro.at("f1").get<double>();
    r.source = file;
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::parse, file.string() + ": not a run metrics record (" + e.what() + ")");
  }
}

CurveReport report_curves(std::span<const RunRecord> runs) {
  if (runs.empty()) throw Error(ErrorCode::insufficient_data, "no runs to report");
  std::map<Condition, std::vector<const RunRecord*>> groups;
  for (const auto& r : runs) {
    if (r.mode != "inter" && r.mode != "intra" && r.mode != "cross") {
      throw Error(ErrorCode::invariant, r.source.string() + ": unknown mode '" + r.mode + "'");
    }
    groups[{r.n_target, r.mode}].push_back(&r);
  }
  for (const auto& [cond, members] : groups) {
    std::set<std::uint64_t> seeds;
    for (const RunRecord* r : members) {
      if (r->cap_um != members.front()->cap_um) {
        throw Error(ErrorCode::invariant, "runs of " + cond.second + " at n_target " +
                                              std::to_string(cond.first) +
                                              " disagree on the matching cap");
      }
      if (!seeds.insert(r->seed).second) {
        throw Error(ErrorCode::invariant, "runs of " + cond.second + " at n_target " +
                                              std::to_string(cond.first) + " repeat seed " +
                                              std::to_string(r->seed));
      }
    }
  }

  CurveReport report;
  for (const auto& [cond, members] : groups) {
    std::vector<double> f1;
    std::vector<double> precision;
    std::vector<double> recall;
    for (const RunRecord* r : members) {
      f1.push_back(r->f1);
      precision.push_back(r->precision);
      recall.push_back(r->recall);
    }
    report.curves.push_back({cond.second, cond.first, members.size(), mean_of(f1), sample_std(f1),
                             mean_of(precision), mean_of(recall)});
  }

  const auto find = [&](std::size_t n, const std::string& mode) -> const std::vector<const RunRecord*>* {
    if (auto it = groups.find({n, mode}); it != groups.end()) return &it->second;
    if (mode == "inter") {
      if (auto it = groups.find({0, mode}); it != groups.end()) return &it->second;
    }
    return nullptr;
  };
  std::set<std::size_t> levels;
  for (const auto& [cond, members] : groups) levels.insert(cond.first);
  const std::pair<const char*, const char*> pairs[] = {
      {"inter", "intra"}, {"cross", "intra"}, {"cross", "inter"}};
  for (const std::size_t n : levels) {
    for (const auto& [method, baseline] : pairs) {
      const auto* a = find(n, method);
      const auto* b = find(n, baseline);
      if (!a || !b) continue;
      ComparisonRow row;
      row.n_target = n;
      row.method = method;
      row.baseline = baseline;
      std::vector<double> fa;
      std::vector<double> fb;
      for (const RunRecord* r : *a) fa.push_back(r->f1);
      for (const RunRecord* r : *b) fb.push_back(r->f1);
      row.method_f1 = mean_of(fa);
      row.baseline_f1 = mean_of(fb);
      row.relative_improvement = row.baseline_f1 > 0.0
                                     ? (row.method_f1 - row.baseline_f1) / row.baseline_f1
                                     : std::numeric_limits<double>::quiet_NaN();
      std::map<std::uint64_t, double> by_seed;
      for (const RunRecord* r : *b) by_seed[r->seed] = r->f1;
      std::vector<double> pa;
      std::vector<double> pb;
      for (const RunRecord* r : *a) {
        if (auto it = by_seed.find(r->seed); it != by_seed.end()) {
          pa.push_back(r->f1);
          pb.push_back(it->second);
        }
      }
      row.paired_runs = pa.size();
      if (pa.size() >= 2) {
        row.tested = true;
        row.test = paired_t_test(pa, pb);
      }
      report.comparisons.push_back(row);
    }
  }
  return report;
}

std::string format_curves_csv(const CurveReport& report) {
  std::string out = "mode,n_target,runs,f1_mean,f1_std,precision_mean,recall_mean\n";
  for (const auto& r : report.curves) {
    out += r.mode + ',' + std::to_string(r.n_target) + ',' + std::to_string(r.runs) + ',' +
           num(r.f1_mean) + ',' + num(r.f1_std) + ',' + num(r.precision_mean) + ',' +
           num(r.recall_mean) + '\n';
  }
  return out;
}

std::string format_comparisons_csv(const CurveReport& report) {
  std::string out =
      "n_target,method,baseline,method_f1,baseline_f1,relative_improvement,pairing,paired_runs,"
      "t,p_value,degenerate\n";
  for (const auto& r : report.comparisons) {
    out += std::to_string(r.n_target) + ',' + r.method + ',' + r.baseline + ',' +
           num(r.method_f1) + ',' + num(r.baseline_f1) + ',' + num(r.relative_improvement) +
           ",run_seed," + std::to_string(r.paired_runs) + ',' +
           (r.tested ? num(r.test.t) : std::string()) + ',' +
           (r.tested ? num(r.test.p_value) : std::string()) + ',' +
           (r.tested && r.test.degenerate ? "1" : "0") + '\n';
  }
  return out;
}

}  // namespace nucleikit
