#include "cli/commands.hpp"

#include <map>
#include <memory>
#include <ostream>
#include <set>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>
#include <spdlog/sinks/stdout_sinks.h>
#include <spdlog/spdlog.h>

#include "cli/json_config.hpp"
#include "nucleikit/detection.hpp"
#include "nucleikit/fixtures.hpp"
#include "nucleikit/io.hpp"
#include "nucleikit/manifest.hpp"
#include "nucleikit/normalization.hpp"
#include "nucleikit/parallel.hpp"
#include "nucleikit/report.hpp"

namespace nucleikit::cli {

namespace {

using nlohmann::json;

std::string_view command_name(Command c) {
  switch (c) {
    case Command::label: return "label";
    case Command::normalize: return "normalize";
    case Command::detect: return "detect";
    case Command::eval: return "eval";
    case Command::tune: return "tune";
    case Command::dataset_build: return "dataset build";
    case Command::report: return "report";
    case Command::fixtures: return "fixtures";
  }
  return "";
}

json metrics_json(const Metrics& m) {
  return {{"precision", m.precision}, {"recall", m.recall}, {"f1", m.f1}};
}

json config_json(const RunConfig& c) {
  json j;
  j["seed"] = c.seed;
  j["log_level"] = c.log_level;
  const auto put_path = [&](const char* key, const fs::path& p) {
    if (!p.empty()) j[key] = p.generic_string();
  };
  put_path("manifest", c.manifest);
  put_path("in", c.in);
  put_path("out", c.out);
  put_path("pmap", c.pmap);
  put_path("pmaps", c.pmaps);
  put_path("detections", c.detections);
  put_path("tuned", c.tuned);
  if (!c.split.empty()) j["split"] = c.split;
  switch (c.command) {
    case Command::label:
      j["center_radius_px"] = c.label.center_radius_px;
      j["class_weights"] = c.label.class_weights;
      break;
    case Command::normalize:
      j["low_pct"] = c.low_pct;
      j["high_pct"] = c.high_pct;
      j["bits"] = c.bits;
      break;
    case Command::detect:
      j["kappa_e"] = c.kappa_e;
      j["kappa_c"] = c.kappa_c;
      if (c.mpp) j["microns_per_pixel"] = *c.mpp;
      break;
    case Command::tune:
      j["kappa_e_values"] = c.grid.kappa_e_values;
      j["kappa_c_values"] = c.grid.kappa_c_values;
      j["cap_um"] = c.cap_um;
      break;
    case Command::eval:
      j["cap_um"] = c.cap_um;
      if (!c.mode.empty()) j["mode"] = c.mode;
      if (c.n_target) j["n_target"] = *c.n_target;
      break;
    case Command::dataset_build:
      j["mode"] = c.mode;
      if (c.n_target) j["n_target"] = *c.n_target;
      break;
    case Command::report: {
      json runs = json::array();
      for (const auto& r : c.runs) runs.push_back(r.generic_string());
      j["runs"] = runs;
      break;
    }
    case Command::fixtures:
      j["n_images"] = c.n_images;
      j["n_validation"] = c.n_validation;
      j["n_test"] = c.n_test;
      j["n_variants"] = c.n_variants;
      j["n_nuclei"] = c.n_nuclei;
      j["width"] = c.width;
      j["height"] = c.height;
      j["min_separation_px"] = c.min_separation_px;
      j["bump_sigma_px"] = c.bump_sigma_px;
      j["noise_amplitude"] = c.noise;
      j["microns_per_pixel"] = c.fixture_mpp;
      j["repeats"] = c.repeats;
      break;
  }
  return j;
}

// The metadata record sits inside an output directory, or next to an output
// file as <file>.meta.json. It carries no timestamps so reruns reproduce it.
void write_metadata(const RunConfig& c, const fs::path& target, bool is_directory,
                    const json& extra = json::object()) {
  json doc;
  doc["command"] = std::string(command_name(c.command));
  doc["version"] = kVersion;
  doc["seed"] = c.seed;
  doc["config"] = config_json(c);
  if (!extra.empty()) doc["outputs"] = extra;
  const fs::path path =
      is_directory ? target / "run_metadata.json" : fs::path(target.string() + ".meta.json");
  write_file(path, doc.dump(2) + "\n");
}

void require(bool ok, const std::string& what) {
  if (!ok) throw Error(ErrorCode::invalid_argument, what);
}

void ensure_parent(const fs::path& file) {
  if (file.has_parent_path()) fs::create_directories(file.parent_path());
}

std::string stem_of(const fs::path& p) { return p.stem().string(); }

fs::path pmap_dir(const RunConfig& c) {
  return !c.pmaps.empty() ? c.pmaps : fs::absolute(c.manifest).parent_path() / "pmaps";
}

Split split_or(const RunConfig& c, Split fallback) {
  return c.split.empty() ? fallback : parse_split(c.split);
}

void check_unique_stems(const std::vector<fs::path>& images) {
  std::set<std::string> stems;
  for (const auto& p : images) {
    if (!stems.insert(stem_of(p)).second) {
      throw Error(ErrorCode::duplicate, "two images share the file stem '" + stem_of(p) + "'");
    }
  }
}

Thresholds thresholds_for(const RunConfig& c) {
  if (c.tuned.empty()) return Thresholds(c.kappa_e, c.kappa_c);
  const std::string text = read_file(c.tuned);
  try {
    const json doc = json::parse(text);
    return Thresholds(doc.at("kappa_e").get<double>(), doc.at("kappa_c").get<double>());
  } catch (const json::exception& e) {
    throw Error(ErrorCode::parse, c.tuned.string() + ": not a tune result (" + e.what() + ")");
  }
}

// ---------------------------------------------------------------------------

void run_label(const RunConfig& c, std::ostream& out) {
  require(!c.manifest.empty() && !c.out.empty(), "label needs --manifest and --out");
  c.label.validate();
  const DatasetManifest manifest = load_manifest(c.manifest);
  struct Job {
    fs::path image;
    const ManifestEntry* entry;
  };
  std::vector<Job> jobs;
  for (const auto& e : manifest.entries) {
    jobs.push_back({e.image, &e});
    if (e.variant_group) {
      for (const auto& v : manifest.ensembles.at(*e.variant_group)) jobs.push_back({v, &e});
    }
  }
  std::vector<fs::path> images;
  for (const auto& j : jobs) images.push_back(j.image);
  check_unique_stems(images);
  fs::create_directories(c.out);

  parallel_for(jobs.size(), c.threads, [&](std::size_t i) {
    const Job& job = jobs[i];
    const AnnotationSet gt =
        read_annotations(job.entry->annotations, job.entry->resolution, image_dims(job.image));
    const LabelMask mask = generate_label_mask(gt, c.label);
    const WeightMap weights = generate_weight_map(mask, c.label);
    const fs::path mask_path = c.out / (stem_of(job.image) + "_mask.png");
    const fs::path weight_path = c.out / (stem_of(job.image) + "_weights.pmap");
    write_label_mask(mask_path, mask);
    write_pmap(weights, weight_path);
    if (!(read_label_mask(mask_path).codes == mask.codes).all() ||
        !(read_weight_map(weight_path).weights() == weights.weights()).all()) {
      throw Error(ErrorCode::io, "written label artifacts for " + job.image.string() + " do not read back");
    }
    spdlog::debug("labeled {}", job.image.string());
  });
  write_metadata(c, c.out, true, {{"images", jobs.size()}});
  out << "labeled " << jobs.size() << " images\n";
}

void run_normalize(const RunConfig& c, std::ostream& out) {
  require(!c.in.empty() && !c.out.empty(), "normalize needs --in and --out");
  require(c.bits == 0 || c.bits == 8 || c.bits == 16, "--bits must be 8 or 16");
  const GrayPng input = read_gray_png(c.in);
  const Plane<double> normalized = normalize_linear(input.values, c.low_pct, c.high_pct);
  ensure_parent(c.out);
  write_gray_png(c.out, normalized, c.bits == 0 ? input.bit_depth : c.bits);
  write_metadata(c, c.out, false);
  out << "normalized " << c.in.string() << " -> " << c.out.string() << "\n";
}

void detect_one(const fs::path& pmap, const Thresholds& th, const ResolutionSpec& res,
                const fs::path& target) {
  const DetectionSet detections = detect_centers(read_posterior_map(pmap), th, res);
  write_detections(target, detections);
  if (read_detections(target, res).size() != detections.size()) {
    throw Error(ErrorCode::io, target.string() + " does not read back");
  }
}

void run_detect(const RunConfig& c, std::ostream& out) {
  require(!c.out.empty(), "detect needs --out");
  const Thresholds th = thresholds_for(c);
  if (!c.pmap.empty()) {
    require(c.mpp.has_value(), "detect needs --mpp with --pmap");
    ensure_parent(c.out);
    detect_one(c.pmap, th, ResolutionSpec(*c.mpp), c.out);
    write_metadata(c, c.out, false);
    out << "wrote " << c.out.string() << "\n";
    return;
  }
  require(!c.manifest.empty(), "detect needs --pmap or --manifest");
  const DatasetManifest manifest = load_manifest(c.manifest);
  const auto entries = manifest.entries_in(split_or(c, Split::test));
  std::vector<fs::path> images;
  for (const auto* e : entries) images.push_back(e->image);
  check_unique_stems(images);
  fs::create_directories(c.out);
  const fs::path dir = pmap_dir(c);
  parallel_for(entries.size(), c.threads, [&](std::size_t i) {
    const auto* e = entries[i];
    detect_one(dir / (stem_of(e->image) + ".pmap"), th, e->resolution,
               c.out / (stem_of(e->image) + ".csv"));
  });
  write_metadata(c, c.out, true, {{"images", entries.size()}});
  out << "detected centers in " << entries.size() << " images\n";
}

void run_eval(const RunConfig& c, std::ostream& out) {
  require(!c.detections.empty() && !c.manifest.empty() && !c.out.empty(),
          "eval needs --detections, --manifest and --out");
  const DatasetManifest manifest = load_manifest(c.manifest);
  const Split split = split_or(c, Split::test);
  const auto entries = manifest.entries_in(split);
  if (entries.empty()) {
    throw Error(ErrorCode::insufficient_data,
                "no entries in the " + std::string(to_string(split)) + " split");
  }
  std::vector<fs::path> images;
  for (const auto* e : entries) images.push_back(e->image);
  check_unique_stems(images);

  std::vector<MatchResult> results(entries.size());
  parallel_for(entries.size(), c.threads, [&](std::size_t i) {
    const auto* e = entries[i];
    const AnnotationSet gt = read_annotations(e->annotations, e->resolution, image_dims(e->image));
    const DetectionSet dets =
        read_detections(c.detections / (stem_of(e->image) + ".csv"), e->resolution);
    results[i] = match_hungarian(dets, gt, c.cap_um);
  });

  json doc;
  doc["cap_um"] = c.cap_um;
  doc["split"] = std::string(to_string(split));
  if (!c.mode.empty()) {
    static_cast<void>(parse_mode(c.mode));
    doc["condition"] = {{"mode", c.mode}, {"n_target", c.n_target.value_or(0)}, {"seed", c.seed}};
  }
  json per_image = json::array();
  std::size_t tp = 0, fp = 0, fn = 0;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const auto& r = results[i];
    json row = metrics_json(compute_metrics(r));
    row["image"] = stem_of(entries[i]->image);
    row["tp"] = r.tp;
    row["fp"] = r.fp;
    row["fn"] = r.fn;
    per_image.push_back(std::move(row));
    tp += r.tp;
    fp += r.fp;
    fn += r.fn;
  }
  doc["images"] = std::move(per_image);
  const Metrics micro = aggregate_micro(results);
  doc["micro"] = metrics_json(micro);
  doc["micro"]["tp"] = tp;
  doc["micro"]["fp"] = fp;
  doc["micro"]["fn"] = fn;
  ensure_parent(c.out);
  write_file(c.out, doc.dump(2) + "\n");
  write_metadata(c, c.out, false);
  out << "micro f1 " << micro.f1 << " over " << entries.size() << " images\n";
}

void run_tune(const RunConfig& c, std::ostream& out) {
  require(!c.manifest.empty() && !c.out.empty(), "tune needs --manifest and --out");
  const DatasetManifest manifest = load_manifest(c.manifest);
  const Split split = split_or(c, Split::validation);
  const auto entries = manifest.entries_in(split);
  std::vector<fs::path> images;
  for (const auto* e : entries) images.push_back(e->image);
  check_unique_stems(images);
  const fs::path dir = pmap_dir(c);

  std::vector<std::optional<ValidationItem>> loaded(entries.size());
  parallel_for(entries.size(), c.threads, [&](std::size_t i) {
    const auto* e = entries[i];
    const fs::path pmap = dir / (stem_of(e->image) + ".pmap");
    PosteriorMap post = read_posterior_map(pmap);
    AnnotationSet gt = read_annotations(e->annotations, e->resolution, post.dims());
    loaded[i].emplace(ValidationItem{std::move(post), std::move(gt)});
  });
  std::vector<ValidationItem> items;
  for (auto& item : loaded) items.push_back(std::move(*item));

  const TuningResult result = grid_search(items, c.grid, c.cap_um, c.threads);

  const fs::path grid_csv = c.out.parent_path() / (c.out.stem().string() + "_grid.csv");
  std::ostringstream table;
  table << "kappa_e,kappa_c,tp,fp,fn,precision,recall,f1\n";
  for (const auto& p : result.table) {
    table << json(p.kappa_e).dump() << ',' << json(p.kappa_c).dump() << ',' << p.tp << ','
          << p.fp << ',' << p.fn << ',' << json(p.metrics.precision).dump() << ','
          << json(p.metrics.recall).dump() << ',' << json(p.metrics.f1).dump() << '\n';
  }
  json doc;
  doc["kappa_e"] = result.thresholds.kappa_e;
  doc["kappa_c"] = result.thresholds.kappa_c;
  doc["cap_um"] = c.cap_um;
  doc["split"] = std::string(to_string(split));
  doc["images"] = items.size();
  doc["micro"] = metrics_json(result.metrics);
  doc["grid_csv"] = grid_csv.filename().string();
  ensure_parent(c.out);
  write_file(c.out, doc.dump(2) + "\n");
  write_file(grid_csv, table.str());
  write_metadata(c, c.out, false);
  out << "tuned kappa_e=" << result.thresholds.kappa_e << " kappa_c=" << result.thresholds.kappa_c
      << " f1=" << result.metrics.f1 << "\n";
}

void run_dataset_build(const RunConfig& c, std::ostream& out) {
  require(!c.manifest.empty() && !c.out.empty(), "dataset build needs --manifest and --out");
  require(!c.mode.empty(), "dataset build needs --mode");
  const DatasetManifest manifest = load_manifest(c.manifest);
  const SupervisionMode mode = parse_mode(c.mode);
  const Split split = split_or(c, Split::train);
  const auto pairs = compose_training_set(manifest, mode, c.n_target, split);

  json list = json::array();
  for (const auto& p : pairs) {
    list.push_back({{"image", p.image.generic_string()},
                    {"annotations", p.annotations.generic_string()},
                    {"microns_per_pixel", p.resolution.microns_per_pixel()},
                    {"synthetic", p.synthetic}});
  }
  json doc;
  doc["mode"] = c.mode;
  doc["split"] = std::string(to_string(split));
  if (c.n_target) doc["n_target"] = *c.n_target;
  doc["n_pairs"] = pairs.size();
  doc["pairs"] = std::move(list);
  ensure_parent(c.out);
  write_file(c.out, doc.dump(2) + "\n");
  write_metadata(c, c.out, false);
  out << pairs.size() << " pairs\n";
}

void run_report(const RunConfig& c, std::ostream& out) {
  require(!c.runs.empty() && !c.out.empty(), "report needs --runs and --out");
  std::vector<RunRecord> runs;
  for (const auto& r : c.runs) runs.push_back(load_run(r));
  const CurveReport report = report_curves(runs);
  const fs::path comparisons = c.out.parent_path() / (c.out.stem().string() + "_comparisons.csv");
  ensure_parent(c.out);
  write_file(c.out, format_curves_csv(report));
  write_file(comparisons, format_comparisons_csv(report));
  write_metadata(c, c.out, false);
  out << "reported " << report.curves.size() << " conditions\n";
}

void run_fixtures(const RunConfig& c, std::ostream& out) {
  require(!c.out.empty(), "fixtures needs --out");
  require(c.repeats >= 1, "--repeats must be >= 1");
  for (int r = 0; r < c.repeats; ++r) {
    FixtureDatasetSpec spec;
    spec.image.seed = c.seed + static_cast<std::uint64_t>(r);
    spec.image.dims = {c.width, c.height};
    spec.image.n_nuclei = c.n_nuclei;
    spec.image.min_separation_px = c.min_separation_px;
    spec.image.bump_sigma_px = c.bump_sigma_px;
    spec.image.noise_amplitude = c.noise;
    spec.image.microns_per_pixel = c.fixture_mpp;
    spec.n_images = c.n_images;
    spec.n_validation = c.n_validation;
    spec.n_test = c.n_test;
    spec.n_variants = c.n_variants;
    const fs::path dir =
        c.repeats == 1 ? c.out : c.out / ("seed_" + std::to_string(spec.image.seed));
    write_fixture_dataset(dir, spec);
    load_manifest(dir / "manifest.json");
    RunConfig echo = c;
    echo.seed = spec.image.seed;
    write_metadata(echo, dir, true);
    out << "wrote fixture dataset " << dir.string() << "\n";
  }
}

std::string one_line(std::string s) {
  for (char& ch : s) {
    if (ch == '\n' || ch == '\r') ch = ' ';
  }
  return s;
}

}  // namespace

void run_pipeline(const RunConfig& config, std::ostream& out) {
  switch (config.command) {
    case Command::label: return run_label(config, out);
    case Command::normalize: return run_normalize(config, out);
    case Command::detect: return run_detect(config, out);
    case Command::eval: return run_eval(config, out);
    case Command::tune: return run_tune(config, out);
    case Command::dataset_build: return run_dataset_build(config, out);
    case Command::report: return run_report(config, out);
    case Command::fixtures: return run_fixtures(config, out);
  }
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  RunConfig c;
  CLI::App app{"nucleikit: Voronoi labels, center detection and matching evaluation for nuclei"};
  app.config_formatter(std::make_shared<ConfigJSON>());
  app.set_config("--config", "", "JSON config file supplying any flag");
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);
  app.add_option("--threads", c.threads, "Worker threads (0 = all cores)");
  app.add_option("--seed", c.seed, "Seed recorded with every run");
  app.add_option("--log-level", c.log_level, "trace|debug|info|warn|error|off");

  std::vector<double> weights;
  std::size_t n_target = 0;
  double mpp = 0.0;
  CLI::Option* n_target_opt = nullptr;
  CLI::Option* mpp_opt = nullptr;

  auto* label = app.add_subcommand("label", "Write Voronoi label masks and weight maps");
  label->add_option("--manifest", c.manifest)->required();
  label->add_option("--out", c.out)->required();
  label->add_option("--center-radius", c.label.center_radius_px);
  label->add_option("--weights", weights, "bg,object,edge,center")->delimiter(',')->expected(4);

  auto* normalize = app.add_subcommand("normalize", "Linear min/max intensity normalization");
  normalize->add_option("--in", c.in)->required();
  normalize->add_option("--out", c.out)->required();
  normalize->add_option("--low", c.low_pct);
  normalize->add_option("--high", c.high_pct);
  normalize->add_option("--bits", c.bits, "Output bit depth (default: same as input)");

  auto* detect = app.add_subcommand("detect", "Detect nuclei centers in posterior maps");
  detect->add_option("--pmap", c.pmap);
  detect->add_option("--kappa-e", c.kappa_e);
  detect->add_option("--kappa-c", c.kappa_c);
  mpp_opt = detect->add_option("--mpp", mpp);
  detect->add_option("--out", c.out)->required();
  detect->add_option("--manifest", c.manifest);
  detect->add_option("--split", c.split);
  detect->add_option("--pmaps", c.pmaps);
  detect->add_option("--tuned", c.tuned, "Read thresholds from a tune result");

  auto* eval = app.add_subcommand("eval", "Hungarian matching evaluation");
  eval->add_option("--detections", c.detections)->required();
  eval->add_option("--manifest", c.manifest)->required();
  eval->add_option("--cap-um", c.cap_um);
  eval->add_option("--out", c.out)->required();
  eval->add_option("--split", c.split);
  eval->add_option("--mode", c.mode, "Condition tag recorded for report");
  auto* eval_n_target = eval->add_option("--n-target", n_target, "Condition tag recorded for report");

  auto* tune = app.add_subcommand("tune", "Grid search of kappa_e and kappa_c");
  tune->add_option("--manifest", c.manifest)->required();
  tune->add_option("--split", c.split);
  tune->add_option("--cap-um", c.cap_um);
  tune->add_option("--out", c.out)->required();
  tune->add_option("--pmaps", c.pmaps);
  tune->add_option("--kappa-e-values", c.grid.kappa_e_values)->delimiter(',');
  tune->add_option("--kappa-c-values", c.grid.kappa_c_values)->delimiter(',');

  auto* dataset = app.add_subcommand("dataset", "Training-set composition");
  dataset->require_subcommand(1);
  auto* build = dataset->add_subcommand("build", "Compose an inter/intra/cross training set");
  build->add_option("--manifest", c.manifest)->required();
  build->add_option("--mode", c.mode)->required()->check(CLI::IsMember({"inter", "intra", "cross"}));
  n_target_opt = build->add_option("--n-target", n_target);
  build->add_option("--split", c.split);
  build->add_option("--out", c.out)->required();

  auto* report = app.add_subcommand("report", "Aggregate evaluated runs into curve CSVs");
  report->add_option("--runs", c.runs)->required();
  report->add_option("--out", c.out)->required();

  auto* fixtures = app.add_subcommand("fixtures", "Generate a synthetic dataset");
  fixtures->add_option("--out", c.out)->required();
  fixtures->add_option("--n-images", c.n_images);
  fixtures->add_option("--n-validation", c.n_validation);
  fixtures->add_option("--n-test", c.n_test);
  fixtures->add_option("--n-variants", c.n_variants);
  fixtures->add_option("--n-nuclei", c.n_nuclei);
  fixtures->add_option("--width", c.width);
  fixtures->add_option("--height", c.height);
  fixtures->add_option("--min-separation", c.min_separation_px);
  fixtures->add_option("--sigma", c.bump_sigma_px);
  fixtures->add_option("--noise", c.noise);
  fixtures->add_option("--mpp", c.fixture_mpp);
  fixtures->add_option("--repeats", c.repeats, "Datasets with seeds seed..seed+repeats-1");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::CallForVersion& e) {
    out << kVersion << "\n";
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: code=usage message=" << one_line(e.what()) << "\n";
    return 2;
  }

  if (label->parsed()) c.command = Command::label;
  if (normalize->parsed()) c.command = Command::normalize;
  if (detect->parsed()) c.command = Command::detect;
  if (eval->parsed()) c.command = Command::eval;
  if (tune->parsed()) c.command = Command::tune;
  if (build->parsed()) c.command = Command::dataset_build;
  if (report->parsed()) c.command = Command::report;
  if (fixtures->parsed()) c.command = Command::fixtures;
  if (!weights.empty()) std::copy(weights.begin(), weights.end(), c.label.class_weights.begin());
  if (n_target_opt->count() > 0 || eval_n_target->count() > 0) c.n_target = n_target;
  if (mpp_opt->count() > 0) c.mpp = mpp;

  auto logger = spdlog::get("nucleikit");
  if (!logger) logger = spdlog::stderr_logger_mt("nucleikit");
  spdlog::set_default_logger(logger);
  spdlog::set_level(spdlog::level::from_str(c.log_level));

  try {
    run_pipeline(c, out);
  } catch (const Error& e) {
    err << "error: code=" << to_string(e.code()) << " message=" << one_line(e.what()) << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << "error: code=internal message=" << one_line(e.what()) << "\n";
    return 1;
  }
  return 0;
}

}  // namespace nucleikit::cli
