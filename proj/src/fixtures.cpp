#include "nucleikit/fixtures.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>
#include <set>
#include <string>

#include "nucleikit/io.hpp"
#include "nucleikit/voronoi.hpp"

namespace nucleikit {

namespace {

// Uniform double in [0, 1) from the top 53 bits; unlike the standard
// distributions this mapping is identical across standard libraries.
double unit(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

constexpr std::uint64_t kNoiseStream = 0x6e6f697365;  // "noise"
constexpr std::uint64_t kImageStream = 0x696d616765;  // "image"

Plane<double> gaussian_bumps(const AnnotationSet& gt, double sigma, double amplitude) {
  const Dims d = gt.image_dims();
  Plane<double> out = Plane<double>::Zero(d.height, d.width);
  const int reach = static_cast<int>(std::ceil(4.0 * sigma));
  const double denom = 2.0 * sigma * sigma;
  for (const auto& p : gt.points()) {
    const int cx = static_cast<int>(p.position.x());
    const int cy = static_cast<int>(p.position.y());
    for (int y = std::max(0, cy - reach); y <= std::min(d.height - 1, cy + reach + 1); ++y) {
      for (int x = std::max(0, cx - reach); x <= std::min(d.width - 1, cx + reach + 1); ++x) {
        const double dx = x - p.position.x();
        const double dy = y - p.position.y();
        out(y, x) += amplitude * std::exp(-(dx * dx + dy * dy) / denom);
      }
    }
  }
  return out;
}

std::string image_name(int i) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "img_%03d", i);
  return buf;
}

}  // namespace

void FixtureSpec::validate() const {
  if (dims.width <= 0 || dims.height <= 0) {
    throw Error(ErrorCode::invalid_argument, "fixture dimensions must be positive");
  }
  if (n_nuclei < 0) throw Error(ErrorCode::invalid_argument, "n_nuclei must be >= 0");
  if (!(bump_sigma_px > 0.0)) throw Error(ErrorCode::invalid_argument, "bump sigma must be positive");
  if (!(min_separation_px > 2.0 * bump_sigma_px)) {
    throw Error(ErrorCode::invalid_argument, "min separation must exceed twice the bump sigma");
  }
  if (!(noise_amplitude >= 0.0 && noise_amplitude < 0.2)) {
    throw Error(ErrorCode::invalid_argument, "noise amplitude must lie in [0, 0.2)");
  }
  static_cast<void>(ResolutionSpec(microns_per_pixel));
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

AnnotationSet sample_layout(const FixtureSpec& spec) {
  spec.validate();
  std::mt19937_64 rng(spec.seed);
  const double min_sq = spec.min_separation_px * spec.min_separation_px;
  std::vector<Annotation> points;
  int attempts = 0;
  while (static_cast<int>(points.size()) < spec.n_nuclei) {
    if (++attempts > kLayoutAttemptLimit) {
      throw Error(ErrorCode::infeasible,
                  "could not place " + std::to_string(spec.n_nuclei) + " nuclei " +
                      std::to_string(spec.min_separation_px) + " px apart within " +
                      std::to_string(kLayoutAttemptLimit) + " attempts");
    }
    const Point candidate(unit(rng) * spec.dims.width, unit(rng) * spec.dims.height);
    const bool clear = std::all_of(points.begin(), points.end(), [&](const Annotation& a) {
      return (a.position - candidate).squaredNorm() >= min_sq;
    });
    if (clear) points.push_back({static_cast<std::int64_t>(points.size() + 1), candidate});
  }
  return AnnotationSet(std::move(points), ResolutionSpec(spec.microns_per_pixel), spec.dims);
}

PosteriorMap render_posteriors(const AnnotationSet& gt, const FixtureSpec& spec) {
  spec.validate();
  const Dims d = gt.image_dims();
  constexpr double low = 1e-3;
  constexpr double high = 0.9;

  Plane<double> bg = Plane<double>::Constant(d.height, d.width, high);
  Plane<double> edge = Plane<double>::Constant(d.height, d.width, low);
  Plane<double> object = Plane<double>::Constant(d.height, d.width, low);
  Plane<double> center = Plane<double>::Constant(d.height, d.width, low);
  if (!gt.empty()) {
    const LabelMask mask = generate_label_mask(gt, LabelParams{});
    const Plane<double> bumps = gaussian_bumps(gt, spec.bump_sigma_px, 1.0).min(1.0);
    for (int y = 0; y < d.height; ++y) {
      for (int x = 0; x < d.width; ++x) {
        const LabelCode code = mask.at(x, y);
        const bool in_cell = code == LabelCode::object || code == LabelCode::center;
        bg(y, x) = code == LabelCode::background ? high : low;
        edge(y, x) = code == LabelCode::edge ? high : low;
        object(y, x) = in_cell ? 0.6 * (1.0 - bumps(y, x)) + 0.05 : low;
        center(y, x) = std::max(low, bumps(y, x));
      }
    }
  }
  if (spec.noise_amplitude > 0.0) {
    std::mt19937_64 rng(derive_seed(spec.seed, kNoiseStream));
    for (Plane<double>* c : {&bg, &object, &edge, &center}) {
      for (Eigen::Index i = 0; i < c->size(); ++i) c->data()[i] += spec.noise_amplitude * unit(rng);
    }
  }
  const Plane<double> total = bg + object + edge + center;
  return PosteriorMap({(bg / total).cast<float>(), (object / total).cast<float>(),
                       (edge / total).cast<float>(), (center / total).cast<float>()});
}

Plane<double> render_image(const AnnotationSet& gt, const FixtureSpec& spec) {
  spec.validate();
  Plane<double> img = 0.08 + gaussian_bumps(gt, 1.5 * spec.bump_sigma_px, 0.8);
  std::mt19937_64 rng(derive_seed(spec.seed, kImageStream));
  for (Eigen::Index i = 0; i < img.size(); ++i) {
    img.data()[i] += 0.04 * (unit(rng) - 0.5);
  }
  return img.max(0.0).min(1.0);
}

std::vector<Plane<double>> make_variants(const Plane<double>& image, int n, std::uint64_t seed,
                                         double jitter) {
  if (n < 1) throw Error(ErrorCode::invalid_argument, "variant count must be >= 1");
  if (!(jitter >= 0.0 && jitter <= 0.05)) {
    throw Error(ErrorCode::invalid_argument, "variant jitter must lie in [0, 0.05]");
  }
  std::mt19937_64 rng(seed);
  std::vector<Plane<double>> out;
  out.reserve(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) {
    const double gain = 1.0 + jitter * (2.0 * unit(rng) - 1.0);
    const double offset = jitter * (2.0 * unit(rng) - 1.0);
    out.push_back(gain * image + offset);
  }
  return out;
}

std::vector<Plane<double>> select_variants(std::span<const Plane<double>> variants,
                                           std::span<const int> indices) {
  std::set<int> seen;
  std::vector<Plane<double>> out;
  for (const int i : indices) {
    if (i < 0 || static_cast<std::size_t>(i) >= variants.size()) {
      throw Error(ErrorCode::out_of_bounds, "variant index " + std::to_string(i) + " out of range");
    }
    if (!seen.insert(i).second) {
      throw Error(ErrorCode::duplicate, "variant index " + std::to_string(i) + " selected twice");
    }
    out.push_back(variants[static_cast<std::size_t>(i)]);
  }
  return out;
}

DatasetManifest write_fixture_dataset(const std::filesystem::path& out_dir,
                                      const FixtureDatasetSpec& spec) {
  spec.image.validate();
  const int n_train = spec.n_images - spec.n_validation - spec.n_test;
  if (spec.n_images < 1 || spec.n_validation < 0 || spec.n_test < 0 || n_train < 0) {
    throw Error(ErrorCode::invalid_argument, "invalid fixture split sizes");
  }
  if (spec.n_variants < 1) throw Error(ErrorCode::invalid_argument, "n_variants must be >= 1");

  namespace fs = std::filesystem;
  const fs::path root = fs::absolute(out_dir).lexically_normal();
  for (const char* sub : {"images", "annotations", "pmaps", "variants"}) {
    fs::create_directories(root / sub);
  }

  DatasetManifest manifest;
  manifest.base_dir = root;
  for (int i = 0; i < spec.n_images; ++i) {
    FixtureSpec image_spec = spec.image;
    image_spec.seed = derive_seed(spec.image.seed, static_cast<std::uint64_t>(i));
    const std::string name = image_name(i);
    const AnnotationSet gt = sample_layout(image_spec);
    const Plane<double> img = render_image(gt, image_spec);

    ManifestEntry entry;
    entry.image = root / "images" / (name + ".png");
    entry.annotations = root / "annotations" / (name + ".csv");
    entry.resolution = ResolutionSpec(image_spec.microns_per_pixel);
    entry.split = i < n_train                        ? Split::train
                  : i < n_train + spec.n_validation ? Split::validation
                                                     : Split::test;
    const bool source = entry.split == Split::train && i % 2 == 0;
    entry.domain = source ? "source" : "target";

    write_gray_png(entry.image, img, 16);
    write_annotations(entry.annotations, gt);
    write_pmap(render_posteriors(gt, image_spec), root / "pmaps" / (name + ".pmap"));
    if (source) {
      entry.variant_group = name;
      auto& list = manifest.ensembles[name];
      const auto variants = make_variants(img, spec.n_variants, derive_seed(image_spec.seed, 1));
      for (std::size_t k = 0; k < variants.size(); ++k) {
        char suffix[16];
        std::snprintf(suffix, sizeof(suffix), "_v%02zu.png", k);
        list.push_back(root / "variants" / (name + suffix));
        write_gray_png(list.back(), variants[k], 16);
      }
    }
    manifest.entries.push_back(std::move(entry));
  }
  save_manifest(manifest, root / "manifest.json");
  return manifest;
}

}  // namespace nucleikit
