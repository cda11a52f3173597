#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "nucleikit/manifest.hpp"
#include "nucleikit/types.hpp"

namespace nucleikit {

/// Parameters of one synthetic image. Every generator below is a pure
/// function of the spec, seed included.
struct FixtureSpec {
  std::uint64_t seed = 0;
  Dims dims{64, 64};
  int n_nuclei = 10;
  double min_separation_px = 12.0;
  double bump_sigma_px = 2.0;
  double noise_amplitude = 0.0;  // in [0, 0.2)
  double microns_per_pixel = 0.5;

  void validate() const;
};

inline constexpr int kLayoutAttemptLimit = 10000;

/// Independent stream seed derived from a base seed (splitmix64 mixing).
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

/// Rejection-sampled layout with pairwise distances >= min_separation_px.
/// Ids run 1..n_nuclei.
AnnotationSet sample_layout(const FixtureSpec& spec);

/// Pseudo-posteriors shaped like a trained four-class model: Gaussian center
/// bumps, elevated edge posteriors along the Voronoi boundaries and
/// background posteriors where the labeling rule assigns background.
PosteriorMap render_posteriors(const AnnotationSet& gt, const FixtureSpec& spec);

/// Fluorescence-like intensity image in [0, 1]: bright blobs on a dark field.
Plane<double> render_image(const AnnotationSet& gt, const FixtureSpec& spec);

/// n photometric variants (gain and offset drawn within +-jitter), geometry
/// untouched so the source annotations stay valid.
std::vector<Plane<double>> make_variants(const Plane<double>& image, int n, std::uint64_t seed,
                                         double jitter = 0.05);

/// Picks variants by index, keeping the given order.
std::vector<Plane<double>> select_variants(std::span<const Plane<double>> variants,
                                           std::span<const int> indices);

struct FixtureDatasetSpec {
  FixtureSpec image;  // seed is the dataset seed; per-image seeds derive from it
  int n_images = 20;
  int n_validation = 5;
  int n_test = 5;
  int n_variants = 3;  // per source-domain training image
};

/// Writes images/, annotations/, pmaps/, variants/ and manifest.json under
/// out_dir. Training images alternate between source entries (with an
/// ensemble of variants) and target entries; validation and test entries
/// are target-domain.
DatasetManifest write_fixture_dataset(const std::filesystem::path& out_dir,
                                      const FixtureDatasetSpec& spec);

}  // namespace nucleikit
