#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "nucleikit/types.hpp"

namespace nucleikit {

namespace fs = std::filesystem;

enum class Split { train, validation, test };
enum class SupervisionMode { inter, intra, cross };

std::string_view to_string(Split split);
std::string_view to_string(SupervisionMode mode);
Split parse_split(std::string_view text);
SupervisionMode parse_mode(std::string_view text);

struct ManifestEntry {
  fs::path image;        // resolved against the manifest directory
  fs::path annotations;  // resolved against the manifest directory
  ResolutionSpec resolution{1.0};
  Split split = Split::train;
  std::string domain;
  // Entries with a variant group are source-domain images whose synthetic
  // variants (listed in the manifest's ensembles) stand in for them.
  std::optional<std::string> variant_group;

  bool operator==(const ManifestEntry&) const = default;
};

struct DatasetManifest {
  fs::path base_dir;
  std::vector<ManifestEntry> entries;
  std::map<std::string, std::vector<fs::path>> ensembles;

  bool operator==(const DatasetManifest&) const = default;

  std::vector<const ManifestEntry*> entries_in(Split split) const;
};

/// Parses and validates a manifest document. Relative paths are resolved
/// against base_dir.
DatasetManifest parse_manifest(std::string_view json_text, const fs::path& base_dir);
DatasetManifest load_manifest(const fs::path& path);

/// Writes the manifest with paths relative to the manifest's directory.
void save_manifest(const DatasetManifest& manifest, const fs::path& path);

struct TrainingPair {
  fs::path image;
  fs::path annotations;
  ResolutionSpec resolution{1.0};
  bool synthetic = false;

  bool operator==(const TrainingPair&) const = default;
};

/// inter: ensemble variants of every source entry; intra: real target
/// entries, taken whole in manifest order until the cumulative nucleus count
/// reaches n_target_nuclei (all of them when unset); cross: both, synthetic
/// pairs first.
std::vector<TrainingPair> compose_training_set(const DatasetManifest& manifest,
                                               SupervisionMode mode,
                                               std::optional<std::size_t> n_target_nuclei = {},
                                               Split split = Split::train);

}  // namespace nucleikit
