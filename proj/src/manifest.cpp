#include "nucleikit/manifest.hpp"

#include <set>

#include <nlohmann/json.hpp>

#include "nucleikit/io.hpp"

namespace nucleikit {

namespace {

using nlohmann::json;

const json& require_key(const json& obj, const char* key, std::size_t index) {
  if (!obj.contains(key)) {
    throw Error(ErrorCode::parse,
                "manifest entry " + std::to_string(index) + " lacks key '" + key + "'");
  }
  return obj.at(key);
}

std::string require_string(const json& obj, const char* key, std::size_t index) {
  const json& v = require_key(obj, key, index);
  if (!v.is_string()) {
    throw Error(ErrorCode::parse,
                "manifest entry " + std::to_string(index) + ": '" + key + "' must be a string");
  }
  return v.get<std::string>();
}

void require_exists(const fs::path& path) {
  if (!fs::exists(path)) {
    throw Error(ErrorCode::dangling_reference, "manifest references missing file " + path.string());
  }
}

fs::path resolve(const fs::path& base, const std::string& p) {
  const fs::path path(p);
  return (path.is_absolute() ? path : base / path).lexically_normal();
}

std::string relative_to(const fs::path& p, const fs::path& base) {
  const fs::path rel = p.lexically_relative(base);
  return (rel.empty() ? p : rel).generic_string();
}

}  // namespace

std::string_view to_string(Split split) {
  switch (split) {
    case Split::train: return "train";
    case Split::validation: return "validation";
    case Split::test: return "test";
  }
  return "train";
}

std::string_view to_string(SupervisionMode mode) {
  switch (mode) {
    case SupervisionMode::inter: return "inter";
    case SupervisionMode::intra: return "intra";
    case SupervisionMode::cross: return "cross";
  }
  return "inter";
}

Split parse_split(std::string_view text) {
  if (text == "train") return Split::train;
  if (text == "validation") return Split::validation;
  if (text == "test") return Split::test;
  throw Error(ErrorCode::invalid_argument, "unknown split '" + std::string(text) + "'");
}

SupervisionMode parse_mode(std::string_view text) {
  if (text == "inter") return SupervisionMode::inter;
  if (text == "intra") return SupervisionMode::intra;
  if (text == "cross") return SupervisionMode::cross;
  throw Error(ErrorCode::invalid_argument, "unknown supervision mode '" + std::string(text) + "'");
}

std::vector<const ManifestEntry*> DatasetManifest::entries_in(Split split) const {
  std::vector<const ManifestEntry*> out;
  for (const auto& e : entries) {
    if (e.split == split) out.push_back(&e);
  }
  return out;
}

DatasetManifest parse_manifest(std::string_view json_text, const fs::path& base_dir) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::parse, std::string("malformed manifest: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("entries") || !doc["entries"].is_array()) {
    throw Error(ErrorCode::parse, "manifest must be an object with an 'entries' array");
  }

  DatasetManifest manifest;
  manifest.base_dir = base_dir;
  if (doc.contains("ensembles")) {
    const json& ens = doc["ensembles"];
    if (!ens.is_object()) throw Error(ErrorCode::parse, "'ensembles' must be an object");
    for (const auto& [group, variants] : ens.items()) {
      if (!variants.is_array()) {
        throw Error(ErrorCode::parse, "ensemble '" + group + "' must be an array of paths");
      }
      auto& list = manifest.ensembles[group];
      for (const auto& v : variants) {
        if (!v.is_string()) throw Error(ErrorCode::parse, "ensemble '" + group + "' holds a non-string");
        list.push_back(resolve(base_dir, v.get<std::string>()));
        require_exists(list.back());
      }
    }
  }

  std::map<fs::path, Split> image_split;
  std::set<std::string> claimed_groups;
  const json& entries = doc["entries"];
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const json& e = entries[i];
    if (!e.is_object()) throw Error(ErrorCode::parse, "manifest entry " + std::to_string(i) + " is not an object");
    const json& mpp = require_key(e, "microns_per_pixel", i);
    if (!mpp.is_number()) {
      throw Error(ErrorCode::parse, "manifest entry " + std::to_string(i) + ": microns_per_pixel must be a number");
    }
    ManifestEntry entry{resolve(base_dir, require_string(e, "image", i)),
                        resolve(base_dir, require_string(e, "annotations", i)),
                        ResolutionSpec(mpp.get<double>()),
                        parse_split(require_string(e, "split", i)),
                        e.contains("domain") ? require_string(e, "domain", i) : std::string{},
                        std::nullopt};
    if (e.contains("variant_group") && !e["variant_group"].is_null()) {
      entry.variant_group = require_string(e, "variant_group", i);
      if (!manifest.ensembles.contains(*entry.variant_group)) {
        throw Error(ErrorCode::dangling_reference,
                    "entry " + std::to_string(i) + " names unknown ensemble '" + *entry.variant_group + "'");
      }
      if (!claimed_groups.insert(*entry.variant_group).second) {
        throw Error(ErrorCode::duplicate,
                    "ensemble '" + *entry.variant_group + "' is claimed by more than one entry");
      }
    }
    require_exists(entry.image);
    require_exists(entry.annotations);
    const auto [it, fresh] = image_split.emplace(entry.image, entry.split);
    if (!fresh) {
      throw Error(ErrorCode::duplicate,
                  it->second != entry.split
                      ? "image " + entry.image.string() + " appears in multiple splits"
                      : "image " + entry.image.string() + " is listed twice");
    }
    manifest.entries.push_back(std::move(entry));
  }
  for (const auto& [group, variants] : manifest.ensembles) {
    if (!claimed_groups.contains(group)) {
      throw Error(ErrorCode::dangling_reference,
                  "ensemble '" + group + "' has no source entry to supply its annotations");
    }
  }
  return manifest;
}

DatasetManifest load_manifest(const fs::path& path) {
  const std::string text = read_file(path);
  try {
    return parse_manifest(text, fs::absolute(path).parent_path().lexically_normal());
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + e.what());
  }
}

void save_manifest(const DatasetManifest& manifest, const fs::path& path) {
  const fs::path base = fs::absolute(path).parent_path().lexically_normal();
  json doc;
  doc["entries"] = json::array();
  for (const auto& e : manifest.entries) {
    json j{{"image", relative_to(e.image, base)},
           {"annotations", relative_to(e.annotations, base)},
           {"microns_per_pixel", e.resolution.microns_per_pixel()},
           {"split", std::string(to_string(e.split))},
           {"domain", e.domain}};
    if (e.variant_group) j["variant_group"] = *e.variant_group;
    doc["entries"].push_back(std::move(j));
  }
  doc["ensembles"] = json::object();
  for (const auto& [group, variants] : manifest.ensembles) {
    json list = json::array();
    for (const auto& v : variants) list.push_back(relative_to(v, base));
    doc["ensembles"][group] = std::move(list);
  }
  write_file(path, doc.dump(2) + "\n");
}

std::vector<TrainingPair> compose_training_set(const DatasetManifest& manifest,
                                               SupervisionMode mode,
                                               std::optional<std::size_t> n_target_nuclei,
                                               Split split) {
  const auto entries = manifest.entries_in(split);
  std::vector<TrainingPair> synthetic;
  std::vector<const ManifestEntry*> targets;
  for (const ManifestEntry* e : entries) {
    if (!e->variant_group) {
      targets.push_back(e);
      continue;
    }
    for (const auto& variant : manifest.ensembles.at(*e->variant_group)) {
      synthetic.push_back({variant, e->annotations, e->resolution, true});
    }
  }

  std::vector<TrainingPair> out;
  if (mode != SupervisionMode::intra) {
    if (synthetic.empty()) {
      throw Error(ErrorCode::insufficient_data,
                  std::string(to_string(mode)) + " supervision needs ensemble variants in the " +
                      std::string(to_string(split)) + " split");
    }
    out = synthetic;
  }
  if (mode == SupervisionMode::inter) return out;

  if (n_target_nuclei == std::size_t{0}) return out;
  if (targets.empty()) {
    throw Error(ErrorCode::insufficient_data, "no target-domain entries in the " +
                                                  std::string(to_string(split)) + " split");
  }
  std::size_t taken = 0;
  for (const ManifestEntry* e : targets) {
    if (n_target_nuclei && taken >= *n_target_nuclei) break;
    taken += count_annotations(e->annotations);
    out.push_back({e->image, e->annotations, e->resolution, false});
  }
  if (n_target_nuclei && taken < *n_target_nuclei) {
    throw Error(ErrorCode::insufficient_data,
                "requested " + std::to_string(*n_target_nuclei) + " target nuclei but only " +
                    std::to_string(taken) + " are annotated");
  }
  return out;
}

}  // namespace nucleikit
