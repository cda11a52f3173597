#include "cli/json_config.hpp"

#include <nlohmann/json.hpp>

namespace nucleikit::cli {

namespace {

using nlohmann::json;

std::string scalar_text(const json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
  return v.dump();
}

void flatten(const json& node, std::vector<std::string> parents, std::vector<CLI::ConfigItem>& out) {
  for (const auto& [key, value] : node.items()) {
    if (value.is_object()) {
      auto nested = parents;
      nested.push_back(key);
      flatten(value, nested, out);
      continue;
    }
    CLI::ConfigItem item;
    item.parents = parents;
    item.name = key;
    if (value.is_array()) {
      for (const auto& element : value) item.inputs.push_back(scalar_text(element));
    } else {
      item.inputs.push_back(scalar_text(value));
    }
    out.push_back(std::move(item));
  }
}

}  // namespace

std::string ConfigJSON::to_config(const CLI::App* app, bool default_also, bool,
                                  std::string) const {
  json doc = json::object();
  for (const CLI::Option* opt : app->get_options()) {
    if (opt->get_lnames().empty() || !opt->get_configurable()) continue;
    const std::string name = opt->get_lnames().front();
    if (opt->count() > 0) {
      const auto& results = opt->results();
      doc[name] = results.size() == 1 ? json(results.front()) : json(results);
    } else if (default_also && !opt->get_default_str().empty()) {
      doc[name] = opt->get_default_str();
    }
  }
  return doc.dump(2);
}

std::vector<CLI::ConfigItem> ConfigJSON::from_config(std::istream& input) const {
  json doc;
  try {
    input >> doc;
  } catch (const json::exception& e) {
    throw CLI::ConversionError("config", std::string("malformed JSON config: ") + e.what());
  }
  std::vector<CLI::ConfigItem> items;
  if (doc.is_object()) flatten(doc, {}, items);
  return items;
}

}  // namespace nucleikit::cli
