#pragma once

#include <CLI11.hpp>

namespace nucleikit::cli {

// Reads CLI11 configuration from a JSON document. Top-level keys are option
// long names; nested objects address subcommands, e.g.
//   {"threads": 4, "tune": {"cap-um": 5.0}}
class ConfigJSON : public CLI::Config {
 public:
  std::string to_config(const CLI::App* app, bool default_also, bool write_description,
                        std::string prefix) const override;
  std::vector<CLI::ConfigItem> from_config(std::istream& input) const override;
};

}  // namespace nucleikit::cli
