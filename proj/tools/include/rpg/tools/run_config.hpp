#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>

#include <json.hpp>

#include "rpg/trainer.hpp"

namespace rpg::tools {

// Raised for anything wrong with a run config; what() is "origin:line: message"
// (line 0 when the problem is not tied to a single line).
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& origin, int line, const std::string& message);
  int line() const { return line_; }

 private:
  int line_;
};

// Flat "key = value" document with [sections]. '#' starts a comment.
// Unknown sections or keys, duplicates and malformed values are rejected.
// The result has already passed TrainConfig::validate().
TrainConfig parse_run_config(std::string_view text, const std::string& origin = "<config>");
TrainConfig load_run_config(const std::filesystem::path& path);

// Config echo for run summaries; uses the same section/key names as the file.
nlohmann::json config_to_json(const TrainConfig& cfg);

// Every accepted "section.key" with its default, one per line. Used by the README and --help.
std::string documented_defaults();

}  // namespace rpg::tools
