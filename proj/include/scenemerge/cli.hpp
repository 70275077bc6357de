#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "scenemerge/conflict.hpp"

namespace scenemerge {

inline constexpr const char* kConfigFileName = ".scenemerge.conf";
inline constexpr const char* kConfigEnvVar = "SCENEMERGE_CONFIG";

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Project settings, read from `key = value` lines.
///
///   policy        manual | prefer-a | prefer-b
///   averaging     on | off
///   averageable   comma-separated node kinds
///   strategy.TAG  merge command for assets of type TAG
///   validator.TAG validation command for assets of type TAG
///   asset_store   blob directory, relative to the config file
///   user.name     attribution written into reports
///   user.color    attribution written into reports
struct CliConfig {
  MergePolicy policy;
  std::map<std::string, std::string> strategies;
  std::map<std::string, std::string> validators;
  std::optional<std::filesystem::path> asset_store;
  std::string user_name;
  std::string user_color;
  std::optional<std::filesystem::path> source;
};

CliConfig parse_config(const std::string& text, const std::filesystem::path& origin = {});
CliConfig load_config(const std::filesystem::path& path);

/// Config file to use: the explicit path if given, else the environment
/// variable, else the nearest `.scenemerge.conf` at or above `start`.
std::optional<std::filesystem::path> locate_config(const std::optional<std::filesystem::path>& explicit_path,
                                                   const std::filesystem::path& start);

/// Runs the command line `args` (without the program name). Returns the
/// process exit code: 0 clean, 1 conflicts/changes/violations, 2 error.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace scenemerge
