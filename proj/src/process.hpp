#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace scenemerge::detail {

struct CommandResult {
  int exit_code = -1;
  std::string output;  // stdout and stderr interleaved
};

/// Runs `command` through /bin/sh with `args` appended as quoted words.
CommandResult run_shell(const std::string& command, const std::vector<std::string>& args);

std::string shell_quote(const std::string& word);

/// Scratch directory removed on destruction.
class TempDir {
 public:
  TempDir();
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path write(const std::string& name, std::string_view content) const;

 private:
  std::filesystem::path path_;
};

std::string read_file(const std::filesystem::path& path);

}  // namespace scenemerge::detail
