#pragma once

#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "scenemerge/graph.hpp"
#include "scenemerge/merge.hpp"

namespace scenemerge {

inline constexpr int kLevelFormatVersion = 1;
inline constexpr int kReportFormatVersion = 1;

/// Diagnostic for malformed documents. Line and column are 1-based.
class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, std::size_t column, const std::string& message);
  std::size_t line() const { return line_; }
  std::size_t column() const { return column_; }
  const std::string& detail() const { return detail_; }

 private:
  std::size_t line_;
  std::size_t column_;
  std::string detail_;
};

struct LevelDocument {
  int format_version = kLevelFormatVersion;
  LevelGraph graph;

  bool operator==(const LevelDocument&) const = default;
};

/// Parses a level document. Structural problems that merges may leave
/// behind transiently (cycles, unreachable nodes) are accepted here and left
/// to `validate`; everything else is rejected with a positioned ParseError.
LevelDocument parse_level(std::string_view text);

/// Canonical text: nodes by id, properties by key, edges by (parent, child),
/// assets by id. Reals use the shortest decimal that round-trips.
std::string serialize_level(const LevelGraph& graph);
inline std::string serialize_level(const LevelDocument& doc) { return serialize_level(doc.graph); }

/// Reads and parses a file. ParseError messages are prefixed with the path.
LevelGraph load_level(const std::filesystem::path& path);
void save_level(const std::filesystem::path& path, const LevelGraph& graph);

std::string format_real(double value);
/// Token as written in documents: bare if it only uses safe characters,
/// quoted with escapes otherwise.
std::string quote_token(std::string_view token);
/// "<type> <value>" as written in property lines and reports.
std::string format_value(const PropertyValue& value);

/// Report metadata that does not come from the merge itself.
struct ReportContext {
  ResolutionPolicy policy = ResolutionPolicy::Manual;
  std::string user_name;
  std::string user_color;
};

std::string serialize_report(const MergeOutcome& outcome, const ReportContext& context = {});

/// Flat view of a report: every `key value` line, in order, grouped by
/// section. `conflicts` and `dropped` hold one field map per entry.
struct MergeReport {
  std::map<std::string, std::string> summary;
  std::vector<std::map<std::string, std::string>> conflicts;
  std::vector<std::map<std::string, std::string>> dropped;
  std::vector<Edge> removed_edges;
};

MergeReport parse_report(std::string_view text);

}  // namespace scenemerge
