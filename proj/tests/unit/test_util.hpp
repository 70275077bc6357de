#pragma once

#include <filesystem>
#include <string>

#include "scenemerge/format.hpp"
#include "scenemerge/graph.hpp"

namespace testutil {

inline scenemerge::NodeId id(const char* s) { return scenemerge::NodeId(s); }

inline scenemerge::LevelGraph lvl(const std::string& text) { return scenemerge::parse_level(text).graph; }

inline std::filesystem::path fixture(const std::string& name) {
  return std::filesystem::path(SCENEMERGE_FIXTURES) / name;
}

inline scenemerge::LevelGraph load_fixture(const std::string& name) {
  return scenemerge::load_level(fixture(name));
}

}  // namespace testutil
