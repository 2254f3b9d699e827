#pragma once

#include "kbviz/workspace.hpp"

#include <filesystem>
#include <string>

namespace fixtures {

inline std::filesystem::path data(const std::string& rel) { return std::filesystem::path(KBVIZ_TEST_DATA) / rel; }

inline std::string text(const std::string& rel) { return kbviz::read_file(data(rel)); }

/// Mini knowledge base with weights and hierarchy.
inline kbviz::ConstraintSet mini_model() {
  return kbviz::build_model(text("mini/kb.lp"), "kb.lp", text("mini/weights.lp"), "weights.lp");
}

inline kbviz::ConstraintSet draco_model() {
  return kbviz::build_model(text("draco/soft.lp") + "\n" + text("draco/hard.lp"), "draco", text("draco/weights.lp"),
                            "weights.lp");
}

/// Fresh empty directory under the system temp dir.
inline std::filesystem::path temp_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("kbviz-test-" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

} // namespace fixtures
