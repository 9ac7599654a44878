#pragma once

#include <fstream>
#include <memory>
#include <sstream>
#include <string>

#include "geoprove/builtins.hpp"
#include "geoprove/proof_script.hpp"
#include "geoprove/tool_dsl.hpp"

#ifndef GEOPROVE_SOURCE_DIR
#define GEOPROVE_SOURCE_DIR "."
#endif

namespace testsupport {

inline std::string source_path(const std::string& rel) {
  return std::string(GEOPROVE_SOURCE_DIR) + "/" + rel;
}

inline std::string slurp(const std::string& rel) {
  std::ifstream in(source_path(rel), std::ios::binary);
  if (!in) throw std::runtime_error("missing test input " + rel);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// Builtins plus tools/base.glt, loaded once.
inline std::shared_ptr<const geoprove::Registry> base_registry() {
  static const std::shared_ptr<const geoprove::Registry> reg =
      geoprove::load_tools(slurp("tools/base.glt"), geoprove::builtin_registry());
  return reg;
}

inline geoprove::ToolPtr tool(const std::string& name, std::vector<geoprove::Kind> kinds) {
  auto t = base_registry()->resolve(name, kinds);
  if (!t) throw std::runtime_error("no tool " + name);
  return t;
}

// Simson configuration from the corpus script.
constexpr double kAx = -79.20758056640625, kAy = -119.095947265625;
constexpr double kBx = -126.97052001953125, kBy = 23.91351318359375;
constexpr double kCx = 108.5352783203125, kCy = 19.20867919921875;
constexpr double kXParam = 0.6169557687823527;

}  // namespace testsupport
