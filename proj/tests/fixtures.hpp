#pragma once

#include <filesystem>
#include <string>

#include "dataagent/error.hpp"
#include "dataagent/table.hpp"

namespace fixtures {

inline const std::filesystem::path kDataDir = DATAAGENT_DATA_DIR;

inline dataagent::Table cities() { return dataagent::load_csv_file(kDataDir / "cities.csv"); }

/// Label of the dataagent::Error thrown by fn, or "no error".
template <typename Fn>
std::string error_of(Fn&& fn) {
  try {
    fn();
  } catch (const dataagent::Error& e) {
    return std::string(e.label());
  }
  return "no error";
}

/// Fresh scratch directory under the system temp dir.
inline std::filesystem::path scratch(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("dataagent-test-" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace fixtures
