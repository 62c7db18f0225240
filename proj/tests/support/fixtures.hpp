#pragma once

#include <algorithm>
#include <filesystem>
#include <string>
#include <vector>

#include "fault2flow/pasta_dsl.hpp"
#include "fault2flow/util.hpp"

#ifndef F2F_FIXTURE_DIR
#error "F2F_FIXTURE_DIR must point at the fixtures directory"
#endif

namespace f2f_test {

inline std::string fixture_path(const std::string& relative) { return std::string(F2F_FIXTURE_DIR) + "/" + relative; }

inline std::string read_fixture(const std::string& relative) { return fault2flow::util::read_file(fixture_path(relative)); }

inline fault2flow::FaultTree load_tree(const std::string& name) {
  return fault2flow::parse_pasta(read_fixture("trees/" + name + ".pasta"));
}

/// Stems of every bundled tree fixture, sorted.
inline std::vector<std::string> tree_fixtures() {
  std::vector<std::string> names;
  for (const auto& entry : std::filesystem::directory_iterator(fixture_path("trees"))) {
    if (entry.path().extension() == ".pasta") names.push_back(entry.path().stem().string());
  }
  std::sort(names.begin(), names.end());
  return names;
}

}  // namespace f2f_test
