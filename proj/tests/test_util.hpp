/* Copyright 2026 The refactor-kit Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#ifndef REFACTOR_TESTS_TEST_UTIL_HPP
#define REFACTOR_TESTS_TEST_UTIL_HPP

#include <filesystem>
#include <initializer_list>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "refactor/database.hpp"
#include "refactor/proof_tree.hpp"

namespace refactor::testing {

inline std::filesystem::path data_path(const std::string& name) {
  return std::filesystem::path(REFACTOR_DATA_DIR) / name;
}

inline const Database& prop_db() {
  static const Database db = load_database(data_path("prop.mm"));
  return db;
}

inline const Database& toy_db() {
  static const Database db = load_database(data_path("toy.mm"));
  return db;
}

inline std::string read_data(const std::string& name) { return read_file(data_path(name)); }

// Space separated label names of a tree in RPN order.
inline std::string names(const Database& db, const ProofTree& t) {
  std::string out;
  for (const auto& n : t.nodes) {
    if (!out.empty()) out += ' ';
    out += label_name(db, t, n.label);
  }
  return out;
}

inline std::string joined(const std::vector<std::string>& v) {
  std::string out;
  for (const auto& s : v) {
    if (!out.empty()) out += ' ';
    out += s;
  }
  return out;
}

inline std::vector<bool> mask_of(std::size_t n, std::initializer_list<NodeId> on) {
  std::vector<bool> m(n, false);
  for (NodeId i : on) m[i] = true;
  return m;
}

inline std::vector<bool> all_but(std::size_t n, std::initializer_list<NodeId> off) {
  std::vector<bool> m(n, true);
  for (NodeId i : off) m[i] = false;
  return m;
}

// Scratch directory removed at scope exit.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    path_ = std::filesystem::temp_directory_path() /
            ("refactor-kit-" + tag + "-" + std::to_string(::getpid()));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  const std::filesystem::path& path() const { return path_; }
  std::string operator/(const std::string& name) const { return (path_ / name).string(); }

 private:
  std::filesystem::path path_;
};

}  // namespace refactor::testing

#endif  // REFACTOR_TESTS_TEST_UTIL_HPP
