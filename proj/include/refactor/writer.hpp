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

#ifndef REFACTOR_WRITER_HPP
#define REFACTOR_WRITER_HPP

#include <ostream>
#include <unordered_map>
#include <vector>

#include "refactor/database.hpp"

namespace refactor {

struct WriteOptions {
  // Order in which top-level layout units are written; empty means source
  // order.
  std::vector<std::size_t> unit_order;
  // Plain proofs replacing the stored ones.
  std::unordered_map<Label, std::vector<Label>> proofs;
};

// Writes the database back as Metamath source. Comments are not kept.
void write_database(const Database& db, std::ostream& os, const WriteOptions& options = {});

}  // namespace refactor

#endif  // REFACTOR_WRITER_HPP
