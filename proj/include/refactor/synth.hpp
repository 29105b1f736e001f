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

#ifndef REFACTOR_SYNTH_HPP
#define REFACTOR_SYNTH_HPP

#include <cstdint>
#include <string>

namespace refactor {

// Grows a database by forward chaining: random facts are derived from the
// existing assertions and some of them are generalized into new theorems,
// which later facts then use. Assertions with $d conditions are not used.
struct SynthOptions {
  std::size_t theorems = 600;
  std::uint64_t seed = 1;
  std::size_t max_fact_nodes = 60;
  std::size_t max_theorem_nodes = 45;
  std::size_t max_tokens = 40;
  std::string prefix = "sy";
};

// Returns `base_text` followed by the new theorem blocks. Throws
// std::runtime_error when the requested count cannot be reached.
std::string synthesize(const std::string& base_text, const SynthOptions& options);

}  // namespace refactor

#endif  // REFACTOR_SYNTH_HPP
