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

#ifndef REFACTOR_HASH_HPP
#define REFACTOR_HASH_HPP

#include <cstdint>
#include <cstdio>
#include <string>
#include <string_view>

namespace refactor {

// FNV-1a, 64 bit. Stable across platforms and runs, unlike std::hash.
inline std::uint64_t fnv1a64(std::string_view data,
                             std::uint64_t h = 0xcbf29ce484222325ull) {
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

// Uniform value in [0, 1) derived from a seed and a key.
inline double unit_hash(std::uint64_t seed, std::string_view key) {
  std::uint64_t h = fnv1a64(key, fnv1a64(std::to_string(seed)));
  // Finalizer from splitmix64 to spread the low-entropy FNV bits.
  h ^= h >> 30;
  h *= 0xbf58476d1ce4e5b9ull;
  h ^= h >> 27;
  h *= 0x94d049bb133111ebull;
  h ^= h >> 31;
  return static_cast<double>(h >> 11) * 0x1.0p-53;
}

}  // namespace refactor

#endif  // REFACTOR_HASH_HPP
