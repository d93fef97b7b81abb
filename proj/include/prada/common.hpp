// Copyright 2026 The Prada Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef PRADA_COMMON_HPP_
#define PRADA_COMMON_HPP_

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>

namespace prada {

// All recoverable failures in the library surface as this exception type.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Warnings go to stderr unless silenced (tests silence them).
void warn(std::string_view message);
void set_warnings_enabled(bool enabled);
bool warnings_enabled();

// 64-bit FNV-1a; stable across platforms, used to derive per-job seeds.
constexpr std::uint64_t fnv1a(std::string_view text,
                              std::uint64_t h = 14695981039346656037ULL) {
  for (char c : text) {
    h ^= static_cast<unsigned char>(c);
    h *= 1099511628211ULL;
  }
  return h;
}

// Mixes a global seed with a list of string keys into one generator seed.
template <typename... Keys>
std::uint64_t derive_seed(std::uint64_t seed, const Keys&... keys) {
  std::uint64_t h = fnv1a(std::to_string(seed));
  ((h = fnv1a(std::string_view(keys), h ^ 0x9e3779b97f4a7c15ULL)), ...);
  return h;
}

using Rng = std::mt19937_64;

}  // namespace prada

#endif  // PRADA_COMMON_HPP_
