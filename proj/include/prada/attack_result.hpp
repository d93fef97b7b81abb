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

// Per-(query, document) attack outcome and its JSON-lines log form.

#ifndef PRADA_ATTACK_RESULT_HPP_
#define PRADA_ATTACK_RESULT_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "prada/corpus.hpp"

namespace prada {

struct Replacement {
  std::size_t position = 0;
  std::string old_word;
  std::string new_word;
  std::optional<double> cf_cosine;  // absent when either word lacks a cf vector
  bool operator==(const Replacement&) const = default;
};

struct AttackResult {
  std::string method;
  std::string query_id;
  std::string doc_id;
  int rank_before = 0;
  int rank_after = 0;
  std::vector<Replacement> replacements;
  std::uint64_t oracle_queries = 0;
  bool success = false;
  bool partial = false;  // the oracle failed mid-attack
  TokenSeq adversarial;  // not logged; rebuilt from the original + replacements
};

// Applies replacements in order to a copy of `original`.
TokenSeq apply_replacements(const TokenSeq& original,
                            std::span<const Replacement> replacements);

void write_attack_log(std::span<const AttackResult> results, std::ostream& out);
void write_attack_log(std::span<const AttackResult> results,
                      const std::filesystem::path& path);

// Reads a log; `adversarial` is rebuilt against `corpus`.
std::vector<AttackResult> read_attack_log(const std::filesystem::path& path,
                                          const Corpus& corpus,
                                          const std::string& method);

}  // namespace prada

#endif  // PRADA_ATTACK_RESULT_HPP_
