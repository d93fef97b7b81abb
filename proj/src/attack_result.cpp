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

#include "prada/attack_result.hpp"

#include <fstream>
#include <ostream>

#include "json.hpp"
#include "prada/common.hpp"

namespace prada {

TokenSeq apply_replacements(const TokenSeq& original,
                            std::span<const Replacement> replacements) {
  TokenSeq out = original;
  for (const auto& r : replacements) {
    if (r.position >= out.tokens.size()) {
      throw Error("replacement position " + std::to_string(r.position) +
                  " out of range");
    }
    out.tokens[r.position] = r.new_word;
  }
  return out;
}

void write_attack_log(std::span<const AttackResult> results, std::ostream& out) {
  for (const auto& r : results) {
    nlohmann::ordered_json obj;
    obj["query_id"] = r.query_id;
    obj["doc_id"] = r.doc_id;
    obj["rank_before"] = r.rank_before;
    obj["rank_after"] = r.rank_after;
    auto reps = nlohmann::ordered_json::array();
    for (const auto& rep : r.replacements) {
      nlohmann::ordered_json e;
      e["pos"] = rep.position;
      e["old"] = rep.old_word;
      e["new"] = rep.new_word;
      e["cf_cosine"] = rep.cf_cosine ? nlohmann::ordered_json(*rep.cf_cosine)
                                     : nlohmann::ordered_json(nullptr);
      reps.push_back(std::move(e));
    }
    obj["replacements"] = std::move(reps);
    obj["oracle_queries"] = r.oracle_queries;
    obj["success"] = r.success;
    if (r.partial) obj["partial"] = true;
    out << obj.dump() << '\n';
  }
}

void write_attack_log(std::span<const AttackResult> results,
                      const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  write_attack_log(results, out);
}

std::vector<AttackResult> read_attack_log(const std::filesystem::path& path,
                                          const Corpus& corpus,
                                          const std::string& method) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  std::vector<AttackResult> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      const auto obj = nlohmann::json::parse(line);
      AttackResult r;
      r.method = method;
      r.query_id = obj.at("query_id").get<std::string>();
      r.doc_id = obj.at("doc_id").get<std::string>();
      r.rank_before = obj.at("rank_before").get<int>();
      r.rank_after = obj.at("rank_after").get<int>();
      r.oracle_queries = obj.at("oracle_queries").get<std::uint64_t>();
      r.success = obj.at("success").get<bool>();
      r.partial = obj.value("partial", false);
      for (const auto& e : obj.at("replacements")) {
        Replacement rep;
        rep.position = e.at("pos").get<std::size_t>();
        rep.old_word = e.at("old").get<std::string>();
        rep.new_word = e.at("new").get<std::string>();
        if (!e.at("cf_cosine").is_null()) rep.cf_cosine = e.at("cf_cosine").get<double>();
        r.replacements.push_back(std::move(rep));
      }
      r.adversarial = apply_replacements(
          tokenize(corpus.at(r.doc_id).text, r.doc_id), r.replacements);
      out.push_back(std::move(r));
    } catch (const nlohmann::json::exception& e) {
      throw Error("malformed attack log line " + path.string() + ":" +
                  std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace prada
