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

#include "prada/corpus.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <limits>
#include <sstream>

#include "json.hpp"
#include "prada/common.hpp"

namespace prada {

namespace {

std::atomic<bool> g_warnings{true};

// Decodes one UTF-8 code point starting at `i`; malformed bytes decode as
// themselves with length 1.
char32_t decode_utf8(std::string_view s, std::size_t i, std::size_t& len) {
  const auto b0 = static_cast<unsigned char>(s[i]);
  auto cont = [&](std::size_t k) {
    return i + k < s.size() &&
           (static_cast<unsigned char>(s[i + k]) & 0xC0) == 0x80;
  };
  auto bits = [&](std::size_t k) {
    return static_cast<char32_t>(static_cast<unsigned char>(s[i + k]) & 0x3F);
  };
  if (b0 < 0x80) {
    len = 1;
    return b0;
  }
  if ((b0 & 0xE0) == 0xC0 && cont(1)) {
    len = 2;
    return (static_cast<char32_t>(b0 & 0x1F) << 6) | bits(1);
  }
  if ((b0 & 0xF0) == 0xE0 && cont(1) && cont(2)) {
    len = 3;
    return (static_cast<char32_t>(b0 & 0x0F) << 12) | (bits(1) << 6) | bits(2);
  }
  if ((b0 & 0xF8) == 0xF0 && cont(1) && cont(2) && cont(3)) {
    len = 4;
    return (static_cast<char32_t>(b0 & 0x07) << 18) | (bits(1) << 12) |
           (bits(2) << 6) | bits(3);
  }
  len = 1;
  return b0;
}

bool is_unicode_space(char32_t c) {
  switch (c) {
    case U' ': case U'\t': case U'\n': case U'\v': case U'\f': case U'\r':
    case 0x85: case 0xA0: case 0x1680: case 0x2028: case 0x2029:
    case 0x202F: case 0x205F: case 0x3000:
      return true;
    default:
      return c >= 0x2000 && c <= 0x200A;
  }
}

bool is_ascii_punct(char c) {
  const auto u = static_cast<unsigned char>(c);
  return u < 0x80 && std::ispunct(u) != 0;
}

bool closes_sentence(std::string_view punct) {
  return punct.find_first_of(".!?") != std::string_view::npos;
}

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  return in;
}

bool is_blank(std::string_view line) {
  return std::all_of(line.begin(), line.end(), [](char c) {
    return std::isspace(static_cast<unsigned char>(c)) != 0;
  });
}

}  // namespace

void warn(std::string_view message) {
  if (g_warnings.load(std::memory_order_relaxed)) {
    std::cerr << "warning: " << message << '\n';
  }
}

void set_warnings_enabled(bool enabled) { g_warnings.store(enabled); }
bool warnings_enabled() { return g_warnings.load(); }

TextCollection::TextCollection(std::vector<Document> items)
    : items_(std::move(items)) {
  for (std::size_t i = 0; i < items_.size(); ++i) {
    if (!index_.emplace(items_[i].id, i).second) {
      throw Error("duplicate id '" + items_[i].id + "'");
    }
  }
}

bool TextCollection::contains(std::string_view id) const {
  return index_.count(std::string(id)) != 0;
}

const Document& TextCollection::at(std::string_view id) const {
  auto it = index_.find(std::string(id));
  if (it == index_.end()) throw Error("unknown id '" + std::string(id) + "'");
  return items_[it->second];
}

TokenSeq tokenize(std::string_view text, std::string source_doc) {
  TokenSeq out;
  out.source_doc = std::move(source_doc);

  auto flush = [&](std::string_view raw) {
    std::size_t b = 0, e = raw.size();
    while (b < e && is_ascii_punct(raw[b])) ++b;
    while (e > b && is_ascii_punct(raw[e - 1])) --e;
    if (b == e) {
      if (closes_sentence(raw) && !out.tokens.empty()) {
        out.sentence_end.back() = true;
      }
      return;
    }
    std::string word(raw.substr(b, e - b));
    for (char& c : word) {
      if (static_cast<unsigned char>(c) < 0x80) {
        c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
      }
    }
    out.tokens.push_back(std::move(word));
    out.sentence_end.push_back(closes_sentence(raw.substr(e)));
  };

  std::size_t start = 0, i = 0;
  while (i < text.size()) {
    std::size_t len = 1;
    const char32_t cp = decode_utf8(text, i, len);
    if (is_unicode_space(cp)) {
      if (i > start) flush(text.substr(start, i - start));
      start = i + len;
    }
    i += len;
  }
  if (start < text.size()) flush(text.substr(start));

  if (out.tokens.empty()) throw Error("no tokens");
  return out;
}

std::string join(const TokenSeq& seq) {
  std::string out;
  for (std::size_t i = 0; i < seq.tokens.size(); ++i) {
    if (i) out += ' ';
    out += seq.tokens[i];
    if (i < seq.sentence_end.size() && seq.sentence_end[i]) out += '.';
  }
  return out;
}

std::vector<TokenSeq> split_sentences(const TokenSeq& seq) {
  std::vector<TokenSeq> out;
  TokenSeq current;
  current.source_doc = seq.source_doc;
  for (std::size_t i = 0; i < seq.tokens.size(); ++i) {
    current.tokens.push_back(seq.tokens[i]);
    const bool end = i < seq.sentence_end.size() && seq.sentence_end[i];
    current.sentence_end.push_back(end);
    if (end) {
      out.push_back(std::move(current));
      current = TokenSeq{};
      current.source_doc = seq.source_doc;
    }
  }
  if (!current.tokens.empty()) out.push_back(std::move(current));
  return out;
}

Corpus parse_corpus(std::istream& in, const std::string& origin) {
  std::vector<Document> docs;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (is_blank(line)) continue;
    const auto where = origin + ":" + std::to_string(line_no);
    nlohmann::json obj;
    try {
      obj = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw Error("malformed line " + where + ": " + e.what());
    }
    if (!obj.is_object() || !obj.contains("id") || !obj.contains("text") ||
        !obj["id"].is_string() || !obj["text"].is_string()) {
      throw Error("malformed line " + where +
                  ": expected string fields \"id\" and \"text\"");
    }
    Document doc{obj["id"].get<std::string>(), obj["text"].get<std::string>()};
    if (doc.id.empty()) throw Error("malformed line " + where + ": empty id");
    if (is_blank(doc.text)) {
      throw Error("malformed line " + where + ": empty text");
    }
    docs.push_back(std::move(doc));
  }
  if (docs.empty()) throw Error("empty corpus");
  return Corpus(std::move(docs));
}

Corpus load_corpus(const std::filesystem::path& path) {
  auto in = open_input(path);
  return parse_corpus(in, path.string());
}

void save_corpus(const Corpus& corpus, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  for (const auto& doc : corpus.items()) {
    nlohmann::ordered_json obj;
    obj["id"] = doc.id;
    obj["text"] = doc.text;
    out << obj.dump() << '\n';
  }
}

std::map<std::string, std::vector<std::string>> load_qrels(
    const std::filesystem::path& path) {
  auto in = open_input(path);
  std::map<std::string, std::vector<std::string>> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (is_blank(line)) continue;
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, '\t')) fields.push_back(field);
    if (fields.size() != 3) {
      throw Error("malformed qrels line " + path.string() + ":" +
                  std::to_string(line_no));
    }
    double rel = 0;
    const auto& r = fields[2];
    auto [p, ec] = std::from_chars(r.data(), r.data() + r.size(), rel);
    if (ec != std::errc() || p != r.data() + r.size()) {
      throw Error("non-numeric relevance at " + path.string() + ":" +
                  std::to_string(line_no));
    }
    if (rel > 0) out[fields[0]].push_back(fields[1]);
  }
  return out;
}

EmbeddingStore::EmbeddingStore(std::string space_name, Eigen::Index dim)
    : space_name_(std::move(space_name)), dim_(dim) {
  if (dim <= 0) throw Error("embedding dimension must be positive");
}

bool EmbeddingStore::insert(std::string word, Eigen::VectorXd vector) {
  if (vector.size() != dim_) {
    throw Error("vector for '" + word + "' has dimension " +
                std::to_string(vector.size()) + ", expected " +
                std::to_string(dim_));
  }
  if (!vector.allFinite()) throw Error("non-finite vector for '" + word + "'");
  if (auto it = index_.find(word); it != index_.end()) {
    vectors_[it->second] = std::move(vector);
    return true;
  }
  index_.emplace(word, words_.size());
  words_.push_back(std::move(word));
  vectors_.push_back(std::move(vector));
  return false;
}

std::optional<std::size_t> EmbeddingStore::row_of(std::string_view word) const {
  auto it = index_.find(std::string(word));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

const Eigen::VectorXd* EmbeddingStore::find(std::string_view word) const {
  auto r = row_of(word);
  return r ? &vectors_[*r] : nullptr;
}

Eigen::VectorXd* EmbeddingStore::find_mutable(std::string_view word) {
  auto r = row_of(word);
  return r ? &vectors_[*r] : nullptr;
}

EmbeddingStore parse_embeddings(std::istream& in, std::string space_name,
                                const std::string& origin) {
  std::optional<EmbeddingStore> store;
  std::string line;
  std::size_t line_no = 0;
  std::vector<double> values;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (is_blank(line)) continue;
    const auto where = origin + ":" + std::to_string(line_no);
    std::string_view rest(line);
    auto next_field = [&]() -> std::string_view {
      while (!rest.empty() && rest.front() == ' ') rest.remove_prefix(1);
      auto end = rest.find(' ');
      auto field = rest.substr(0, end);
      rest.remove_prefix(end == std::string_view::npos ? rest.size() : end);
      return field;
    };
    std::string word(next_field());
    values.clear();
    for (auto f = next_field(); !f.empty(); f = next_field()) {
      double v = 0;
      auto [p, ec] = std::from_chars(f.data(), f.data() + f.size(), v);
      if (ec != std::errc() || p != f.data() + f.size() || !std::isfinite(v)) {
        throw Error("non-numeric component '" + std::string(f) + "' at " +
                    where);
      }
      values.push_back(v);
    }
    if (values.empty()) throw Error("no vector components at " + where);
    if (!store) {
      store.emplace(space_name, static_cast<Eigen::Index>(values.size()));
    } else if (static_cast<Eigen::Index>(values.size()) != store->dim()) {
      throw Error("inconsistent dimension at " + where + ": got " +
                  std::to_string(values.size()) + ", expected " +
                  std::to_string(store->dim()));
    }
    Eigen::VectorXd v =
        Eigen::Map<const Eigen::VectorXd>(values.data(), values.size());
    if (store->insert(word, std::move(v))) {
      warn("duplicate word '" + word + "' at " + where +
           "; last occurrence wins");
    }
  }
  if (!store) throw Error("empty embedding file " + origin);
  return std::move(*store);
}

EmbeddingStore load_embeddings(const std::filesystem::path& path,
                               std::string space_name) {
  auto in = open_input(path);
  return parse_embeddings(in, std::move(space_name), path.string());
}

void write_embeddings(const EmbeddingStore& store, std::ostream& out) {
  std::ostringstream line;
  line << std::setprecision(std::numeric_limits<double>::max_digits10);
  for (std::size_t i = 0; i < store.size(); ++i) {
    line.str({});
    line << store.words()[i];
    for (double x : store.row(i)) line << ' ' << x;
    line << '\n';
    out << line.str();
  }
}

std::optional<double> cosine(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  const double na = a.norm();
  const double nb = b.norm();
  if (na == 0.0 || nb == 0.0) return std::nullopt;
  return a.dot(b) / (na * nb);
}

SynonymList synonyms(std::string_view word, const EmbeddingStore& store,
                     std::size_t max_count, double min_cosine) {
  if (max_count == 0) throw Error("synonym count must be at least 1");
  SynonymList out;
  const auto* target = store.find(word);
  if (target == nullptr) {
    out.out_of_lexicon = true;
    return out;
  }
  for (std::size_t i = 0; i < store.size(); ++i) {
    const auto& candidate = store.words()[i];
    if (candidate == word) continue;
    auto c = cosine(*target, store.row(i));
    if (c && *c >= min_cosine) out.entries.emplace_back(candidate, *c);
  }
  std::sort(out.entries.begin(), out.entries.end(),
            [](const auto& a, const auto& b) {
              if (a.second != b.second) return a.second > b.second;
              return a.first < b.first;
            });
  if (out.entries.size() > max_count) out.entries.resize(max_count);
  return out;
}

std::string nearest_word(const Eigen::VectorXd& v, const EmbeddingStore& store,
                         const std::set<std::string>& exclude) {
  if (v.size() != store.dim()) throw Error("query vector dimension mismatch");
  if (v.norm() == 0.0) throw Error("zero-norm query vector");
  const std::string* best = nullptr;
  double best_cos = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < store.size(); ++i) {
    const auto& w = store.words()[i];
    if (exclude.count(w)) continue;
    auto c = cosine(v, store.row(i));
    if (!c) continue;
    if (best == nullptr || *c > best_cos || (*c == best_cos && w < *best)) {
      best = &w;
      best_cos = *c;
    }
  }
  if (best == nullptr) throw Error("no candidate words after exclusion");
  return *best;
}

}  // namespace prada
