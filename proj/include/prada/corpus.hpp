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

// Text ingestion: documents, queries, relevance judgments, word-vector
// stores, tokenization, and cosine lookups over a vector space.

#ifndef PRADA_CORPUS_HPP_
#define PRADA_CORPUS_HPP_

#include <Eigen/Core>

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace prada {

struct Document {
  std::string id;
  std::string text;
};

// Queries share the document record layout.
using Query = Document;

// An id-indexed, insertion-ordered collection of texts.
class TextCollection {
 public:
  TextCollection() = default;
  explicit TextCollection(std::vector<Document> items);

  const std::vector<Document>& items() const { return items_; }
  std::size_t size() const { return items_.size(); }
  bool empty() const { return items_.empty(); }
  bool contains(std::string_view id) const;
  const Document& at(std::string_view id) const;

 private:
  std::vector<Document> items_;
  std::unordered_map<std::string, std::size_t> index_;
};

using Corpus = TextCollection;
using QuerySet = TextCollection;

// Lowercased whole-word tokens. `sentence_end[i]` marks tokens that closed a
// sentence ('.', '!' or '?' in their stripped trailing punctuation); in-place
// substitutions keep the flags, so sentence structure survives an attack.
struct TokenSeq {
  std::vector<std::string> tokens;
  std::vector<bool> sentence_end;
  std::string source_doc;

  std::size_t size() const { return tokens.size(); }
  bool operator==(const TokenSeq& other) const {
    return tokens == other.tokens && sentence_end == other.sentence_end;
  }
};

// Throws Error("no tokens") when nothing survives stripping.
TokenSeq tokenize(std::string_view text, std::string source_doc = {});

// Space-joined tokens; sentence-ending tokens get a trailing '.'.
std::string join(const TokenSeq& seq);

// Splits a token sequence at sentence-end flags. The last sentence is
// closed implicitly.
std::vector<TokenSeq> split_sentences(const TokenSeq& seq);

// JSON-lines, one {"id","text"} object per line; blank lines skipped.
Corpus load_corpus(const std::filesystem::path& path);
Corpus parse_corpus(std::istream& in, const std::string& origin = "<stream>");
void save_corpus(const Corpus& corpus, const std::filesystem::path& path);

// TSV "query_id<TAB>doc_id<TAB>relevance". Returns relevant (relevance > 0)
// doc ids per query, file order.
std::map<std::string, std::vector<std::string>> load_qrels(
    const std::filesystem::path& path);

class EmbeddingStore {
 public:
  EmbeddingStore(std::string space_name, Eigen::Index dim);

  const std::string& space_name() const { return space_name_; }
  Eigen::Index dim() const { return dim_; }
  std::size_t size() const { return words_.size(); }
  bool empty() const { return words_.empty(); }

  // Returns true when an existing entry was overwritten.
  bool insert(std::string word, Eigen::VectorXd vector);

  // nullptr on a miss; absent words never read as zeros.
  const Eigen::VectorXd* find(std::string_view word) const;
  Eigen::VectorXd* find_mutable(std::string_view word);
  std::optional<std::size_t> row_of(std::string_view word) const;
  bool contains(std::string_view word) const { return row_of(word).has_value(); }

  const std::vector<std::string>& words() const { return words_; }
  const Eigen::VectorXd& row(std::size_t i) const { return vectors_[i]; }
  Eigen::VectorXd& row(std::size_t i) { return vectors_[i]; }

 private:
  std::string space_name_;
  Eigen::Index dim_;
  std::vector<std::string> words_;
  std::vector<Eigen::VectorXd> vectors_;
  std::unordered_map<std::string, std::size_t> index_;
};

// GloVe-style text: "word f1 ... fD" per line.
EmbeddingStore load_embeddings(const std::filesystem::path& path,
                               std::string space_name);
EmbeddingStore parse_embeddings(std::istream& in, std::string space_name,
                                const std::string& origin = "<stream>");
void write_embeddings(const EmbeddingStore& store, std::ostream& out);

// Cosine similarity; nullopt when either vector has zero norm.
std::optional<double> cosine(const Eigen::VectorXd& a, const Eigen::VectorXd& b);

struct SynonymList {
  std::vector<std::pair<std::string, double>> entries;  // (word, cosine)
  bool out_of_lexicon = false;
};

// Up to `max_count` words other than `word` whose cosine with `word` is at
// least `min_cosine`, cosine descending, ties lexicographic.
SynonymList synonyms(std::string_view word, const EmbeddingStore& store,
                     std::size_t max_count, double min_cosine);

// Word maximizing cosine with `v`, ignoring `exclude`; ties lexicographic.
std::string nearest_word(const Eigen::VectorXd& v, const EmbeddingStore& store,
                         const std::set<std::string>& exclude = {});

}  // namespace prada

#endif  // PRADA_CORPUS_HPP_
