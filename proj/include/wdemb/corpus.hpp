#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "wdemb/path.hpp"

namespace wdemb {

using Rng = std::mt19937_64;

/// Raised for unrecoverable input or contract violations across the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Token {
  std::string form;  // lowercased
  std::string raw;   // surface form as it appeared in the input
  std::string pos;
  int head = 0;  // 0 = root, otherwise 1-based
  std::string rel;
  std::optional<char> label;  // gold BIO tag from MISC `BIO=`, if any
};

struct ParsedSentence {
  std::string id;
  std::vector<Token> tokens;

  std::size_t size() const { return tokens.size(); }
};

struct ParseDiagnostic {
  std::size_t line = 0;  // 1-based; for sentence-level problems, the block's first line
  std::string message;
};

struct ConlluResult {
  std::vector<ParsedSentence> sentences;
  std::vector<ParseDiagnostic> diagnostics;
};

/// Reads CoNLL-U. Malformed blocks are dropped and reported in `diagnostics`;
/// parsing continues with the next block.
ConlluResult parse_conllu(std::istream& in);

/// Checks the single-root and acyclicity constraints. Returns an explanation
/// when violated.
std::optional<std::string> validate_tree(const ParsedSentence& sentence);

std::string to_lower(std::string_view s);

/// Cumulative-weight sampling table.
class WeightedTable {
 public:
  WeightedTable() = default;
  explicit WeightedTable(const std::vector<double>& weights);

  std::size_t size() const { return cumulative_.size(); }
  bool empty() const { return cumulative_.empty(); }
  double total() const { return cumulative_.empty() ? 0.0 : cumulative_.back(); }
  double weight(std::size_t i) const {
    return i == 0 ? cumulative_[0] : cumulative_[i] - cumulative_[i - 1];
  }
  std::size_t sample(Rng& rng) const;

 private:
  std::vector<double> cumulative_;
};

/// Distinct dependency paths seen in the corpus, bucketed by hop count, with
/// count^{3/4} sampling tables.
class PathTable {
 public:
  void add(const DepPath& path, std::int64_t count = 1);
  /// Rebuilds the sampling tables from the accumulated counts.
  void finalize();

  std::size_t max_hops() const { return buckets_.size(); }
  const std::vector<DepPath>& paths(std::size_t hop) const;
  std::int64_t count(const DepPath& path) const;
  const WeightedTable& table(std::size_t hop) const;
  bool empty() const;

 private:
  struct Bucket {
    std::vector<DepPath> paths;
    std::vector<std::int64_t> counts;
    std::unordered_map<DepPath, std::size_t, DepPathHash> index;
    WeightedTable table;
  };
  std::vector<Bucket> buckets_;  // buckets_[h - 1] holds h-hop paths
};

class Vocabulary {
 public:
  static constexpr double kSmoothingPower = 0.75;

  /// Counts forms and relation labels; keeps words with count >= min_count.
  static Vocabulary build(const std::vector<ParsedSentence>& sentences, int min_count);

  std::size_t num_words() const { return words_.size(); }
  std::size_t num_relations() const { return relations_.size(); }
  /// Rows of the relation matrix: one per (label, direction).
  std::size_t num_directed_relations() const { return 2 * relations_.size(); }
  int min_count() const { return min_count_; }

  std::optional<WordId> word_id(std::string_view form) const;
  const std::string& word(WordId id) const { return words_.at(static_cast<std::size_t>(id)); }
  std::int64_t word_count(WordId id) const { return word_counts_.at(static_cast<std::size_t>(id)); }

  std::optional<RelationId> relation_id(std::string_view label) const;
  const std::string& relation(RelationId id) const {
    return relations_.at(static_cast<std::size_t>(id));
  }
  std::int64_t relation_count(RelationId id) const {
    return relation_counts_.at(static_cast<std::size_t>(id));
  }

  /// Word sampling weights are count^{3/4}.
  const WeightedTable& word_table() const { return word_table_; }

  PathTable& path_table() { return paths_; }
  const PathTable& path_table() const { return paths_; }

  void save(std::ostream& out) const;
  static Vocabulary load(std::istream& in);

 private:
  void index();

  int min_count_ = 1;
  std::vector<std::string> words_;
  std::vector<std::int64_t> word_counts_;
  std::unordered_map<std::string, WordId> word_index_;
  std::vector<std::string> relations_;
  std::vector<std::int64_t> relation_counts_;
  std::unordered_map<std::string, RelationId> relation_index_;
  WeightedTable word_table_;
  PathTable paths_;
};

}  // namespace wdemb
