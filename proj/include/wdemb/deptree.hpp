#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "wdemb/corpus.hpp"
#include "wdemb/path.hpp"

namespace wdemb {

inline constexpr int kDefaultMaxHops = 3;

/// `conj:u/dep:d/amod:d`. Labels may themselves contain ':'; the direction
/// suffix is always the text after the last one.
std::string format_path(const DepPath& path, const Vocabulary& vocab);
DepPath parse_path(std::string_view text, const Vocabulary& vocab);

/// Unique tree path from token `from` to token `to` (0-based positions).
DepPath tree_path(const ParsedSentence& sentence, const Vocabulary& vocab, std::size_t from,
                  std::size_t to);

struct Triple {
  WordId w1 = 0;
  WordId w2 = 0;
  DepPath path;
};

/// Ordered-pair triples within `max_hops`. When `counts` is non-null every
/// emitted path is also tallied there.
std::vector<Triple> extract_triples(const ParsedSentence& sentence, const Vocabulary& vocab,
                                    int max_hops = kDefaultMaxHops, PathTable* counts = nullptr);

/// Fills the vocabulary's per-hop path sampling tables from a corpus.
void index_paths(Vocabulary& vocab, const std::vector<ParsedSentence>& sentences,
                 int max_hops = kDefaultMaxHops);

struct ContextEntry {
  DepPath path;
  std::size_t position = 0;
  std::optional<WordId> word;  // nullopt when the form is out of vocabulary
};

/// Every token within `max_hops` of `target`, ordered by hop count then position.
std::vector<ContextEntry> dependency_context(const ParsedSentence& sentence, const Vocabulary& vocab,
                                             std::size_t target, int max_hops = kDefaultMaxHops);

}  // namespace wdemb
