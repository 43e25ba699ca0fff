#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "wdemb/corpus.hpp"
#include "wdemb/embed.hpp"
#include "wdemb/eval.hpp"
#include "wdemb/features.hpp"
#include "wdemb/tagger.hpp"

namespace wdemb {

/// Builds the vocabulary, indexes paths and trains embeddings in one go.
EmbeddingModel train_embeddings(const std::vector<ParsedSentence>& sentences, int min_count,
                                const TrainConfig& config, TrainStats* stats = nullptr);

/// Seeded sentence-level shuffle, then the first ⌈ratio·n⌉ sentences train.
std::pair<std::vector<ParsedSentence>, std::vector<ParsedSentence>> split_sentences(
    const std::vector<ParsedSentence>& sentences, double train_ratio, std::uint64_t seed);

/// `start:stop:step` (inclusive) or a comma-separated list.
std::vector<int> parse_grid(std::string_view text);

std::vector<FeatureSentence> build_feature_rows(const std::vector<ParsedSentence>& sentences,
                                                const EmbeddingModel& model, const FeatureDiscretizers& discretizers,
                                                const FeatureOptions& options, bool with_labels);

/// Spans keyed by sentence ordinal ("0", "1", ...).
SpanSet label_spans(const std::vector<std::vector<char>>& labels, bool strict = false);
std::vector<std::vector<char>> gold_label_rows(const std::vector<FeatureSentence>& rows);
std::vector<std::vector<char>> decode_all(const CrfModel& model, const std::vector<FeatureSentence>& rows);

struct TaggingResult {
  Prf score;
  SpanSet predicted;
  SpanSet gold;
};

/// Fits discretizers on `train`, trains a CRF on its features and scores the
/// decoded `test` sentences.
TaggingResult run_tagging(const std::vector<ParsedSentence>& train, const std::vector<ParsedSentence>& test,
                          const EmbeddingModel& model, const FeatureOptions& options, int bins,
                          const CrfTrainConfig& crf);

}  // namespace wdemb
