#include "wdemb/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "wdemb/deptree.hpp"

namespace wdemb {

EmbeddingModel train_embeddings(const std::vector<ParsedSentence>& sentences, int min_count,
                                const TrainConfig& config, TrainStats* stats) {
  EmbeddingModel model{Vocabulary::build(sentences, min_count), {}};
  index_paths(model.vocab, sentences, config.max_hops);
  model.params = train(sentences, model.vocab, config, stats);
  return model;
}

std::pair<std::vector<ParsedSentence>, std::vector<ParsedSentence>> split_sentences(
    const std::vector<ParsedSentence>& sentences, double train_ratio, std::uint64_t seed) {
  if (!(train_ratio > 0.0 && train_ratio < 1.0)) throw Error("train ratio must be in (0, 1)");
  std::vector<std::size_t> order(sentences.size());
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  const auto cut = static_cast<std::size_t>(std::ceil(train_ratio * static_cast<double>(sentences.size())));
  std::pair<std::vector<ParsedSentence>, std::vector<ParsedSentence>> out;
  for (std::size_t k = 0; k < order.size(); ++k) (k < cut ? out.first : out.second).push_back(sentences[order[k]]);
  return out;
}

std::vector<int> parse_grid(std::string_view text) {
  auto to_int = [&](std::string_view s) {
    try {
      std::size_t used = 0;
      int v = std::stoi(std::string(s), &used);
      if (used != s.size()) throw Error("");
      return v;
    } catch (const std::exception&) {
      throw Error("bad grid value '" + std::string(s) + "' in '" + std::string(text) + "'");
    }
  };
  std::vector<int> out;
  if (text.find(':') != std::string_view::npos) {
    auto c1 = text.find(':');
    auto c2 = text.find(':', c1 + 1);
    if (c2 == std::string_view::npos) throw Error("grid must be start:stop:step");
    const int start = to_int(text.substr(0, c1));
    const int stop = to_int(text.substr(c1 + 1, c2 - c1 - 1));
    const int step = to_int(text.substr(c2 + 1));
    if (step <= 0 || stop < start) throw Error("grid '" + std::string(text) + "' is empty");
    for (int v = start; v <= stop; v += step) out.push_back(v);
  } else {
    std::size_t start = 0;
    while (start <= text.size()) {
      auto comma = text.find(',', start);
      out.push_back(to_int(text.substr(start, comma == std::string_view::npos ? text.npos : comma - start)));
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
  }
  if (out.empty()) throw Error("empty grid");
  return out;
}

std::vector<FeatureSentence> build_feature_rows(const std::vector<ParsedSentence>& sentences,
                                                const EmbeddingModel& model, const FeatureDiscretizers& discretizers,
                                                const FeatureOptions& options, bool with_labels) {
  std::vector<FeatureSentence> out;
  out.reserve(sentences.size());
  for (const auto& s : sentences) {
    std::vector<char> labels;
    if (with_labels) {
      labels = gold_labels(s);
      if (labels.empty()) throw Error("sentence " + s.id + " has tokens without a BIO label");
    }
    out.push_back(assemble_features(s, labels, model, discretizers, options));
  }
  return out;
}

SpanSet label_spans(const std::vector<std::vector<char>>& labels, bool strict) {
  SpanSet out;
  for (std::size_t s = 0; s < labels.size(); ++s) {
    auto spans = bio_to_spans(labels[s], strict);
    if (!spans.empty()) out[std::to_string(s)] = std::move(spans);
  }
  return out;
}

std::vector<std::vector<char>> gold_label_rows(const std::vector<FeatureSentence>& rows) {
  std::vector<std::vector<char>> out;
  for (const auto& sentence : rows) {
    std::vector<char> labels;
    for (const auto& r : sentence) {
      if (!r.label) throw Error("feature row without a gold label");
      labels.push_back(*r.label);
    }
    out.push_back(std::move(labels));
  }
  return out;
}

std::vector<std::vector<char>> decode_all(const CrfModel& model, const std::vector<FeatureSentence>& rows) {
  std::vector<std::vector<char>> out;
  out.reserve(rows.size());
  for (const auto& sentence : rows) {
    std::vector<char> labels;
    for (int y : viterbi_decode(model, sentence)) labels.push_back(label_char(y));
    out.push_back(std::move(labels));
  }
  return out;
}

TaggingResult run_tagging(const std::vector<ParsedSentence>& train, const std::vector<ParsedSentence>& test,
                          const EmbeddingModel& model, const FeatureOptions& options, int bins,
                          const CrfTrainConfig& crf) {
  const auto discretizers = fit_feature_discretizers(train, model, options, bins);
  const auto train_rows = build_feature_rows(train, model, discretizers, options, true);
  const auto test_rows = build_feature_rows(test, model, discretizers, options, true);
  const auto tagger = train_crf(train_rows, crf);
  TaggingResult result;
  result.predicted = label_spans(decode_all(tagger, test_rows));
  result.gold = label_spans(gold_label_rows(test_rows));
  result.score = span_f1(result.predicted, result.gold);
  return result;
}

}  // namespace wdemb
