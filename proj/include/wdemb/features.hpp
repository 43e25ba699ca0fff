#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "wdemb/corpus.hpp"
#include "wdemb/deptree.hpp"
#include "wdemb/discretize.hpp"
#include "wdemb/embed.hpp"
#include "wdemb/feature_file.hpp"

namespace wdemb {

inline constexpr int kDefaultLinearWindow = 5;

/// Which embedding blocks to emit: target word (W), linear context (L),
/// dependency context (D).
struct FeatureSets {
  bool word = false;
  bool linear = false;
  bool dependency = false;

  /// Accepts forms like "W+L+D", "WLD", "W,L" or "" / "none".
  static FeatureSets parse(std::string_view text);
  std::string str() const;
  bool none() const { return !word && !linear && !dependency; }
};

/// Trained embeddings and the vocabulary that indexes them.
struct EmbeddingModel {
  Vocabulary vocab;
  ModelParams params;
};

/// Target vector of the token at `i`; zeros when the form is out of vocabulary.
std::vector<double> word_vector(const ParsedSentence& sentence, std::size_t i, const EmbeddingModel& model);

/// Target vectors at offsets −⌊len/2⌋..−1, +1..+⌊len/2⌋ concatenated; positions
/// outside the sentence contribute zeros.
std::vector<double> linear_context_vector(const ParsedSentence& sentence, std::size_t i, int len,
                                          const EmbeddingModel& model);

/// Mean over the dependency context of compose(path) + word vector.
std::vector<double> dep_context_vector(const ParsedSentence& sentence, std::size_t i, const EmbeddingModel& model,
                                       int max_hops = kDefaultMaxHops);

struct FeatureDiscretizers {
  std::optional<Discretizer> word;
  std::optional<Discretizer> linear;
  std::optional<Discretizer> dependency;
};

struct FeatureOptions {
  FeatureSets sets;
  bool baseline = false;
  int linear_window = kDefaultLinearWindow;
  int max_hops = kDefaultMaxHops;
};

/// W is fitted on the target-word matrix; L and D on the vectors of every
/// token in `sentences`. Only blocks selected in `options.sets` are fitted.
FeatureDiscretizers fit_feature_discretizers(const std::vector<ParsedSentence>& sentences,
                                             const EmbeddingModel& model, const FeatureOptions& options,
                                             int bins);

/// Gold labels from the tokens' BIO annotations; empty if any token lacks one.
std::vector<char> gold_labels(const ParsedSentence& sentence);

/// Discrete feature rows: `W<dim>=<code>`, `L<offset>_<dim>=<code>`,
/// `D<dim>=<code>`, then the baseline templates if requested.
FeatureSentence assemble_features(const ParsedSentence& sentence, std::span<const char> labels,
                                  const EmbeddingModel& model, const FeatureDiscretizers& discretizers,
                                  const FeatureOptions& options);

}  // namespace wdemb
