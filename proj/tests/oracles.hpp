#pragma once

// Brute-force references for the CRF and the randomization test.

#include <array>
#include <cstdint>
#include <vector>

#include "wdemb/corpus.hpp"
#include "wdemb/eval.hpp"
#include "wdemb/tagger.hpp"

namespace wdemb::testing {

struct Enumeration {
  std::vector<int> best;  // first maximiser in lexicographic order, ties within kTieTolerance
  double log_partition = 0.0;
  std::vector<std::array<double, kNumLabels>> marginals;
};

/// Scores all 3^n label sequences.
Enumeration enumerate_crf(const CrfModel& model, const CrfModel::Compiled& sentence);

/// Model over `num_features` features "f0".. with weights uniform in ±scale,
/// and an n-token sentence drawing 1-3 features per token.
struct RandomCrf {
  CrfModel model;
  FeatureSentence rows;
};
RandomCrf random_crf(std::size_t n, std::size_t num_features, Rng& rng, double scale = 2.0);

/// Exact p-value over all 2^m per-sentence swaps (m = number of sentence ids),
/// as the fraction with statistic ≥ observed.
double exact_randomization(const SpanSet& pred_a, const SpanSet& pred_b, const SpanSet& gold);

}  // namespace wdemb::testing
