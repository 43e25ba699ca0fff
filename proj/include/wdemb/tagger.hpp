#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "wdemb/corpus.hpp"
#include "wdemb/feature_file.hpp"

namespace wdemb {

// Labels in tie-break order.
inline constexpr int kLabelB = 0;
inline constexpr int kLabelI = 1;
inline constexpr int kLabelO = 2;
inline constexpr int kNumLabels = 3;
/// Decoding treats path scores this close (relative) as tied.
inline constexpr double kTieTolerance = 1e-12;

char label_char(int label);
/// Throws on anything other than B, I or O.
int label_index(char c);

/// Minimal suffix stripper for plural and verbal endings (-s, -es, -ies, -ed, -ing).
std::string stem(std::string_view word);

/// Word, POS, prefix, suffix, stem and capitalization templates over a ±2
/// window, one list of feature strings per token. Offsets past either end of
/// the sentence produce boundary values.
std::vector<std::vector<std::string>> baseline_templates(const ParsedSentence& sentence);

using LabelMatrix = std::array<std::array<double, kNumLabels>, kNumLabels>;

/// Linear-chain CRF over {B, I, O} with per-(feature, label) emission weights
/// and a 3x3 transition table.
class CrfModel {
 public:
  /// Sentence with features mapped to weight indices; unknown features dropped.
  using Compiled = std::vector<std::vector<std::size_t>>;

  std::size_t num_features() const { return names_.size(); }
  const std::string& feature_name(std::size_t i) const { return names_[i]; }
  std::optional<std::size_t> feature_id(const std::string& name) const;
  std::size_t intern(const std::string& name);

  std::array<double, kNumLabels>& emission(std::size_t feature) { return emission_[feature]; }
  const std::array<double, kNumLabels>& emission(std::size_t feature) const { return emission_[feature]; }
  LabelMatrix& transition() { return transition_; }
  const LabelMatrix& transition() const { return transition_; }

  double l1_lambda = 1.0;

  Compiled compile(const FeatureSentence& rows) const;
  /// Per-position label scores.
  std::vector<std::array<double, kNumLabels>> emission_scores(const Compiled& sentence) const;
  double sequence_score(const Compiled& sentence, const std::vector<int>& labels) const;
  double l1_norm() const;

  /// `#TRANSITIONS` then `from<TAB>to<TAB>weight`, then `#FEATURES` then
  /// `feature<TAB>label<TAB>weight` for every nonzero emission weight.
  void save(std::ostream& out) const;
  static CrfModel load(std::istream& in);

 private:
  std::vector<std::string> names_;
  std::unordered_map<std::string, std::size_t> index_;
  std::vector<std::array<double, kNumLabels>> emission_;
  LabelMatrix transition_{};
};

struct ForwardBackward {
  double log_partition = 0.0;
  std::vector<std::array<double, kNumLabels>> marginals;
  /// edge_marginals[i][a][b] = P(y_i = a, y_{i+1} = b)
  std::vector<LabelMatrix> edge_marginals;
};

ForwardBackward forward_backward(const CrfModel& model, const FeatureSentence& rows);
ForwardBackward forward_backward(const CrfModel& model, const CrfModel::Compiled& sentence);

std::vector<int> viterbi_decode(const CrfModel& model, const FeatureSentence& rows);
std::vector<int> viterbi_decode(const CrfModel& model, const CrfModel::Compiled& sentence);

/// log p(gold | sentence) and its gradient; `emission_grad[k]` belongs to the
/// k-th entry of `features` (the distinct features of the sentence).
struct LikelihoodGradient {
  double log_likelihood = 0.0;
  std::vector<std::size_t> features;
  std::vector<std::array<double, kNumLabels>> emission_grad;
  LabelMatrix transition_grad{};
};

LikelihoodGradient log_likelihood_gradient(const CrfModel& model, const CrfModel::Compiled& sentence,
                                           const std::vector<int>& gold);

struct CrfTrainConfig {
  double l1_lambda = 1.0;
  int epochs = 20;
  double initial_lr = 0.1;
  /// Learning rate after k sentences is initial_lr · decay^(k / N).
  double decay = 0.85;
  std::uint64_t seed = 1;
};

struct CrfTrainStats {
  /// Σ log-likelihood − λ‖w‖₁ after each epoch.
  std::vector<double> objective;
};

/// SGD on the L1-penalized conditional log-likelihood with cumulative-penalty
/// truncation applied lazily to the weights each sentence touches.
CrfModel train_crf(const std::vector<FeatureSentence>& data, const CrfTrainConfig& config,
                   CrfTrainStats* stats = nullptr);

/// Σ log-likelihood − λ‖w‖₁ over `data`.
double crf_objective(const CrfModel& model, const std::vector<FeatureSentence>& data);

}  // namespace wdemb
