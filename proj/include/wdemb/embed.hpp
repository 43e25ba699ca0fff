#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "wdemb/corpus.hpp"
#include "wdemb/deptree.hpp"
#include "wdemb/matrix.hpp"

namespace wdemb {

/// Word, relation and composition parameters. Every word has a target row and
/// a context row; every (relation label, direction) has a relation row; the
/// composer maps [h; g] (2d) to d.
struct ModelParams {
  std::size_t dim = 0;
  Matrix target_words;
  Matrix context_words;
  Matrix relations;
  Matrix composer;

  static ModelParams zeros(std::size_t num_words, std::size_t num_directed_relations, std::size_t dim);
  /// Target and relation rows uniform in ±0.5/d, context rows zero, composer
  /// uniform in ±sqrt(6 / 3d).
  static ModelParams initialize(std::size_t num_words, std::size_t num_directed_relations, std::size_t dim,
                                Rng& rng);

  bool all_finite() const;
  friend bool operator==(const ModelParams&, const ModelParams&) = default;
};

/// Hard tanh.
inline double htanh(double x) { return x > 1.0 ? 1.0 : (x < -1.0 ? -1.0 : x); }

/// Forward states of one path composition: hidden[i] is h_{i+1};
/// preactivation[i] is W[h_i; g_{i+1}] for i >= 1 (index 0 is unused).
struct CompositionTrace {
  std::vector<std::vector<double>> hidden;
  std::vector<std::vector<double>> preactivation;

  const std::vector<double>& output() const { return hidden.back(); }
};

CompositionTrace compose_path_traced(const DepPath& path, const ModelParams& params);
std::vector<double> compose_path(const DepPath& path, const ModelParams& params);

/// Gradient restricted to the rows an instance touches. `composer` is empty
/// (0x0) when no multi-hop path was involved.
struct SparseGradient {
  using Rows = std::vector<std::pair<std::size_t, std::vector<double>>>;
  Rows target;
  Rows context;
  Rows relation;
  Matrix composer;

  static std::vector<double>& row_for(Rows& rows, std::size_t index, std::size_t dim);
};

struct LossAndGradient {
  double loss = 0.0;
  SparseGradient grad;
};

struct ContextPair {
  WordId target = 0;
  WordId context = 0;
};

/// Σ max{0, 1 − (w2−w1)·r + (w2−w1)·r'} over the negatives, with w1, w2 taken
/// from the target matrix.
LossAndGradient path_loss_and_grads(const Triple& triple, std::span<const DepPath> negatives,
                                    const ModelParams& params);

/// Σ max{0, 1 − w·c + w·c'} with w a target row and c, c' context rows.
LossAndGradient context_loss_and_grads(const ContextPair& pair, std::span<const WordId> negatives,
                                       const ModelParams& params);

/// params -= lr * grad
void apply_gradient(ModelParams& params, const SparseGradient& grad, double lr);

/// k paths with `hop` steps from the vocabulary's smoothed path table. Each draw
/// equal to `exclude` is redrawn up to 10 times before being accepted.
std::vector<DepPath> sample_negative_paths(std::size_t hop, int k, const DepPath& exclude,
                                           const Vocabulary& vocab, Rng& rng);

/// k words from the smoothed unigram table, never equal to `exclude`.
std::vector<WordId> sample_negative_words(int k, WordId exclude, const Vocabulary& vocab, Rng& rng);

struct TrainConfig {
  std::size_t dim = 100;
  int neg_words = 5;
  std::vector<int> neg_paths = {5, 3, 2};  // per hop count
  double initial_lr = 0.001;
  int window = 5;
  int max_hops = kDefaultMaxHops;
  int epochs = 1;
  int threads = 1;
  std::uint64_t seed = 1;

  void validate() const;
};

struct TrainStats {
  std::size_t total_instances = 0;
  std::size_t updates = 0;
  /// Mean instance loss over each consecutive block of kLossBlock updates.
  std::vector<double> loss_trace;
  static constexpr std::size_t kLossBlock = 1000;
};

/// Linear-context pairs of a sentence: every in-vocabulary token paired with
/// in-vocabulary tokens at most `window` positions away.
std::vector<ContextPair> linear_context_pairs(const std::vector<std::optional<WordId>>& ids, int window);

/// Asynchronous SGD over both objectives. Per sentence, each token's context
/// pairs are followed by its outgoing triples. With threads > 1 workers update
/// the shared parameters without synchronization. The vocabulary's path
/// tables must already be indexed (see index_paths).
ModelParams train(const std::vector<ParsedSentence>& sentences, const Vocabulary& vocab,
                  const TrainConfig& config, TrainStats* stats = nullptr);

/// (w2 − w1) · compose(path)
double ranking_score(WordId w1, WordId w2, const DepPath& path, const ModelParams& params);

struct Neighbor {
  WordId word = 0;
  double cosine = 0.0;
};

std::vector<Neighbor> nearest_neighbors(std::span<const double> query, int k, const ModelParams& params,
                                        std::optional<WordId> exclude = std::nullopt);
std::vector<Neighbor> nearest_neighbors(WordId word, int k, const ModelParams& params);
/// Ranks by cosine to w + compose(path).
std::vector<Neighbor> nearest_neighbors(WordId word, const DepPath& path, int k, const ModelParams& params);

// Embedding files. Text matrices are `<rows> <d>` then `token v1 … vd`; the
// composer is binary: 8-byte magic, 8-byte d, then 2d² little-endian doubles.
void write_text_matrix(std::ostream& out, const Matrix& m, const std::vector<std::string>& names);
Matrix read_text_matrix(std::istream& in, std::vector<std::string>* names = nullptr);
void write_composer(std::ostream& out, const Matrix& composer);
Matrix read_composer(std::istream& in);

std::vector<std::string> word_names(const Vocabulary& vocab);
std::vector<std::string> relation_names(const Vocabulary& vocab);

}  // namespace wdemb
