#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <string>

namespace wdemb::testing {

Enumeration enumerate_crf(const CrfModel& model, const CrfModel::Compiled& sentence) {
  const std::size_t n = sentence.size();
  std::size_t total = 1;
  for (std::size_t i = 0; i < n; ++i) total *= kNumLabels;

  std::vector<double> scores(total);
  std::vector<std::vector<int>> seqs(total, std::vector<int>(n));
  double best = -std::numeric_limits<double>::infinity();
  Enumeration out;
  for (std::size_t code = 0; code < total; ++code) {
    // most significant digit first, so code order is lexicographic order
    std::size_t c = code;
    for (std::size_t i = n; i-- > 0;) {
      seqs[code][i] = static_cast<int>(c % kNumLabels);
      c /= kNumLabels;
    }
    scores[code] = model.sequence_score(sentence, seqs[code]);
    best = std::max(best, scores[code]);
  }
  // lexicographically first sequence among those tied (up to rounding) at the top
  const double slack = kTieTolerance * (1.0 + std::abs(best));
  for (std::size_t code = 0; code < total; ++code)
    if (scores[code] >= best - slack) {
      out.best = seqs[code];
      break;
    }
  double z = 0.0;
  for (double s : scores) z += std::exp(s - best);
  out.log_partition = best + std::log(z);
  out.marginals.assign(n, {0.0, 0.0, 0.0});
  for (std::size_t code = 0; code < total; ++code) {
    const double p = std::exp(scores[code] - out.log_partition);
    for (std::size_t i = 0; i < n; ++i) out.marginals[i][static_cast<std::size_t>(seqs[code][i])] += p;
  }
  return out;
}

RandomCrf random_crf(std::size_t n, std::size_t num_features, Rng& rng, double scale) {
  RandomCrf out;
  std::uniform_real_distribution<double> u(-scale, scale);
  for (std::size_t f = 0; f < num_features; ++f) {
    auto id = out.model.intern("f" + std::to_string(f));
    for (auto& w : out.model.emission(id)) w = u(rng);
  }
  for (auto& row : out.model.transition())
    for (auto& w : row) w = u(rng);
  std::uniform_int_distribution<std::size_t> pick(0, num_features - 1);
  for (std::size_t i = 0; i < n; ++i) {
    FeatureRow row;
    row.index = i;
    std::set<std::string> feats;
    const int k = std::uniform_int_distribution<int>(1, 3)(rng);
    for (int j = 0; j < k; ++j) feats.insert("f" + std::to_string(pick(rng)));
    row.features.assign(feats.begin(), feats.end());
    row.label = label_char(std::uniform_int_distribution<int>(0, kNumLabels - 1)(rng));
    out.rows.push_back(row);
  }
  return out;
}

double exact_randomization(const SpanSet& pred_a, const SpanSet& pred_b, const SpanSet& gold) {
  std::set<std::string> ids;
  for (const auto* s : {&pred_a, &pred_b, &gold})
    for (const auto& kv : *s) ids.insert(kv.first);
  const std::vector<std::string> order(ids.begin(), ids.end());
  if (order.size() > 20) throw Error("too many sentences to enumerate");

  auto f1_diff = [&](unsigned long mask) {
    SpanSet a, b;
    for (std::size_t i = 0; i < order.size(); ++i) {
      const bool swap = (mask >> i) & 1UL;
      const auto& src_a = swap ? pred_b : pred_a;
      const auto& src_b = swap ? pred_a : pred_b;
      if (auto it = src_a.find(order[i]); it != src_a.end()) a[order[i]] = it->second;
      if (auto it = src_b.find(order[i]); it != src_b.end()) b[order[i]] = it->second;
    }
    return std::abs(span_f1(a, gold).f1 - span_f1(b, gold).f1);
  };
  const double observed = f1_diff(0);
  const unsigned long total = 1UL << order.size();
  unsigned long at_least = 0;
  for (unsigned long mask = 0; mask < total; ++mask)
    if (f1_diff(mask) >= observed - 1e-12) ++at_least;
  return static_cast<double>(at_least) / static_cast<double>(total);
}

}  // namespace wdemb::testing
