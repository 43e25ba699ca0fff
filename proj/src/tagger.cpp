#include "wdemb/tagger.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <sstream>

namespace wdemb {

char label_char(int label) {
  switch (label) {
    case kLabelB: return 'B';
    case kLabelI: return 'I';
    case kLabelO: return 'O';
    default: throw Error("label index out of range: " + std::to_string(label));
  }
}

int label_index(char c) {
  switch (c) {
    case 'B': return kLabelB;
    case 'I': return kLabelI;
    case 'O': return kLabelO;
    default: throw Error(std::string("label must be B, I or O, got '") + c + "'");
  }
}

std::string stem(std::string_view word) {
  std::string w(word);
  auto ends_with = [&](std::string_view suffix) {
    return w.size() >= suffix.size() && w.compare(w.size() - suffix.size(), suffix.size(), suffix) == 0;
  };
  if (w.size() > 4 && ends_with("ies")) return w.substr(0, w.size() - 3) + "y";
  if (w.size() > 5 && ends_with("ing")) return w.substr(0, w.size() - 3);
  if (w.size() > 4 && ends_with("ed")) return w.substr(0, w.size() - 2);
  if (w.size() > 4 && (ends_with("sses") || ends_with("xes") || ends_with("zes") || ends_with("ches") ||
                       ends_with("shes")))
    return w.substr(0, w.size() - 2);
  if (w.size() > 3 && ends_with("s") && !ends_with("ss") && !ends_with("us")) return w.substr(0, w.size() - 1);
  return w;
}

namespace {

// Byte offsets of UTF-8 code point starts, plus the end offset.
std::vector<std::size_t> code_point_offsets(std::string_view s) {
  std::vector<std::size_t> offs;
  for (std::size_t i = 0; i < s.size(); ++i)
    if ((static_cast<unsigned char>(s[i]) & 0xC0) != 0x80) offs.push_back(i);
  offs.push_back(s.size());
  return offs;
}

std::string offset_tag(int k) { return k > 0 ? "+" + std::to_string(k) : std::to_string(k); }

}  // namespace

std::vector<std::vector<std::string>> baseline_templates(const ParsedSentence& sentence) {
  constexpr int kWindow = 2;
  constexpr int kMaxAffix = 4;
  const auto n = static_cast<int>(sentence.size());
  std::vector<std::vector<std::string>> out(sentence.size());
  for (int i = 0; i < n; ++i) {
    auto& feats = out[static_cast<std::size_t>(i)];
    for (int k = -kWindow; k <= kWindow; ++k) {
      const std::string at = "[" + offset_tag(k) + "]=";
      const int j = i + k;
      if (j < 0 || j >= n) {
        const std::string boundary = j < 0 ? "<BOS>" : "<EOS>";
        feats.push_back("w" + at + boundary);
        feats.push_back("t" + at + boundary);
        for (int len = 1; len <= kMaxAffix; ++len) {
          feats.push_back("pre" + std::to_string(len) + at + boundary);
          feats.push_back("suf" + std::to_string(len) + at + boundary);
        }
        feats.push_back("stem" + at + boundary);
        feats.push_back("cap" + at + boundary);
        continue;
      }
      const auto& tok = sentence.tokens[static_cast<std::size_t>(j)];
      feats.push_back("w" + at + tok.form);
      feats.push_back("t" + at + tok.pos);
      const auto offs = code_point_offsets(tok.form);
      const std::size_t chars = offs.size() - 1;
      for (int len = 1; len <= kMaxAffix; ++len) {
        const std::size_t take = std::min<std::size_t>(static_cast<std::size_t>(len), chars);
        feats.push_back("pre" + std::to_string(len) + at + tok.form.substr(0, offs[take]));
        feats.push_back("suf" + std::to_string(len) + at + tok.form.substr(offs[chars - take]));
      }
      feats.push_back("stem" + at + stem(tok.form));
      const bool cap = !tok.raw.empty() && std::isupper(static_cast<unsigned char>(tok.raw[0]));
      feats.push_back("cap" + at + (cap ? "true" : "false"));
    }
  }
  return out;
}

std::optional<std::size_t> CrfModel::feature_id(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::size_t CrfModel::intern(const std::string& name) {
  auto [it, inserted] = index_.try_emplace(name, names_.size());
  if (inserted) {
    names_.push_back(name);
    emission_.push_back({0.0, 0.0, 0.0});
  }
  return it->second;
}

CrfModel::Compiled CrfModel::compile(const FeatureSentence& rows) const {
  Compiled out(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (const auto& f : rows[i].features)
      if (auto id = feature_id(f)) out[i].push_back(*id);
  return out;
}

std::vector<std::array<double, kNumLabels>> CrfModel::emission_scores(const Compiled& sentence) const {
  std::vector<std::array<double, kNumLabels>> scores(sentence.size(), {0.0, 0.0, 0.0});
  for (std::size_t i = 0; i < sentence.size(); ++i)
    for (auto f : sentence[i])
      for (int y = 0; y < kNumLabels; ++y) scores[i][y] += emission_[f][y];
  return scores;
}

double CrfModel::sequence_score(const Compiled& sentence, const std::vector<int>& labels) const {
  if (labels.size() != sentence.size()) throw Error("label sequence length mismatch");
  auto em = emission_scores(sentence);
  double s = 0.0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    s += em[i][labels[i]];
    if (i > 0) s += transition_[labels[i - 1]][labels[i]];
  }
  return s;
}

double CrfModel::l1_norm() const {
  double s = 0.0;
  for (const auto& e : emission_)
    for (double w : e) s += std::abs(w);
  for (const auto& row : transition_)
    for (double w : row) s += std::abs(w);
  return s;
}

void CrfModel::save(std::ostream& out) const {
  out.precision(17);
  out << "#L1\t" << l1_lambda << '\n';
  out << "#TRANSITIONS\n";
  for (int a = 0; a < kNumLabels; ++a)
    for (int b = 0; b < kNumLabels; ++b) out << label_char(a) << '\t' << label_char(b) << '\t' << transition_[a][b] << '\n';
  out << "#FEATURES\n";
  for (std::size_t f = 0; f < names_.size(); ++f)
    for (int y = 0; y < kNumLabels; ++y)
      if (emission_[f][y] != 0.0) out << names_[f] << '\t' << label_char(y) << '\t' << emission_[f][y] << '\n';
}

CrfModel CrfModel::load(std::istream& in) {
  CrfModel model;
  enum class Section { kNone, kTransitions, kFeatures } section = Section::kNone;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line.rfind("# ", 0) == 0 || line == "#") continue;
    if (line.rfind("#L1\t", 0) == 0) {
      model.l1_lambda = std::stod(line.substr(4));
      continue;
    }
    if (line == "#TRANSITIONS") {
      section = Section::kTransitions;
      continue;
    }
    if (line == "#FEATURES") {
      section = Section::kFeatures;
      continue;
    }
    auto t2 = line.rfind('\t');
    auto t1 = t2 == std::string::npos || t2 == 0 ? std::string::npos : line.rfind('\t', t2 - 1);
    if (t1 == std::string::npos || t2 != t1 + 2) throw Error("model file: malformed line " + std::to_string(line_no));
    const int label = label_index(line[t1 + 1]);
    const double weight = std::stod(line.substr(t2 + 1));
    const std::string key = line.substr(0, t1);
    if (section == Section::kTransitions) {
      if (key.size() != 1) throw Error("model file: bad transition at line " + std::to_string(line_no));
      model.transition_[label_index(key[0])][label] = weight;
    } else if (section == Section::kFeatures) {
      model.emission_[model.intern(key)][label] = weight;
    } else {
      throw Error("model file: weight outside a section at line " + std::to_string(line_no));
    }
  }
  return model;
}

namespace {

double log_sum_exp(const double* v, int n) {
  double m = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < n; ++i) m = std::max(m, v[i]);
  if (!std::isfinite(m)) return m;
  double s = 0.0;
  for (int i = 0; i < n; ++i) s += std::exp(v[i] - m);
  return m + std::log(s);
}

}  // namespace

ForwardBackward forward_backward(const CrfModel& model, const CrfModel::Compiled& sentence) {
  ForwardBackward fb;
  const std::size_t n = sentence.size();
  if (n == 0) return fb;
  const auto em = model.emission_scores(sentence);
  const auto& tr = model.transition();
  using Row = std::array<double, kNumLabels>;
  std::vector<Row> alpha(n), beta(n);
  alpha[0] = em[0];
  for (std::size_t i = 1; i < n; ++i)
    for (int y = 0; y < kNumLabels; ++y) {
      Row terms;
      for (int a = 0; a < kNumLabels; ++a) terms[a] = alpha[i - 1][a] + tr[a][y];
      alpha[i][y] = em[i][y] + log_sum_exp(terms.data(), kNumLabels);
    }
  beta[n - 1] = {0.0, 0.0, 0.0};
  for (std::size_t i = n - 1; i-- > 0;)
    for (int a = 0; a < kNumLabels; ++a) {
      Row terms;
      for (int b = 0; b < kNumLabels; ++b) terms[b] = tr[a][b] + em[i + 1][b] + beta[i + 1][b];
      beta[i][a] = log_sum_exp(terms.data(), kNumLabels);
    }
  fb.log_partition = log_sum_exp(alpha[n - 1].data(), kNumLabels);
  fb.marginals.resize(n);
  for (std::size_t i = 0; i < n; ++i)
    for (int y = 0; y < kNumLabels; ++y) fb.marginals[i][y] = std::exp(alpha[i][y] + beta[i][y] - fb.log_partition);
  fb.edge_marginals.resize(n - 1);
  for (std::size_t i = 0; i + 1 < n; ++i)
    for (int a = 0; a < kNumLabels; ++a)
      for (int b = 0; b < kNumLabels; ++b)
        fb.edge_marginals[i][a][b] =
            std::exp(alpha[i][a] + tr[a][b] + em[i + 1][b] + beta[i + 1][b] - fb.log_partition);
  return fb;
}

ForwardBackward forward_backward(const CrfModel& model, const FeatureSentence& rows) {
  return forward_backward(model, model.compile(rows));
}

std::vector<int> viterbi_decode(const CrfModel& model, const CrfModel::Compiled& sentence) {
  const std::size_t n = sentence.size();
  if (n == 0) return {};
  const auto em = model.emission_scores(sentence);
  const auto& tr = model.transition();
  // suffix[i][y]: best score of positions i..n-1 given y_i = y. Decoding then
  // runs left to right and takes the lowest label among (near-)ties, so tied
  // sequences resolve to the lexicographically first one under B < I < O.
  std::vector<std::array<double, kNumLabels>> suffix(n);
  suffix[n - 1] = em[n - 1];
  for (std::size_t i = n - 1; i-- > 0;)
    for (int y = 0; y < kNumLabels; ++y) {
      double top = tr[y][0] + suffix[i + 1][0];
      for (int b = 1; b < kNumLabels; ++b) top = std::max(top, tr[y][b] + suffix[i + 1][b]);
      suffix[i][y] = em[i][y] + top;
    }
  auto pick = [](const std::array<double, kNumLabels>& s) {
    const double top = *std::max_element(s.begin(), s.end());
    const double slack = kTieTolerance * (1.0 + std::abs(top));
    for (int y = 0; y < kNumLabels; ++y)
      if (s[static_cast<std::size_t>(y)] >= top - slack) return y;
    return kNumLabels - 1;
  };
  std::vector<int> labels(n);
  labels[0] = pick(suffix[0]);
  for (std::size_t i = 1; i < n; ++i) {
    std::array<double, kNumLabels> s;
    for (int y = 0; y < kNumLabels; ++y) s[static_cast<std::size_t>(y)] = tr[labels[i - 1]][y] + suffix[i][y];
    labels[i] = pick(s);
  }
  return labels;
}

std::vector<int> viterbi_decode(const CrfModel& model, const FeatureSentence& rows) {
  return viterbi_decode(model, model.compile(rows));
}

LikelihoodGradient log_likelihood_gradient(const CrfModel& model, const CrfModel::Compiled& sentence,
                                           const std::vector<int>& gold) {
  LikelihoodGradient g;
  const auto fb = forward_backward(model, sentence);
  g.log_likelihood = model.sequence_score(sentence, gold) - fb.log_partition;

  std::unordered_map<std::size_t, std::size_t> slot;
  for (std::size_t i = 0; i < sentence.size(); ++i) {
    for (auto f : sentence[i]) {
      auto [it, inserted] = slot.try_emplace(f, g.features.size());
      if (inserted) {
        g.features.push_back(f);
        g.emission_grad.push_back({0.0, 0.0, 0.0});
      }
      auto& eg = g.emission_grad[it->second];
      eg[gold[i]] += 1.0;
      for (int y = 0; y < kNumLabels; ++y) eg[y] -= fb.marginals[i][y];
    }
    if (i > 0) {
      g.transition_grad[gold[i - 1]][gold[i]] += 1.0;
      for (int a = 0; a < kNumLabels; ++a)
        for (int b = 0; b < kNumLabels; ++b) g.transition_grad[a][b] -= fb.edge_marginals[i - 1][a][b];
    }
  }
  return g;
}

namespace {

std::vector<int> gold_of(const FeatureSentence& rows, std::size_t sentence_no) {
  std::vector<int> gold;
  gold.reserve(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (!rows[i].label)
      throw Error("training row " + std::to_string(i + 1) + " of sentence " + std::to_string(sentence_no + 1) +
                  " has no label");
    try {
      gold.push_back(label_index(*rows[i].label));
    } catch (const Error& e) {
      throw Error("sentence " + std::to_string(sentence_no + 1) + ", row " + std::to_string(i + 1) + ": " + e.what());
    }
  }
  return gold;
}

}  // namespace

double crf_objective(const CrfModel& model, const std::vector<FeatureSentence>& data) {
  double ll = 0.0;
  for (std::size_t s = 0; s < data.size(); ++s) {
    auto compiled = model.compile(data[s]);
    auto gold = gold_of(data[s], s);
    ll += model.sequence_score(compiled, gold) - forward_backward(model, compiled).log_partition;
  }
  return ll - model.l1_lambda * model.l1_norm();
}

CrfModel train_crf(const std::vector<FeatureSentence>& data, const CrfTrainConfig& config, CrfTrainStats* stats) {
  if (data.empty()) throw Error("empty training set");
  if (config.l1_lambda < 0.0) throw Error("l1_lambda must be >= 0");
  if (config.epochs < 1) throw Error("epochs must be >= 1");

  CrfModel model;
  model.l1_lambda = config.l1_lambda;
  std::vector<CrfModel::Compiled> compiled;
  std::vector<std::vector<int>> gold;
  for (std::size_t s = 0; s < data.size(); ++s) {
    gold.push_back(gold_of(data[s], s));
    for (const auto& row : data[s])
      for (const auto& f : row.features) model.intern(f);
  }
  for (const auto& rows : data) compiled.push_back(model.compile(rows));

  // Cumulative L1 penalty: `total_penalty` is what each weight could have
  // received so far; `applied` tracks what it actually received.
  std::vector<std::array<double, kNumLabels>> applied(model.num_features(), {0.0, 0.0, 0.0});
  LabelMatrix applied_tr{};
  double total_penalty = 0.0;
  auto penalize = [&](double& w, double& q) {
    const double before = w;
    if (w > 0.0)
      w = std::max(0.0, w - (total_penalty + q));
    else if (w < 0.0)
      w = std::min(0.0, w + (total_penalty - q));
    q += w - before;
  };
  auto flush_all = [&] {
    for (std::size_t f = 0; f < model.num_features(); ++f)
      for (int y = 0; y < kNumLabels; ++y) penalize(model.emission(f)[y], applied[f][y]);
    for (int a = 0; a < kNumLabels; ++a)
      for (int b = 0; b < kNumLabels; ++b) penalize(model.transition()[a][b], applied_tr[a][b]);
  };

  const double n = static_cast<double>(data.size());
  Rng rng(config.seed);
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), 0);
  std::size_t k = 0;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (auto s : order) {
      const double lr = config.initial_lr * std::pow(config.decay, static_cast<double>(k) / n);
      total_penalty += lr * config.l1_lambda / n;
      auto g = log_likelihood_gradient(model, compiled[s], gold[s]);
      for (std::size_t j = 0; j < g.features.size(); ++j) {
        const auto f = g.features[j];
        for (int y = 0; y < kNumLabels; ++y) {
          model.emission(f)[y] += lr * g.emission_grad[j][y];
          penalize(model.emission(f)[y], applied[f][y]);
        }
      }
      for (int a = 0; a < kNumLabels; ++a)
        for (int b = 0; b < kNumLabels; ++b) {
          model.transition()[a][b] += lr * g.transition_grad[a][b];
          penalize(model.transition()[a][b], applied_tr[a][b]);
        }
      ++k;
    }
    flush_all();
    if (stats) stats->objective.push_back(crf_objective(model, data));
  }
  return model;
}

}  // namespace wdemb
