#include "wdemb/features.hpp"

#include <algorithm>
#include <istream>
#include <ostream>

#include "wdemb/tagger.hpp"

namespace wdemb {

FeatureSets FeatureSets::parse(std::string_view text) {
  FeatureSets sets;
  if (text.empty() || text == "none") return sets;
  for (char c : text) {
    switch (c) {
      case 'W': case 'w': sets.word = true; break;
      case 'L': case 'l': sets.linear = true; break;
      case 'D': case 'd': sets.dependency = true; break;
      case '+': case ',': break;
      default: throw Error("unknown feature block '" + std::string(1, c) + "' in '" + std::string(text) + "'");
    }
  }
  return sets;
}

std::string FeatureSets::str() const {
  std::string out;
  auto add = [&](bool on, const char* name) {
    if (!on) return;
    if (!out.empty()) out += '+';
    out += name;
  };
  add(word, "W");
  add(linear, "L");
  add(dependency, "D");
  return out.empty() ? "none" : out;
}

std::vector<double> word_vector(const ParsedSentence& sentence, std::size_t i, const EmbeddingModel& model) {
  const auto id = model.vocab.word_id(sentence.tokens.at(i).form);
  if (!id) return std::vector<double>(model.params.dim, 0.0);
  auto row = model.params.target_words.row(static_cast<std::size_t>(*id));
  return {row.begin(), row.end()};
}

std::vector<double> linear_context_vector(const ParsedSentence& sentence, std::size_t i, int len,
                                          const EmbeddingModel& model) {
  if (len < 3 || len % 2 == 0) throw Error("linear context window must be odd and >= 3");
  const int half = len / 2;
  const std::size_t d = model.params.dim;
  std::vector<double> out;
  out.reserve(d * static_cast<std::size_t>(len - 1));
  const auto n = static_cast<long>(sentence.size());
  for (int k = -half; k <= half; ++k) {
    if (k == 0) continue;
    const long j = static_cast<long>(i) + k;
    if (j < 0 || j >= n) {
      out.insert(out.end(), d, 0.0);
    } else {
      auto v = word_vector(sentence, static_cast<std::size_t>(j), model);
      out.insert(out.end(), v.begin(), v.end());
    }
  }
  return out;
}

std::vector<double> dep_context_vector(const ParsedSentence& sentence, std::size_t i, const EmbeddingModel& model,
                                       int max_hops) {
  const std::size_t d = model.params.dim;
  std::vector<double> sum(d, 0.0);
  const auto context = dependency_context(sentence, model.vocab, i, max_hops);
  if (context.empty()) return sum;
  for (const auto& entry : context) {
    auto r = compose_path(entry.path, model.params);
    for (std::size_t k = 0; k < d; ++k) sum[k] += r[k];
    if (entry.word) {
      auto w = model.params.target_words.row(static_cast<std::size_t>(*entry.word));
      for (std::size_t k = 0; k < d; ++k) sum[k] += w[k];
    }
  }
  for (auto& v : sum) v /= static_cast<double>(context.size());
  return sum;
}

FeatureDiscretizers fit_feature_discretizers(const std::vector<ParsedSentence>& sentences,
                                             const EmbeddingModel& model, const FeatureOptions& options, int bins) {
  FeatureDiscretizers out;
  if (options.sets.word) {
    std::vector<std::vector<double>> rows;
    for (std::size_t w = 0; w < model.params.target_words.rows(); ++w) {
      auto r = model.params.target_words.row(w);
      rows.emplace_back(r.begin(), r.end());
    }
    out.word = Discretizer::fit(rows, bins);
  }
  if (options.sets.linear || options.sets.dependency) {
    std::vector<std::vector<double>> lin, dep;
    for (const auto& s : sentences)
      for (std::size_t i = 0; i < s.size(); ++i) {
        if (options.sets.linear) lin.push_back(linear_context_vector(s, i, options.linear_window, model));
        if (options.sets.dependency) dep.push_back(dep_context_vector(s, i, model, options.max_hops));
      }
    if (options.sets.linear) out.linear = Discretizer::fit(lin, bins);
    if (options.sets.dependency) out.dependency = Discretizer::fit(dep, bins);
  }
  return out;
}

std::vector<char> gold_labels(const ParsedSentence& sentence) {
  std::vector<char> labels;
  for (const auto& t : sentence.tokens) {
    if (!t.label) return {};
    labels.push_back(*t.label);
  }
  return labels;
}

FeatureSentence assemble_features(const ParsedSentence& sentence, std::span<const char> labels,
                                  const EmbeddingModel& model, const FeatureDiscretizers& discretizers,
                                  const FeatureOptions& options) {
  if (!labels.empty() && labels.size() != sentence.size()) throw Error("one label per token is required");
  for (char c : labels) label_index(c);
  if (options.sets.word && !discretizers.word) throw Error("missing discretizer for block W");
  if (options.sets.linear && !discretizers.linear) throw Error("missing discretizer for block L");
  if (options.sets.dependency && !discretizers.dependency) throw Error("missing discretizer for block D");

  const std::size_t d = model.params.dim;
  const int half = options.linear_window / 2;
  std::vector<std::vector<std::string>> baseline;
  if (options.baseline) baseline = baseline_templates(sentence);

  FeatureSentence rows(sentence.size());
  for (std::size_t i = 0; i < sentence.size(); ++i) {
    auto& row = rows[i];
    row.index = i;
    if (!labels.empty()) row.label = labels[i];
    if (options.sets.word) {
      auto codes = discretizers.word->apply(word_vector(sentence, i, model));
      for (std::size_t k = 0; k < codes.size(); ++k)
        row.features.push_back("W" + std::to_string(k) + "=" + std::to_string(codes[k]));
    }
    if (options.sets.linear) {
      auto codes = discretizers.linear->apply(linear_context_vector(sentence, i, options.linear_window, model));
      std::size_t slot = 0;
      for (int off = -half; off <= half; ++off) {
        if (off == 0) continue;
        const std::string prefix = "L" + (off > 0 ? "+" + std::to_string(off) : std::to_string(off)) + "_";
        for (std::size_t k = 0; k < d; ++k)
          row.features.push_back(prefix + std::to_string(k) + "=" + std::to_string(codes[slot * d + k]));
        ++slot;
      }
    }
    if (options.sets.dependency) {
      auto codes = discretizers.dependency->apply(dep_context_vector(sentence, i, model, options.max_hops));
      for (std::size_t k = 0; k < codes.size(); ++k)
        row.features.push_back("D" + std::to_string(k) + "=" + std::to_string(codes[k]));
    }
    if (options.baseline) row.features.insert(row.features.end(), baseline[i].begin(), baseline[i].end());
  }
  return rows;
}

void write_feature_file(std::ostream& out, const std::vector<FeatureSentence>& sentences) {
  for (const auto& sentence : sentences) {
    for (const auto& row : sentence) {
      if (row.features.empty()) out << '_';
      for (std::size_t k = 0; k < row.features.size(); ++k) {
        if (k) out << '\t';
        out << row.features[k];
      }
      if (row.label) out << '\t' << *row.label;
      out << '\n';
    }
    out << '\n';
  }
}

std::vector<FeatureSentence> read_feature_file(std::istream& in) {
  std::vector<FeatureSentence> out;
  FeatureSentence current;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) {
      if (!current.empty()) out.push_back(std::move(current));
      current.clear();
      continue;
    }
    if (line.rfind("# ", 0) == 0) continue;
    FeatureRow row;
    row.index = current.size();
    std::size_t start = 0;
    while (start <= line.size()) {
      auto tab = line.find('\t', start);
      std::string col = line.substr(start, tab == std::string::npos ? std::string::npos : tab - start);
      const bool last = tab == std::string::npos;
      if (last && col.size() == 1 && (col == "B" || col == "I" || col == "O")) {
        row.label = col[0];
      } else if (col != "_" && !col.empty()) {
        if (col.find('=') == std::string::npos)
          throw Error("feature file line " + std::to_string(line_no) + ": '" + col + "' is neither a feature nor a label");
        row.features.push_back(std::move(col));
      }
      if (last) break;
      start = tab + 1;
    }
    current.push_back(std::move(row));
  }
  if (!current.empty()) out.push_back(std::move(current));
  return out;
}

}  // namespace wdemb
