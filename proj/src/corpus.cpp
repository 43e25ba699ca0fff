#include "wdemb/corpus.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

namespace wdemb {

namespace {

std::vector<std::string_view> split_tabs(std::string_view line) {
  std::vector<std::string_view> cols;
  std::size_t start = 0;
  while (true) {
    auto tab = line.find('\t', start);
    if (tab == std::string_view::npos) {
      cols.push_back(line.substr(start));
      break;
    }
    cols.push_back(line.substr(start, tab - start));
    start = tab + 1;
  }
  return cols;
}

std::optional<int> parse_int(std::string_view s) {
  int v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

std::optional<char> misc_label(std::string_view misc) {
  std::size_t start = 0;
  while (start <= misc.size()) {
    auto bar = misc.find('|', start);
    auto item = misc.substr(start, bar == std::string_view::npos ? misc.npos : bar - start);
    if (item.size() == 5 && item.substr(0, 4) == "BIO=") return item[4];
    if (bar == std::string_view::npos) break;
    start = bar + 1;
  }
  return std::nullopt;
}

std::string_view trim_cr(std::string_view s) {
  if (!s.empty() && s.back() == '\r') s.remove_suffix(1);
  return s;
}

}  // namespace

std::string to_lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

std::optional<std::string> validate_tree(const ParsedSentence& sentence) {
  const auto n = static_cast<int>(sentence.size());
  if (n == 0) return "empty sentence";
  int roots = 0;
  for (int i = 0; i < n; ++i) {
    const int h = sentence.tokens[static_cast<std::size_t>(i)].head;
    if (h < 0 || h > n) return "head out of range at token " + std::to_string(i + 1);
    if (h == i + 1) return "token " + std::to_string(i + 1) + " is its own head";
    if (h == 0) ++roots;
  }
  if (roots != 1) return "expected exactly one root, found " + std::to_string(roots);
  // Every token must reach the root within n steps.
  for (int i = 0; i < n; ++i) {
    int cur = i + 1;
    int steps = 0;
    while (cur != 0 && steps <= n) {
      cur = sentence.tokens[static_cast<std::size_t>(cur - 1)].head;
      ++steps;
    }
    if (cur != 0) return "cycle through token " + std::to_string(i + 1);
  }
  return std::nullopt;
}

ConlluResult parse_conllu(std::istream& in) {
  ConlluResult result;
  ParsedSentence current;
  std::string pending_id;
  std::size_t block_start = 0;
  bool block_bad = false;
  bool in_block = false;
  std::size_t line_no = 0;
  std::size_t ordinal = 0;

  auto flush = [&] {
    if (!in_block) return;
    if (!block_bad) {
      if (current.tokens.empty()) {
        result.diagnostics.push_back({block_start, "sentence has no tokens"});
      } else if (auto problem = validate_tree(current)) {
        result.diagnostics.push_back({block_start, "sentence rejected: " + *problem});
      } else {
        current.id = pending_id.empty() ? std::to_string(ordinal) : pending_id;
        result.sentences.push_back(std::move(current));
      }
    }
    ++ordinal;
    current = ParsedSentence{};
    pending_id.clear();
    block_bad = false;
    in_block = false;
  };

  std::string raw_line;
  while (std::getline(in, raw_line)) {
    ++line_no;
    std::string_view line = trim_cr(raw_line);
    if (line.empty()) {
      flush();
      continue;
    }
    if (!in_block) {
      in_block = true;
      block_start = line_no;
    }
    if (line.front() == '#') {
      constexpr std::string_view kKey = "# sent_id = ";
      if (line.substr(0, kKey.size()) == kKey) pending_id = std::string(line.substr(kKey.size()));
      continue;
    }
    if (block_bad) continue;

    auto cols = split_tabs(line);
    if (cols.size() != 10) {
      result.diagnostics.push_back(
          {line_no, "expected 10 columns, found " + std::to_string(cols.size())});
      block_bad = true;
      continue;
    }
    // Multiword tokens (1-2) and empty nodes (1.1) carry no basic arc.
    if (cols[0].find_first_of("-.") != std::string_view::npos) continue;

    auto id = parse_int(cols[0]);
    if (!id || *id != static_cast<int>(current.tokens.size()) + 1) {
      result.diagnostics.push_back({line_no, "unexpected token id '" + std::string(cols[0]) + "'"});
      block_bad = true;
      continue;
    }
    auto head = parse_int(cols[6]);
    if (!head) {
      result.diagnostics.push_back({line_no, "non-integer HEAD '" + std::string(cols[6]) + "'"});
      block_bad = true;
      continue;
    }
    Token tok;
    tok.raw = std::string(cols[1]);
    tok.form = to_lower(cols[1]);
    if (tok.form.empty() || tok.form == "_") {
      result.diagnostics.push_back({line_no, "empty FORM"});
      block_bad = true;
      continue;
    }
    tok.pos = std::string(cols[4] != "_" ? cols[4] : cols[3]);
    tok.head = *head;
    tok.rel = std::string(cols[7]);
    tok.label = misc_label(cols[9]);
    current.tokens.push_back(std::move(tok));
  }
  flush();
  return result;
}

WeightedTable::WeightedTable(const std::vector<double>& weights) {
  cumulative_.reserve(weights.size());
  double acc = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0) || !std::isfinite(w)) throw Error("sampling weight must be finite and >= 0");
    acc += w;
    cumulative_.push_back(acc);
  }
  if (!cumulative_.empty() && !(acc > 0.0)) throw Error("sampling weights sum to zero");
}

std::size_t WeightedTable::sample(Rng& rng) const {
  if (cumulative_.empty()) throw Error("sampling from an empty table");
  std::uniform_real_distribution<double> uniform(0.0, cumulative_.back());
  const double u = uniform(rng);
  auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
  if (it == cumulative_.end()) --it;
  return static_cast<std::size_t>(it - cumulative_.begin());
}

void PathTable::add(const DepPath& path, std::int64_t count) {
  const std::size_t hop = path.hops();
  if (hop == 0) throw Error("cannot index an empty path");
  if (buckets_.size() < hop) buckets_.resize(hop);
  auto& b = buckets_[hop - 1];
  auto [it, inserted] = b.index.try_emplace(path, b.paths.size());
  if (inserted) {
    b.paths.push_back(path);
    b.counts.push_back(0);
  }
  b.counts[it->second] += count;
}

void PathTable::finalize() {
  for (auto& b : buckets_) {
    std::vector<double> w;
    w.reserve(b.counts.size());
    for (auto c : b.counts) w.push_back(std::pow(static_cast<double>(c), Vocabulary::kSmoothingPower));
    b.table = WeightedTable(w);
  }
}

const std::vector<DepPath>& PathTable::paths(std::size_t hop) const {
  static const std::vector<DepPath> kNone;
  if (hop == 0 || hop > buckets_.size()) return kNone;
  return buckets_[hop - 1].paths;
}

std::int64_t PathTable::count(const DepPath& path) const {
  const std::size_t hop = path.hops();
  if (hop == 0 || hop > buckets_.size()) return 0;
  const auto& b = buckets_[hop - 1];
  auto it = b.index.find(path);
  return it == b.index.end() ? 0 : b.counts[it->second];
}

const WeightedTable& PathTable::table(std::size_t hop) const {
  static const WeightedTable kNone;
  if (hop == 0 || hop > buckets_.size()) return kNone;
  return buckets_[hop - 1].table;
}

bool PathTable::empty() const {
  return std::all_of(buckets_.begin(), buckets_.end(),
                     [](const Bucket& b) { return b.paths.empty(); });
}

Vocabulary Vocabulary::build(const std::vector<ParsedSentence>& sentences, int min_count) {
  if (min_count < 1) throw Error("min_count must be >= 1");
  if (sentences.empty()) throw Error("no sentences");

  std::unordered_map<std::string, std::int64_t> word_counts;
  std::unordered_map<std::string, std::int64_t> rel_counts;
  for (const auto& s : sentences) {
    for (const auto& t : s.tokens) {
      ++word_counts[t.form];
      ++rel_counts[t.rel];
    }
  }

  // Frequency-descending order, ties by string, so ids do not depend on hash order.
  auto ordered = [](const std::unordered_map<std::string, std::int64_t>& counts, int threshold) {
    std::vector<std::pair<std::string, std::int64_t>> v;
    for (const auto& [k, c] : counts)
      if (c >= threshold) v.emplace_back(k, c);
    std::sort(v.begin(), v.end(), [](const auto& a, const auto& b) {
      return a.second != b.second ? a.second > b.second : a.first < b.first;
    });
    return v;
  };

  Vocabulary vocab;
  vocab.min_count_ = min_count;
  for (auto& [w, c] : ordered(word_counts, min_count)) {
    vocab.words_.push_back(w);
    vocab.word_counts_.push_back(c);
  }
  for (auto& [r, c] : ordered(rel_counts, 1)) {
    vocab.relations_.push_back(r);
    vocab.relation_counts_.push_back(c);
  }
  vocab.index();
  return vocab;
}

void Vocabulary::index() {
  word_index_.clear();
  relation_index_.clear();
  for (std::size_t i = 0; i < words_.size(); ++i) word_index_.emplace(words_[i], static_cast<WordId>(i));
  for (std::size_t i = 0; i < relations_.size(); ++i)
    relation_index_.emplace(relations_[i], static_cast<RelationId>(i));
  std::vector<double> w;
  w.reserve(word_counts_.size());
  for (auto c : word_counts_) w.push_back(std::pow(static_cast<double>(c), kSmoothingPower));
  word_table_ = WeightedTable(w);
}

std::optional<WordId> Vocabulary::word_id(std::string_view form) const {
  auto it = word_index_.find(std::string(form));
  if (it == word_index_.end()) return std::nullopt;
  return it->second;
}

std::optional<RelationId> Vocabulary::relation_id(std::string_view label) const {
  auto it = relation_index_.find(std::string(label));
  if (it == relation_index_.end()) return std::nullopt;
  return it->second;
}

void Vocabulary::save(std::ostream& out) const {
  out << words_.size() << ' ' << relations_.size() << ' ' << min_count_ << '\n';
  for (std::size_t i = 0; i < words_.size(); ++i) out << words_[i] << '\t' << word_counts_[i] << '\n';
  out << "#RELATIONS\n";
  for (std::size_t i = 0; i < relations_.size(); ++i)
    out << relations_[i] << '\t' << relation_counts_[i] << '\n';
}

Vocabulary Vocabulary::load(std::istream& in) {
  std::string line;
  // Skip the provenance comment header.
  while (std::getline(in, line) && !line.empty() && line[0] == '#') {
  }
  std::istringstream header(line);
  std::size_t n_words = 0, n_rels = 0;
  Vocabulary vocab;
  if (!(header >> n_words >> n_rels >> vocab.min_count_)) throw Error("vocabulary: bad header '" + line + "'");

  auto read_entry = [&](const char* what) {
    if (!std::getline(in, line)) throw Error(std::string("vocabulary: truncated ") + what + " section");
    auto tab = line.rfind('\t');
    if (tab == std::string::npos) throw Error("vocabulary: malformed line '" + line + "'");
    auto count = std::stoll(line.substr(tab + 1));
    return std::make_pair(line.substr(0, tab), static_cast<std::int64_t>(count));
  };
  for (std::size_t i = 0; i < n_words; ++i) {
    auto [w, c] = read_entry("word");
    vocab.words_.push_back(std::move(w));
    vocab.word_counts_.push_back(c);
  }
  if (!std::getline(in, line) || line != "#RELATIONS") throw Error("vocabulary: missing #RELATIONS sentinel");
  for (std::size_t i = 0; i < n_rels; ++i) {
    auto [r, c] = read_entry("relation");
    vocab.relations_.push_back(std::move(r));
    vocab.relation_counts_.push_back(c);
  }
  vocab.index();
  return vocab;
}

}  // namespace wdemb
