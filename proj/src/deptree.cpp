#include "wdemb/deptree.hpp"

#include <algorithm>

namespace wdemb {

DepPath DepPath::reversed() const {
  DepPath out;
  out.steps.reserve(steps.size());
  for (auto it = steps.rbegin(); it != steps.rend(); ++it) out.steps.push_back({it->label, flip(it->dir)});
  return out;
}

std::string format_path(const DepPath& path, const Vocabulary& vocab) {
  std::string out;
  for (std::size_t i = 0; i < path.steps.size(); ++i) {
    if (i) out += '/';
    out += vocab.relation(path.steps[i].label);
    out += path.steps[i].dir == Direction::kUp ? ":u" : ":d";
  }
  return out;
}

DepPath parse_path(std::string_view text, const Vocabulary& vocab) {
  DepPath path;
  std::size_t start = 0;
  while (start <= text.size()) {
    auto slash = text.find('/', start);
    auto step = text.substr(start, slash == std::string_view::npos ? text.npos : slash - start);
    auto colon = step.rfind(':');
    if (colon == std::string_view::npos || colon + 2 != step.size())
      throw Error("malformed path step '" + std::string(step) + "'");
    auto dir_char = step[colon + 1];
    if (dir_char != 'u' && dir_char != 'd') throw Error("path direction must be u or d in '" + std::string(step) + "'");
    auto label = vocab.relation_id(step.substr(0, colon));
    if (!label) throw Error("unknown relation '" + std::string(step.substr(0, colon)) + "'");
    path.steps.push_back({*label, dir_char == 'u' ? Direction::kUp : Direction::kDown});
    if (slash == std::string_view::npos) break;
    start = slash + 1;
  }
  return path;
}

namespace {

RelationId relation_of(const ParsedSentence& s, const Vocabulary& vocab, std::size_t pos) {
  auto id = vocab.relation_id(s.tokens[pos].rel);
  if (!id) throw Error("relation '" + s.tokens[pos].rel + "' missing from vocabulary");
  return *id;
}

// Ancestors of `pos` from itself up to the root, as 0-based positions.
std::vector<std::size_t> chain_to_root(const ParsedSentence& s, std::size_t pos) {
  std::vector<std::size_t> chain{pos};
  while (s.tokens[chain.back()].head != 0) {
    chain.push_back(static_cast<std::size_t>(s.tokens[chain.back()].head - 1));
    if (chain.size() > s.size()) throw Error("dependency graph is not a tree");
  }
  return chain;
}

}  // namespace

DepPath tree_path(const ParsedSentence& sentence, const Vocabulary& vocab, std::size_t from,
                  std::size_t to) {
  if (from >= sentence.size() || to >= sentence.size()) throw Error("token index out of range");
  if (from == to) throw Error("tree_path needs two distinct tokens");
  auto up = chain_to_root(sentence, from);
  auto down = chain_to_root(sentence, to);
  // Strip the shared suffix (the common ancestors); the last shared node is the LCA.
  while (up.size() > 1 && down.size() > 1 && up[up.size() - 2] == down[down.size() - 2]) {
    up.pop_back();
    down.pop_back();
  }
  DepPath path;
  for (std::size_t k = 0; k + 1 < up.size(); ++k)
    path.steps.push_back({relation_of(sentence, vocab, up[k]), Direction::kUp});
  for (std::size_t k = down.size() - 1; k-- > 0;)
    path.steps.push_back({relation_of(sentence, vocab, down[k]), Direction::kDown});
  return path;
}

std::vector<ContextEntry> dependency_context(const ParsedSentence& sentence, const Vocabulary& vocab,
                                             std::size_t target, int max_hops) {
  const std::size_t n = sentence.size();
  if (target >= n) throw Error("token index out of range");
  std::vector<std::vector<std::size_t>> children(n);
  for (std::size_t i = 0; i < n; ++i)
    if (sentence.tokens[i].head != 0) children[static_cast<std::size_t>(sentence.tokens[i].head - 1)].push_back(i);

  std::vector<ContextEntry> out;
  std::vector<bool> seen(n, false);
  seen[target] = true;
  // Breadth-first: a tree has no alternative routes, so the first visit is the path.
  std::vector<std::pair<std::size_t, DepPath>> frontier{{target, DepPath{}}};
  for (int hop = 1; hop <= max_hops && !frontier.empty(); ++hop) {
    std::vector<std::pair<std::size_t, DepPath>> next;
    for (const auto& [pos, path] : frontier) {
      const int head = sentence.tokens[pos].head;
      if (head != 0 && !seen[static_cast<std::size_t>(head - 1)]) {
        auto h = static_cast<std::size_t>(head - 1);
        seen[h] = true;
        DepPath p = path;
        p.steps.push_back({relation_of(sentence, vocab, pos), Direction::kUp});
        next.emplace_back(h, std::move(p));
      }
      for (auto c : children[pos]) {
        if (seen[c]) continue;
        seen[c] = true;
        DepPath p = path;
        p.steps.push_back({relation_of(sentence, vocab, c), Direction::kDown});
        next.emplace_back(c, std::move(p));
      }
    }
    std::sort(next.begin(), next.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    for (const auto& [pos, path] : next) out.push_back({path, pos, vocab.word_id(sentence.tokens[pos].form)});
    frontier = std::move(next);
  }
  return out;
}

std::vector<Triple> extract_triples(const ParsedSentence& sentence, const Vocabulary& vocab, int max_hops,
                                    PathTable* counts) {
  if (max_hops < 1) throw Error("max_hops must be >= 1");
  std::vector<Triple> out;
  for (std::size_t i = 0; i < sentence.size(); ++i) {
    auto w1 = vocab.word_id(sentence.tokens[i].form);
    if (!w1) continue;
    for (auto& ctx : dependency_context(sentence, vocab, i, max_hops)) {
      if (!ctx.word) continue;
      if (counts) counts->add(ctx.path);
      out.push_back({*w1, *ctx.word, std::move(ctx.path)});
    }
  }
  return out;
}

void index_paths(Vocabulary& vocab, const std::vector<ParsedSentence>& sentences, int max_hops) {
  PathTable table;
  for (const auto& s : sentences) extract_triples(s, vocab, max_hops, &table);
  table.finalize();
  vocab.path_table() = std::move(table);
}

}  // namespace wdemb
