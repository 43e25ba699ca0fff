#include <doctest.h>

#include <algorithm>
#include <deque>
#include <set>

#include "synthetic.hpp"
#include "wdemb/deptree.hpp"

using namespace wdemb;

namespace {

// Oracle: undirected BFS from `from`, then read each traversed arc's label and
// direction off the head array.
DepPath bfs_path(const ParsedSentence& s, const Vocabulary& vocab, std::size_t from, std::size_t to) {
  const std::size_t n = s.size();
  std::vector<std::vector<std::size_t>> adj(n);
  for (std::size_t i = 0; i < n; ++i)
    if (s.tokens[i].head) {
      const auto h = static_cast<std::size_t>(s.tokens[i].head - 1);
      adj[i].push_back(h);
      adj[h].push_back(i);
    }
  std::vector<long> prev(n, -1);
  std::vector<bool> seen(n, false);
  std::deque<std::size_t> queue{from};
  seen[from] = true;
  while (!queue.empty()) {
    auto x = queue.front();
    queue.pop_front();
    for (auto y : adj[x])
      if (!seen[y]) {
        seen[y] = true;
        prev[y] = static_cast<long>(x);
        queue.push_back(y);
      }
  }
  std::vector<std::size_t> nodes{to};
  while (nodes.back() != from) nodes.push_back(static_cast<std::size_t>(prev[nodes.back()]));
  std::reverse(nodes.begin(), nodes.end());
  DepPath p;
  for (std::size_t k = 0; k + 1 < nodes.size(); ++k) {
    const auto x = nodes[k], y = nodes[k + 1];
    if (s.tokens[x].head == static_cast<int>(y) + 1)
      p.steps.push_back({*vocab.relation_id(s.tokens[x].rel), Direction::kUp});
    else
      p.steps.push_back({*vocab.relation_id(s.tokens[y].rel), Direction::kDown});
  }
  return p;
}

std::size_t position_of(const ParsedSentence& s, const std::string& form) {
  for (std::size_t i = 0; i < s.size(); ++i)
    if (s.tokens[i].form == form) return i;
  FAIL("no token " << form);
  return 0;
}

}  // namespace

TEST_CASE("tree_path from service to professional") {
  auto s = testing::staff_sentence();
  auto vocab = Vocabulary::build({s}, 1);
  auto p = tree_path(s, vocab, position_of(s, "service"), position_of(s, "professional"));
  CHECK(format_path(p, vocab) == "conj:u/dep:d/amod:d");
}

TEST_CASE("tree_path to the head is a single upward step") {
  auto s = testing::staff_sentence();
  auto vocab = Vocabulary::build({s}, 1);
  auto p = tree_path(s, vocab, position_of(s, "very"), position_of(s, "waiter"));
  CHECK(format_path(p, vocab) == "advmod:u");
  CHECK_THROWS_AS(tree_path(s, vocab, 1, 1), Error);
  CHECK_THROWS_AS(tree_path(s, vocab, 0, 6), Error);
}

TEST_CASE("tree_path agrees with BFS and is antisymmetric on random trees") {
  Rng rng(2024);
  for (int trial = 0; trial < 1000; ++trial) {
    auto s = testing::random_tree(2 + rng() % 11, rng);
    auto vocab = Vocabulary::build({s}, 1);
    for (std::size_t i = 0; i < s.size(); ++i)
      for (std::size_t j = 0; j < s.size(); ++j) {
        if (i == j) continue;
        auto p = tree_path(s, vocab, i, j);
        REQUIRE(p == bfs_path(s, vocab, i, j));
        REQUIRE(tree_path(s, vocab, j, i) == p.reversed());
        // Ascents precede descents.
        auto first_down = std::find_if(p.steps.begin(), p.steps.end(),
                                       [](const auto& st) { return st.dir == Direction::kDown; });
        REQUIRE(std::all_of(first_down, p.steps.end(), [](const auto& st) { return st.dir == Direction::kDown; }));
      }
  }
}

TEST_CASE("path strings round trip, including labels with colons") {
  ParsedSentence s;
  s.tokens = {{"a", "a", "X", 0, "root", {}}, {"b", "b", "X", 1, "nmod:poss", {}}, {"c", "c", "X", 2, "amod", {}}};
  auto vocab = Vocabulary::build({s}, 1);
  auto p = tree_path(s, vocab, 2, 0);
  CHECK(format_path(p, vocab) == "amod:u/nmod:poss:u");
  CHECK(parse_path("amod:u/nmod:poss:u", vocab) == p);
  CHECK_THROWS_AS(parse_path("amod:x", vocab), Error);
  CHECK_THROWS_AS(parse_path("nope:u", vocab), Error);
  CHECK_THROWS_AS(parse_path("amod", vocab), Error);
}

TEST_CASE("extract_triples on a two-token sentence yields both orders") {
  auto s = testing::chain_sentence(2);
  auto vocab = Vocabulary::build({s}, 1);
  auto triples = extract_triples(s, vocab, 3);
  REQUIRE(triples.size() == 2);
  CHECK(triples[0].path == triples[1].path.reversed());
  CHECK(triples[0].w1 == triples[1].w2);
}

TEST_CASE("extract_triples on a 5-chain keeps pairs within max_hops") {
  auto s = testing::chain_sentence(5);
  auto vocab = Vocabulary::build({s}, 1);
  // Enumerated: of the 20 ordered pairs, 18 lie within 3 hops (only the two
  // end-to-end pairs are 4 apart) and 14 within 2 hops.
  std::size_t within3 = 0, within2 = 0;
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 5; ++j) {
      if (i == j) continue;
      within3 += std::abs(i - j) <= 3;
      within2 += std::abs(i - j) <= 2;
    }
  REQUIRE(within3 == 18);
  REQUIRE(within2 == 14);
  auto triples = extract_triples(s, vocab, 3);
  CHECK(triples.size() == within3);
  for (const auto& t : triples) CHECK(t.path.hops() <= 3);
  CHECK(extract_triples(s, vocab, 2).size() == within2);
}

TEST_CASE("extract_triples drops endpoints below min_count") {
  auto common = testing::staff_sentence();
  auto s = common;
  s.tokens[4].form = "rare";  // "very" replaced by a form seen once
  auto vocab = Vocabulary::build({s, common, common}, 2);
  REQUIRE_FALSE(vocab.word_id("rare").has_value());
  REQUIRE(vocab.word_id("very").has_value());
  auto triples = extract_triples(s, vocab, 3);
  for (const auto& t : triples) {
    CHECK(vocab.word(t.w1) != "very");
    CHECK(vocab.word(t.w2) != "very");
  }
  // Every pair touching position 4 disappears, in both orders.
  std::size_t reach = dependency_context(s, vocab, 4, 3).size();
  CHECK(triples.size() == extract_triples(common, vocab, 3).size() - 2 * reach);
}

TEST_CASE("extract_triples count equals the brute-force pair count") {
  Rng rng(5);
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<ParsedSentence> corpus;
    for (int k = 0; k < 4; ++k) {
      auto s = testing::random_tree(1 + rng() % 10, rng);
      for (auto& t : s.tokens) t.form = "f" + std::to_string(rng() % 8);
      corpus.push_back(std::move(s));
    }
    auto vocab = Vocabulary::build(corpus, 2);
    const int max_hops = 1 + static_cast<int>(rng() % 3);
    for (const auto& s : corpus) {
      std::size_t expected = 0;
      for (std::size_t i = 0; i < s.size(); ++i)
        for (std::size_t j = 0; j < s.size(); ++j)
          if (i != j && vocab.word_id(s.tokens[i].form) && vocab.word_id(s.tokens[j].form) &&
              bfs_path(s, vocab, i, j).hops() <= static_cast<std::size_t>(max_hops))
            ++expected;
      REQUIRE(extract_triples(s, vocab, max_hops).size() == expected);
    }
  }
}

TEST_CASE("index_paths tallies every emitted path per hop") {
  auto s = testing::chain_sentence(5);
  auto vocab = Vocabulary::build({s}, 1);
  index_paths(vocab, {s}, 3);
  const auto& table = vocab.path_table();
  CHECK(table.paths(1).size() == 2);  // dep:u and dep:d
  CHECK(table.paths(2).size() == 2);
  CHECK(table.paths(3).size() == 2);
  CHECK(table.count(parse_path("dep:u", vocab)) == 4);
  CHECK(table.count(parse_path("dep:u/dep:u/dep:u", vocab)) == 2);  // c0->c3, c1->c4
  CHECK(table.count(parse_path("dep:u/dep:d", vocab)) == 0);
}

TEST_CASE("dependency context of staff lists the five pairs") {
  auto s = testing::staff_sentence();
  auto vocab = Vocabulary::build({s}, 1);
  std::set<std::pair<std::string, std::string>> got;
  for (const auto& c : dependency_context(s, vocab, position_of(s, "staff"), 3))
    got.insert({format_path(c.path, vocab), vocab.word(*c.word)});
  const std::set<std::pair<std::string, std::string>> expected = {{"dep:d", "waiter"},
                                                                  {"conj:d", "service"},
                                                                  {"cc:d", "and"},
                                                                  {"dep:d/advmod:d", "very"},
                                                                  {"dep:d/amod:d", "professional"}};
  CHECK(got == expected);
}

TEST_CASE("dependency context of a lone token is empty") {
  auto s = testing::chain_sentence(1);
  auto vocab = Vocabulary::build({s}, 1);
  CHECK(dependency_context(s, vocab, 0, 3).empty());
}

TEST_CASE("dependency context equals brute-force enumeration on random trees") {
  Rng rng(99);
  for (int trial = 0; trial < 500; ++trial) {
    auto s = testing::random_tree(1 + rng() % 10, rng);
    auto vocab = Vocabulary::build({s}, 1);
    for (std::size_t i = 0; i < s.size(); ++i) {
      std::set<std::pair<std::size_t, std::string>> got, expected;
      for (const auto& c : dependency_context(s, vocab, i, 3)) got.insert({c.position, format_path(c.path, vocab)});
      for (std::size_t j = 0; j < s.size(); ++j) {
        if (j == i) continue;
        auto p = bfs_path(s, vocab, i, j);
        if (p.hops() <= 3) expected.insert({j, format_path(p, vocab)});
      }
      REQUIRE(got == expected);
    }
  }
}
