#include "wdemb/eval.hpp"

#include <cmath>
#include <istream>
#include <ostream>
#include <random>
#include <sstream>

#include "wdemb/corpus.hpp"

namespace wdemb {

std::set<Span> bio_to_spans(std::span<const char> labels, bool strict) {
  std::set<Span> spans;
  int open = 0;  // 1-based start of the open span, 0 if none
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const int pos = static_cast<int>(i) + 1;
    const char c = labels[i];
    if (c == 'B' || (c == 'I' && open == 0 && !strict)) {
      if (open) spans.insert({open, pos - 1});
      open = pos;
    } else if (c == 'I') {
      // continues the open span, or ignored in strict mode
    } else {
      if (open) spans.insert({open, pos - 1});
      open = 0;
    }
  }
  if (open) spans.insert({open, static_cast<int>(labels.size())});
  return spans;
}

std::vector<char> spans_to_bio(const std::set<Span>& spans, std::size_t length) {
  std::vector<char> labels(length, 'O');
  for (const auto& s : spans) {
    if (s.start < 1 || s.end < s.start || static_cast<std::size_t>(s.end) > length)
      throw Error("span out of range");
    labels[static_cast<std::size_t>(s.start - 1)] = 'B';
    for (int p = s.start + 1; p <= s.end; ++p) labels[static_cast<std::size_t>(p - 1)] = 'I';
  }
  return labels;
}

namespace {

struct Counts {
  long correct = 0;
  long predicted = 0;
  long gold = 0;
};

Prf prf_of(const Counts& c) {
  Prf r;
  r.precision = c.predicted == 0 ? (c.gold == 0 ? 1.0 : 0.0) : static_cast<double>(c.correct) / c.predicted;
  r.recall = c.gold == 0 ? (c.predicted == 0 ? 1.0 : 0.0) : static_cast<double>(c.correct) / c.gold;
  r.f1 = r.precision + r.recall > 0.0 ? 2.0 * r.precision * r.recall / (r.precision + r.recall) : 0.0;
  return r;
}

const std::set<Span>& spans_of(const SpanSet& set, const std::string& id) {
  static const std::set<Span> kEmpty;
  auto it = set.find(id);
  return it == set.end() ? kEmpty : it->second;
}

long intersection_size(const std::set<Span>& a, const std::set<Span>& b) {
  long n = 0;
  for (const auto& s : a) n += b.count(s);
  return n;
}

}  // namespace

Prf span_f1(const SpanSet& pred, const SpanSet& gold) {
  Counts c;
  for (const auto& [id, spans] : pred) {
    c.predicted += static_cast<long>(spans.size());
    c.correct += intersection_size(spans, spans_of(gold, id));
  }
  for (const auto& [id, spans] : gold) c.gold += static_cast<long>(spans.size());
  return prf_of(c);
}

double approx_randomization(const SpanSet& pred_a, const SpanSet& pred_b, const SpanSet& gold, int iterations,
                            std::uint64_t seed) {
  if (iterations < 100) throw Error("approximate randomization needs at least 100 iterations");
  std::set<std::string> ids;
  for (const auto* s : {&pred_a, &pred_b, &gold})
    for (const auto& [id, spans] : *s) ids.insert(id);

  // Per-sentence (correct, predicted) for each system; swapping exchanges them.
  struct Pair {
    long ca, pa, cb, pb;
  };
  std::vector<Pair> per_sentence;
  long gold_total = 0;
  for (const auto& id : ids) {
    const auto& g = spans_of(gold, id);
    const auto& a = spans_of(pred_a, id);
    const auto& b = spans_of(pred_b, id);
    gold_total += static_cast<long>(g.size());
    per_sentence.push_back({intersection_size(a, g), static_cast<long>(a.size()), intersection_size(b, g),
                            static_cast<long>(b.size())});
  }

  auto statistic = [&](auto swapped) {
    Counts a{0, 0, gold_total}, b{0, 0, gold_total};
    for (std::size_t i = 0; i < per_sentence.size(); ++i) {
      const auto& p = per_sentence[i];
      const bool s = swapped(i);
      a.correct += s ? p.cb : p.ca;
      a.predicted += s ? p.pb : p.pa;
      b.correct += s ? p.ca : p.cb;
      b.predicted += s ? p.pa : p.pb;
    }
    return std::abs(prf_of(a).f1 - prf_of(b).f1);
  };

  const double observed = statistic([](std::size_t) { return false; });
  constexpr double kTolerance = 1e-12;
  long at_least = 0;
  std::vector<char> swap(per_sentence.size());
  for (int it = 0; it < iterations; ++it) {
    // Per-iteration seeds keep each iteration reproducible on its own.
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(it)};
    Rng rng(seq);
    std::bernoulli_distribution coin(0.5);
    for (auto& s : swap) s = coin(rng);
    if (statistic([&](std::size_t i) { return swap[i] != 0; }) >= observed - kTolerance) ++at_least;
  }
  return static_cast<double>(at_least + 1) / static_cast<double>(iterations + 1);
}

void write_spans(std::ostream& out, const SpanSet& spans) {
  for (const auto& [id, set] : spans)
    for (const auto& s : set) out << id << '\t' << s.start << '\t' << s.end << '\n';
}

SpanSet read_spans(std::istream& in) {
  SpanSet out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    auto t2 = line.rfind('\t');
    auto t1 = t2 == std::string::npos || t2 == 0 ? std::string::npos : line.rfind('\t', t2 - 1);
    if (t1 == std::string::npos) throw Error("span file line " + std::to_string(line_no) + ": expected 3 columns");
    Span s;
    try {
      s.start = std::stoi(line.substr(t1 + 1, t2 - t1 - 1));
      s.end = std::stoi(line.substr(t2 + 1));
    } catch (const std::exception&) {
      throw Error("span file line " + std::to_string(line_no) + ": non-integer bounds");
    }
    if (s.start < 1 || s.end < s.start) throw Error("span file line " + std::to_string(line_no) + ": invalid span");
    out[line.substr(0, t1)].insert(s);
  }
  return out;
}

}  // namespace wdemb
