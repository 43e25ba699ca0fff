#pragma once

#include <compare>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <set>
#include <span>
#include <string>
#include <vector>

namespace wdemb {

/// Token span, 1-based and inclusive.
struct Span {
  int start = 0;
  int end = 0;
  friend auto operator<=>(const Span&, const Span&) = default;
};

/// Spans of a BIO sequence. Lenient decoding lets an I with no open span start
/// one; strict decoding treats such an I as O.
std::set<Span> bio_to_spans(std::span<const char> labels, bool strict = false);
std::vector<char> spans_to_bio(const std::set<Span>& spans, std::size_t length);

/// sentence id → spans
using SpanSet = std::map<std::string, std::set<Span>>;

struct Prf {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

/// Exact-match span scoring. An empty prediction (resp. gold) set gets
/// precision (resp. recall) 1 when the other side is empty too, else 0.
Prf span_f1(const SpanSet& pred, const SpanSet& gold);

/// Paired approximate-randomization test on |F1(a) − F1(b)|, swapping the two
/// systems' outputs per sentence with probability 1/2. Returns
/// (#{stat ≥ observed} + 1) / (iterations + 1).
double approx_randomization(const SpanSet& pred_a, const SpanSet& pred_b, const SpanSet& gold, int iterations,
                            std::uint64_t seed);

/// `sentence_id<TAB>start<TAB>end` lines.
void write_spans(std::ostream& out, const SpanSet& spans);
SpanSet read_spans(std::istream& in);

}  // namespace wdemb
