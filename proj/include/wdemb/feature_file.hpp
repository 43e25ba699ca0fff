#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace wdemb {

/// Discrete features of one token, plus its gold BIO tag when known.
struct FeatureRow {
  std::size_t index = 0;
  std::vector<std::string> features;
  std::optional<char> label;

  friend bool operator==(const FeatureRow&, const FeatureRow&) = default;
};

using FeatureSentence = std::vector<FeatureRow>;

/// One token per line with TAB-separated features and the gold label as the
/// last column, blank line between sentences. A token without features is
/// written as `_`.
void write_feature_file(std::ostream& out, const std::vector<FeatureSentence>& sentences);
std::vector<FeatureSentence> read_feature_file(std::istream& in);

}  // namespace wdemb
