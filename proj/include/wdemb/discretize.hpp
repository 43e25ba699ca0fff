#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <vector>

namespace wdemb {

inline constexpr int kDefaultBins = 15;

/// Per-dimension min–max binning into `bins` integer codes:
///   code = floor((x − min) · bins / (max − min)), clamped to [0, bins − 1].
/// A dimension with max == min maps everything to 0.
class Discretizer {
 public:
  Discretizer() = default;
  Discretizer(std::vector<double> mins, std::vector<double> maxs, int bins);

  /// Learns the per-dimension range from `columns`, each a d-dimensional vector.
  static Discretizer fit(std::span<const std::vector<double>> columns, int bins);

  std::size_t dim() const { return mins_.size(); }
  int bins() const { return bins_; }
  const std::vector<double>& mins() const { return mins_; }
  const std::vector<double>& maxs() const { return maxs_; }

  int code(std::size_t dimension, double value) const;
  std::vector<int> apply(std::span<const double> vector) const;

  /// `d l` then one `min max` line per dimension.
  void save(std::ostream& out) const;
  static Discretizer load(std::istream& in);

  friend bool operator==(const Discretizer&, const Discretizer&) = default;

 private:
  std::vector<double> mins_;
  std::vector<double> maxs_;
  int bins_ = kDefaultBins;
};

/// A fitted discretizer together with the codes of the columns it was fitted on
/// (codes[j] belongs to columns[j]).
struct DiscreteEmbeddingTable {
  Discretizer discretizer;
  std::vector<std::vector<int>> codes;
};

DiscreteEmbeddingTable fit_discretizer(std::span<const std::vector<double>> columns, int bins);

}  // namespace wdemb
