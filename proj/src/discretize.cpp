#include "wdemb/discretize.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>

#include "wdemb/corpus.hpp"

namespace wdemb {

Discretizer::Discretizer(std::vector<double> mins, std::vector<double> maxs, int bins)
    : mins_(std::move(mins)), maxs_(std::move(maxs)), bins_(bins) {
  if (bins_ < 2) throw Error("bin count must be >= 2");
  if (mins_.size() != maxs_.size()) throw Error("min/max dimension mismatch");
  for (std::size_t i = 0; i < mins_.size(); ++i)
    if (!(mins_[i] <= maxs_[i])) throw Error("min > max in dimension " + std::to_string(i));
}

Discretizer Discretizer::fit(std::span<const std::vector<double>> columns, int bins) {
  if (bins < 2) throw Error("bin count must be >= 2");
  if (columns.empty()) throw Error("cannot fit a discretizer on zero columns");
  const std::size_t d = columns.front().size();
  std::vector<double> mins(d, std::numeric_limits<double>::infinity());
  std::vector<double> maxs(d, -std::numeric_limits<double>::infinity());
  for (const auto& col : columns) {
    if (col.size() != d) throw Error("columns differ in dimension");
    for (std::size_t i = 0; i < d; ++i) {
      if (!std::isfinite(col[i])) throw Error("non-finite value in discretizer input");
      mins[i] = std::min(mins[i], col[i]);
      maxs[i] = std::max(maxs[i], col[i]);
    }
  }
  return Discretizer(std::move(mins), std::move(maxs), bins);
}

int Discretizer::code(std::size_t dimension, double value) const {
  const double lo = mins_[dimension];
  const double hi = maxs_[dimension];
  if (!(hi > lo)) return 0;
  const double scaled = std::floor((value - lo) * static_cast<double>(bins_) / (hi - lo));
  return static_cast<int>(std::clamp(scaled, 0.0, static_cast<double>(bins_ - 1)));
}

std::vector<int> Discretizer::apply(std::span<const double> vector) const {
  if (vector.size() != dim())
    throw Error("discretizer expects dimension " + std::to_string(dim()) + ", got " + std::to_string(vector.size()));
  std::vector<int> out(vector.size());
  for (std::size_t i = 0; i < vector.size(); ++i) out[i] = code(i, vector[i]);
  return out;
}

void Discretizer::save(std::ostream& out) const {
  out << dim() << ' ' << bins_ << '\n';
  out.precision(17);
  for (std::size_t i = 0; i < dim(); ++i) out << mins_[i] << ' ' << maxs_[i] << '\n';
}

Discretizer Discretizer::load(std::istream& in) {
  std::string line;
  while (std::getline(in, line) && !line.empty() && line[0] == '#') {
  }
  std::istringstream header(line);
  std::size_t d = 0;
  int bins = 0;
  if (!(header >> d >> bins)) throw Error("discretizer file: bad header '" + line + "'");
  std::vector<double> mins(d), maxs(d);
  for (std::size_t i = 0; i < d; ++i)
    if (!(in >> mins[i] >> maxs[i])) throw Error("discretizer file: truncated at dimension " + std::to_string(i));
  return Discretizer(std::move(mins), std::move(maxs), bins);
}

DiscreteEmbeddingTable fit_discretizer(std::span<const std::vector<double>> columns, int bins) {
  DiscreteEmbeddingTable table{Discretizer::fit(columns, bins), {}};
  table.codes.reserve(columns.size());
  for (const auto& col : columns) table.codes.push_back(table.discretizer.apply(col));
  return table;
}

}  // namespace wdemb
