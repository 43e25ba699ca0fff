#include <doctest.h>

#include <cmath>
#include <set>
#include <sstream>

#include "wdemb/corpus.hpp"
#include "wdemb/discretize.hpp"

using namespace wdemb;

TEST_CASE("code of 0 in [-2, 2] with 15 bins is 7") {
  Discretizer d({-2.0}, {2.0}, 15);
  CHECK(d.code(0, 0.0) == 7);  // floor(2 * 15 / 4)
  CHECK(d.code(0, -2.0) == 0);
  CHECK(d.code(0, 2.0) == 14);
  CHECK(d.code(0, -5.0) == 0);
  CHECK(d.code(0, 9.0) == 14);
}

TEST_CASE("fit picks up per-dimension ranges") {
  std::vector<std::vector<double>> cols = {{1.0, 5.0, 3.0}, {-1.0, 5.0, 7.0}, {0.0, 5.0, 5.0}};
  auto table = fit_discretizer(cols, 4);
  CHECK(table.discretizer.mins() == std::vector<double>{-1.0, 5.0, 3.0});
  CHECK(table.discretizer.maxs() == std::vector<double>{1.0, 5.0, 7.0});
  REQUIRE(table.codes.size() == 3);
  CHECK(table.codes[0] == std::vector<int>{3, 0, 0});
  CHECK(table.codes[1] == std::vector<int>{0, 0, 3});
  CHECK(table.codes[2] == std::vector<int>{2, 0, 2});  // floor(1*4/2), constant dim, floor(2*4/4)
}

TEST_CASE("fit rejects bad input") {
  std::vector<std::vector<double>> cols = {{1.0}, {2.0}};
  CHECK_THROWS_AS(fit_discretizer(cols, 1), Error);
  std::vector<std::vector<double>> ragged = {{1.0}, {2.0, 3.0}};
  CHECK_THROWS_AS(fit_discretizer(ragged, 15), Error);
  std::vector<std::vector<double>> nan = {{std::nan("")}};
  CHECK_THROWS_AS(fit_discretizer(nan, 15), Error);
  Discretizer d({0.0, 0.0}, {1.0, 1.0}, 15);
  std::vector<double> short_vec = {0.5};
  CHECK_THROWS_AS(d.apply(short_vec), Error);
}

TEST_CASE("codes are monotone, bounded and reach all bins") {
  Rng rng(5);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  std::vector<std::vector<double>> cols(200, std::vector<double>(6));
  for (auto& c : cols)
    for (auto& v : c) v = u(rng);
  for (int bins : {2, 7, 15}) {
    auto table = fit_discretizer(cols, bins);
    const auto& d = table.discretizer;
    for (std::size_t j = 0; j < cols.size(); ++j) CHECK(d.apply(cols[j]) == table.codes[j]);
    for (int trial = 0; trial < 2000; ++trial) {
      std::vector<double> x(6), y(6);
      for (std::size_t k = 0; k < 6; ++k) {
        x[k] = 2 * u(rng);
        y[k] = x[k] + std::abs(u(rng));
      }
      auto cx = d.apply(x), cy = d.apply(y);
      for (std::size_t k = 0; k < 6; ++k) {
        CHECK(cx[k] >= 0);
        CHECK(cx[k] <= bins - 1);
        CHECK(cx[k] <= cy[k]);
      }
    }
    for (std::size_t k = 0; k < 6; ++k) {
      std::set<int> seen;
      for (int s = 0; s <= 10 * bins; ++s)
        seen.insert(d.code(k, d.mins()[k] + (d.maxs()[k] - d.mins()[k]) * s / (10.0 * bins)));
      CHECK(static_cast<int>(seen.size()) == bins);
    }
  }
}

TEST_CASE("discretizer file round trip") {
  Discretizer d({-1.25, 0.1, 3.0}, {2.5, 0.1, 1e6}, 15);
  std::stringstream s;
  d.save(s);
  CHECK(Discretizer::load(s) == d);
  std::stringstream bad("2 15\n0 1\n");
  CHECK_THROWS_AS(Discretizer::load(bad), Error);
}
