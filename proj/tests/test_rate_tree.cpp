#include <numeric>
#include <random>

#include "doctest.h"
#include "ubranch/rate_tree.hpp"

using namespace ubranch;

namespace {

// Linear-scan reference for RateTree::find.
std::size_t linear_find(const std::vector<double>& v, double target) {
  double acc = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    acc += v[i];
    if (target < acc) return i;
  }
  return v.size() - 1;
}

}  // namespace

TEST_CASE("push_back builds the same tree as rebuild") {
  std::mt19937_64 g(11);
  std::uniform_real_distribution<double> u(0.0, 3.0);
  std::vector<double> values;
  RateTree grown;
  for (int i = 0; i < 257; ++i) {
    values.push_back(i % 5 == 0 ? 0.0 : u(g));
    grown.push_back(values.back());
  }
  const RateTree built(values);
  CHECK(grown.total() == doctest::Approx(built.total()).epsilon(1e-12));
  const double total = std::accumulate(values.begin(), values.end(), 0.0);
  for (int k = 0; k < 2000; ++k) {
    const double target = total * (k + 0.5) / 2000.0;
    const auto ref = linear_find(values, target);
    CHECK(grown.find(target) == ref);
    CHECK(built.find(target) == ref);
  }
}

TEST_CASE("selection frequencies follow the rates after updates") {
  RateTree t;
  for (int i = 0; i < 6; ++i) t.push_back(1.0);
  t.set(2, 4.0);
  t.add(5, 2.0);
  t.set(0, 0.0);
  std::vector<double> expect{0, 1, 4, 1, 1, 3};
  CHECK(t.total() == doctest::Approx(10.0));
  CHECK(t.recomputed_total() == doctest::Approx(10.0));
  std::mt19937_64 g(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<int> hits(6, 0);
  const int n = 200000;
  for (int k = 0; k < n; ++k) ++hits[t.find(u(g) * t.total())];
  CHECK(hits[0] == 0);
  for (int i = 1; i < 6; ++i) {
    const double p = expect[i] / 10.0;
    CHECK(std::abs(hits[i] / double(n) - p) < 4.0 * std::sqrt(p * (1 - p) / n));
  }
}

TEST_CASE("zero-rate slots are never selected") {
  RateTree t(std::vector<double>{0.0, 0.0, 1.0, 0.0});
  CHECK(t.find(0.0) == 2);
  CHECK(t.find(0.999999) == 2);
  CHECK(t.find(1.0) == 2);
}
