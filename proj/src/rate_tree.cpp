#include "ubranch/rate_tree.hpp"

#include <bit>
#include <numeric>

namespace ubranch {

namespace {
constexpr std::size_t lowbit(std::size_t i) { return i & (~i + 1); }
}  // namespace

void RateTree::rebuild(std::span<const double> values) {
  values_.assign(values.begin(), values.end());
  tree_.assign(values_.size() + 1, 0.0);
  for (std::size_t i = 1; i <= values_.size(); ++i) {
    tree_[i] += values_[i - 1];
    const std::size_t up = i + lowbit(i);
    if (up <= values_.size()) tree_[up] += tree_[i];
  }
  total_ = recomputed_total();
}

void RateTree::push_back(double value) {
  values_.push_back(value);
  const std::size_t i = values_.size();
  // Node i covers (i - lowbit(i), i].
  tree_.push_back(value + prefix(i - 1) - prefix(i - lowbit(i)));
  total_ += value;
}

void RateTree::set(std::size_t i, double value) { add(i, value - values_[i]); }

void RateTree::add(std::size_t i, double delta) {
  values_[i] += delta;
  for (std::size_t k = i + 1; k < tree_.size(); k += lowbit(k)) tree_[k] += delta;
  total_ += delta;
}

double RateTree::prefix(std::size_t count) const {
  double s = 0.0;
  for (std::size_t k = count; k > 0; k -= lowbit(k)) s += tree_[k];
  return s;
}

std::size_t RateTree::find(double target) const {
  const std::size_t n = values_.size();
  if (n == 0) return 0;
  std::size_t pos = 0;
  for (std::size_t step = std::bit_floor(n); step > 0; step >>= 1) {
    const std::size_t next = pos + step;
    if (next <= n && tree_[next] <= target) {
      pos = next;
      target -= tree_[next];
    }
  }
  if (pos >= n) pos = n - 1;
  // Rounding can land on a zero-rate slot; move to the nearest positive one.
  if (values_[pos] <= 0.0) {
    for (std::size_t k = pos; k-- > 0;) {
      if (values_[k] > 0.0) return k;
    }
    for (std::size_t k = pos + 1; k < n; ++k) {
      if (values_[k] > 0.0) return k;
    }
  }
  return pos;
}

double RateTree::recomputed_total() const {
  return std::accumulate(values_.begin(), values_.end(), 0.0);
}

}  // namespace ubranch
