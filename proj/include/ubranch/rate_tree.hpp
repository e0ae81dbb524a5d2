#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace ubranch {

/// Binary-indexed tree of nonnegative rates with O(log n) update, append and
/// proportional selection.
class RateTree {
 public:
  RateTree() = default;
  explicit RateTree(std::span<const double> values) { rebuild(values); }

  std::size_t size() const noexcept { return values_.size(); }
  double total() const noexcept { return total_; }
  double value(std::size_t i) const { return values_[i]; }

  void rebuild(std::span<const double> values);
  void push_back(double value);
  void set(std::size_t i, double value);
  void add(std::size_t i, double delta);

  /// Smallest index whose prefix sum exceeds `target` (target in [0, total)).
  std::size_t find(double target) const;

  /// Sum of `values_` recomputed from scratch.
  double recomputed_total() const;

 private:
  double prefix(std::size_t count) const;

  std::vector<double> values_;
  std::vector<double> tree_{0.0};  // 1-based, slot 0 unused
  double total_ = 0.0;
};

}  // namespace ubranch
