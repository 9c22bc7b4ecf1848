#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "tailadapt/errors.hpp"

namespace tailadapt {

/// Immutable set of positive observations with cached descending order
/// statistics.
///
/// Order statistics are 1-based as in the usual notation: `order_stat(1)` is
/// the sample maximum, `order_stat(n)` the minimum. Ties are broken by the
/// original index (stable sort), so `order_desc()` is a well defined
/// permutation even on discretised data.
///
/// Besides the sorted values the sample keeps prefix sums of the log order
/// statistics and, for every rank j, the number of observations strictly
/// greater than X_{n,j}. These make every threshold-local estimate at an
/// order statistic an O(1) operation.
class Sample {
 public:
  explicit Sample(std::vector<double> values) : values_(std::move(values)) {
    if (values_.empty()) throw argument_error("Sample: at least one observation is required");
    for (std::size_t i = 0; i < values_.size(); ++i) {
      if (!(values_[i] > 0.0) || !std::isfinite(values_[i])) {
        throw argument_error("Sample: non-positive or non-finite observation at index " +
                             std::to_string(i));
      }
    }
    const std::size_t n = values_.size();
    order_.resize(n);
    std::iota(order_.begin(), order_.end(), std::size_t{0});
    std::stable_sort(order_.begin(), order_.end(),
                     [this](std::size_t a, std::size_t b) { return values_[a] > values_[b]; });

    desc_.resize(n);
    log_desc_.resize(n);
    log_prefix_.assign(n + 1, 0.0);
    above_.resize(n);
    for (std::size_t j = 0; j < n; ++j) {
      desc_[j] = values_[order_[j]];
      log_desc_[j] = std::log(desc_[j]);
      log_prefix_[j + 1] = log_prefix_[j] + log_desc_[j];
      above_[j] = (j > 0 && desc_[j] == desc_[j - 1]) ? above_[j - 1] : j;
    }
  }

  Sample(std::span<const double> values) : Sample(std::vector<double>(values.begin(), values.end())) {}

  std::size_t size() const noexcept { return values_.size(); }
  std::span<const double> values() const noexcept { return values_; }
  std::span<const double> descending() const noexcept { return desc_; }
  std::span<const std::size_t> order_desc() const noexcept { return order_; }

  /// X_{n,j}, 1 <= j <= n.
  double order_stat(std::size_t j) const {
    if (j < 1 || j > size()) {
      throw argument_error("order_stat: rank " + std::to_string(j) + " outside [1, " +
                           std::to_string(size()) + "]");
    }
    return desc_[j - 1];
  }

  double log_order_stat(std::size_t j) const { return log_desc_[j - 1]; }

  /// Sum of log X_{n,i} over i = 1..k.
  double log_sum_top(std::size_t k) const { return log_prefix_[k]; }

  /// Number of observations strictly greater than X_{n,j}.
  std::size_t count_above_rank(std::size_t j) const { return above_[j - 1]; }

  /// Number of observations strictly greater than `t`.
  std::size_t count_above(double t) const {
    auto first_le = std::partition_point(desc_.begin(), desc_.end(), [t](double v) { return v > t; });
    return static_cast<std::size_t>(first_le - desc_.begin());
  }

 private:
  std::vector<double> values_;
  std::vector<std::size_t> order_;
  std::vector<double> desc_;
  std::vector<double> log_desc_;
  std::vector<double> log_prefix_;
  std::vector<std::size_t> above_;
};

}  // namespace tailadapt
