#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace mvdisp {

enum class Aggregation { Individual, NonOverlapping, Overlapping };

struct AggregationPolicy {
  Aggregation mode = Aggregation::Individual;
  int n = 1;

  static AggregationPolicy individual() { return {Aggregation::Individual, 1}; }
  static AggregationPolicy non_overlapping(int n) { return {Aggregation::NonOverlapping, n}; }
  static AggregationPolicy overlapping(int n) { return {Aggregation::Overlapping, n}; }
};

void validate(const AggregationPolicy& policy);

// The n most recent observations at end_time, stored column-major
// (column k is observation end_time - n + 1 + k).
struct SubgroupWindow {
  std::int64_t end_time = 0;
  int p = 0;
  int n = 0;
  std::vector<double> columns;

  double operator()(int i, int k) const { return columns[static_cast<std::size_t>(k * p + i)]; }
  std::span<const double> column(int k) const {
    return std::span<const double>(columns).subspan(static_cast<std::size_t>(k * p), static_cast<std::size_t>(p));
  }
};

// Turns an observation stream into subgroup emissions. Individual emits every
// observation; NonOverlapping emits disjoint blocks at t = n, 2n, ...;
// Overlapping emits the sliding window at every t >= n.
class Windower {
 public:
  Windower(AggregationPolicy policy, int p);

  // Throws DataError if t does not strictly increase or y has the wrong size.
  std::optional<SubgroupWindow> push(std::int64_t t, std::span<const double> y);
  // Same as push but writes into caller-owned storage (reused across calls).
  bool push_into(std::int64_t t, std::span<const double> y, SubgroupWindow& out);

  void reset();

  const AggregationPolicy& policy() const { return policy_; }
  int p() const { return p_; }
  std::int64_t observations() const { return count_; }
  std::int64_t emitted() const { return emitted_; }
  std::int64_t last_time() const { return last_t_; }

  // Ring buffer contents, oldest first (for checkpoints).
  std::vector<std::vector<double>> buffered() const;
  void restore(std::int64_t last_t, std::int64_t count, std::int64_t emitted,
               const std::vector<std::vector<double>>& oldest_first);

 private:
  AggregationPolicy policy_;
  int p_;
  std::vector<double> ring_;  // n slots of p values
  std::int64_t count_ = 0;
  std::int64_t emitted_ = 0;
  std::int64_t last_t_ = 0;
  bool started_ = false;
};

}  // namespace mvdisp
