#include "mvdisp/windows.hpp"

#include <algorithm>
#include <string>

#include "mvdisp/error.hpp"

namespace mvdisp {

void validate(const AggregationPolicy& policy) {
  switch (policy.mode) {
    case Aggregation::Individual:
      if (policy.n != 1) throw ConfigError("individual monitoring requires n = 1");
      break;
    case Aggregation::NonOverlapping:
    case Aggregation::Overlapping:
      if (policy.n < 2) throw ConfigError("subgroup size n must be at least 2");
      break;
  }
}

Windower::Windower(AggregationPolicy policy, int p) : policy_(policy), p_(p) {
  validate(policy_);
  if (p_ < 1) throw ConfigError("dimension p must be positive");
  ring_.assign(static_cast<std::size_t>(policy_.n * p_), 0.0);
}

void Windower::reset() {
  count_ = 0;
  emitted_ = 0;
  last_t_ = 0;
  started_ = false;
}

bool Windower::push_into(std::int64_t t, std::span<const double> y, SubgroupWindow& out) {
  if (static_cast<int>(y.size()) != p_)
    throw DataError("observation at t=" + std::to_string(t) + " has " + std::to_string(y.size()) +
                    " values, expected " + std::to_string(p_));
  if (started_ && t <= last_t_)
    throw DataError("time index " + std::to_string(t) + " does not follow " + std::to_string(last_t_));
  started_ = true;
  last_t_ = t;

  const int n = policy_.n;
  const auto slot = static_cast<std::size_t>(count_ % n);
  std::copy(y.begin(), y.end(), ring_.begin() + static_cast<std::ptrdiff_t>(slot * p_));
  ++count_;

  bool emit = false;
  switch (policy_.mode) {
    case Aggregation::Individual: emit = true; break;
    case Aggregation::NonOverlapping: emit = count_ % n == 0; break;
    case Aggregation::Overlapping: emit = count_ >= n; break;
  }
  if (!emit) return false;

  out.end_time = t;
  out.p = p_;
  out.n = n;
  out.columns.resize(static_cast<std::size_t>(n * p_));
  // Oldest observation sits in the slot that will be overwritten next.
  const auto oldest = static_cast<std::size_t>(count_ % n);
  for (int k = 0; k < n; ++k) {
    const std::size_t src = (oldest + static_cast<std::size_t>(k)) % static_cast<std::size_t>(n);
    std::copy_n(ring_.begin() + static_cast<std::ptrdiff_t>(src * p_), p_,
                out.columns.begin() + static_cast<std::ptrdiff_t>(k * p_));
  }
  ++emitted_;
  return true;
}

std::optional<SubgroupWindow> Windower::push(std::int64_t t, std::span<const double> y) {
  SubgroupWindow w;
  if (push_into(t, y, w)) return w;
  return std::nullopt;
}

std::vector<std::vector<double>> Windower::buffered() const {
  const int n = policy_.n;
  const std::int64_t held = std::min<std::int64_t>(count_, n);
  std::vector<std::vector<double>> out;
  for (std::int64_t k = count_ - held; k < count_; ++k) {
    const auto slot = static_cast<std::size_t>(k % n);
    out.emplace_back(ring_.begin() + static_cast<std::ptrdiff_t>(slot * p_),
                     ring_.begin() + static_cast<std::ptrdiff_t>((slot + 1) * p_));
  }
  return out;
}

void Windower::restore(std::int64_t last_t, std::int64_t count, std::int64_t emitted,
                       const std::vector<std::vector<double>>& oldest_first) {
  const int n = policy_.n;
  if (count < 0 || static_cast<std::int64_t>(oldest_first.size()) != std::min<std::int64_t>(count, n))
    throw DataError("window checkpoint holds an inconsistent number of observations");
  reset();
  count_ = count;
  emitted_ = emitted;
  last_t_ = last_t;
  started_ = count > 0;
  std::int64_t k = count - static_cast<std::int64_t>(oldest_first.size());
  for (const auto& obs : oldest_first) {
    if (static_cast<int>(obs.size()) != p_) throw DataError("window checkpoint observation has wrong dimension");
    const auto slot = static_cast<std::size_t>(k % n);
    std::copy(obs.begin(), obs.end(), ring_.begin() + static_cast<std::ptrdiff_t>(slot * p_));
    ++k;
  }
}

}  // namespace mvdisp
