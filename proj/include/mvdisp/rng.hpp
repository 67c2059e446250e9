#pragma once

#include <cstdint>
#include <span>

namespace mvdisp {

std::uint64_t splitmix64(std::uint64_t& state);

// Stateless 64-bit mix of two words; used to derive independent seeds.
std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b);

// One replication's random stream: xoshiro256** keyed by (master_seed,
// stream_id). The sequence depends on nothing else, so results do not change
// with thread count or scheduling. Not safe for concurrent use.
class RngStream {
 public:
  RngStream(std::uint64_t master_seed, std::uint64_t stream_id);

  std::uint64_t next_u64();
  // Uniform on the open interval (0, 1).
  double uniform();
  // Standard normal variate (Marsaglia polar method).
  double normal();
  void fill_normal(std::span<double> out);

  std::uint64_t master_seed() const { return master_seed_; }
  std::uint64_t stream_id() const { return stream_id_; }

 private:
  std::uint64_t s_[4];
  std::uint64_t master_seed_;
  std::uint64_t stream_id_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace mvdisp
