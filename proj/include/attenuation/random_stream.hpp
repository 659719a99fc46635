#pragma once

#include <cstdint>
#include <random>

namespace attenuation {

/// Reproducible source of uniform and standard normal draws. Streams are
/// keyed by (seed, cell, replicate) so the draws of a replicate do not depend
/// on scheduling.
class RandomStream {
 public:
  RandomStream(std::uint64_t seed, std::uint64_t cell, std::uint64_t rep);

  double normal() { return normal_(engine_); }
  std::uint64_t next_u64() { return engine_(); }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

RandomStream derive_stream(std::uint64_t seed, std::uint64_t cell_index, std::uint64_t rep_index);

}  // namespace attenuation
