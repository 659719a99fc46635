#include "attenuation/random_stream.hpp"

namespace attenuation {

namespace {

// SplitMix64 finaliser; decorrelates nearby keys before seeding.
std::uint64_t mix(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::mt19937_64 keyed_engine(std::uint64_t seed, std::uint64_t cell, std::uint64_t rep) {
  const std::uint64_t k0 = mix(seed);
  const std::uint64_t k1 = mix(k0 ^ mix(cell + 0x632be59bd9b4e019ULL));
  const std::uint64_t k2 = mix(k1 ^ mix(rep + 0x8cb92ba72f3d8dd7ULL));
  std::seed_seq seq{static_cast<std::uint32_t>(k0), static_cast<std::uint32_t>(k0 >> 32),
                    static_cast<std::uint32_t>(k1), static_cast<std::uint32_t>(k1 >> 32),
                    static_cast<std::uint32_t>(k2), static_cast<std::uint32_t>(k2 >> 32)};
  return std::mt19937_64(seq);
}

}  // namespace

RandomStream::RandomStream(std::uint64_t seed, std::uint64_t cell, std::uint64_t rep)
    : engine_(keyed_engine(seed, cell, rep)) {}

RandomStream derive_stream(std::uint64_t seed, std::uint64_t cell_index, std::uint64_t rep_index) {
  return RandomStream(seed, cell_index, rep_index);
}

}  // namespace attenuation
