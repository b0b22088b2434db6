#pragma once

#include <cstdint>
#include <random>

namespace paraqnd {

/// Per-trajectory stream identity: trajectory `index` of run `base`.
struct StreamSeed {
  std::uint64_t base = 0;
  std::uint64_t index = 0;
  bool operator==(const StreamSeed&) const = default;
};

StreamSeed seed_policy(std::uint64_t base_seed, std::uint64_t trajectory_index);

/// Mersenne twister seeded from all 128 bits of the stream identity through
/// std::seed_seq, so distinct (base, index) pairs give distinct streams.
std::mt19937_64 make_engine(const StreamSeed& seed);

}  // namespace paraqnd
