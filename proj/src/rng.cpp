#include "paraqnd/rng.hpp"

namespace paraqnd {

StreamSeed seed_policy(std::uint64_t base_seed, std::uint64_t trajectory_index) {
  return {base_seed, trajectory_index};
}

std::mt19937_64 make_engine(const StreamSeed& seed) {
  auto lo = [](std::uint64_t v) { return static_cast<std::uint32_t>(v & 0xffffffffu); };
  auto hi = [](std::uint64_t v) { return static_cast<std::uint32_t>(v >> 32); };
  std::seed_seq seq{lo(seed.base), hi(seed.base), lo(seed.index), hi(seed.index)};
  return std::mt19937_64(seq);
}

}  // namespace paraqnd
