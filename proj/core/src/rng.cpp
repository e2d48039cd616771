#include "fvar/rng.hpp"

#include "fvar/math.hpp"

namespace fvar {

namespace {

inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

inline std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

}  // namespace

KeyedRng::KeyedRng(std::uint64_t seed, std::uint64_t path, StreamPurpose purpose, std::uint64_t lane) {
  std::uint64_t h = seed;
  splitmix64(h);
  h ^= 0xA24BAED4963EE407ULL + path;
  splitmix64(h);
  h ^= 0x9FB21C651E98DF25ULL + static_cast<std::uint64_t>(purpose);
  splitmix64(h);
  h ^= 0xD6E8FEB86659FD93ULL + lane;
  for (auto& s : s_) s = splitmix64(h);
}

std::uint64_t KeyedRng::next_u64() {
  const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
  const std::uint64_t t = s_[1] << 17;
  s_[2] ^= s_[0];
  s_[3] ^= s_[1];
  s_[1] ^= s_[2];
  s_[0] ^= s_[3];
  s_[2] ^= t;
  s_[3] = rotl(s_[3], 45);
  return result;
}

double KeyedRng::next_unit() {
  // 53-bit mantissa, shifted half a step off zero so the result stays in (0,1)
  return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
}

double KeyedRng::next_normal() { return normal_quantile_fast(next_unit()); }

}  // namespace fvar
