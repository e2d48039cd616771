#pragma once

#include <cstdint>

namespace fvar {

// Purpose tag of an RNG substream. A (seed, path, purpose, lane) key fully
// determines the stream, so simulation output is independent of thread count
// and scheduling. `lane` carries a secondary index where one path owns several
// streams of the same purpose (e.g. inner resimulation per DIM time).
enum class StreamPurpose : std::uint64_t {
  Outer = 1,
  Inner = 2,
  Augment = 3,
  Synthetic = 4,
  // moment-target refinement streams, distinct from Inner so refined methods
  // never share noise with the nested benchmark they are scored against
  Moment = 5,
};

// xoshiro256** seeded through splitmix64 over the mixed key.
class KeyedRng {
 public:
  KeyedRng(std::uint64_t seed, std::uint64_t path, StreamPurpose purpose, std::uint64_t lane = 0);

  std::uint64_t next_u64();
  // uniform on the open interval (0, 1)
  double next_unit();
  // standard normal via inverse CDF; bit-reproducible everywhere
  double next_normal();

 private:
  std::uint64_t s_[4];
};

}  // namespace fvar
