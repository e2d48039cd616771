#include <doctest.h>

#include <cmath>
#include <set>
#include <vector>

#include "fvar/rng.hpp"
#include "helpers.hpp"

using namespace fvar;

TEST_SUITE("rng") {

TEST_CASE("same key reproduces the same stream") {
  KeyedRng a(42, 7, StreamPurpose::Outer);
  KeyedRng b(42, 7, StreamPurpose::Outer);
  for (int i = 0; i < 1000; ++i) CHECK(a.next_u64() == b.next_u64());
}

TEST_CASE("any key component separates streams") {
  KeyedRng base(42, 7, StreamPurpose::Inner, 3);
  KeyedRng seed(43, 7, StreamPurpose::Inner, 3);
  KeyedRng path(42, 8, StreamPurpose::Inner, 3);
  KeyedRng purpose(42, 7, StreamPurpose::Augment, 3);
  KeyedRng lane(42, 7, StreamPurpose::Inner, 4);
  const std::uint64_t first = base.next_u64();
  CHECK(first != seed.next_u64());
  CHECK(first != path.next_u64());
  CHECK(first != purpose.next_u64());
  CHECK(first != lane.next_u64());
}

TEST_CASE("neighbouring paths do not collide over long runs") {
  // 64 paths x 4096 draws: all distinct values would be astronomically
  // unlikely to collide unless the seeding correlates streams.
  std::set<std::uint64_t> seen;
  for (std::uint64_t p = 0; p < 64; ++p) {
    KeyedRng rng(1, p, StreamPurpose::Outer);
    for (int i = 0; i < 4096; ++i) seen.insert(rng.next_u64());
  }
  CHECK(seen.size() == 64u * 4096u);
}

TEST_CASE("unit draws live strictly inside (0,1) with uniform moments") {
  KeyedRng rng(9, 0, StreamPurpose::Synthetic);
  const int n = 200000;
  std::vector<double> xs(n);
  for (auto& x : xs) {
    x = rng.next_unit();
    REQUIRE(x > 0.0);
    REQUIRE(x < 1.0);
  }
  const auto s = testutil::stats(xs);
  CHECK(std::abs(s.mean - 0.5) < 3.0 * s.se);
  CHECK(s.sd == doctest::Approx(std::sqrt(1.0 / 12.0)).epsilon(0.01));
}

TEST_CASE("normal draws have standard moments and tail mass") {
  KeyedRng rng(11, 0, StreamPurpose::Synthetic);
  const int n = 200000;
  std::vector<double> xs(n);
  int below = 0;
  for (auto& x : xs) {
    x = rng.next_normal();
    if (x < testutil::kZ01) ++below;
  }
  const auto s = testutil::stats(xs);
  CHECK(std::abs(s.mean) < 3.0 * s.se);
  CHECK(s.sd == doctest::Approx(1.0).epsilon(0.01));
  // 1% lower tail within 3 binomial standard errors
  const double frac = static_cast<double>(below) / n;
  const double se = std::sqrt(0.01 * 0.99 / n);
  CHECK(std::abs(frac - 0.01) < 3.0 * se);
}

}  // TEST_SUITE
