#include <doctest.h>

#include <set>
#include <vector>

#include "urbangraph/rng.hpp"

using namespace urbangraph;

TEST_SUITE("rng") {
  TEST_CASE("philox matches the published known-answer vector") {
    // Philox4x32-10, counter 0, key 0 -> 6627e8d5 e169c58d bc57ac4c 9b00dbd8.
    Philox4x32 eng(0, 0);
    CHECK(eng() == 0xe169c58d6627e8d5ull);
    CHECK(eng() == 0x9b00dbd8bc57ac4cull);
  }

  TEST_CASE("streams are reproducible and distinct") {
    Philox4x32 a(42, stream_id(StreamDomain::Friendship, 7));
    Philox4x32 b(42, stream_id(StreamDomain::Friendship, 7));
    Philox4x32 c(42, stream_id(StreamDomain::Friendship, 8));
    Philox4x32 d(43, stream_id(StreamDomain::Friendship, 7));
    std::set<std::uint64_t> firsts;
    for (int i = 0; i < 100; ++i) {
      const auto x = a();
      CHECK(x == b());
      firsts.insert(x);
    }
    CHECK(firsts.size() == 100);
    Philox4x32 a2(42, stream_id(StreamDomain::Friendship, 7));
    const auto head = a2();
    CHECK(head != c());
    CHECK(head != d());
    CHECK(stream_id(StreamDomain::Roles, 1) != stream_id(StreamDomain::Households, 1));
  }

  TEST_CASE("discard skips outputs") {
    Philox4x32 a(5, 1);
    Philox4x32 b(5, 1);
    a.discard(7);
    for (int i = 0; i < 7; ++i) b();
    CHECK(a() == b());
  }

  TEST_CASE("uniform variates stay in range") {
    Philox4x32 eng(9, 9);
    for (int i = 0; i < 100000; ++i) {
      const double u = uniform01(eng);
      REQUIRE(u >= 0.0);
      REQUIRE(u < 1.0);
      const double w = uniform_open_closed(eng);
      REQUIRE(w > 0.0);
      REQUIRE(w <= 1.0);
    }
  }

  TEST_CASE("uniform_below is unbiased") {
    Philox4x32 eng(3, 4);
    const std::uint64_t k = 7;
    const int draws = 700000;
    std::vector<int> counts(k, 0);
    for (int i = 0; i < draws; ++i) {
      const auto x = uniform_below(eng, k);
      REQUIRE(x < k);
      ++counts[x];
    }
    double chi2 = 0.0;
    const double e = static_cast<double>(draws) / k;
    for (const int c : counts) chi2 += (c - e) * (c - e) / e;
    // 6 degrees of freedom, 0.1% critical value.
    CHECK(chi2 < 22.46);
    CHECK(uniform_below(eng, 0) == 0);
    CHECK(uniform_below(eng, 1) == 0);
  }

  TEST_CASE("split seeds differ per run") {
    std::set<std::uint64_t> seeds;
    for (std::uint64_t r = 0; r < 1000; ++r) seeds.insert(split_seed(11, r));
    CHECK(seeds.size() == 1000);
    CHECK(split_seed(11, 3) == split_seed(11, 3));
  }
}
