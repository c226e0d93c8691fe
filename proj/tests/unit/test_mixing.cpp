#include <doctest.h>

#include <fstream>
#include <sstream>

#include "urbangraph/error.hpp"
#include "urbangraph/mixing.hpp"

using namespace urbangraph;

namespace {

ErrorKind kind_of(auto&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an error");
  return ErrorKind::InvalidParameter;
}

ContactMatrix two_groups() {
  Matrix g(2);
  g(0, 0) = 4.0;
  g(0, 1) = 5.0;
  g(1, 0) = 0.6;
  g(1, 1) = 2.0;
  return make_contact_matrix(g, {"young", "old"});
}

}  // namespace

TEST_SUITE("mixing") {
  TEST_CASE("pair counts") {
    const std::vector<std::uint64_t> sizes{4, 6, 8};
    const auto m = pair_counts(sizes);
    CHECK(m(0, 0) == 6.0);
    CHECK(m(1, 1) == 15.0);
    CHECK(m(2, 2) == 28.0);
    CHECK(m(0, 2) == 32.0);
    CHECK(m(2, 0) == 32.0);
    CHECK(pair_counts(std::vector<std::uint64_t>{1})(0, 0) == 0.0);
  }

  TEST_CASE("reciprocity correction averages both directions") {
    const std::vector<std::uint64_t> sizes{10, 500};
    const auto a = reciprocity_correct(two_groups(), sizes);
    CHECK(a.alpha(0, 1) == doctest::Approx(175.0));
    CHECK(a.alpha(1, 0) == doctest::Approx(175.0));
    CHECK(a.alpha(0, 0) == doctest::Approx(20.0));
    CHECK(a.alpha(1, 1) == doctest::Approx(500.0));
    CHECK(kind_of([&] { reciprocity_correct(two_groups(), std::vector<std::uint64_t>{10}); }) == ErrorKind::Config);
    CHECK(kind_of([&] { reciprocity_correct(two_groups(), std::vector<std::uint64_t>{10, 0}); }) ==
          ErrorKind::InvalidParameter);
  }

  TEST_CASE("edge frequencies") {
    const std::vector<std::uint64_t> sizes{10, 500};
    const auto a = reciprocity_correct(two_groups(), sizes);
    const auto raw = edge_frequency_matrix(a, sizes, false);
    CHECK_FALSE(raw.normalized);
    CHECK(raw.s(0, 1) == doctest::Approx(0.035));
    CHECK(raw.s(0, 0) == doctest::Approx(20.0 / 45.0));
    CHECK(raw.s(1, 1) == doctest::Approx(500.0 / 124750.0));
    const auto norm = edge_frequency_matrix(a, sizes);
    CHECK(norm.normalized);
    CHECK(norm.s.upper_sum() == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(norm.s.symmetric());
    CHECK(norm.s(0, 1) / norm.s(0, 0) == doctest::Approx(0.035 * 45.0 / 20.0));
  }

  TEST_CASE("degenerate adjacency") {
    GroupAdjacency a{Matrix(2)};
    CHECK(kind_of([&] { edge_frequency_matrix(a, std::vector<std::uint64_t>{3, 3}); }) ==
          ErrorKind::ModelDegenerate);
    a.alpha(0, 0) = 1.0;
    CHECK(kind_of([&] { edge_frequency_matrix(a, std::vector<std::uint64_t>{1, 3}); }) ==
          ErrorKind::DegenerateGroup);
  }

  TEST_CASE("homogeneous matrix and isolated groups") {
    const auto h = homogeneous_S(4);
    CHECK(h.s(0, 3) == 0.0625);
    CHECK(h.s.upper_sum() == doctest::Approx(0.625));
    CHECK(isolated_groups(h).empty());
    MixingMatrix m{Matrix(3, 0.1), false};
    for (std::size_t j = 0; j < 3; ++j) m.s(1, j) = m.s(j, 1) = 0.0;
    CHECK(isolated_groups(m) == std::vector<std::size_t>{1});
  }

  TEST_CASE("contact matrix input") {
    std::istringstream labelled("group,a,b\na,1,2\nb,3,4\n");
    const auto c = load_contact_matrix(labelled);
    CHECK(c.labels == std::vector<std::string>{"a", "b"});
    CHECK(c.gamma(1, 0) == 3.0);
    std::istringstream bare("a,b\n1,2\n3,4\n");
    CHECK(load_contact_matrix(bare).gamma(0, 1) == 2.0);
    std::istringstream ragged("a,b,c\n1,2,3\n");
    CHECK(kind_of([&] { load_contact_matrix(ragged); }) == ErrorKind::Parse);
    std::istringstream negative("a,b\n1,-2\n3,4\n");
    CHECK(kind_of([&] { load_contact_matrix(negative); }) == ErrorKind::Config);
    std::ifstream shipped(URBANGRAPH_DATA_DIR "/florence/contact_matrix.csv");
    CHECK(load_contact_matrix(shipped).gamma.size() == 4);
  }
}
