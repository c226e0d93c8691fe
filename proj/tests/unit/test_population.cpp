#include <doctest.h>

#include <cmath>
#include <numeric>
#include <sstream>

#include "urbangraph/error.hpp"
#include "urbangraph/population.hpp"

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

double sample_mean(const FitnessSpec& spec, int n) {
  Philox4x32 eng(1, 2);
  double sum = 0.0;
  for (int i = 0; i < n; ++i) sum += sample_fitness(spec, eng);
  return sum / n;
}

}  // namespace

TEST_SUITE("population") {
  TEST_CASE("age distribution validation") {
    CHECK(kind_of([] { AgeDistribution({0, 18}, {0.5, 0.6}); }) == ErrorKind::InvalidParameter);
    CHECK(kind_of([] { AgeDistribution({0, 18}, {1.0}); }) == ErrorKind::InvalidParameter);
    CHECK(kind_of([] { AgeDistribution({18, 0}, {0.5, 0.5}); }) == ErrorKind::InvalidParameter);
    CHECK(kind_of([] { AgeDistribution({0, 18}, {-0.5, 1.5}); }) == ErrorKind::InvalidParameter);
    const auto u = AgeDistribution::uniform(3);
    CHECK(std::accumulate(u.probabilities().begin(), u.probabilities().end(), 0.0) == 1.0);
  }

  TEST_CASE("age table loading") {
    std::istringstream in("group_index,age_break_low,fraction\n1,18,0.75\n0,0,0.25\n");
    const auto a = load_age_distribution(in);
    CHECK(a.group_count() == 2);
    CHECK(a.probabilities()[0] == 0.25);
    CHECK(a.lower_breaks()[1] == 18.0);
    std::istringstream dup("group_index,age_break_low,fraction\n0,0,0.5\n0,18,0.5\n");
    CHECK(kind_of([&] { load_age_distribution(dup); }) == ErrorKind::Parse);
  }

  TEST_CASE("age sampling follows the distribution") {
    const AgeDistribution a({0, 18, 35, 65}, {0.151, 0.169, 0.431, 0.249});
    Philox4x32 eng(4, 4);
    std::vector<int> counts(4, 0);
    const int n = 200000;
    for (int i = 0; i < n; ++i) ++counts[a.sample(eng)];
    for (std::size_t g = 0; g < 4; ++g) {
      const double p = a.probabilities()[g];
      CHECK(std::abs(counts[g] / double(n) - p) < 4.0 * std::sqrt(p * (1 - p) / n));
    }
    const AgeDistribution zero_tail({0, 1, 2}, {0.5, 0.5, 0.0});
    for (int i = 0; i < 10000; ++i) REQUIRE(zero_tail.sample(eng) < 2);
  }

  TEST_CASE("fitness families have the closed-form means") {
    const int n = 400000;
    const ShiftedLognormalFitness ln{1.0, std::log(2.0), 0.25};
    CHECK(fitness_mean(ln) == doctest::Approx(1.0 + 2.0 * std::exp(0.125)));
    CHECK(sample_mean(ln, n) == doctest::Approx(fitness_mean(ln)).epsilon(0.01));
    const ParetoFitness pa{1.5, 3.0};
    CHECK(fitness_mean(pa) == doctest::Approx(2.25));
    CHECK(sample_mean(pa, n) == doctest::Approx(2.25).epsilon(0.02));
    const UniformFitness un{1.0, 3.0};
    CHECK(sample_mean(un, n) == doctest::Approx(2.0).epsilon(0.01));
    CHECK(std::isinf(fitness_mean(ParetoFitness{1.0, 1.0})));
    CHECK(sample_mean(ConstantFitness{2.5}, 10) == 2.5);
    CHECK(kind_of([] { validate(ConstantFitness{0.0}); }) == ErrorKind::InvalidParameter);
    CHECK(kind_of([] { validate(UniformFitness{2.0, 1.0}); }) == ErrorKind::InvalidParameter);
    CHECK(kind_of([] { validate(ParetoFitness{1.0, -1.0}); }) == ErrorKind::InvalidParameter);
  }

  TEST_CASE("synthesized persons follow the tile counts") {
    TileMask mask(4, true);
    mask.set_population(0, 30);
    mask.set_population(2, 50);
    mask.set_population(3, 1);
    const auto ages = AgeDistribution::uniform(3);
    const auto persons = synthesize_population(mask, ages, ShiftedLognormalFitness{1.0, 0.0, 1.0}, 7);
    REQUIRE(persons.size() == 81);
    std::vector<int> per_tile(4, 0);
    for (std::size_t i = 0; i < persons.size(); ++i) {
      CHECK(persons[i].id == i);
      CHECK(persons[i].fitness > 1.0);
      CHECK(persons[i].role == Role::Unset);
      ++per_tile[persons[i].tile];
      if (i > 0) CHECK(persons[i].tile >= persons[i - 1].tile);
    }
    CHECK(per_tile == std::vector<int>{30, 0, 50, 1});
    const auto again = synthesize_population(mask, ages, ShiftedLognormalFitness{1.0, 0.0, 1.0}, 7);
    CHECK(again[40].fitness == persons[40].fitness);
    CHECK(again[40].group == persons[40].group);
    const auto sizes = group_sizes(persons, 3);
    CHECK(std::accumulate(sizes.begin(), sizes.end(), std::uint64_t{0}) == 81);
    CHECK(kind_of([] { synthesize_population(TileMask(3, true), AgeDistribution::uniform(1), ConstantFitness{}, 1); }) ==
          ErrorKind::EmptyPopulation);
  }

  TEST_CASE("uniform density keeps the head count on populated tiles") {
    TileMask mask(6, true);
    mask.set_population(0, 9000);
    mask.set_population(1, 10);
    mask.set_population(4, 990);
    mask.set_active(5, false);
    const auto u = uniform_density_mask(mask, 3);
    CHECK(u.total_population() == 10000);
    CHECK(u.population(2) == 0);
    CHECK(u.population(5) == 0);
    for (const TileIndex t : {0u, 1u, 4u}) CHECK(std::abs(double(u.population(t)) - 10000.0 / 3) < 200);
  }

  TEST_CASE("age perturbation") {
    const std::vector<double> p{0.151, 0.169, 0.431, 0.249};
    CHECK(perturb_age_distribution(p, 0.0, 1) == p);
    const auto q = perturb_age_distribution(p, 0.1, 1);
    CHECK(std::accumulate(q.begin(), q.end(), 0.0) == doctest::Approx(1.0).epsilon(1e-12));
    double moved = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) moved += std::abs(q[i] - p[i]);
    CHECK(moved > 0.0);
    CHECK(moved < 0.3);
    CHECK(perturb_age_distribution(p, 0.1, 1) == q);
    CHECK(kind_of([&] { perturb_age_distribution(p, -0.1, 1); }) == ErrorKind::InvalidParameter);
    CHECK(perturb_age_distribution(std::vector<double>{1.0}, 1e6, 2) == std::vector<double>{1.0});
    int degenerate = 0;
    for (std::uint64_t seed = 0; seed < 40; ++seed) {
      std::vector<double> r;
      try {
        r = perturb_age_distribution(std::vector<double>{0.5, 0.5}, 1e6, seed);
      } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::DegeneratePerturbation);
        ++degenerate;
        continue;
      }
      CHECK(r[0] + r[1] == doctest::Approx(1.0));
    }
    CHECK(degenerate > 0);
    CHECK(degenerate < 40);
  }

  TEST_CASE("small perturbations stay close") {
    // Monte Carlo of the mixture: E[TV] is about 0.4 * omega * sum p|...|, well under 0.02 at omega = 0.01.
    const std::vector<double> p{0.151, 0.169, 0.431, 0.249};
    double tv = 0.0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      const auto q = perturb_age_distribution(p, 0.01, seed);
      double d = 0.0;
      for (std::size_t i = 0; i < p.size(); ++i) d += std::abs(q[i] - p[i]);
      tv += 0.5 * d;
    }
    CHECK(tv / 20 < 0.02);
  }
}
