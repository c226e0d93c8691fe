#pragma once

#include <cstdint>
#include <istream>
#include <optional>
#include <span>
#include <string_view>
#include <variant>
#include <vector>

#include "urbangraph/geo_grid.hpp"
#include "urbangraph/rng.hpp"

namespace urbangraph {

using PersonId = std::uint32_t;
using AgeGroup = std::uint16_t;
using HouseholdId = std::uint32_t;

enum class HouseholdType : std::uint8_t { Singles, SingleParent, Couples, TwoParents, Various };
inline constexpr std::size_t kHouseholdTypeCount = 5;

// (household-type, role) pairs recognised by the household builder.
enum class Role : std::uint8_t {
  Single,
  SingleParentParent,
  SingleParentChild,
  CouplesPeer,
  TwoParentsParent,
  TwoParentsChild,
  Various,
  Unset,
};
inline constexpr std::size_t kRoleCount = 7;

HouseholdType household_type(Role role);
bool is_child(Role role) noexcept;
bool is_parent(Role role) noexcept;
std::string_view to_string(HouseholdType type) noexcept;
std::string_view role_name(Role role) noexcept;  // "parent", "child", ...
std::optional<HouseholdType> parse_household_type(std::string_view text) noexcept;
std::optional<Role> parse_role(HouseholdType type, std::string_view role) noexcept;

struct Person {
  PersonId id = 0;
  TileIndex tile = 0;
  AgeGroup group = 0;
  double fitness = 1.0;
  Role role = Role::Unset;
  std::optional<HouseholdId> household;
};

class AgeDistribution {
 public:
  /// `lower_breaks[i]` is the lowest age of group i; probabilities must sum to 1.
  AgeDistribution(std::vector<double> lower_breaks, std::vector<double> probabilities);

  static AgeDistribution uniform(std::size_t groups);

  std::size_t group_count() const noexcept { return probabilities_.size(); }
  std::span<const double> probabilities() const noexcept { return probabilities_; }
  std::span<const double> lower_breaks() const noexcept { return breaks_; }

  template <class Engine>
  AgeGroup sample(Engine& eng) const {
    const double u = uniform01(eng);
    for (std::size_t i = 0; i + 1 < cumulative_.size(); ++i) {
      if (u < cumulative_[i]) return static_cast<AgeGroup>(i);
    }
    // Guards against round-off in the last cumulative entry.
    for (std::size_t i = cumulative_.size(); i-- > 0;) {
      if (probabilities_[i] > 0.0) return static_cast<AgeGroup>(i);
    }
    return 0;
  }

 private:
  std::vector<double> breaks_;
  std::vector<double> probabilities_;
  std::vector<double> cumulative_;
};

/// Columns `group_index,age_break_low,fraction`.
AgeDistribution load_age_distribution(std::istream& in, std::string_view source_name = "age_distribution.csv");

struct ConstantFitness {
  double value = 1.0;
};

/// shift + LN(lambda, sigma2); lambda and sigma2 are the mean and variance of
/// the underlying normal variable.
struct ShiftedLognormalFitness {
  double shift = 1.0;
  double lambda = 0.0;
  double sigma2 = 1.0;
};

/// Pareto with minimum `scale` and tail index `alpha`.
struct ParetoFitness {
  double scale = 1.0;
  double alpha = 2.0;
};

struct UniformFitness {
  double low = 1.0;
  double high = 2.0;
};

using FitnessSpec = std::variant<ConstantFitness, ShiftedLognormalFitness, ParetoFitness, UniformFitness>;

void validate(const FitnessSpec& spec);
/// Closed-form mean; infinite for Pareto with alpha <= 1.
double fitness_mean(const FitnessSpec& spec);
double sample_fitness(const FitnessSpec& spec, Philox4x32& eng);

/// Persons ordered by tile, ids 0..N-1. Each tile draws from its own stream.
std::vector<Person> synthesize_population(const TileMask& mask, const AgeDistribution& ages,
                                          const FitnessSpec& fitness, std::uint64_t seed);

/// Redistributes the same head count uniformly at random over populated tiles.
TileMask uniform_density_mask(const TileMask& mask, std::uint64_t seed);

/// Multiplies each probability by (1 + eps), eps ~ 0.5 N(w, w^2) + 0.5 N(-w, w^2),
/// clamps negatives to 0 and renormalises.
std::vector<double> perturb_age_distribution(std::span<const double> probabilities, double omega,
                                             std::uint64_t seed);

std::vector<std::uint64_t> group_sizes(std::span<const Person> persons, std::size_t groups);

}  // namespace urbangraph
