#pragma once

// Household synthesis: per-age role draws, then a per-tile heuristic that
// pairs partners, sizes families, hands out children round by round and
// finally composes the "various" households.

#include <array>
#include <cstdint>
#include <istream>
#include <map>
#include <span>
#include <string_view>
#include <vector>

#include "urbangraph/graph.hpp"
#include "urbangraph/population.hpp"

namespace urbangraph {

/// Pr[role | age group].
class RoleTable {
 public:
  explicit RoleTable(std::size_t groups);

  std::size_t group_count() const noexcept { return rows_.size(); }
  void set(AgeGroup group, Role role, double probability);
  double probability(AgeGroup group, Role role) const;
  /// Every group must sum to 1 within 1e-9; a group whose row is all zero is
  /// reported as missing.
  void validate() const;

  Role sample(AgeGroup group, Philox4x32& eng) const;

  /// Every group takes (singles, single) with probability 1.
  static RoleTable all_single(std::size_t groups);

 private:
  std::vector<std::array<double, kRoleCount>> rows_;
};

/// Columns `age_group,household_type,role,probability`.
RoleTable load_role_table(std::istream& in, std::string_view source_name = "roles.csv");

/// Pr[k | household type].
class SizeTable {
 public:
  SizeTable() = default;

  void set(HouseholdType type, std::uint32_t size, double probability);
  const std::map<std::uint32_t, double>& sizes(HouseholdType type) const;
  void validate() const;

  std::uint32_t sample(HouseholdType type, Philox4x32& eng) const;
  double mean_size(HouseholdType type) const;

  /// singles=1, couples=2, single-parent=2, two-parents=3, various=2.
  static SizeTable minimal();

 private:
  std::array<std::map<std::uint32_t, double>, kHouseholdTypeCount> sizes_{};
};

/// Columns `household_type,size,probability`.
SizeTable load_size_table(std::istream& in, std::string_view source_name = "sizes.csv");

struct Household {
  HouseholdType type = HouseholdType::Singles;
  /// Parents (or peers) first, then children in the order they were claimed.
  std::vector<PersonId> members;
};

struct HouseholdSet {
  std::vector<Household> households;
  std::vector<PersonId> unassigned;

  std::size_t assigned_count() const noexcept;
};

/// Draws a role for every person; independent streams per block of persons.
void assign_roles(std::span<Person> persons, const RoleTable& table, std::uint64_t seed);

/// Roles must already be assigned. Never throws for shortages: persons that
/// cannot be placed end up in `unassigned`.
HouseholdSet build_households(std::span<const Person> persons, const SizeTable& sizes,
                              std::uint64_t seed);

/// Writes household ids (index into `set.households`) onto the persons.
void apply_households(std::span<Person> persons, const HouseholdSet& set);

/// Union of per-household cliques.
EdgeSet household_edges(const HouseholdSet& set);

struct HouseholdViolations {
  std::size_t mixed_tile = 0;
  std::size_t child_not_younger = 0;
  std::size_t partners_too_far = 0;
  std::size_t duplicated_person = 0;

  std::size_t total() const noexcept {
    return mixed_tile + child_not_younger + partners_too_far + duplicated_person;
  }
};

HouseholdViolations check_households(std::span<const Person> persons, const HouseholdSet& set);

/// Expected share of each household type implied by the age distribution and
/// the role/size tables (heads counted once per household).
std::array<double, kHouseholdTypeCount> expected_type_distribution(std::span<const double> age_probabilities,
                                                                   const RoleTable& roles,
                                                                   const SizeTable& sizes);

std::array<double, kHouseholdTypeCount> realized_type_distribution(const HouseholdSet& set);

}  // namespace urbangraph
