#include "urbangraph/households.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>

#include <fmt/format.h>

#include "urbangraph/csv.hpp"
#include "urbangraph/error.hpp"

namespace urbangraph {
namespace {

constexpr std::size_t kRoleChunk = 1024;

template <class T>
void shuffle(std::vector<T>& items, Philox4x32& eng) {
  for (std::size_t i = items.size(); i > 1; --i) {
    const auto j = uniform_below(eng, i);
    std::swap(items[i - 1], items[j]);
  }
}

// Persons of one tile, bucketed by age group, supporting uniform draws over a
// contiguous range of groups and O(1) removal. Entries are tile-local indices.
class GroupPools {
 public:
  static constexpr std::size_t kAbsent = std::numeric_limits<std::size_t>::max();

  GroupPools(std::size_t groups, std::size_t locals) : pools_(groups), slot_(locals, kAbsent) {}

  void add(std::size_t local, AgeGroup group) {
    slot_[local] = pools_[group].size();
    pools_[group].push_back(local);
  }

  bool contains(std::size_t local) const { return slot_[local] != kAbsent; }

  void remove(std::size_t local, AgeGroup group) {
    auto& pool = pools_[group];
    const auto at = slot_[local];
    const auto last = pool.back();
    pool[at] = last;
    slot_[last] = at;
    pool.pop_back();
    slot_[local] = kAbsent;
  }

  // Uniform draw (without replacement) over groups [lo, hi].
  std::optional<std::size_t> take(long lo, long hi, const std::vector<AgeGroup>& group_of,
                                  Philox4x32& eng) {
    lo = std::max(lo, 0L);
    hi = std::min(hi, static_cast<long>(pools_.size()) - 1);
    std::uint64_t total = 0;
    for (long g = lo; g <= hi; ++g) total += pools_[g].size();
    if (total == 0) return std::nullopt;
    auto r = uniform_below(eng, total);
    for (long g = lo; g <= hi; ++g) {
      if (r < pools_[g].size()) {
        const auto picked = pools_[g][r];
        remove(picked, group_of[picked]);
        return picked;
      }
      r -= pools_[g].size();
    }
    return std::nullopt;
  }

  std::vector<std::size_t> remaining() const {
    std::vector<std::size_t> out;
    for (const auto& pool : pools_) out.insert(out.end(), pool.begin(), pool.end());
    std::sort(out.begin(), out.end());
    return out;
  }

 private:
  std::vector<std::vector<std::size_t>> pools_;
  std::vector<std::size_t> slot_;
};

struct PendingHousehold {
  HouseholdType type;
  std::vector<std::size_t> members;
  AgeGroup youngest_parent_group;
  std::uint32_t children_wanted;
  std::uint32_t children = 0;
};

struct TileResult {
  std::vector<Household> households;
  std::vector<PersonId> unassigned;
};

// Pairs persons of one role within |group difference| <= 1. Persons are
// visited in random order; each picks a uniformly random eligible partner.
std::vector<std::pair<std::size_t, std::size_t>> match_partners(const std::vector<std::size_t>& candidates,
                                                                const std::vector<AgeGroup>& group_of,
                                                                std::size_t groups, std::size_t locals,
                                                                Philox4x32& eng,
                                                                std::vector<std::size_t>& unmatched) {
  GroupPools pool(groups, locals);
  for (auto c : candidates) pool.add(c, group_of[c]);
  auto order = candidates;
  shuffle(order, eng);
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (auto u : order) {
    if (!pool.contains(u)) continue;
    pool.remove(u, group_of[u]);
    const long g = group_of[u];
    if (auto v = pool.take(g - 1, g + 1, group_of, eng)) {
      pairs.emplace_back(u, *v);
    } else {
      unmatched.push_back(u);
    }
  }
  return pairs;
}

TileResult build_tile(std::span<const Person> persons, const std::vector<PersonId>& ids,
                      std::size_t groups, const SizeTable& sizes, Philox4x32& eng) {
  const auto locals = ids.size();
  std::vector<AgeGroup> group_of(locals);
  std::array<std::vector<std::size_t>, kRoleCount> by_role;
  for (std::size_t i = 0; i < locals; ++i) {
    const auto& p = persons[ids[i]];
    group_of[i] = p.group;
    if (p.role == Role::Unset) {
      fail(ErrorKind::InvalidParameter, fmt::format("person {} has no household role", p.id));
    }
    by_role[static_cast<std::size_t>(p.role)].push_back(i);
  }
  auto role_list = [&](Role r) -> const std::vector<std::size_t>& {
    return by_role[static_cast<std::size_t>(r)];
  };

  std::vector<std::size_t> unassigned;
  std::vector<PendingHousehold> families;

  // Two-parent couples, then each family's size and number of children.
  for (auto [a, b] : match_partners(role_list(Role::TwoParentsParent), group_of, groups, locals, eng,
                                    unassigned)) {
    const auto k = sizes.sample(HouseholdType::TwoParents, eng);
    families.push_back({HouseholdType::TwoParents, {a, b}, std::min(group_of[a], group_of[b]),
                        k >= 2 ? k - 2 : 0});
  }
  {
    auto parents = role_list(Role::SingleParentParent);
    shuffle(parents, eng);
    for (auto a : parents) {
      const auto k = sizes.sample(HouseholdType::SingleParent, eng);
      families.push_back({HouseholdType::SingleParent, {a}, group_of[a], k >= 1 ? k - 1 : 0});
    }
  }

  // Round-robin child assignment: round i serves every family still wanting
  // at least i children, in a fresh random order each round.
  GroupPools sp_children(groups, locals);
  GroupPools tp_children(groups, locals);
  for (auto c : role_list(Role::SingleParentChild)) sp_children.add(c, group_of[c]);
  for (auto c : role_list(Role::TwoParentsChild)) tp_children.add(c, group_of[c]);
  std::uint32_t rounds = 0;
  for (const auto& f : families) rounds = std::max(rounds, f.children_wanted);
  for (std::uint32_t round = 1; round <= rounds; ++round) {
    std::vector<std::size_t> order;
    for (std::size_t h = 0; h < families.size(); ++h) {
      if (families[h].children_wanted >= round) order.push_back(h);
    }
    shuffle(order, eng);
    for (auto h : order) {
      auto& f = families[h];
      auto& pool = f.type == HouseholdType::TwoParents ? tp_children : sp_children;
      if (auto child = pool.take(0, static_cast<long>(f.youngest_parent_group) - 1, group_of, eng)) {
        f.members.push_back(*child);
        ++f.children;
      }
    }
  }
  for (auto c : sp_children.remaining()) unassigned.push_back(c);
  for (auto c : tp_children.remaining()) unassigned.push_back(c);

  TileResult out;
  auto emit = [&](HouseholdType type, const std::vector<std::size_t>& members) {
    Household h{type, {}};
    h.members.reserve(members.size());
    for (auto m : members) h.members.push_back(ids[m]);
    out.households.push_back(std::move(h));
  };
  for (const auto& f : families) {
    if (f.children == 0) {
      // A parent household without any child is not a valid family.
      unassigned.insert(unassigned.end(), f.members.begin(), f.members.end());
    } else {
      emit(f.type, f.members);
    }
  }

  for (auto [a, b] : match_partners(role_list(Role::CouplesPeer), group_of, groups, locals, eng, unassigned)) {
    emit(HouseholdType::Couples, {a, b});
  }
  for (auto s : role_list(Role::Single)) emit(HouseholdType::Singles, {s});

  {
    auto pool = role_list(Role::Various);
    shuffle(pool, eng);
    std::size_t next = 0;
    while (next < pool.size()) {
      const auto k = std::max<std::uint32_t>(1, sizes.sample(HouseholdType::Various, eng));
      const auto take = std::min<std::size_t>(k, pool.size() - next);
      std::vector<std::size_t> members(pool.begin() + static_cast<std::ptrdiff_t>(next),
                                       pool.begin() + static_cast<std::ptrdiff_t>(next + take));
      std::sort(members.begin(), members.end());
      emit(HouseholdType::Various, members);
      next += take;
    }
  }

  std::sort(unassigned.begin(), unassigned.end());
  for (auto u : unassigned) out.unassigned.push_back(ids[u]);
  return out;
}

}  // namespace

RoleTable::RoleTable(std::size_t groups) : rows_(groups) {
  for (auto& row : rows_) row.fill(0.0);
}

void RoleTable::set(AgeGroup group, Role role, double probability) {
  if (group >= rows_.size()) {
    fail(ErrorKind::Config, fmt::format("age group {} outside the role table ({} groups)", group, rows_.size()));
  }
  if (role == Role::Unset) fail(ErrorKind::InvalidParameter, "cannot set a probability for an unset role");
  if (!(probability >= 0.0 && probability <= 1.0)) {
    fail(ErrorKind::InvalidParameter, fmt::format("invalid role probability {}", probability));
  }
  rows_[group][static_cast<std::size_t>(role)] = probability;
}

double RoleTable::probability(AgeGroup group, Role role) const {
  if (group >= rows_.size()) {
    fail(ErrorKind::Config, fmt::format("age group {} is missing from the role table", group));
  }
  if (role == Role::Unset) return 0.0;
  return rows_[group][static_cast<std::size_t>(role)];
}

void RoleTable::validate() const {
  for (std::size_t g = 0; g < rows_.size(); ++g) {
    double sum = 0.0;
    for (double p : rows_[g]) sum += p;
    if (sum == 0.0) fail(ErrorKind::Config, fmt::format("age group {} is missing from the role table", g));
    if (std::abs(sum - 1.0) > 1e-9) {
      fail(ErrorKind::Config, fmt::format("role probabilities of age group {} sum to {}", g, sum));
    }
  }
}

Role RoleTable::sample(AgeGroup group, Philox4x32& eng) const {
  if (group >= rows_.size()) {
    fail(ErrorKind::Config, fmt::format("age group {} is missing from the role table", group));
  }
  const auto& row = rows_[group];
  const double u = uniform01(eng);
  double acc = 0.0;
  std::size_t last_positive = kRoleCount;
  for (std::size_t r = 0; r < kRoleCount; ++r) {
    if (row[r] <= 0.0) continue;
    acc += row[r];
    last_positive = r;
    if (u < acc) return static_cast<Role>(r);
  }
  if (last_positive == kRoleCount) {
    fail(ErrorKind::Config, fmt::format("age group {} is missing from the role table", group));
  }
  return static_cast<Role>(last_positive);
}

RoleTable RoleTable::all_single(std::size_t groups) {
  RoleTable t(groups);
  for (std::size_t g = 0; g < groups; ++g) t.set(static_cast<AgeGroup>(g), Role::Single, 1.0);
  return t;
}

RoleTable load_role_table(std::istream& in, std::string_view source_name) {
  const auto table = csv::read(in, source_name);
  const auto c_group = csv::column(table, "age_group", source_name);
  const auto c_type = csv::column(table, "household_type", source_name);
  const auto c_role = csv::column(table, "role", source_name);
  const auto c_prob = csv::column(table, "probability", source_name);
  std::int64_t max_group = -1;
  for (const auto& r : table.rows) {
    max_group = std::max(max_group, csv::parse_int(r.fields[c_group], r.line, source_name));
  }
  RoleTable out(static_cast<std::size_t>(max_group + 1));
  for (const auto& r : table.rows) {
    const auto g = csv::parse_int(r.fields[c_group], r.line, source_name);
    if (g < 0) fail(ErrorKind::Parse, fmt::format("{}:{}: negative age group", source_name, r.line));
    const auto type = parse_household_type(r.fields[c_type]);
    if (!type) {
      fail(ErrorKind::Parse, fmt::format("{}:{}: unknown household type '{}'", source_name, r.line, r.fields[c_type]));
    }
    const auto role = parse_role(*type, r.fields[c_role]);
    if (!role) {
      fail(ErrorKind::Parse, fmt::format("{}:{}: role '{}' does not exist for household type '{}'", source_name,
                                         r.line, r.fields[c_role], r.fields[c_type]));
    }
    out.set(static_cast<AgeGroup>(g), *role, csv::parse_double(r.fields[c_prob], r.line, source_name));
  }
  out.validate();
  return out;
}

void SizeTable::set(HouseholdType type, std::uint32_t size, double probability) {
  if (size == 0) fail(ErrorKind::InvalidParameter, "household size must be at least 1");
  if (!(probability >= 0.0) || !std::isfinite(probability)) {
    fail(ErrorKind::InvalidParameter, fmt::format("invalid size probability {}", probability));
  }
  sizes_[static_cast<std::size_t>(type)][size] = probability;
}

const std::map<std::uint32_t, double>& SizeTable::sizes(HouseholdType type) const {
  return sizes_[static_cast<std::size_t>(type)];
}

void SizeTable::validate() const {
  for (std::size_t i = 0; i < kHouseholdTypeCount; ++i) {
    const auto type = static_cast<HouseholdType>(i);
    double sum = 0.0;
    for (const auto& [k, p] : sizes_[i]) {
      sum += p;
      if (p == 0.0) continue;
      const bool ok = (type == HouseholdType::Singles && k == 1) || (type == HouseholdType::Couples && k == 2) ||
                      (type == HouseholdType::SingleParent && k >= 2) ||
                      (type == HouseholdType::TwoParents && k >= 3) || type == HouseholdType::Various;
      if (!ok) {
        fail(ErrorKind::Config, fmt::format("household type {} cannot have {} members", to_string(type), k));
      }
    }
    if (std::abs(sum - 1.0) > 1e-9) {
      fail(ErrorKind::Config, fmt::format("size probabilities of {} sum to {}", to_string(type), sum));
    }
  }
}

std::uint32_t SizeTable::sample(HouseholdType type, Philox4x32& eng) const {
  const auto& dist = sizes(type);
  if (dist.empty()) fail(ErrorKind::Config, fmt::format("no size distribution for {}", to_string(type)));
  const double u = uniform01(eng);
  double acc = 0.0;
  std::uint32_t last = dist.begin()->first;
  for (const auto& [k, p] : dist) {
    if (p <= 0.0) continue;
    acc += p;
    last = k;
    if (u < acc) return k;
  }
  return last;
}

double SizeTable::mean_size(HouseholdType type) const {
  double mean = 0.0;
  for (const auto& [k, p] : sizes(type)) mean += k * p;
  return mean;
}

SizeTable SizeTable::minimal() {
  SizeTable t;
  t.set(HouseholdType::Singles, 1, 1.0);
  t.set(HouseholdType::Couples, 2, 1.0);
  t.set(HouseholdType::SingleParent, 2, 1.0);
  t.set(HouseholdType::TwoParents, 3, 1.0);
  t.set(HouseholdType::Various, 2, 1.0);
  return t;
}

SizeTable load_size_table(std::istream& in, std::string_view source_name) {
  const auto table = csv::read(in, source_name);
  const auto c_type = csv::column(table, "household_type", source_name);
  const auto c_size = csv::column(table, "size", source_name);
  const auto c_prob = csv::column(table, "probability", source_name);
  SizeTable out;
  for (const auto& r : table.rows) {
    const auto type = parse_household_type(r.fields[c_type]);
    if (!type) {
      fail(ErrorKind::Parse, fmt::format("{}:{}: unknown household type '{}'", source_name, r.line, r.fields[c_type]));
    }
    const auto k = csv::parse_int(r.fields[c_size], r.line, source_name);
    if (k < 1) fail(ErrorKind::Parse, fmt::format("{}:{}: size must be >= 1", source_name, r.line));
    out.set(*type, static_cast<std::uint32_t>(k), csv::parse_double(r.fields[c_prob], r.line, source_name));
  }
  out.validate();
  return out;
}

std::size_t HouseholdSet::assigned_count() const noexcept {
  std::size_t n = 0;
  for (const auto& h : households) n += h.members.size();
  return n;
}

void assign_roles(std::span<Person> persons, const RoleTable& table, std::uint64_t seed) {
  for (const auto& p : persons) {
    if (p.group >= table.group_count()) {
      fail(ErrorKind::Config, fmt::format("age group {} is missing from the role table", p.group));
    }
  }
  table.validate();
  const auto chunks = static_cast<std::int64_t>((persons.size() + kRoleChunk - 1) / kRoleChunk);
#pragma omp parallel for schedule(static)
  for (std::int64_t c = 0; c < chunks; ++c) {
    Philox4x32 eng(seed, stream_id(StreamDomain::Roles, static_cast<std::uint64_t>(c)));
    const auto begin = static_cast<std::size_t>(c) * kRoleChunk;
    const auto end = std::min(persons.size(), begin + kRoleChunk);
    for (auto i = begin; i < end; ++i) persons[i].role = table.sample(persons[i].group, eng);
  }
}

HouseholdSet build_households(std::span<const Person> persons, const SizeTable& sizes, std::uint64_t seed) {
  sizes.validate();
  TileIndex tiles = 0;
  AgeGroup groups = 0;
  for (const auto& p : persons) {
    tiles = std::max<TileIndex>(tiles, p.tile + 1);
    groups = std::max<AgeGroup>(groups, static_cast<AgeGroup>(p.group + 1));
  }
  std::vector<std::vector<PersonId>> by_tile(tiles);
  for (std::size_t i = 0; i < persons.size(); ++i) by_tile[persons[i].tile].push_back(static_cast<PersonId>(i));

  std::vector<TileResult> results(tiles);
  const auto tile_count = static_cast<std::int64_t>(tiles);
  std::vector<std::string> errors(tiles);
#pragma omp parallel for schedule(dynamic, 1)
  for (std::int64_t t = 0; t < tile_count; ++t) {
    if (by_tile[t].empty()) continue;
    try {
      Philox4x32 eng(seed, stream_id(StreamDomain::Households, static_cast<std::uint64_t>(t)));
      results[t] = build_tile(persons, by_tile[t], groups, sizes, eng);
    } catch (const std::exception& e) {
      errors[t] = e.what();
    }
  }
  for (const auto& e : errors) {
    if (!e.empty()) fail(ErrorKind::InvalidParameter, e);
  }

  HouseholdSet out;
  for (auto& r : results) {
    for (auto& h : r.households) out.households.push_back(std::move(h));
    out.unassigned.insert(out.unassigned.end(), r.unassigned.begin(), r.unassigned.end());
  }
  return out;
}

void apply_households(std::span<Person> persons, const HouseholdSet& set) {
  for (auto& p : persons) p.household.reset();
  for (std::size_t h = 0; h < set.households.size(); ++h) {
    for (auto m : set.households[h].members) {
      if (m >= persons.size()) fail(ErrorKind::InvalidIndex, fmt::format("household member {} out of range", m));
      persons[m].household = static_cast<HouseholdId>(h);
    }
  }
}

EdgeSet household_edges(const HouseholdSet& set) {
  EdgeSet out{Layer::Household, {}};
  std::size_t total = 0;
  for (const auto& h : set.households) total += h.members.size() * (h.members.size() - 1) / 2;
  out.edges.reserve(total);
  for (const auto& h : set.households) {
    for (std::size_t i = 0; i < h.members.size(); ++i) {
      for (std::size_t j = i + 1; j < h.members.size(); ++j) {
        out.edges.push_back({h.members[i], h.members[j]});
      }
    }
  }
  out.canonicalize();
  return out;
}

HouseholdViolations check_households(std::span<const Person> persons, const HouseholdSet& set) {
  HouseholdViolations v;
  std::vector<std::uint8_t> seen(persons.size(), 0);
  auto mark = [&](PersonId id) {
    if (seen[id]++) ++v.duplicated_person;
  };
  for (const auto& h : set.households) {
    const auto tile = persons[h.members.front()].tile;
    std::vector<AgeGroup> parent_groups;
    std::vector<AgeGroup> child_groups;
    for (auto m : h.members) {
      mark(m);
      if (persons[m].tile != tile) ++v.mixed_tile;
      if (is_child(persons[m].role)) {
        child_groups.push_back(persons[m].group);
      } else if (h.type == HouseholdType::TwoParents || h.type == HouseholdType::SingleParent ||
                 h.type == HouseholdType::Couples) {
        parent_groups.push_back(persons[m].group);
      }
    }
    if (!child_groups.empty() && !parent_groups.empty()) {
      const auto youngest_parent = *std::min_element(parent_groups.begin(), parent_groups.end());
      for (auto g : child_groups) {
        if (g >= youngest_parent) ++v.child_not_younger;
      }
    }
    if ((h.type == HouseholdType::TwoParents || h.type == HouseholdType::Couples) && parent_groups.size() == 2) {
      const int diff = static_cast<int>(parent_groups[0]) - static_cast<int>(parent_groups[1]);
      if (std::abs(diff) > 1) ++v.partners_too_far;
    }
  }
  for (auto u : set.unassigned) mark(u);
  return v;
}

std::array<double, kHouseholdTypeCount> expected_type_distribution(std::span<const double> age_probabilities,
                                                                   const RoleTable& roles, const SizeTable& sizes) {
  std::array<double, kRoleCount> role_mass{};
  for (std::size_t g = 0; g < age_probabilities.size(); ++g) {
    for (std::size_t r = 0; r < kRoleCount; ++r) {
      role_mass[r] += age_probabilities[g] * roles.probability(static_cast<AgeGroup>(g), static_cast<Role>(r));
    }
  }
  auto mass = [&](Role r) { return role_mass[static_cast<std::size_t>(r)]; };
  std::array<double, kHouseholdTypeCount> out{};
  out[static_cast<std::size_t>(HouseholdType::Singles)] = mass(Role::Single);
  out[static_cast<std::size_t>(HouseholdType::SingleParent)] = mass(Role::SingleParentParent);
  out[static_cast<std::size_t>(HouseholdType::Couples)] = mass(Role::CouplesPeer) / 2.0;
  out[static_cast<std::size_t>(HouseholdType::TwoParents)] = mass(Role::TwoParentsParent) / 2.0;
  const double various_size = sizes.mean_size(HouseholdType::Various);
  out[static_cast<std::size_t>(HouseholdType::Various)] =
      various_size > 0.0 ? mass(Role::Various) / various_size : 0.0;
  double total = 0.0;
  for (double x : out) total += x;
  if (total > 0.0) {
    for (double& x : out) x /= total;
  }
  return out;
}

std::array<double, kHouseholdTypeCount> realized_type_distribution(const HouseholdSet& set) {
  std::array<double, kHouseholdTypeCount> out{};
  for (const auto& h : set.households) out[static_cast<std::size_t>(h.type)] += 1.0;
  if (!set.households.empty()) {
    for (double& x : out) x /= static_cast<double>(set.households.size());
  }
  return out;
}

}  // namespace urbangraph
