#include "urbangraph/population.hpp"

#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include <fmt/format.h>

#include "urbangraph/csv.hpp"
#include "urbangraph/error.hpp"

namespace urbangraph {

HouseholdType household_type(Role role) {
  switch (role) {
    case Role::Single: return HouseholdType::Singles;
    case Role::SingleParentParent:
    case Role::SingleParentChild: return HouseholdType::SingleParent;
    case Role::CouplesPeer: return HouseholdType::Couples;
    case Role::TwoParentsParent:
    case Role::TwoParentsChild: return HouseholdType::TwoParents;
    case Role::Various: return HouseholdType::Various;
    case Role::Unset: break;
  }
  fail(ErrorKind::InvalidParameter, "role is not set");
}

bool is_child(Role role) noexcept {
  return role == Role::SingleParentChild || role == Role::TwoParentsChild;
}

bool is_parent(Role role) noexcept {
  return role == Role::SingleParentParent || role == Role::TwoParentsParent;
}

std::string_view to_string(HouseholdType type) noexcept {
  switch (type) {
    case HouseholdType::Singles: return "singles";
    case HouseholdType::SingleParent: return "single-parent";
    case HouseholdType::Couples: return "couples";
    case HouseholdType::TwoParents: return "two-parents";
    case HouseholdType::Various: return "various";
  }
  return "?";
}

std::string_view role_name(Role role) noexcept {
  switch (role) {
    case Role::Single: return "single";
    case Role::SingleParentParent:
    case Role::TwoParentsParent: return "parent";
    case Role::SingleParentChild:
    case Role::TwoParentsChild: return "child";
    case Role::CouplesPeer: return "peer";
    case Role::Various: return "various";
    case Role::Unset: return "unset";
  }
  return "?";
}

std::optional<HouseholdType> parse_household_type(std::string_view text) noexcept {
  for (std::size_t i = 0; i < kHouseholdTypeCount; ++i) {
    const auto type = static_cast<HouseholdType>(i);
    if (to_string(type) == text) return type;
  }
  return std::nullopt;
}

std::optional<Role> parse_role(HouseholdType type, std::string_view role) noexcept {
  for (std::size_t i = 0; i < kRoleCount; ++i) {
    const auto r = static_cast<Role>(i);
    if (household_type(r) == type && role_name(r) == role) return r;
  }
  return std::nullopt;
}

AgeDistribution::AgeDistribution(std::vector<double> lower_breaks, std::vector<double> probabilities)
    : breaks_(std::move(lower_breaks)), probabilities_(std::move(probabilities)) {
  if (probabilities_.empty()) fail(ErrorKind::InvalidParameter, "age distribution needs a group");
  if (probabilities_.size() > std::numeric_limits<AgeGroup>::max()) {
    fail(ErrorKind::InvalidParameter, "too many age groups");
  }
  if (breaks_.size() != probabilities_.size()) {
    fail(ErrorKind::InvalidParameter, "age breaks and probabilities differ in length");
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < probabilities_.size(); ++i) {
    const double p = probabilities_[i];
    if (!(p >= 0.0) || !std::isfinite(p)) {
      fail(ErrorKind::InvalidParameter, fmt::format("age group {} has invalid probability {}", i, p));
    }
    if (i > 0 && !(breaks_[i] > breaks_[i - 1])) {
      fail(ErrorKind::InvalidParameter, "age breaks must be strictly increasing");
    }
    sum += p;
    cumulative_.push_back(sum);
  }
  if (std::abs(sum - 1.0) > 1e-9) {
    fail(ErrorKind::InvalidParameter, fmt::format("age probabilities sum to {}, expected 1", sum));
  }
}

AgeDistribution AgeDistribution::uniform(std::size_t groups) {
  std::vector<double> breaks(groups);
  std::iota(breaks.begin(), breaks.end(), 0.0);
  std::vector<double> probs(groups, 1.0 / static_cast<double>(groups));
  // Absorb rounding into the last group so the sum check is exact.
  if (groups > 0) {
    probs.back() = 1.0 - std::accumulate(probs.begin(), probs.end() - 1, 0.0);
  }
  return AgeDistribution(std::move(breaks), std::move(probs));
}

AgeDistribution load_age_distribution(std::istream& in, std::string_view source_name) {
  const auto table = csv::read(in, source_name);
  const auto c_idx = csv::column(table, "group_index", source_name);
  const auto c_low = csv::column(table, "age_break_low", source_name);
  const auto c_frac = csv::column(table, "fraction", source_name);
  std::vector<double> breaks(table.rows.size());
  std::vector<double> probs(table.rows.size());
  std::vector<bool> seen(table.rows.size(), false);
  for (const auto& r : table.rows) {
    const auto idx = csv::parse_int(r.fields[c_idx], r.line, source_name);
    if (idx < 0 || static_cast<std::size_t>(idx) >= table.rows.size() || seen[idx]) {
      fail(ErrorKind::Parse, fmt::format("{}:{}: group_index {} is out of range or repeated",
                                         source_name, r.line, idx));
    }
    seen[idx] = true;
    breaks[idx] = csv::parse_double(r.fields[c_low], r.line, source_name);
    probs[idx] = csv::parse_double(r.fields[c_frac], r.line, source_name);
  }
  return AgeDistribution(std::move(breaks), std::move(probs));
}

void validate(const FitnessSpec& spec) {
  std::visit(
      [](const auto& s) {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, ConstantFitness>) {
          if (!(s.value >= 1.0)) fail(ErrorKind::InvalidParameter, "constant fitness must be >= 1");
        } else if constexpr (std::is_same_v<T, ShiftedLognormalFitness>) {
          if (!(s.shift >= 1.0)) fail(ErrorKind::InvalidParameter, "lognormal shift must be >= 1");
          if (!(s.sigma2 >= 0.0) || !std::isfinite(s.lambda)) {
            fail(ErrorKind::InvalidParameter, "lognormal needs finite lambda and sigma2 >= 0");
          }
        } else if constexpr (std::is_same_v<T, ParetoFitness>) {
          if (!(s.scale > 0.0) || !(s.alpha > 0.0)) {
            fail(ErrorKind::InvalidParameter, "pareto needs scale > 0 and alpha > 0");
          }
        } else {
          if (!(s.low > 0.0) || !(s.high >= s.low)) {
            fail(ErrorKind::InvalidParameter, "uniform fitness needs 0 < low <= high");
          }
        }
      },
      spec);
}

double fitness_mean(const FitnessSpec& spec) {
  return std::visit(
      [](const auto& s) -> double {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, ConstantFitness>) {
          return s.value;
        } else if constexpr (std::is_same_v<T, ShiftedLognormalFitness>) {
          return s.shift + std::exp(s.lambda + 0.5 * s.sigma2);
        } else if constexpr (std::is_same_v<T, ParetoFitness>) {
          if (s.alpha <= 1.0) return std::numeric_limits<double>::infinity();
          return s.alpha * s.scale / (s.alpha - 1.0);
        } else {
          return 0.5 * (s.low + s.high);
        }
      },
      spec);
}

double sample_fitness(const FitnessSpec& spec, Philox4x32& eng) {
  return std::visit(
      [&eng](const auto& s) -> double {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, ConstantFitness>) {
          return s.value;
        } else if constexpr (std::is_same_v<T, ShiftedLognormalFitness>) {
          std::normal_distribution<double> normal(s.lambda, std::sqrt(s.sigma2));
          return s.shift + std::exp(normal(eng));
        } else if constexpr (std::is_same_v<T, ParetoFitness>) {
          return s.scale * std::pow(uniform_open_closed(eng), -1.0 / s.alpha);
        } else {
          return s.low + (s.high - s.low) * uniform01(eng);
        }
      },
      spec);
}

std::vector<Person> synthesize_population(const TileMask& mask, const AgeDistribution& ages,
                                          const FitnessSpec& fitness, std::uint64_t seed) {
  validate(fitness);
  const auto total = mask.total_population();
  if (total == 0) fail(ErrorKind::EmptyPopulation, "tile mask holds no residents");
  if (total > std::numeric_limits<PersonId>::max()) {
    fail(ErrorKind::InvalidParameter, "population exceeds the supported id range");
  }

  std::vector<std::uint64_t> offset(mask.size() + 1, 0);
  for (TileIndex t = 0; t < mask.size(); ++t) offset[t + 1] = offset[t] + mask.population(t);

  std::vector<Person> persons(total);
  const auto tiles = static_cast<std::int64_t>(mask.size());
#pragma omp parallel for schedule(dynamic, 4)
  for (std::int64_t ti = 0; ti < tiles; ++ti) {
    const auto t = static_cast<TileIndex>(ti);
    Philox4x32 eng(seed, stream_id(StreamDomain::Population, t));
    for (auto i = offset[t]; i < offset[t + 1]; ++i) {
      auto& p = persons[i];
      p.id = static_cast<PersonId>(i);
      p.tile = t;
      p.group = ages.sample(eng);
      p.fitness = sample_fitness(fitness, eng);
    }
  }
  return persons;
}

TileMask uniform_density_mask(const TileMask& mask, std::uint64_t seed) {
  const auto tiles = mask.populated_tiles();
  if (tiles.empty()) fail(ErrorKind::EmptyPopulation, "tile mask holds no residents");
  TileMask out = mask;
  std::vector<std::uint64_t> counts(tiles.size(), 0);
  Philox4x32 eng(seed, stream_id(StreamDomain::UniformDensity, 0));
  const auto total = mask.total_population();
  for (std::uint64_t i = 0; i < total; ++i) ++counts[uniform_below(eng, tiles.size())];
  for (std::size_t k = 0; k < tiles.size(); ++k) out.set_population(tiles[k], counts[k]);
  return out;
}

std::vector<double> perturb_age_distribution(std::span<const double> probabilities, double omega,
                                             std::uint64_t seed) {
  if (!(omega >= 0.0) || !std::isfinite(omega)) {
    fail(ErrorKind::InvalidParameter, fmt::format("perturbation width must be >= 0, got {}", omega));
  }
  std::vector<double> out(probabilities.begin(), probabilities.end());
  // A single group renormalises to itself whatever the draw.
  if (omega == 0.0 || out.size() == 1) return out;

  Philox4x32 eng(seed, stream_id(StreamDomain::Perturbation, 0));
  std::normal_distribution<double> normal(0.0, omega);
  double sum = 0.0;
  for (auto& p : out) {
    const double centre = uniform01(eng) < 0.5 ? omega : -omega;
    const double eps = centre + normal(eng);
    p = std::max(0.0, p * (1.0 + eps));
    sum += p;
  }
  if (!(sum > 0.0)) {
    fail(ErrorKind::DegeneratePerturbation, "every perturbed age probability was clamped to zero");
  }
  for (auto& p : out) p /= sum;
  return out;
}

std::vector<std::uint64_t> group_sizes(std::span<const Person> persons, std::size_t groups) {
  std::vector<std::uint64_t> sizes(groups, 0);
  for (const auto& p : persons) {
    if (p.group >= groups) {
      fail(ErrorKind::InvalidIndex, fmt::format("person {} has age group {} >= {}", p.id, p.group, groups));
    }
    ++sizes[p.group];
  }
  return sizes;
}

}  // namespace urbangraph
