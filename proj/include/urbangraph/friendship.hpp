#pragma once

// Friendship layer: Pr[u,v] = (mu N / 2) * M(gu,gv)/M * D(u,v) fu fv / A(gu,gv),
// with every normaliser computed exactly by aggregating persons into
// (age group, tile) cells.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "urbangraph/geo_grid.hpp"
#include "urbangraph/graph.hpp"
#include "urbangraph/mixing.hpp"
#include "urbangraph/population.hpp"

namespace urbangraph {

enum class KernelKind : std::uint8_t { ConstantOne, InversePower };

struct DistanceKernel {
  KernelKind kind = KernelKind::InversePower;
  double beta = 2.0;
  /// Multiplies every value; the edge probabilities do not depend on it.
  double scale = 1.0;

  void validate() const;
  double operator()(double distance_km) const;
};

/// A (cell, cell) pair of the sampler. Cells are indexed group * tiles + tile.
struct Block {
  std::uint32_t a = 0;
  std::uint32_t b = 0;  // a <= b
  std::uint64_t pairs = 0;
  /// Pr[u,v] = c * fu * fv inside the block.
  double c = 0.0;
  /// Upper bound of Pr over the block's pairs.
  double bound = 0.0;
};

class FriendshipContext {
 public:
  static FriendshipContext build(std::span<const Person> persons, const Grid& grid, const MixingMatrix& mixing,
                                 const DistanceKernel& kernel, double mu);

  double mu() const noexcept { return mu_; }
  std::uint64_t node_count() const noexcept { return group_.size(); }
  std::size_t group_count() const noexcept { return groups_; }
  std::size_t tile_count() const noexcept { return tiles_.size(); }
  /// Populated grid tiles, in increasing order; local tile k is tiles()[k].
  std::span<const TileIndex> tiles() const noexcept { return tiles_; }
  std::span<const std::uint64_t> group_sizes() const noexcept { return sizes_; }

  const Matrix& pairs() const noexcept { return m_; }           // m(i, j)
  const Matrix& mixing() const noexcept { return s_; }          // s(i, j)
  const Matrix& mixing_mass() const noexcept { return mass_; }  // M(i, j)
  double total_mass() const noexcept { return total_mass_; }    // M
  const Matrix& attraction() const noexcept { return a_; }      // A(i, j)

  /// D between local tiles.
  double kernel(std::size_t s, std::size_t t) const { return d_[s * tiles_.size() + t]; }
  /// Sum of fitness of group i in local tile t, and the sum of squares.
  double fitness_sum(std::size_t i, std::size_t t) const { return cell_f_[i * tiles_.size() + t]; }
  double fitness_square_sum(std::size_t i, std::size_t t) const { return cell_f2_[i * tiles_.size() + t]; }

  /// Exact mean of D over all vertex pairs and the mean fitness.
  double mean_kernel() const noexcept { return mean_d_; }
  double mean_fitness() const noexcept { return mean_f_; }
  /// <D><f>^2 m(i, j), the closed-form stand-in for A(i, j).
  Matrix approximate_attraction() const;

  /// (mu N / 2) M(i,j) / M.
  double expected_group_edges(std::size_t i, std::size_t j) const;

  /// Human-readable notes such as groups that can never receive an edge.
  const std::vector<std::string>& warnings() const noexcept { return warnings_; }

  std::vector<Block> blocks() const;
  std::span<const PersonId> cell_members(std::uint32_t cell) const {
    return {members_.data() + cell_offsets_[cell], members_.data() + cell_offsets_[cell + 1]};
  }

  /// Throws a feasibility error when the value exceeds 1.
  double edge_probability(PersonId u, PersonId v) const;
  double expected_degree(PersonId u) const;
  std::vector<double> expected_degrees() const;

  /// Largest mu keeping every pair probability <= 1 (infinite if no pair can connect).
  double max_feasible_mu() const;

 private:
  friend EdgeSet sample_friendship_edges(const FriendshipContext& ctx, std::uint64_t seed);

  double pair_coefficient(std::size_t i, std::size_t j, std::size_t s, std::size_t t) const;
  std::size_t local_tile(PersonId u) const { return local_tile_[u]; }

  double mu_ = 0.0;
  std::size_t groups_ = 0;
  std::vector<TileIndex> tiles_;
  std::vector<std::uint64_t> sizes_;

  std::vector<AgeGroup> group_;
  std::vector<std::uint32_t> local_tile_;
  std::vector<double> fitness_;

  std::vector<double> d_;
  std::vector<double> cell_f_, cell_f2_, cell_fmax_, cell_fsecond_;
  std::vector<std::uint64_t> cell_offsets_;
  std::vector<PersonId> members_;
  /// sum_t D(s,t) sum_j M(i,j)/A(i,j) F_j(t), per cell (i, s).
  std::vector<double> reach_;

  Matrix m_, s_, mass_, a_;
  double total_mass_ = 0.0;
  double mean_d_ = 0.0;
  double mean_f_ = 0.0;
  std::vector<std::string> warnings_;
};

/// Returns max_feasible_mu(); throws a feasibility error when mu exceeds it.
double validate_mu(const FriendshipContext& ctx);

/// Independent Bernoulli draw for every pair, by geometric skipping under a
/// per-block bound followed by exact thinning. Deterministic in (seed, block).
EdgeSet sample_friendship_edges(const FriendshipContext& ctx, std::uint64_t seed);

}  // namespace urbangraph
