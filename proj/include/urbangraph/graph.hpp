#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "urbangraph/population.hpp"

namespace urbangraph {

enum class Layer : std::uint8_t { Household, Friendship };

char layer_code(Layer layer) noexcept;  // 'H' or 'F'

struct Edge {
  PersonId u = 0;
  PersonId v = 0;

  friend auto operator<=>(const Edge&, const Edge&) = default;
};

/// Undirected edges of one layer, stored as sorted unique pairs with u < v.
struct EdgeSet {
  Layer layer = Layer::Friendship;
  std::vector<Edge> edges;

  std::size_t size() const noexcept { return edges.size(); }
  /// Orients, sorts and deduplicates; throws on self-loops.
  void canonicalize();
};

struct SocialGraph {
  std::vector<Person> persons;
  EdgeSet household{Layer::Household, {}};
  EdgeSet friendship{Layer::Friendship, {}};
  /// Pairs present in both layers: counted in each layer tally, once in the simple graph.
  std::size_t overlapping_pairs = 0;

  std::size_t node_count() const noexcept { return persons.size(); }
  double household_degree() const noexcept;   // nu = 2|E_H| / N
  double friendship_degree() const noexcept;  // 2|E_F| / N
  double mean_degree() const noexcept { return household_degree() + friendship_degree(); }
};

/// Checks ids (persons[i].id == i, endpoints in range) and counts overlaps.
SocialGraph assemble_graph(std::vector<Person> persons, EdgeSet household, EdgeSet friendship);

/// Compressed adjacency of a simple undirected graph.
class Csr {
 public:
  Csr() = default;
  /// Duplicate pairs across the inputs collapse to one edge.
  static Csr from_edges(std::size_t nodes, std::span<const std::span<const Edge>> edge_lists);
  static Csr from_edges(std::size_t nodes, std::span<const Edge> edges);

  std::size_t node_count() const noexcept { return offsets_.empty() ? 0 : offsets_.size() - 1; }
  std::size_t edge_count() const noexcept { return targets_.size() / 2; }
  std::uint32_t degree(std::size_t v) const noexcept {
    return static_cast<std::uint32_t>(offsets_[v + 1] - offsets_[v]);
  }
  /// Sorted neighbour ids.
  std::span<const PersonId> neighbors(std::size_t v) const noexcept {
    return {targets_.data() + offsets_[v], targets_.data() + offsets_[v + 1]};
  }

 private:
  std::vector<std::uint64_t> offsets_;
  std::vector<PersonId> targets_;
};

struct LayerSelection {
  bool household = true;
  bool friendship = true;
};

Csr simple_graph(const SocialGraph& graph, LayerSelection layers = {});

}  // namespace urbangraph
