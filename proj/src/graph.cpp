#include "urbangraph/graph.hpp"

#include <algorithm>

#include <fmt/format.h>

#include "urbangraph/error.hpp"

namespace urbangraph {

char layer_code(Layer layer) noexcept { return layer == Layer::Household ? 'H' : 'F'; }

void EdgeSet::canonicalize() {
  for (auto& e : edges) {
    if (e.u == e.v) fail(ErrorKind::Data, fmt::format("self-loop on node {}", e.u));
    if (e.u > e.v) std::swap(e.u, e.v);
  }
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
}

double SocialGraph::household_degree() const noexcept {
  return persons.empty() ? 0.0 : 2.0 * static_cast<double>(household.size()) / persons.size();
}

double SocialGraph::friendship_degree() const noexcept {
  return persons.empty() ? 0.0 : 2.0 * static_cast<double>(friendship.size()) / persons.size();
}

SocialGraph assemble_graph(std::vector<Person> persons, EdgeSet household, EdgeSet friendship) {
  for (std::size_t i = 0; i < persons.size(); ++i) {
    if (persons[i].id != i) {
      fail(ErrorKind::Data, fmt::format("person at position {} carries id {}; ids must be 0..N-1 without "
                                        "collisions",
                                        i, persons[i].id));
    }
  }
  household.layer = Layer::Household;
  friendship.layer = Layer::Friendship;
  household.canonicalize();
  friendship.canonicalize();
  for (const auto* set : {&household, &friendship}) {
    for (const auto& e : set->edges) {
      if (e.v >= persons.size()) {
        fail(ErrorKind::Data, fmt::format("edge ({}, {}) references a node outside [0, {})", e.u, e.v,
                                          persons.size()));
      }
    }
  }
  std::vector<Edge> common;
  std::set_intersection(household.edges.begin(), household.edges.end(), friendship.edges.begin(),
                        friendship.edges.end(), std::back_inserter(common));
  SocialGraph g;
  g.persons = std::move(persons);
  g.household = std::move(household);
  g.friendship = std::move(friendship);
  g.overlapping_pairs = common.size();
  return g;
}

Csr Csr::from_edges(std::size_t nodes, std::span<const Edge> edges) {
  const std::span<const Edge> lists[] = {edges};
  return from_edges(nodes, lists);
}

Csr Csr::from_edges(std::size_t nodes, std::span<const std::span<const Edge>> edge_lists) {
  Csr g;
  g.offsets_.assign(nodes + 1, 0);
  for (const auto& list : edge_lists) {
    for (const auto& e : list) {
      if (e.u >= nodes || e.v >= nodes) {
        fail(ErrorKind::Data, fmt::format("edge ({}, {}) outside [0, {})", e.u, e.v, nodes));
      }
      if (e.u == e.v) continue;
      ++g.offsets_[e.u + 1];
      ++g.offsets_[e.v + 1];
    }
  }
  for (std::size_t v = 0; v < nodes; ++v) g.offsets_[v + 1] += g.offsets_[v];
  g.targets_.resize(g.offsets_[nodes]);
  std::vector<std::uint64_t> fill(g.offsets_.begin(), g.offsets_.end() - 1);
  for (const auto& list : edge_lists) {
    for (const auto& e : list) {
      if (e.u == e.v) continue;
      g.targets_[fill[e.u]++] = e.v;
      g.targets_[fill[e.v]++] = e.u;
    }
  }
  // Sort and deduplicate each adjacency row, then compact.
  std::uint64_t write = 0;
  std::uint64_t row_start = 0;
  for (std::size_t v = 0; v < nodes; ++v) {
    const auto begin = g.targets_.begin() + static_cast<std::ptrdiff_t>(row_start);
    const auto end = g.targets_.begin() + static_cast<std::ptrdiff_t>(g.offsets_[v + 1]);
    std::sort(begin, end);
    const auto last = std::unique(begin, end);
    row_start = g.offsets_[v + 1];
    g.offsets_[v] = write;
    for (auto it = begin; it != last; ++it) g.targets_[write++] = *it;
  }
  g.offsets_[nodes] = write;
  g.targets_.resize(write);
  g.targets_.shrink_to_fit();
  return g;
}

Csr simple_graph(const SocialGraph& graph, LayerSelection layers) {
  std::vector<std::span<const Edge>> lists;
  if (layers.household) lists.emplace_back(graph.household.edges);
  if (layers.friendship) lists.emplace_back(graph.friendship.edges);
  return Csr::from_edges(graph.node_count(), lists);
}

}  // namespace urbangraph
