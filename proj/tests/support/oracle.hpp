#pragma once

// Brute-force reference implementations used by the unit and acceptance tests.

#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "urbangraph/friendship.hpp"
#include "urbangraph/geo_grid.hpp"
#include "urbangraph/mixing.hpp"
#include "urbangraph/population.hpp"
#include "urbangraph/rng.hpp"

namespace oracle {

using namespace urbangraph;

inline double kernel_value(const DistanceKernel& k, double d) {
  return k.kind == KernelKind::ConstantOne ? k.scale : k.scale * std::pow(d, -k.beta);
}

// Edge probabilities straight from the definitions, O(N^2) memory-free.
class PairModel {
 public:
  PairModel(std::span<const Person> persons, const Grid& grid, const Matrix& s, const DistanceKernel& kernel,
            double mu)
      : persons_(persons.begin(), persons.end()), grid_(grid), kernel_(kernel), mu_(mu) {
    const std::size_t n = s.size();
    std::vector<double> size(n, 0.0);
    for (const auto& p : persons_) size[p.group] += 1.0;
    mass_ = Matrix(n);
    a_ = Matrix(n);
    total_ = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        const double m = i == j ? size[i] * (size[i] - 1.0) / 2.0 : size[i] * size[j];
        mass_(i, j) = m * s(i, j);
        if (j >= i) total_ += mass_(i, j);
      }
    }
    for (std::size_t u = 0; u < persons_.size(); ++u) {
      for (std::size_t v = u + 1; v < persons_.size(); ++v) {
        const double w = d(u, v) * persons_[u].fitness * persons_[v].fitness;
        const auto gi = persons_[u].group;
        const auto gj = persons_[v].group;
        a_(gi, gj) += w;
        if (gi != gj) a_(gj, gi) += w;
      }
    }
  }

  double d(std::size_t u, std::size_t v) const {
    return kernel_value(kernel_, grid_.distance_km(persons_[u].tile, persons_[v].tile));
  }

  double attraction(std::size_t i, std::size_t j) const { return a_(i, j); }

  double probability(std::size_t u, std::size_t v) const {
    const auto gi = persons_[u].group;
    const auto gj = persons_[v].group;
    if (mass_(gi, gj) == 0.0) return 0.0;
    const double n = static_cast<double>(persons_.size());
    return mu_ * n / 2.0 * mass_(gi, gj) / total_ * d(u, v) * persons_[u].fitness * persons_[v].fitness /
           a_(gi, gj);
  }

  double expected_degree(std::size_t u) const {
    double sum = 0.0;
    for (std::size_t v = 0; v < persons_.size(); ++v) {
      if (v != u) sum += probability(u, v);
    }
    return sum;
  }

  double total_probability() const {
    double sum = 0.0;
    for (std::size_t u = 0; u < persons_.size(); ++u) {
      for (std::size_t v = u + 1; v < persons_.size(); ++v) sum += probability(u, v);
    }
    return sum;
  }

 private:
  std::vector<Person> persons_;
  Grid grid_;
  DistanceKernel kernel_;
  double mu_;
  Matrix mass_, a_;
  double total_ = 0.0;
};

// Persons spread over a grid with mixed groups and fitness, ids in order.
inline std::vector<Person> scattered_persons(const Grid& grid, std::size_t count, std::size_t groups,
                                             std::uint64_t seed, bool unit_fitness = false) {
  Philox4x32 eng(seed, stream_id(StreamDomain::Test, 1));
  std::vector<Person> out(count);
  for (std::size_t u = 0; u < count; ++u) {
    auto& p = out[u];
    p.id = static_cast<PersonId>(u);
    p.tile = static_cast<TileIndex>(uniform_below(eng, grid.tile_count()));
    p.group = static_cast<AgeGroup>(u % groups);
    p.fitness = unit_fitness ? 1.0 : 1.0 + std::exp(0.8 * (uniform01(eng) - 0.5) * 3.0);
  }
  return out;
}

// Naive simple-graph BFS distances, -1 when unreachable.
inline std::vector<int> bfs(const std::vector<std::vector<std::uint32_t>>& adj, std::uint32_t source) {
  std::vector<int> dist(adj.size(), -1);
  std::vector<std::uint32_t> queue{source};
  dist[source] = 0;
  for (std::size_t h = 0; h < queue.size(); ++h) {
    const auto x = queue[h];
    for (const auto y : adj[x]) {
      if (dist[y] < 0) {
        dist[y] = dist[x] + 1;
        queue.push_back(y);
      }
    }
  }
  return dist;
}

}  // namespace oracle
