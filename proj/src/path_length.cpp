#include <bit>

#include "urbangraph/analysis.hpp"
#include "urbangraph/error.hpp"
#include "urbangraph/rng.hpp"

namespace urbangraph {
namespace {

// Breadth-first search from up to 64 sources at once, one bit per source.
// Returns the sum of distances from every source to every node it reaches.
std::uint64_t multi_source_bfs(const Csr& graph, std::span<const PersonId> nodes, std::span<const PersonId> sources,
                               std::vector<std::uint64_t>& seen, std::vector<std::uint64_t>& frontier,
                               std::vector<std::uint64_t>& next) {
  for (auto v : nodes) seen[v] = frontier[v] = next[v] = 0;
  for (std::size_t i = 0; i < sources.size(); ++i) {
    seen[sources[i]] |= std::uint64_t{1} << i;
    frontier[sources[i]] |= std::uint64_t{1} << i;
  }
  std::uint64_t sum = 0;
  for (std::uint64_t depth = 1;; ++depth) {
    for (auto v : nodes) {
      const auto bits = frontier[v];
      if (bits == 0) continue;
      for (auto w : graph.neighbors(v)) next[w] |= bits;
    }
    bool active = false;
    for (auto v : nodes) {
      const auto fresh = next[v] & ~seen[v];
      next[v] = 0;
      frontier[v] = fresh;
      if (fresh != 0) {
        seen[v] |= fresh;
        sum += depth * static_cast<std::uint64_t>(std::popcount(fresh));
        active = true;
      }
    }
    if (!active) break;
  }
  return sum;
}

}  // namespace

PathLength avg_path_length(const Csr& graph, std::size_t sample_size, std::uint64_t seed, std::size_t exact_limit) {
  if (graph.node_count() == 0) fail(ErrorKind::InvalidParameter, "path length of an empty graph");
  const auto comps = components(graph);
  std::vector<PersonId> giant;
  giant.reserve(comps.sizes.front());
  for (std::size_t v = 0; v < graph.node_count(); ++v) {
    if (comps.label[v] == 0) giant.push_back(static_cast<PersonId>(v));
  }
  PathLength out;
  out.giant_nodes = giant.size();
  if (giant.size() < 2) {
    out.exact = true;
    return out;
  }

  std::vector<PersonId> sources = giant;
  if (giant.size() <= exact_limit || sample_size >= giant.size()) {
    out.exact = true;
  } else {
    if (sample_size == 0) fail(ErrorKind::InvalidParameter, "path length needs at least one source");
    Philox4x32 eng(seed, stream_id(StreamDomain::PathSampling, 0));
    for (std::size_t i = 0; i < sample_size; ++i) {
      const auto j = i + uniform_below(eng, sources.size() - i);
      std::swap(sources[i], sources[j]);
    }
    sources.resize(sample_size);
  }
  out.sources = sources.size();

  const auto batches = static_cast<std::int64_t>((sources.size() + 63) / 64);
  std::uint64_t total = 0;
#pragma omp parallel reduction(+ : total)
  {
    std::vector<std::uint64_t> seen(graph.node_count());
    std::vector<std::uint64_t> frontier(graph.node_count());
    std::vector<std::uint64_t> next(graph.node_count());
#pragma omp for schedule(dynamic, 1)
    for (std::int64_t b = 0; b < batches; ++b) {
      const auto begin = static_cast<std::size_t>(b) * 64;
      const auto count = std::min<std::size_t>(64, sources.size() - begin);
      total += multi_source_bfs(graph, giant, std::span<const PersonId>(sources).subspan(begin, count), seen,
                                frontier, next);
    }
  }
  const double pairs = static_cast<double>(sources.size()) * static_cast<double>(giant.size() - 1);
  out.mean = static_cast<double>(total) / pairs;
  return out;
}

}  // namespace urbangraph
