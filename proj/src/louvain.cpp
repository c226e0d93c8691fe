#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "urbangraph/analysis.hpp"
#include "urbangraph/rng.hpp"

namespace urbangraph {
namespace {

constexpr double kGainEpsilon = 1e-12;

struct WeightedGraph {
  std::vector<std::uint64_t> offsets;
  std::vector<std::uint32_t> targets;
  std::vector<double> weights;
  std::vector<double> loops;    // internal weight, each internal edge once
  std::vector<double> strength; // weighted degree, loops counted twice
  double twice_total = 0.0;

  std::size_t size() const noexcept { return loops.size(); }
};

WeightedGraph from_csr(const Csr& graph) {
  WeightedGraph g;
  const auto n = graph.node_count();
  g.offsets.resize(n + 1, 0);
  g.loops.assign(n, 0.0);
  g.strength.resize(n);
  for (std::size_t v = 0; v < n; ++v) {
    for (auto w : graph.neighbors(v)) {
      g.targets.push_back(w);
      g.weights.push_back(1.0);
    }
    g.offsets[v + 1] = g.targets.size();
    g.strength[v] = graph.degree(v);
    g.twice_total += g.strength[v];
  }
  return g;
}

// One round of local moves. Returns community labels renumbered 0..C-1 in
// order of first appearance, and whether any node moved.
std::pair<std::vector<std::uint32_t>, bool> local_moves(const WeightedGraph& g, Philox4x32& eng) {
  const auto n = g.size();
  std::vector<std::uint32_t> comm(n);
  std::iota(comm.begin(), comm.end(), 0);
  std::vector<double> tot(g.strength);
  std::vector<std::uint32_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[uniform_below(eng, i)]);

  std::vector<double> link(n, -1.0);
  std::vector<std::uint32_t> touched;
  bool moved_any = false;
  const double m2 = g.twice_total;
  for (;;) {
    std::size_t moves = 0;
    for (auto v : order) {
      const auto own = comm[v];
      touched.clear();
      for (auto e = g.offsets[v]; e < g.offsets[v + 1]; ++e) {
        const auto c = comm[g.targets[e]];
        if (link[c] < 0.0) {
          link[c] = 0.0;
          touched.push_back(c);
        }
        link[c] += g.weights[e];
      }
      const double kv = g.strength[v];
      tot[own] -= kv;
      auto best = own;
      double best_gain = std::max(0.0, link[own]) - tot[own] * kv / m2;
      for (auto c : touched) {
        if (c == own) continue;
        const double gain = link[c] - tot[c] * kv / m2;
        if (gain > best_gain + kGainEpsilon ||
            (std::abs(gain - best_gain) <= kGainEpsilon && best != own && c < best)) {
          best = c;
          best_gain = gain;
        }
      }
      tot[best] += kv;
      if (best != own) {
        comm[v] = best;
        ++moves;
      }
      for (auto c : touched) link[c] = -1.0;
    }
    if (moves == 0) break;
    moved_any = true;
  }

  std::vector<std::uint32_t> relabel(n, std::numeric_limits<std::uint32_t>::max());
  std::uint32_t next = 0;
  for (auto& c : comm) {
    if (relabel[c] == std::numeric_limits<std::uint32_t>::max()) relabel[c] = next++;
    c = relabel[c];
  }
  return {std::move(comm), moved_any};
}

WeightedGraph aggregate(const WeightedGraph& g, const std::vector<std::uint32_t>& comm, std::size_t count) {
  WeightedGraph out;
  out.loops.assign(count, 0.0);
  out.strength.assign(count, 0.0);
  out.twice_total = g.twice_total;
  std::vector<std::vector<std::pair<std::uint32_t, double>>> rows(count);
  for (std::size_t v = 0; v < g.size(); ++v) {
    const auto cv = comm[v];
    out.loops[cv] += g.loops[v];
    out.strength[cv] += g.strength[v];
    for (auto e = g.offsets[v]; e < g.offsets[v + 1]; ++e) {
      const auto cw = comm[g.targets[e]];
      if (cw == cv) {
        out.loops[cv] += 0.5 * g.weights[e];
      } else {
        rows[cv].emplace_back(cw, g.weights[e]);
      }
    }
  }
  out.offsets.assign(count + 1, 0);
  for (std::size_t c = 0; c < count; ++c) {
    auto& row = rows[c];
    std::sort(row.begin(), row.end());
    for (std::size_t i = 0; i < row.size();) {
      auto j = i;
      double w = 0.0;
      while (j < row.size() && row[j].first == row[i].first) w += row[j++].second;
      out.targets.push_back(row[i].first);
      out.weights.push_back(w);
      i = j;
    }
    out.offsets[c + 1] = out.targets.size();
    std::vector<std::pair<std::uint32_t, double>>().swap(row);
  }
  return out;
}

}  // namespace

double modularity(const Csr& graph, std::span<const std::uint32_t> community) {
  const double m2 = 2.0 * static_cast<double>(graph.edge_count());
  if (m2 == 0.0) return 0.0;
  std::uint32_t count = 0;
  for (auto c : community) count = std::max(count, c + 1);
  std::vector<double> inside(count, 0.0);
  std::vector<double> tot(count, 0.0);
  for (std::size_t v = 0; v < graph.node_count(); ++v) {
    const auto c = community[v];
    tot[c] += graph.degree(v);
    for (auto w : graph.neighbors(v)) {
      if (community[w] == c) inside[c] += 1.0;
    }
  }
  double q = 0.0;
  for (std::uint32_t c = 0; c < count; ++c) q += inside[c] / m2 - (tot[c] / m2) * (tot[c] / m2);
  return q;
}

Partition louvain(const Csr& graph, std::uint64_t seed) {
  const auto n = graph.node_count();
  Partition out;
  out.community.resize(n);
  std::iota(out.community.begin(), out.community.end(), 0);
  out.count = n;
  if (n == 0 || graph.edge_count() == 0) {
    out.modularity = modularity(graph, out.community);
    return out;
  }
  Philox4x32 eng(seed, stream_id(StreamDomain::Louvain, 0));
  auto g = from_csr(graph);
  for (;;) {
    auto [comm, moved] = local_moves(g, eng);
    if (!moved) break;
    const std::size_t count = *std::max_element(comm.begin(), comm.end()) + 1;
    for (auto& c : out.community) c = comm[c];
    out.count = count;
    if (count == g.size()) break;
    g = aggregate(g, comm, count);
  }
  out.modularity = modularity(graph, out.community);
  return out;
}

std::vector<ClusterStats> cluster_stats(const Csr& graph, const Partition& partition, std::span<const Person> persons,
                                        const Grid& grid, std::size_t top) {
  std::vector<std::uint64_t> size(partition.count, 0);
  for (auto c : partition.community) ++size[c];
  std::vector<std::uint32_t> order(partition.count);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return size[a] > size[b]; });
  order.resize(std::min(top, order.size()));

  std::vector<std::int64_t> slot(partition.count, -1);
  std::vector<ClusterStats> out(order.size());
  for (std::size_t i = 0; i < order.size(); ++i) {
    slot[order[i]] = static_cast<std::int64_t>(i);
    out[i].community = order[i];
    out[i].size = size[order[i]];
  }
  std::vector<double> sum(order.size(), 0.0);
  for (std::size_t v = 0; v < graph.node_count(); ++v) {
    const auto c = partition.community[v];
    if (slot[c] < 0) continue;
    auto& st = out[slot[c]];
    for (auto w : graph.neighbors(v)) {
      if (w <= v || partition.community[w] != c) continue;
      const double d = grid.distance_km(persons[v].tile, persons[w].tile);
      ++st.intra_edges;
      sum[slot[c]] += d;
      st.max_distance_km = std::max(st.max_distance_km, d);
    }
  }
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (out[i].intra_edges > 0) out[i].mean_distance_km = sum[i] / static_cast<double>(out[i].intra_edges);
  }
  return out;
}

}  // namespace urbangraph
