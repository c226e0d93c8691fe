#include "urbangraph/analysis.hpp"

#include <algorithm>
#include <array>
#include <functional>
#include <cmath>
#include <limits>
#include <numeric>

#include <fmt/format.h>

#include "urbangraph/error.hpp"

namespace urbangraph {
namespace {

class DisjointSets {
 public:
  explicit DisjointSets(std::size_t n) : parent_(n), size_(n, 1) { std::iota(parent_.begin(), parent_.end(), 0); }

  std::uint32_t find(std::uint32_t x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }

  void unite(std::uint32_t a, std::uint32_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    if (size_[a] < size_[b]) std::swap(a, b);
    parent_[b] = a;
    size_[a] += size_[b];
  }

 private:
  std::vector<std::uint32_t> parent_;
  std::vector<std::uint64_t> size_;
};

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

double poisson_log_pmf(double k, double lambda) {
  if (lambda == 0.0) return k == 0.0 ? 0.0 : -std::numeric_limits<double>::infinity();
  return k * std::log(lambda) - lambda - std::lgamma(k + 1.0);
}

}  // namespace

Components components(const Csr& graph) {
  const auto n = graph.node_count();
  Components out;
  if (n == 0) return out;
  DisjointSets sets(n);
  for (std::size_t v = 0; v < n; ++v) {
    for (auto w : graph.neighbors(v)) {
      if (w > v) sets.unite(static_cast<std::uint32_t>(v), w);
    }
  }
  // Roots in order of first appearance, so equal sizes keep the lowest node first.
  std::vector<std::uint32_t> root_rank(n, std::numeric_limits<std::uint32_t>::max());
  std::vector<std::uint32_t> roots;
  std::vector<std::uint64_t> sizes;
  for (std::size_t v = 0; v < n; ++v) {
    const auto r = sets.find(static_cast<std::uint32_t>(v));
    if (root_rank[r] == std::numeric_limits<std::uint32_t>::max()) {
      root_rank[r] = static_cast<std::uint32_t>(roots.size());
      roots.push_back(r);
      sizes.push_back(0);
    }
    ++sizes[root_rank[r]];
  }
  std::vector<std::uint32_t> order(roots.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return sizes[a] > sizes[b]; });
  std::vector<std::uint32_t> relabel(roots.size());
  for (std::size_t i = 0; i < order.size(); ++i) relabel[order[i]] = static_cast<std::uint32_t>(i);

  out.count = roots.size();
  out.sizes.resize(roots.size());
  for (std::size_t i = 0; i < order.size(); ++i) out.sizes[i] = sizes[order[i]];
  out.label.resize(n);
  for (std::size_t v = 0; v < n; ++v) out.label[v] = relabel[root_rank[sets.find(static_cast<std::uint32_t>(v))]];
  out.giant_fraction = static_cast<double>(out.sizes.front()) / static_cast<double>(n);
  return out;
}

Clustering clustering(const Csr& graph) {
  const auto n = graph.node_count();
  Clustering out;
  if (n == 0) return out;
  std::vector<std::uint64_t> tri(n, 0);
  std::uint64_t total = 0;
  const auto nodes = static_cast<std::int64_t>(n);
#pragma omp parallel for schedule(dynamic, 256) reduction(+ : total)
  for (std::int64_t vi = 0; vi < nodes; ++vi) {
    const auto v = static_cast<PersonId>(vi);
    const auto nv = graph.neighbors(v);
    auto from_v = std::upper_bound(nv.begin(), nv.end(), v);
    for (auto it = from_v; it != nv.end(); ++it) {
      const auto u = *it;
      const auto nu = graph.neighbors(u);
      // Common neighbours w > u.
      auto a = std::upper_bound(nv.begin(), nv.end(), u);
      auto b = std::upper_bound(nu.begin(), nu.end(), u);
      while (a != nv.end() && b != nu.end()) {
        if (*a < *b) {
          ++a;
        } else if (*b < *a) {
          ++b;
        } else {
          ++total;
#pragma omp atomic
          ++tri[v];
#pragma omp atomic
          ++tri[u];
#pragma omp atomic
          ++tri[*a];
          ++a;
          ++b;
        }
      }
    }
  }
  out.triangles = total;
  double local_sum = 0.0;
  for (std::size_t v = 0; v < n; ++v) {
    const std::uint64_t d = graph.degree(v);
    const std::uint64_t pairs = d * (d > 0 ? d - 1 : 0) / 2;
    out.triples += pairs;
    if (pairs > 0) local_sum += static_cast<double>(tri[v]) / static_cast<double>(pairs);
  }
  out.global = out.triples > 0 ? 3.0 * static_cast<double>(total) / static_cast<double>(out.triples) : 0.0;
  out.local_mean = local_sum / static_cast<double>(n);
  return out;
}

Assortativity degree_assortativity(const Csr& graph) {
  long double sxy = 0.0L;
  long double sx = 0.0L;
  long double sxx = 0.0L;
  std::uint64_t ends = 0;
  for (std::size_t v = 0; v < graph.node_count(); ++v) {
    const long double dv = graph.degree(v);
    for (auto w : graph.neighbors(v)) {
      const long double dw = graph.degree(w);
      sxy += dv * dw;
      sx += dv;
      sxx += dv * dv;
      ++ends;
    }
  }
  Assortativity out{std::numeric_limits<double>::quiet_NaN(), false};
  if (ends == 0) return out;
  const long double mean = sx / ends;
  const long double var = sxx / ends - mean * mean;
  if (!(var > 1e-12L * (sxx / ends))) return out;
  out.rho = static_cast<double>((sxy / ends - mean * mean) / var);
  out.defined = true;
  return out;
}

std::vector<double> degree_histogram(const Csr& graph) {
  std::vector<double> counts;
  for (std::size_t v = 0; v < graph.node_count(); ++v) {
    const auto d = graph.degree(v);
    if (d >= counts.size()) counts.resize(d + 1, 0.0);
    counts[d] += 1.0;
  }
  return counts;
}

double kl_poisson(std::span<const double> counts) {
  double total = 0.0;
  double first = 0.0;
  for (std::size_t k = 0; k < counts.size(); ++k) {
    total += counts[k];
    first += static_cast<double>(k) * counts[k];
  }
  if (!(total > 0.0)) fail(ErrorKind::InvalidParameter, "degree histogram is empty");
  const double lambda = first / total;
  double kl = 0.0;
  for (std::size_t k = 0; k < counts.size(); ++k) {
    if (counts[k] <= 0.0) continue;
    const double p = counts[k] / total;
    kl += p * (std::log(p) - poisson_log_pmf(static_cast<double>(k), lambda));
  }
  return std::max(0.0, kl);
}

namespace {

std::size_t tail_start(double threshold) { return static_cast<std::size_t>(std::max(1.0, std::ceil(threshold))); }

// Mass of [k - 1/2, k + 1/2) under LN(lambda, sigma), conditioned on k >= kmin.
double lognormal_tail_mass(double k, double kmin, double lambda, double sigma) {
  auto upper = [](double z) { return 0.5 * std::erfc(z / std::sqrt(2.0)); };
  const double zmin = (std::log(kmin - 0.5) - lambda) / sigma;
  const double lo = (std::log(k - 0.5) - lambda) / sigma;
  const double hi = (std::log(k + 0.5) - lambda) / sigma;
  const double mass = lo > 0.0 ? upper(lo) - upper(hi) : normal_cdf(hi) - normal_cdf(lo);
  return mass / upper(zmin);
}

double poisson_tail_log_pmf(double k, double kmin, double lambda) {
  double below = 0.0;
  for (double j = 0.0; j < kmin; j += 1.0) below += std::exp(poisson_log_pmf(j, lambda));
  return poisson_log_pmf(k, lambda) - std::log1p(-below);
}

// Nelder-Mead on (lambda, ln sigma).
std::array<double, 2> minimise(const std::function<double(double, double)>& f, std::array<double, 2> start) {
  std::array<std::array<double, 2>, 3> x{start, {start[0] + 0.2, start[1]}, {start[0], start[1] + 0.2}};
  std::array<double, 3> y{};
  for (int i = 0; i < 3; ++i) y[i] = f(x[i][0], x[i][1]);
  for (int iter = 0; iter < 2000; ++iter) {
    std::array<int, 3> o{0, 1, 2};
    std::sort(o.begin(), o.end(), [&](int a, int b) { return y[a] < y[b]; });
    const auto best = x[o[0]];
    const auto mid = x[o[1]];
    const auto worst = x[o[2]];
    if (std::abs(y[o[2]] - y[o[0]]) <= 1e-13 * (std::abs(y[o[0]]) + 1e-300) &&
        std::abs(worst[0] - best[0]) + std::abs(worst[1] - best[1]) < 1e-10) {
      break;
    }
    const std::array<double, 2> c{(best[0] + mid[0]) / 2, (best[1] + mid[1]) / 2};
    auto at = [&](double t) { return std::array<double, 2>{c[0] + t * (worst[0] - c[0]), c[1] + t * (worst[1] - c[1])}; };
    const auto r = at(-1.0);
    const double yr = f(r[0], r[1]);
    if (yr < y[o[0]]) {
      const auto e = at(-2.0);
      const double ye = f(e[0], e[1]);
      if (ye < yr) {
        x[o[2]] = e, y[o[2]] = ye;
      } else {
        x[o[2]] = r, y[o[2]] = yr;
      }
      continue;
    }
    if (yr < y[o[1]]) {
      x[o[2]] = r, y[o[2]] = yr;
      continue;
    }
    const auto k = yr < y[o[2]] ? at(-0.5) : at(0.5);
    const double yk = f(k[0], k[1]);
    if (yk < std::min(yr, y[o[2]])) {
      x[o[2]] = k, y[o[2]] = yk;
      continue;
    }
    for (int i : {o[1], o[2]}) {
      x[i] = {(x[i][0] + best[0]) / 2, (x[i][1] + best[1]) / 2};
      y[i] = f(x[i][0], x[i][1]);
    }
  }
  int b = 0;
  for (int i = 1; i < 3; ++i)
    if (y[i] < y[b]) b = i;
  return x[b];
}

}  // namespace

LognormalFit fit_lognormal_tail(std::span<const double> counts, double threshold) {
  const auto kmin = tail_start(threshold);
  double n = 0.0;
  double s = 0.0;
  std::size_t support = 0;
  for (std::size_t k = kmin; k < counts.size(); ++k) {
    if (counts[k] <= 0.0) continue;
    n += counts[k];
    s += counts[k] * std::log(static_cast<double>(k));
    ++support;
  }
  LognormalFit fit;
  if (n == 0.0) return fit;
  fit.samples = static_cast<std::size_t>(n);
  fit.lambda = s / n;
  double ss = 0.0;
  for (std::size_t k = kmin; k < counts.size(); ++k) {
    const double d = std::log(static_cast<double>(k)) - fit.lambda;
    ss += counts[k] * d * d;
  }
  fit.sigma = std::sqrt(ss / n);
  if (support < 2) return fit;

  const double km = static_cast<double>(kmin);
  auto nll = [&](double lambda, double log_sigma) {
    const double sigma = std::exp(log_sigma);
    if (!std::isfinite(sigma) || sigma < 1e-6 || sigma > 1e3) return std::numeric_limits<double>::infinity();
    double out = 0.0;
    for (std::size_t k = kmin; k < counts.size(); ++k) {
      if (counts[k] <= 0.0) continue;
      const double q = lognormal_tail_mass(static_cast<double>(k), km, lambda, sigma);
      if (!(q > 0.0)) return std::numeric_limits<double>::infinity();
      out -= counts[k] * std::log(q);
    }
    return out;
  };
  const auto best = minimise(nll, {fit.lambda, std::log(std::max(fit.sigma, 0.05))});
  fit.lambda = best[0];
  fit.sigma = std::exp(best[1]);
  return fit;
}

double fit_poisson_tail(std::span<const double> counts, double threshold) {
  const auto kmin = tail_start(threshold);
  double n = 0.0;
  double s = 0.0;
  for (std::size_t k = kmin; k < counts.size(); ++k) {
    n += counts[k];
    s += counts[k] * static_cast<double>(k);
  }
  if (n == 0.0) return 0.0;
  const double target = s / n;
  const double km = static_cast<double>(kmin);
  // The truncated mean rises monotonically from kmin; the MLE matches it to the sample mean.
  auto tail_mean = [&](double lambda) {
    double mass = 0.0;
    double first = 0.0;
    for (double k = km; k < km + lambda + 40.0 * std::sqrt(lambda + 1.0) + 40.0; k += 1.0) {
      const double p = std::exp(poisson_log_pmf(k, lambda));
      mass += p;
      first += k * p;
    }
    return mass > 0.0 ? first / mass : km;
  };
  if (target <= km) return 0.0;
  double lo = 0.0;
  double hi = std::max(1.0, target);
  while (tail_mean(hi) < target) hi *= 2.0;
  for (int i = 0; i < 200 && hi - lo > 1e-12 * hi; ++i) {
    const double m = 0.5 * (lo + hi);
    (tail_mean(m) < target ? lo : hi) = m;
  }
  return 0.5 * (lo + hi);
}

TailResiduals tail_residuals(std::span<const double> counts, double threshold, const LognormalFit& fit) {
  const auto kmin = tail_start(threshold);
  double tail = 0.0;
  for (std::size_t k = kmin; k < counts.size(); ++k) tail += counts[k];
  TailResiduals out;
  if (tail == 0.0) return out;
  out.poisson_lambda = fit_poisson_tail(counts, threshold);
  const double km = static_cast<double>(kmin);
  for (std::size_t k = kmin; k < counts.size(); ++k) {
    const double p = counts[k] / tail;
    const double kd = static_cast<double>(k);
    double q_ln = 0.0;
    if (fit.sigma > 0.0) {
      q_ln = lognormal_tail_mass(kd, km, fit.lambda, fit.sigma);
    } else {
      q_ln = std::abs(kd - std::exp(fit.lambda)) < 0.5 ? 1.0 : 0.0;
    }
    const double q_po = out.poisson_lambda > 0.0 ? std::exp(poisson_tail_log_pmf(kd, km, out.poisson_lambda))
                                                 : (k == kmin ? 1.0 : 0.0);
    out.lognormal += (p - q_ln) * (p - q_ln);
    out.poisson += (p - q_po) * (p - q_po);
  }
  return out;
}

DegreeDiagnostics degree_diagnostics(std::span<const double> counts, double threshold) {
  DegreeDiagnostics out;
  out.histogram.assign(counts.begin(), counts.end());
  double total = 0.0;
  double first = 0.0;
  for (std::size_t k = 0; k < counts.size(); ++k) {
    total += counts[k];
    first += static_cast<double>(k) * counts[k];
  }
  out.mean = total > 0.0 ? first / total : 0.0;
  out.kl = kl_poisson(counts);
  out.tail = fit_lognormal_tail(counts, threshold);
  out.residuals = tail_residuals(counts, threshold, out.tail);
  return out;
}

SpatialStats spatial_stats(const SocialGraph& graph, const Csr& merged, const Grid& grid, std::size_t groups) {
  SpatialStats out;
  out.bin_km = grid.tile_km() / 2.0;
  const auto& persons = graph.persons;

  double length_sum = 0.0;
  for (const auto& e : graph.friendship.edges) {
    const double d = grid.distance_km(persons[e.u].tile, persons[e.v].tile);
    const auto bin = static_cast<std::size_t>(d / out.bin_km);
    if (bin >= out.edge_length_counts.size()) out.edge_length_counts.resize(bin + 1, 0);
    ++out.edge_length_counts[bin];
    length_sum += d;
  }
  if (!graph.friendship.edges.empty()) {
    out.mean_edge_length_km = length_sum / static_cast<double>(graph.friendship.edges.size());
  }

  std::vector<std::uint64_t> pop(grid.tile_count(), 0);
  std::vector<std::uint64_t> degree_sum(grid.tile_count(), 0);
  std::vector<std::uint32_t> degree_max(grid.tile_count(), 0);
  for (const auto& p : persons) {
    const auto d = merged.degree(p.id);
    ++pop[p.tile];
    degree_sum[p.tile] += d;
    degree_max[p.tile] = std::max(degree_max[p.tile], d);
  }
  for (TileIndex t = 0; t < grid.tile_count(); ++t) {
    if (pop[t] == 0) continue;
    out.tiles.push_back({t, pop[t], static_cast<double>(degree_sum[t]) / static_cast<double>(pop[t]), degree_max[t]});
  }

  out.group_fractions = Matrix(groups);
  std::vector<std::uint64_t> size(groups, 0);
  std::vector<std::uint64_t> ends(groups, 0);
  std::vector<std::uint64_t> peer_ends(groups, 0);
  for (const auto& p : persons) {
    if (p.group >= groups) fail(ErrorKind::InvalidIndex, fmt::format("person {} has group {}", p.id, p.group));
    ++size[p.group];
  }
  for (const auto& e : graph.friendship.edges) {
    const auto gi = persons[e.u].group;
    const auto gj = persons[e.v].group;
    ++ends[gi];
    ++ends[gj];
    if (gi == gj) {
      out.group_fractions(gi, gi) += 1.0;
      peer_ends[gi] += 2;
    } else {
      out.group_fractions(gi, gj) += 0.5;
      out.group_fractions(gj, gi) += 0.5;
    }
  }
  const auto edges = static_cast<double>(graph.friendship.edges.size());
  if (edges > 0.0) {
    for (std::size_t i = 0; i < groups; ++i) {
      for (std::size_t j = 0; j < groups; ++j) out.group_fractions(i, j) /= edges;
    }
  }
  out.group_degree.assign(groups, 0.0);
  out.peer_degree.assign(groups, 0.0);
  for (std::size_t i = 0; i < groups; ++i) {
    if (size[i] == 0) continue;
    out.group_degree[i] = static_cast<double>(ends[i]) / static_cast<double>(size[i]);
    out.peer_degree[i] = static_cast<double>(peer_ends[i]) / static_cast<double>(size[i]);
  }
  return out;
}

Analysis analyze(const SocialGraph& graph, const Grid& grid, std::size_t groups, const AnalysisOptions& options) {
  if (graph.node_count() == 0) fail(ErrorKind::EmptyPopulation, "cannot analyse an empty graph");
  Analysis out;
  auto& m = out.metrics;
  const auto merged = simple_graph(graph, options.layers);

  m.seed = options.seed;
  m.nodes = graph.node_count();
  m.edges = merged.edge_count();
  m.household_edges = graph.household.size();
  m.friendship_edges = graph.friendship.size();
  m.overlapping_pairs = graph.overlapping_pairs;
  m.nu = graph.household_degree();
  m.mu_hat = graph.friendship_degree();
  m.K = (options.layers.household ? m.nu : 0.0) + (options.layers.friendship ? m.mu_hat : 0.0);
  m.simple_mean_degree = 2.0 * static_cast<double>(m.edges) / static_cast<double>(m.nodes);

  const auto comps = components(merged);
  m.component_count = comps.count;
  m.component_sizes = comps.sizes;
  m.giant_fraction = comps.giant_fraction;
  if (options.layers.household && options.layers.friendship) {
    m.friendship_giant_fraction = components(simple_graph(graph, {false, true})).giant_fraction;
  } else if (!options.layers.household) {
    m.friendship_giant_fraction = m.giant_fraction;
  }

  m.clustering = clustering(merged);
  m.assortativity = degree_assortativity(merged);
  if (options.path_length) {
    m.path = avg_path_length(merged, options.path_sources, options.seed, options.exact_limit);
  }
  m.degrees = degree_diagnostics(degree_histogram(merged), options.tail_threshold);

  if (options.communities) {
    const auto partition = louvain(merged, options.seed);
    m.modularity = partition.modularity;
    m.community_count = partition.count;
    out.clusters = cluster_stats(merged, partition, graph.persons, grid);
  }
  out.spatial = spatial_stats(graph, merged, grid, groups);
  return out;
}

}  // namespace urbangraph
