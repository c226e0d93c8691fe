#pragma once

// Structural metrics on the simple (layer-merged) graph.

#include <cstdint>
#include <span>
#include <vector>

#include "urbangraph/geo_grid.hpp"
#include "urbangraph/graph.hpp"
#include "urbangraph/mixing.hpp"

namespace urbangraph {

struct Components {
  std::size_t count = 0;
  /// Descending.
  std::vector<std::uint64_t> sizes;
  double giant_fraction = 0.0;
  /// Component label per node; the giant component has label 0, the others
  /// follow in order of decreasing size.
  std::vector<std::uint32_t> label;
};

Components components(const Csr& graph);

struct Clustering {
  double global = 0.0;  // 3 * triangles / connected triples
  double local_mean = 0.0;
  std::uint64_t triangles = 0;
  std::uint64_t triples = 0;
};

Clustering clustering(const Csr& graph);

struct Assortativity {
  double rho = 0.0;  // NaN when undefined
  bool defined = false;
};

Assortativity degree_assortativity(const Csr& graph);

struct PathLength {
  double mean = 0.0;
  bool exact = false;
  std::size_t sources = 0;
  std::size_t giant_nodes = 0;
};

/// Mean shortest-path distance inside the giant component. Every giant node
/// is a source when the component has at most `exact_limit` nodes; otherwise
/// `sample_size` sources are drawn uniformly without replacement.
PathLength avg_path_length(const Csr& graph, std::size_t sample_size, std::uint64_t seed,
                           std::size_t exact_limit = 20000);

/// counts[k] = number of nodes of degree k.
std::vector<double> degree_histogram(const Csr& graph);

/// KL(p || Poisson(mean of p)) over k with p_k > 0; `counts` need not be normalised.
double kl_poisson(std::span<const double> counts);

struct LognormalFit {
  double lambda = 0.0;
  double sigma = 0.0;
  std::size_t samples = 0;
};

/// Maximum-likelihood fit over degrees k >= threshold (and k >= 1) of a
/// Lognormal discretised on [k - 1/2, k + 1/2) and truncated at the threshold.
/// A tail with a single distinct degree gets sigma = 0.
LognormalFit fit_lognormal_tail(std::span<const double> counts, double threshold);

/// Maximum-likelihood rate of a Poisson truncated to k >= threshold; 0 when
/// every tail degree equals the threshold.
double fit_poisson_tail(std::span<const double> counts, double threshold);

struct TailResiduals {
  double lognormal = 0.0;
  double poisson = 0.0;
  double poisson_lambda = 0.0;
};

/// Sum of squared differences between the empirical tail pmf (conditioned on
/// k >= threshold) and the truncated Lognormal and Poisson tail fits.
TailResiduals tail_residuals(std::span<const double> counts, double threshold, const LognormalFit& fit);

struct DegreeDiagnostics {
  std::vector<double> histogram;
  double mean = 0.0;
  double kl = 0.0;
  LognormalFit tail;
  TailResiduals residuals;
};

DegreeDiagnostics degree_diagnostics(std::span<const double> counts, double threshold);

struct Partition {
  std::vector<std::uint32_t> community;
  std::size_t count = 0;
  double modularity = 0.0;
};

double modularity(const Csr& graph, std::span<const std::uint32_t> community);

/// Multilevel Louvain at resolution 1. Nodes are visited in a seeded random
/// order; among equal gains the smallest community id wins.
Partition louvain(const Csr& graph, std::uint64_t seed);

struct ClusterStats {
  std::uint32_t community = 0;
  std::uint64_t size = 0;
  std::uint64_t intra_edges = 0;
  double mean_distance_km = 0.0;
  double max_distance_km = 0.0;
};

/// Largest `top` communities by size with tile distances over their internal edges.
std::vector<ClusterStats> cluster_stats(const Csr& graph, const Partition& partition,
                                        std::span<const Person> persons, const Grid& grid, std::size_t top = 50);

struct TileStats {
  TileIndex tile = 0;
  std::uint64_t population = 0;
  double mean_degree = 0.0;
  std::uint32_t max_degree = 0;
};

struct SpatialStats {
  double bin_km = 0.5;
  /// Friendship edge lengths binned in [k * bin_km, (k + 1) * bin_km).
  std::vector<std::uint64_t> edge_length_counts;
  double mean_edge_length_km = 0.0;
  /// Populated tiles, degrees on the merged graph.
  std::vector<TileStats> tiles;
  /// Share of friendship edges between groups i and j; symmetric, the whole matrix sums to 1.
  Matrix group_fractions;
  /// Mean friendship degree of each group, overall and towards the same group.
  std::vector<double> group_degree;
  std::vector<double> peer_degree;
};

SpatialStats spatial_stats(const SocialGraph& graph, const Csr& merged, const Grid& grid, std::size_t groups);

struct AnalysisOptions {
  std::uint64_t seed = 0;
  std::size_t path_sources = 1000;
  std::size_t exact_limit = 20000;
  bool path_length = true;
  bool communities = true;
  /// Tail threshold of the Lognormal fit, normally mu.
  double tail_threshold = 1.0;
  LayerSelection layers;
};

struct MetricsReport {
  std::uint64_t seed = 0;
  std::size_t nodes = 0;
  std::size_t edges = 0;  // simple graph
  std::size_t household_edges = 0;
  std::size_t friendship_edges = 0;
  std::size_t overlapping_pairs = 0;
  double nu = 0.0;
  double mu_hat = 0.0;
  double K = 0.0;  // nu + mu_hat
  double simple_mean_degree = 0.0;
  PathLength path;
  Clustering clustering;
  Assortativity assortativity;
  std::size_t component_count = 0;
  std::vector<std::uint64_t> component_sizes;
  double giant_fraction = 0.0;
  /// Giant component of the friendship layer alone.
  double friendship_giant_fraction = 0.0;
  double modularity = 0.0;
  std::size_t community_count = 0;
  DegreeDiagnostics degrees;
};

struct Analysis {
  MetricsReport metrics;
  SpatialStats spatial;
  std::vector<ClusterStats> clusters;
};

Analysis analyze(const SocialGraph& graph, const Grid& grid, std::size_t groups, const AnalysisOptions& options);

}  // namespace urbangraph
