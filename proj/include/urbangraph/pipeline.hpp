#pragma once

// generate -> analyze -> report, for single runs and experiment matrices.

#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "urbangraph/analysis.hpp"
#include "urbangraph/config.hpp"
#include "urbangraph/households.hpp"
#include "urbangraph/mixing.hpp"

namespace urbangraph {

struct LoadedInputs {
  Grid grid{{0.0, 0.0}, 1.0, 1, 1};
  TileMask mask;
  std::vector<std::string> warnings;
  AgeDistribution ages{{0.0}, {1.0}};
  std::optional<RoleTable> roles;
  std::optional<SizeTable> sizes;
  std::optional<ContactMatrix> contacts;
};

LoadedInputs load_inputs(const RunConfig& config);

struct GeneratedGraph {
  std::uint64_t seed = 0;
  SocialGraph graph;
  HouseholdSet households;
  std::vector<double> age_probabilities;
  double mu_max = 0.0;
  std::vector<std::string> warnings;
};

/// One realisation. When `report_dir` is set, feasibility.json is written
/// there before any friendship edge is drawn (also when mu is infeasible).
GeneratedGraph generate(const RunConfig& config, const LoadedInputs& inputs, std::uint64_t run_seed,
                        const std::filesystem::path* report_dir = nullptr);

AnalysisOptions analysis_options(const RunConfig& config, std::uint64_t run_seed);

/// Seed of run r: split_seed(config seed, r).
std::uint64_t run_seed(const RunConfig& config, std::uint32_t run);

std::filesystem::path run_directory(const std::filesystem::path& root, std::uint32_t run);

/// Writes run_###/{nodes,edges,households}.csv, feasibility.json and manifest.json.
void run_generate(const RunConfig& config, std::ostream& log);

struct Interval {
  double mean = 0.0;
  double low = 0.0;   // 2.5th percentile
  double high = 0.0;  // 97.5th percentile
  std::size_t n = 0;
};

/// Mean and percentile interval over finite values (linear interpolation between order statistics).
Interval summarize(std::vector<double> values);

/// Analyses every run directory under `root` (or `root` itself when it holds a
/// manifest). Refuses manifests whose config hash differs unless allowed.
void run_analyze(const RunConfig& config, const std::filesystem::path& root, bool allow_hash_mismatch,
                 std::ostream& log);

/// Runs every cell; writes table_giant.csv and table_metrics.csv in the output
/// directory. Returns the number of failed cells.
std::size_t run_experiment(const ExperimentConfig& experiment, std::ostream& log);

}  // namespace urbangraph
