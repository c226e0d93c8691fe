#pragma once

// JSON run and experiment configuration. Input paths are resolved against the
// directory of the config file.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "urbangraph/friendship.hpp"
#include "urbangraph/geo_grid.hpp"
#include "urbangraph/population.hpp"

namespace urbangraph {

enum class MixingMode : std::uint8_t { Data, Homogeneous };
enum class DensityMode : std::uint8_t { Real, Uniform };
enum class GroupSizeMode : std::uint8_t { Real, Uniform };

struct InputPaths {
  std::filesystem::path tiles;
  std::filesystem::path polygon;  // optional
  std::filesystem::path age_distribution;
  std::filesystem::path roles;
  std::filesystem::path sizes;
  std::filesystem::path contact_matrix;
};

struct RunConfig {
  LatLon origin;
  double tile_km = 1.0;
  std::uint32_t tiles_lat = 1;
  std::uint32_t tiles_lon = 1;
  InputPaths inputs;

  double mu = 5.0;
  DistanceKernel kernel;
  FitnessSpec fitness = ShiftedLognormalFitness{1.0, 0.6931471805599453, 0.25};
  MixingMode mixing = MixingMode::Data;
  DensityMode population = DensityMode::Real;
  GroupSizeMode group_sizes = GroupSizeMode::Real;
  bool households = true;
  std::optional<std::uint64_t> target_population;
  double age_perturbation = 0.0;

  std::uint64_t seed = 1;
  std::uint32_t runs = 1;
  std::filesystem::path output_dir = "out";
  std::size_t path_length_sources = 1000;
  std::size_t path_length_exact_limit = 20000;
  bool communities = true;

  Grid grid() const { return build_grid(origin, tile_km, tiles_lat, tiles_lon); }
};

/// Throws config errors for unknown keys, wrong types or invalid values.
RunConfig parse_run_config(const nlohmann::json& doc, const std::filesystem::path& base_dir);
RunConfig load_run_config(const std::filesystem::path& file);

/// Effective configuration with absolute input paths.
nlohmann::json to_json(const RunConfig& config);

/// FNV-1a over the generation-relevant configuration and the bytes of every
/// referenced input file, as 16 hex digits. Output location, run count and
/// analysis-only settings do not contribute.
std::string config_hash(const RunConfig& config);

struct ExperimentAxes {
  std::vector<double> mu;
  std::vector<double> beta;
  std::vector<FitnessSpec> fitness;
  std::vector<MixingMode> mixing;
  std::vector<DensityMode> population;
  std::vector<GroupSizeMode> group_sizes;
  std::vector<bool> households;
};

struct ExperimentConfig {
  RunConfig base;
  ExperimentAxes axes;
  bool write_graphs = false;
};

struct ExperimentCell {
  std::string name;
  RunConfig config;
};

/// `{"base": <run config object or path>, "axes": {...}, ...}`; top-level
/// `seed`, `runs` and `output_dir` override the base.
ExperimentConfig parse_experiment_config(const nlohmann::json& doc, const std::filesystem::path& base_dir);
ExperimentConfig load_experiment_config(const std::filesystem::path& file);
bool is_experiment_config(const nlohmann::json& doc);

/// Cross product of the axes in the order mu, beta, fitness, mixing,
/// population, group sizes, households (the last axis varies fastest).
std::vector<ExperimentCell> expand(const ExperimentConfig& experiment);

std::string fitness_label(const FitnessSpec& spec);
std::string to_string(MixingMode mode);
std::string to_string(DensityMode mode);
std::string to_string(GroupSizeMode mode);

nlohmann::json read_json_file(const std::filesystem::path& file);

}  // namespace urbangraph
