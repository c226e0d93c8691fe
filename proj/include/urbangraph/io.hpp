#pragma once

#include <filesystem>
#include <span>
#include <vector>

#include <json.hpp>

#include "urbangraph/analysis.hpp"
#include "urbangraph/geo_grid.hpp"
#include "urbangraph/graph.hpp"
#include "urbangraph/households.hpp"

namespace urbangraph {

/// `id,tile_row,tile_col,age_group,fitness,household_id,role`; household_id is
/// empty and role is `unset` for persons outside any household.
void write_nodes(const std::filesystem::path& file, std::span<const Person> persons, const Grid& grid);
std::vector<Person> read_nodes(const std::filesystem::path& file, const Grid& grid);

/// `u,v,layer` with layer H or F; household rows first.
void write_edges(const std::filesystem::path& file, const EdgeSet& household, const EdgeSet& friendship);
std::pair<EdgeSet, EdgeSet> read_edges(const std::filesystem::path& file);

/// `household_id,type,member_ids` with members separated by spaces.
void write_households(const std::filesystem::path& file, const HouseholdSet& households);

void write_json(const std::filesystem::path& file, const nlohmann::json& doc);

nlohmann::json to_json(const MetricsReport& metrics);

/// metrics.json, degree_hist.csv, edge_length_hist.csv, tile_stats.csv,
/// g2g_matrix.csv and cluster_stats.csv in `dir`.
void write_analysis(const std::filesystem::path& dir, const Analysis& analysis, const Grid& grid);

}  // namespace urbangraph
