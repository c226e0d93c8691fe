#include "urbangraph/geo_grid.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include <fmt/format.h>
#include <json.hpp>

#include "urbangraph/csv.hpp"
#include "urbangraph/error.hpp"

namespace urbangraph {
namespace {

constexpr double kKmPerDegree = kEarthRadiusKm * std::numbers::pi / 180.0;
constexpr double kEdgeTolerance = 1e-12;

bool on_segment(LatLon p, LatLon a, LatLon b) {
  const double cross = (b.lon - a.lon) * (p.lat - a.lat) - (b.lat - a.lat) * (p.lon - a.lon);
  const double scale = std::max({std::abs(b.lon - a.lon), std::abs(b.lat - a.lat), 1.0});
  if (std::abs(cross) > kEdgeTolerance * scale) return false;
  return p.lat >= std::min(a.lat, b.lat) - kEdgeTolerance &&
         p.lat <= std::max(a.lat, b.lat) + kEdgeTolerance &&
         p.lon >= std::min(a.lon, b.lon) - kEdgeTolerance &&
         p.lon <= std::max(a.lon, b.lon) + kEdgeTolerance;
}

}  // namespace

Grid::Grid(LatLon origin, double tile_km, std::uint32_t tiles_lat, std::uint32_t tiles_lon)
    : origin_(origin), tile_km_(tile_km), tiles_lat_(tiles_lat), tiles_lon_(tiles_lon) {
  if (!(tile_km > 0.0) || !std::isfinite(tile_km)) {
    fail(ErrorKind::InvalidParameter, fmt::format("tile side must be positive, got {}", tile_km));
  }
  if (tiles_lat < 1 || tiles_lon < 1) {
    fail(ErrorKind::InvalidParameter,
         fmt::format("grid needs at least one tile per axis, got {}x{}", tiles_lat, tiles_lon));
  }
  if (std::abs(origin.lat) >= 90.0) {
    fail(ErrorKind::InvalidParameter, fmt::format("origin latitude {} out of range", origin.lat));
  }
}

TileIndex Grid::index(std::uint32_t row, std::uint32_t col) const {
  if (row >= tiles_lat_ || col >= tiles_lon_) {
    fail(ErrorKind::InvalidIndex,
         fmt::format("tile ({}, {}) outside {}x{} grid", row, col, tiles_lat_, tiles_lon_));
  }
  return row * tiles_lon_ + col;
}

void Grid::check(TileIndex t) const {
  if (t >= tile_count()) {
    fail(ErrorKind::InvalidIndex, fmt::format("tile index {} outside [0, {})", t, tile_count()));
  }
}

std::uint32_t Grid::row(TileIndex t) const {
  check(t);
  return t / tiles_lon_;
}

std::uint32_t Grid::col(TileIndex t) const {
  check(t);
  return t % tiles_lon_;
}

PlanarPoint Grid::center_km(TileIndex t) const {
  check(t);
  return {(col(t) + 0.5) * tile_km_, (row(t) + 0.5) * tile_km_};
}

LatLon Grid::center_latlon(TileIndex t) const { return to_latlon(center_km(t)); }

double Grid::distance_km(TileIndex a, TileIndex b) const {
  const auto pa = center_km(a);
  const auto pb = center_km(b);
  const double d = std::hypot(pa.east_km - pb.east_km, pa.north_km - pb.north_km);
  return std::max(0.5 * tile_km_, d);
}

LatLon Grid::to_latlon(PlanarPoint p) const noexcept {
  const double cos_lat = std::cos(origin_.lat * std::numbers::pi / 180.0);
  return {origin_.lat + p.north_km / kKmPerDegree,
          origin_.lon + p.east_km / (kKmPerDegree * cos_lat)};
}

PlanarPoint Grid::to_planar(LatLon p) const noexcept {
  const double cos_lat = std::cos(origin_.lat * std::numbers::pi / 180.0);
  return {(p.lon - origin_.lon) * kKmPerDegree * cos_lat, (p.lat - origin_.lat) * kKmPerDegree};
}

Grid build_grid(LatLon origin, double tile_km, std::uint32_t tiles_lat, std::uint32_t tiles_lon) {
  return Grid(origin, tile_km, tiles_lat, tiles_lon);
}

double tile_distance(const Grid& grid, TileIndex a, TileIndex b) { return grid.distance_km(a, b); }

TileMask::TileMask(std::size_t tile_count, bool active)
    : active_(tile_count, active ? 1 : 0), population_(tile_count, 0) {}

void TileMask::set_active(TileIndex t, bool on) {
  active_.at(t) = on ? 1 : 0;
  if (!on) population_.at(t) = 0;
}

void TileMask::set_population(TileIndex t, std::uint64_t count) {
  if (count != 0 && !active(t)) {
    fail(ErrorKind::Data, fmt::format("tile {} is inactive and cannot hold residents", t));
  }
  population_.at(t) = count;
}

std::size_t TileMask::active_count() const noexcept {
  return static_cast<std::size_t>(std::count(active_.begin(), active_.end(), 1));
}

std::uint64_t TileMask::total_population() const noexcept {
  std::uint64_t total = 0;
  for (auto p : population_) total += p;
  return total;
}

std::vector<TileIndex> TileMask::populated_tiles() const {
  std::vector<TileIndex> out;
  for (TileIndex t = 0; t < active_.size(); ++t) {
    if (active_[t] && population_[t] > 0) out.push_back(t);
  }
  return out;
}

void Polygon::normalize() {
  if (rings.empty()) fail(ErrorKind::InvalidParameter, "polygon has no rings");
  for (auto& ring : rings) {
    if (ring.size() >= 2) {
      const auto& a = ring.front();
      const auto& b = ring.back();
      if (a.lat != b.lat || a.lon != b.lon) ring.push_back(a);
    }
    // A closed ring repeats its first vertex, so three distinct corners need four entries.
    if (ring.size() < 4) {
      fail(ErrorKind::InvalidParameter, "polygon ring needs at least 3 vertices");
    }
  }
}

Polygon parse_polygon_json(std::string_view json_text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::parse_error& e) {
    fail(ErrorKind::Parse, fmt::format("polygon.json: {}", e.what()));
  }
  if (!doc.is_array()) fail(ErrorKind::Parse, "polygon.json: expected an array of rings");
  Polygon polygon;
  for (const auto& ring_json : doc) {
    if (!ring_json.is_array()) fail(ErrorKind::Parse, "polygon.json: ring must be an array");
    std::vector<LatLon> ring;
    for (const auto& vertex : ring_json) {
      if (!vertex.is_array() || vertex.size() != 2 || !vertex[0].is_number() ||
          !vertex[1].is_number()) {
        fail(ErrorKind::Parse, "polygon.json: vertex must be a [lat, lon] pair");
      }
      ring.push_back({vertex[0].get<double>(), vertex[1].get<double>()});
    }
    polygon.rings.push_back(std::move(ring));
  }
  polygon.normalize();
  return polygon;
}

Polygon load_polygon(std::istream& in) {
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_polygon_json(buffer.str());
}

bool contains(const Polygon& polygon, LatLon p) {
  bool inside = false;
  for (const auto& ring : polygon.rings) {
    for (std::size_t i = 0; i + 1 < ring.size(); ++i) {
      const LatLon a = ring[i];
      const LatLon b = ring[i + 1];
      if (on_segment(p, a, b)) return true;
      // Half-open in latitude so a vertex shared by two edges is counted once.
      if ((a.lat > p.lat) != (b.lat > p.lat)) {
        const double lon_cross = a.lon + (p.lat - a.lat) * (b.lon - a.lon) / (b.lat - a.lat);
        if (p.lon < lon_cross) inside = !inside;
      }
    }
  }
  return inside;
}

FilterResult filter_tiles(const Grid& grid, const Polygon& polygon) {
  return filter_tiles(grid, TileMask::all_active(grid), polygon);
}

FilterResult filter_tiles(const Grid& grid, const TileMask& mask, const Polygon& polygon) {
  if (mask.size() != grid.tile_count()) {
    fail(ErrorKind::InvalidParameter, "tile mask does not match the grid");
  }
  FilterResult result{TileMask(grid.tile_count(), false), true};
  for (TileIndex t = 0; t < grid.tile_count(); ++t) {
    if (mask.active(t) && contains(polygon, grid.center_latlon(t))) {
      result.mask.set_active(t, true);
      result.disjoint = false;
    }
  }
  return result;
}

PopulationLoad load_tile_population(const Grid& grid, const TileMask& mask, std::istream& in,
                                    std::string_view source_name) {
  if (mask.size() != grid.tile_count()) {
    fail(ErrorKind::InvalidParameter, "tile mask does not match the grid");
  }
  const auto table = csv::read(in, source_name);
  const auto c_row = csv::column(table, "row", source_name);
  const auto c_col = csv::column(table, "col", source_name);
  const auto c_pop = csv::column(table, "population", source_name);

  PopulationLoad out{mask, 0, 0, {}};
  for (TileIndex t = 0; t < grid.tile_count(); ++t) {
    if (out.mask.active(t)) out.mask.set_population(t, 0);
  }
  for (const auto& r : table.rows) {
    const auto row = csv::parse_int(r.fields[c_row], r.line, source_name);
    const auto col = csv::parse_int(r.fields[c_col], r.line, source_name);
    const auto pop = csv::parse_int(r.fields[c_pop], r.line, source_name);
    if (pop < 0) {
      fail(ErrorKind::Data, fmt::format("{}:{}: negative population {}", source_name, r.line, pop));
    }
    if (row < 0 || col < 0 || row >= grid.tiles_lat() || col >= grid.tiles_lon()) {
      fail(ErrorKind::Data, fmt::format("{}:{}: tile ({}, {}) outside {}x{} grid", source_name,
                                        r.line, row, col, grid.tiles_lat(), grid.tiles_lon()));
    }
    const auto t = grid.index(static_cast<std::uint32_t>(row), static_cast<std::uint32_t>(col));
    if (!out.mask.active(t)) {
      ++out.dropped_rows;
      out.dropped_population += static_cast<std::uint64_t>(pop);
      out.dropped_lines.push_back(r.line);
      continue;
    }
    out.mask.set_population(t, out.mask.population(t) + static_cast<std::uint64_t>(pop));
  }
  return out;
}

TileMask rescale_population(const TileMask& mask, std::uint64_t target) {
  const auto total = mask.total_population();
  if (total == 0) fail(ErrorKind::EmptyPopulation, "cannot rescale an empty population");
  TileMask out = mask;
  struct Share {
    TileIndex tile;
    double remainder;
  };
  std::vector<Share> shares;
  std::uint64_t assigned = 0;
  for (TileIndex t = 0; t < mask.size(); ++t) {
    if (mask.population(t) == 0) continue;
    const double exact = static_cast<double>(mask.population(t)) * static_cast<double>(target) /
                         static_cast<double>(total);
    const auto whole = static_cast<std::uint64_t>(std::floor(exact));
    out.set_population(t, whole);
    assigned += whole;
    shares.push_back({t, exact - static_cast<double>(whole)});
  }
  std::stable_sort(shares.begin(), shares.end(),
                   [](const Share& a, const Share& b) { return a.remainder > b.remainder; });
  for (std::size_t i = 0; assigned < target && i < shares.size(); ++i, ++assigned) {
    out.set_population(shares[i].tile, out.population(shares[i].tile) + 1);
  }
  return out;
}

}  // namespace urbangraph
