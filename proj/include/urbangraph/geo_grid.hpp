#pragma once

// Territory lattice: square tiles of side l laid out on a local flat km plane
// from the South-West corner of the bounding box.

#include <cstdint>
#include <istream>
#include <span>
#include <string_view>
#include <vector>

namespace urbangraph {

using TileIndex = std::uint32_t;

struct LatLon {
  double lat = 0.0;
  double lon = 0.0;
};

struct PlanarPoint {
  double east_km = 0.0;
  double north_km = 0.0;
};

/// Mean Earth radius used by the equirectangular projection.
inline constexpr double kEarthRadiusKm = 6371.0088;

class Grid {
 public:
  /// Rows run South to North (tiles_lat of them), columns West to East.
  Grid(LatLon origin, double tile_km, std::uint32_t tiles_lat, std::uint32_t tiles_lon);

  LatLon origin() const noexcept { return origin_; }
  double tile_km() const noexcept { return tile_km_; }
  std::uint32_t tiles_lat() const noexcept { return tiles_lat_; }
  std::uint32_t tiles_lon() const noexcept { return tiles_lon_; }
  std::size_t tile_count() const noexcept {
    return static_cast<std::size_t>(tiles_lat_) * tiles_lon_;
  }

  TileIndex index(std::uint32_t row, std::uint32_t col) const;
  std::uint32_t row(TileIndex t) const;
  std::uint32_t col(TileIndex t) const;

  PlanarPoint center_km(TileIndex t) const;
  LatLon center_latlon(TileIndex t) const;

  /// max(l/2, distance between tile centers) in km.
  double distance_km(TileIndex a, TileIndex b) const;

  LatLon to_latlon(PlanarPoint p) const noexcept;
  PlanarPoint to_planar(LatLon p) const noexcept;

 private:
  void check(TileIndex t) const;

  LatLon origin_;
  double tile_km_;
  std::uint32_t tiles_lat_;
  std::uint32_t tiles_lon_;
};

Grid build_grid(LatLon origin, double tile_km, std::uint32_t tiles_lat, std::uint32_t tiles_lon);

double tile_distance(const Grid& grid, TileIndex a, TileIndex b);

/// Active-tile selection plus per-tile resident counts.
class TileMask {
 public:
  TileMask() = default;
  explicit TileMask(std::size_t tile_count, bool active = true);

  static TileMask all_active(const Grid& grid) { return TileMask(grid.tile_count(), true); }

  std::size_t size() const noexcept { return active_.size(); }
  bool active(TileIndex t) const { return active_.at(t) != 0; }
  std::uint64_t population(TileIndex t) const { return population_.at(t); }

  void set_active(TileIndex t, bool on);
  /// Throws a data error if the tile is inactive and `count` is nonzero.
  void set_population(TileIndex t, std::uint64_t count);

  std::size_t active_count() const noexcept;
  std::uint64_t total_population() const noexcept;
  /// Active tiles with at least one resident.
  std::vector<TileIndex> populated_tiles() const;

  friend bool operator==(const TileMask&, const TileMask&) = default;

 private:
  std::vector<std::uint8_t> active_;
  std::vector<std::uint64_t> population_;
};

/// Closed boundary rings in (lat, lon). Holes are expressed as extra rings.
struct Polygon {
  std::vector<std::vector<LatLon>> rings;

  /// Checks ring sizes and closes any ring whose last vertex differs from its first.
  void normalize();
};

Polygon parse_polygon_json(std::string_view json_text);
Polygon load_polygon(std::istream& in);

/// Even-odd rule; points on an edge count as inside.
bool contains(const Polygon& polygon, LatLon point);

struct FilterResult {
  TileMask mask;
  /// Set when no tile center lies inside the polygon.
  bool disjoint = false;
};

FilterResult filter_tiles(const Grid& grid, const Polygon& polygon);
/// Intersects an existing selection with the polygon (idempotent).
FilterResult filter_tiles(const Grid& grid, const TileMask& mask, const Polygon& polygon);

struct PopulationLoad {
  TileMask mask;
  std::size_t dropped_rows = 0;
  std::uint64_t dropped_population = 0;
  std::vector<std::size_t> dropped_lines;
};

/// Reads `row,col,population` rows. Rows on inactive tiles are dropped and
/// reported; repeated rows for the same tile accumulate.
PopulationLoad load_tile_population(const Grid& grid, const TileMask& mask, std::istream& in,
                                    std::string_view source_name = "tiles.csv");

/// Rescales populations to `target` residents by largest remainder, keeping
/// inactive and empty tiles empty.
TileMask rescale_population(const TileMask& mask, std::uint64_t target);

}  // namespace urbangraph
