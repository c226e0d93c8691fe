#pragma once

#include <filesystem>
#include <fstream>
#include <string>

#include <unistd.h>

// Fresh directory under the system temp dir, removed on destruction.
class ScratchDir {
 public:
  explicit ScratchDir(const std::string& tag)
      : path_(std::filesystem::temp_directory_path() / ("urbangraph_" + tag + "_" + std::to_string(::getpid()))) {
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~ScratchDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  ScratchDir(const ScratchDir&) = delete;
  ScratchDir& operator=(const ScratchDir&) = delete;

  const std::filesystem::path& path() const { return path_; }

  std::filesystem::path write(const std::string& name, const std::string& text) const {
    const auto p = path_ / name;
    std::filesystem::create_directories(p.parent_path());
    std::ofstream(p) << text;
    return p;
  }

 private:
  std::filesystem::path path_;
};

// Small data-driven configuration over the shipped Florence fixtures.
inline std::string small_config(const std::string& extra = "", int population = 3000) {
  const std::string data = URBANGRAPH_DATA_DIR "/florence/";
  return R"({
  "grid": {"origin": {"lat": 43.72, "lon": 11.15}, "tile_km": 1.0, "tiles_lat": 15, "tiles_lon": 12},
  "inputs": {"tiles": ")" + data + R"(tiles.csv", "polygon": ")" + data + R"(polygon.json",
    "age_distribution": ")" + data + R"(age_distribution.csv", "roles": ")" + data + R"(roles.csv",
    "sizes": ")" + data + R"(sizes.csv", "contact_matrix": ")" + data + R"(contact_matrix.csv"},
  "mu": 4, "distance_kernel": {"kind": "inverse-power", "beta": 2}, "fitness": "lognormal",
  "target_population": )" + std::to_string(population) + extra + "\n}\n";
}
