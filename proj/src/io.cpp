#include "urbangraph/io.hpp"

#include <charconv>
#include <fstream>

#include <fmt/format.h>
#include <fmt/ranges.h>

#include "urbangraph/csv.hpp"
#include "urbangraph/error.hpp"

namespace urbangraph {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

class Writer {
 public:
  explicit Writer(const fs::path& file) : file_(file), out_(file, std::ios::binary) {
    if (!out_) fail(ErrorKind::Io, fmt::format("cannot write {}", file.string()));
  }
  ~Writer() = default;

  template <class... Args>
  void line(fmt::format_string<Args...> f, Args&&... args) {
    fmt::format_to(std::back_inserter(buf_), f, std::forward<Args>(args)...);
    buf_.push_back('\n');
    if (buf_.size() > (1u << 20)) flush();
  }

  void close() {
    flush();
    out_.close();
    if (!out_) fail(ErrorKind::Io, fmt::format("failed writing {}", file_.string()));
  }

 private:
  void flush() {
    out_.write(buf_.data(), static_cast<std::streamsize>(buf_.size()));
    buf_.clear();
  }

  fs::path file_;
  std::ofstream out_;
  fmt::memory_buffer buf_;
};

std::ifstream open_input(const fs::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) fail(ErrorKind::Io, fmt::format("cannot open {}", file.string()));
  return in;
}

std::string role_label(Role role) {
  if (role == Role::Unset) return "unset";
  return fmt::format("{}:{}", to_string(household_type(role)), role_name(role));
}

Role parse_role_label(std::string_view text, std::size_t line, std::string_view source) {
  if (text == "unset") return Role::Unset;
  const auto colon = text.find(':');
  if (colon != std::string_view::npos) {
    if (auto type = parse_household_type(text.substr(0, colon))) {
      if (auto role = parse_role(*type, text.substr(colon + 1))) return *role;
    }
  }
  fail(ErrorKind::Parse, fmt::format("{}:{}: unknown role '{}'", source, line, text));
}

}  // namespace

void write_nodes(const fs::path& file, std::span<const Person> persons, const Grid& grid) {
  Writer w(file);
  w.line("id,tile_row,tile_col,age_group,fitness,household_id,role");
  for (const auto& p : persons) {
    const auto hh = p.household ? fmt::format("{}", *p.household) : std::string();
    w.line("{},{},{},{},{:.17g},{},{}", p.id, grid.row(p.tile), grid.col(p.tile), p.group, p.fitness, hh,
           role_label(p.role));
  }
  w.close();
}

std::vector<Person> read_nodes(const fs::path& file, const Grid& grid) {
  auto in = open_input(file);
  const auto source = file.filename().string();
  const auto table = csv::read(in, source);
  const auto c_id = csv::column(table, "id", source);
  const auto c_row = csv::column(table, "tile_row", source);
  const auto c_col = csv::column(table, "tile_col", source);
  const auto c_group = csv::column(table, "age_group", source);
  const auto c_fit = csv::column(table, "fitness", source);
  const auto c_hh = csv::column(table, "household_id", source);
  const auto c_role = csv::column(table, "role", source);
  std::vector<Person> persons;
  persons.reserve(table.rows.size());
  for (const auto& r : table.rows) {
    Person p;
    const auto id = csv::parse_int(r.fields[c_id], r.line, source);
    if (id != static_cast<std::int64_t>(persons.size())) {
      fail(ErrorKind::Data, fmt::format("{}:{}: expected id {}, found {}", source, r.line, persons.size(), id));
    }
    p.id = static_cast<PersonId>(id);
    const auto row = csv::parse_int(r.fields[c_row], r.line, source);
    const auto col = csv::parse_int(r.fields[c_col], r.line, source);
    if (row < 0 || col < 0 || row >= grid.tiles_lat() || col >= grid.tiles_lon()) {
      fail(ErrorKind::Data, fmt::format("{}:{}: tile ({}, {}) is outside the grid", source, r.line, row, col));
    }
    p.tile = grid.index(static_cast<std::uint32_t>(row), static_cast<std::uint32_t>(col));
    const auto g = csv::parse_int(r.fields[c_group], r.line, source);
    if (g < 0 || g > std::numeric_limits<AgeGroup>::max()) {
      fail(ErrorKind::Data, fmt::format("{}:{}: invalid age group {}", source, r.line, g));
    }
    p.group = static_cast<AgeGroup>(g);
    p.fitness = csv::parse_double(r.fields[c_fit], r.line, source);
    if (!r.fields[c_hh].empty()) {
      p.household = static_cast<HouseholdId>(csv::parse_int(r.fields[c_hh], r.line, source));
    }
    p.role = parse_role_label(r.fields[c_role], r.line, source);
    persons.push_back(p);
  }
  return persons;
}

void write_edges(const fs::path& file, const EdgeSet& household, const EdgeSet& friendship) {
  Writer w(file);
  w.line("u,v,layer");
  for (const auto& e : household.edges) w.line("{},{},H", e.u, e.v);
  for (const auto& e : friendship.edges) w.line("{},{},F", e.u, e.v);
  w.close();
}

std::pair<EdgeSet, EdgeSet> read_edges(const fs::path& file) {
  auto in = open_input(file);
  const auto source = file.filename().string();
  EdgeSet h{Layer::Household, {}};
  EdgeSet f{Layer::Friendship, {}};
  std::string line;
  std::size_t number = 0;
  bool header = false;
  auto bad = [&](const char* why) {
    fail(ErrorKind::Parse, fmt::format("{}:{}: {}: '{}'", source, number, why, line));
  };
  while (std::getline(in, line)) {
    ++number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    if (!header) {
      if (line != "u,v,layer") bad("expected header u,v,layer");
      header = true;
      continue;
    }
    const char* p = line.data();
    const char* end = line.data() + line.size();
    Edge e;
    auto r = std::from_chars(p, end, e.u);
    if (r.ec != std::errc() || r.ptr == end || *r.ptr != ',') bad("malformed edge row");
    r = std::from_chars(r.ptr + 1, end, e.v);
    if (r.ec != std::errc() || r.ptr == end || *r.ptr != ',') bad("malformed edge row");
    const std::string_view layer(r.ptr + 1, static_cast<std::size_t>(end - r.ptr - 1));
    if (layer == "H") {
      h.edges.push_back(e);
    } else if (layer == "F") {
      f.edges.push_back(e);
    } else {
      bad("layer must be H or F");
    }
  }
  if (!header) fail(ErrorKind::Parse, fmt::format("{}: missing header", source));
  return {std::move(h), std::move(f)};
}

void write_households(const fs::path& file, const HouseholdSet& households) {
  Writer w(file);
  w.line("household_id,type,member_ids");
  for (std::size_t i = 0; i < households.households.size(); ++i) {
    const auto& h = households.households[i];
    w.line("{},{},{}", i, to_string(h.type), fmt::join(h.members, " "));
  }
  w.close();
}

void write_json(const fs::path& file, const json& doc) {
  std::ofstream out(file, std::ios::binary);
  if (!out) fail(ErrorKind::Io, fmt::format("cannot write {}", file.string()));
  out << doc.dump(2) << '\n';
  if (!out) fail(ErrorKind::Io, fmt::format("failed writing {}", file.string()));
}

json to_json(const MetricsReport& m) {
  json j;
  j["seed"] = m.seed;
  j["nodes"] = m.nodes;
  j["edges"] = m.edges;
  j["household_edges"] = m.household_edges;
  j["friendship_edges"] = m.friendship_edges;
  j["overlapping_pairs"] = m.overlapping_pairs;
  j["nu"] = m.nu;
  j["mu_hat"] = m.mu_hat;
  j["K"] = m.K;
  j["simple_mean_degree"] = m.simple_mean_degree;
  j["avg_path_length"] = m.path.mean;
  j["path_length_exact"] = m.path.exact;
  j["path_length_sources"] = m.path.sources;
  j["path_length_scope"] = "giant component";
  j["clustering_global"] = m.clustering.global;
  j["clustering_local"] = m.clustering.local_mean;
  j["triangles"] = m.clustering.triangles;
  j["assortativity"] = m.assortativity.defined ? json(m.assortativity.rho) : json(nullptr);
  j["assortativity_defined"] = m.assortativity.defined;
  j["components"] = m.component_count;
  std::vector<std::uint64_t> largest(m.component_sizes.begin(),
                                     m.component_sizes.begin() +
                                         static_cast<std::ptrdiff_t>(std::min<std::size_t>(20, m.component_sizes.size())));
  j["largest_component_sizes"] = largest;
  j["giant_fraction"] = m.giant_fraction;
  j["friendship_giant_fraction"] = m.friendship_giant_fraction;
  j["modularity"] = m.modularity;
  j["communities"] = m.community_count;
  j["degree_mean"] = m.degrees.mean;
  j["kl_poisson"] = m.degrees.kl;
  j["lognormal_tail"] = {{"lambda", m.degrees.tail.lambda},
                         {"sigma", m.degrees.tail.sigma},
                         {"samples", m.degrees.tail.samples},
                         {"residual", m.degrees.residuals.lognormal},
                         {"poisson_residual", m.degrees.residuals.poisson},
                         {"poisson_lambda", m.degrees.residuals.poisson_lambda}};
  return j;
}

void write_analysis(const fs::path& dir, const Analysis& a, const Grid& grid) {
  write_json(dir / "metrics.json", to_json(a.metrics));
  {
    Writer w(dir / "degree_hist.csv");
    w.line("degree,count");
    for (std::size_t k = 0; k < a.metrics.degrees.histogram.size(); ++k) {
      if (a.metrics.degrees.histogram[k] > 0) w.line("{},{}", k, a.metrics.degrees.histogram[k]);
    }
    w.close();
  }
  {
    Writer w(dir / "edge_length_hist.csv");
    w.line("bin_low_km,bin_high_km,count");
    const auto& s = a.spatial;
    for (std::size_t b = 0; b < s.edge_length_counts.size(); ++b) {
      w.line("{},{},{}", b * s.bin_km, (b + 1) * s.bin_km, s.edge_length_counts[b]);
    }
    w.close();
  }
  {
    Writer w(dir / "tile_stats.csv");
    w.line("row,col,population,mean_degree,max_degree");
    for (const auto& t : a.spatial.tiles) {
      w.line("{},{},{},{:.6f},{}", grid.row(t.tile), grid.col(t.tile), t.population, t.mean_degree, t.max_degree);
    }
    w.close();
  }
  {
    Writer w(dir / "g2g_matrix.csv");
    const auto& g = a.spatial.group_fractions;
    std::vector<std::string> head{"group"};
    for (std::size_t j = 0; j < g.size(); ++j) head.push_back(fmt::format("g{}", j));
    w.line("{}", fmt::join(head, ","));
    for (std::size_t i = 0; i < g.size(); ++i) {
      std::vector<std::string> row{fmt::format("g{}", i)};
      for (std::size_t j = 0; j < g.size(); ++j) row.push_back(fmt::format("{:.8f}", g(i, j)));
      w.line("{}", fmt::join(row, ","));
    }
    w.close();
  }
  {
    Writer w(dir / "group_degree.csv");
    w.line("group,mean_degree,peer_mean_degree");
    for (std::size_t i = 0; i < a.spatial.group_degree.size(); ++i) {
      w.line("{},{:.6f},{:.6f}", i, a.spatial.group_degree[i], a.spatial.peer_degree[i]);
    }
    w.close();
  }
  {
    Writer w(dir / "cluster_stats.csv");
    w.line("rank,community,size,intra_edges,mean_distance_km,max_distance_km");
    for (std::size_t i = 0; i < a.clusters.size(); ++i) {
      const auto& c = a.clusters[i];
      w.line("{},{},{},{},{:.6f},{:.6f}", i + 1, c.community, c.size, c.intra_edges, c.mean_distance_km,
             c.max_distance_km);
    }
    w.close();
  }
}

}  // namespace urbangraph
