#include "urbangraph/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <fmt/format.h>

#include "urbangraph/error.hpp"

namespace urbangraph {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Strict access to one JSON object: every key must be consumed.
class Fields {
 public:
  Fields(const json& obj, std::string where) : obj_(obj), where_(std::move(where)) {
    if (!obj_.is_object()) fail(ErrorKind::Config, fmt::format("{} must be an object", where_));
  }

  bool has(const std::string& key) const { return obj_.contains(key); }

  template <class T>
  T get(const std::string& key) {
    if (!obj_.contains(key)) fail(ErrorKind::Config, fmt::format("{}: missing key '{}'", where_, key));
    return convert<T>(key);
  }

  template <class T>
  T get(const std::string& key, T fallback) {
    return obj_.contains(key) ? convert<T>(key) : fallback;
  }

  const json& raw(const std::string& key) {
    if (!obj_.contains(key)) fail(ErrorKind::Config, fmt::format("{}: missing key '{}'", where_, key));
    used_.insert(key);
    return obj_.at(key);
  }

  void finish() const {
    for (const auto& [key, value] : obj_.items()) {
      if (!used_.count(key)) fail(ErrorKind::Config, fmt::format("{}: unknown key '{}'", where_, key));
    }
  }

  const std::string& where() const { return where_; }

 private:
  template <class T>
  T convert(const std::string& key) {
    used_.insert(key);
    const auto& v = obj_.at(key);
    if constexpr (std::is_same_v<T, bool>) {
      if (!v.is_boolean()) fail(ErrorKind::Config, fmt::format("{}.{} must be a boolean", where_, key));
    } else if constexpr (std::is_integral_v<T>) {
      if (!v.is_number_integer() || (v.is_number_integer() && !v.is_number_unsigned() && v.get<std::int64_t>() < 0)) {
        fail(ErrorKind::Config, fmt::format("{}.{} must be a nonnegative integer", where_, key));
      }
    } else if constexpr (std::is_floating_point_v<T>) {
      if (!v.is_number()) fail(ErrorKind::Config, fmt::format("{}.{} must be a number", where_, key));
    } else {
      if (!v.is_string()) fail(ErrorKind::Config, fmt::format("{}.{} must be a string", where_, key));
    }
    return v.get<T>();
  }

  const json& obj_;
  std::string where_;
  std::set<std::string> used_;
};

FitnessSpec parse_fitness(const json& node) {
  if (node.is_string()) {
    const auto kind = node.get<std::string>();
    if (kind == "constant") return ConstantFitness{};
    if (kind == "lognormal") return ShiftedLognormalFitness{1.0, 0.6931471805599453, 0.25};
    if (kind == "pareto") return ParetoFitness{};
    if (kind == "uniform") return UniformFitness{};
    fail(ErrorKind::Config, fmt::format("unknown fitness kind '{}'", kind));
  }
  Fields f(node, "fitness");
  const auto kind = f.get<std::string>("kind");
  FitnessSpec spec;
  if (kind == "constant") {
    spec = ConstantFitness{f.get<double>("value", 1.0)};
  } else if (kind == "lognormal") {
    spec = ShiftedLognormalFitness{f.get<double>("shift", 1.0), f.get<double>("lambda", 0.6931471805599453),
                                   f.get<double>("sigma2", 0.25)};
  } else if (kind == "pareto") {
    spec = ParetoFitness{f.get<double>("scale", 1.0), f.get<double>("alpha", 2.0)};
  } else if (kind == "uniform") {
    spec = UniformFitness{f.get<double>("low", 1.0), f.get<double>("high", 2.0)};
  } else {
    fail(ErrorKind::Config, fmt::format("unknown fitness kind '{}'", kind));
  }
  f.finish();
  try {
    validate(spec);
  } catch (const Error& e) {
    fail(ErrorKind::Config, e.what());
  }
  return spec;
}

json fitness_json(const FitnessSpec& spec) {
  return std::visit(
      [](const auto& s) -> json {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, ConstantFitness>) {
          return {{"kind", "constant"}, {"value", s.value}};
        } else if constexpr (std::is_same_v<T, ShiftedLognormalFitness>) {
          return {{"kind", "lognormal"}, {"shift", s.shift}, {"lambda", s.lambda}, {"sigma2", s.sigma2}};
        } else if constexpr (std::is_same_v<T, ParetoFitness>) {
          return {{"kind", "pareto"}, {"scale", s.scale}, {"alpha", s.alpha}};
        } else {
          return {{"kind", "uniform"}, {"low", s.low}, {"high", s.high}};
        }
      },
      spec);
}

MixingMode parse_mixing(const std::string& s) {
  if (s == "data") return MixingMode::Data;
  if (s == "homogeneous") return MixingMode::Homogeneous;
  fail(ErrorKind::Config, fmt::format("mixing must be 'data' or 'homogeneous', got '{}'", s));
}

DensityMode parse_density(const std::string& s) {
  if (s == "real-density") return DensityMode::Real;
  if (s == "uniform-density") return DensityMode::Uniform;
  fail(ErrorKind::Config, fmt::format("population must be 'real-density' or 'uniform-density', got '{}'", s));
}

GroupSizeMode parse_group_sizes(const std::string& s) {
  if (s == "real") return GroupSizeMode::Real;
  if (s == "uniform") return GroupSizeMode::Uniform;
  fail(ErrorKind::Config, fmt::format("group_sizes must be 'real' or 'uniform', got '{}'", s));
}

fs::path resolve(const fs::path& base, const std::string& p) {
  if (p.empty()) return {};
  fs::path path(p);
  if (path.is_relative()) path = base / path;
  return path.lexically_normal();
}

void require_file(const fs::path& p, const char* what) {
  if (p.empty()) fail(ErrorKind::Config, fmt::format("input '{}' is required by this configuration", what));
  std::error_code ec;
  if (!fs::is_regular_file(p, ec)) fail(ErrorKind::Io, fmt::format("input '{}' not found: {}", what, p.string()));
}

std::uint64_t fnv1a(std::string_view bytes, std::uint64_t h) {
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) fail(ErrorKind::Io, fmt::format("cannot read {}", p.string()));
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json generation_json(const RunConfig& c) {
  json j = to_json(c);
  j.erase("output_dir");
  j.erase("runs");
  j.erase("seed");
  j.erase("path_length_sources");
  j.erase("path_length_exact_limit");
  j.erase("communities");
  j.erase("inputs");
  return j;
}

std::string number_label(double v) { return fmt::format("{}", v); }

}  // namespace

std::string to_string(MixingMode mode) { return mode == MixingMode::Data ? "data" : "homogeneous"; }
std::string to_string(DensityMode mode) { return mode == DensityMode::Real ? "real-density" : "uniform-density"; }
std::string to_string(GroupSizeMode mode) { return mode == GroupSizeMode::Real ? "real" : "uniform"; }

std::string fitness_label(const FitnessSpec& spec) {
  switch (spec.index()) {
    case 0: return "constant";
    case 1: return "lognormal";
    case 2: return "pareto";
    default: return "uniform";
  }
}

json read_json_file(const fs::path& file) {
  const auto text = slurp(file);
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    fail(ErrorKind::Parse, fmt::format("{}: {}", file.string(), e.what()));
  }
}

RunConfig parse_run_config(const json& doc, const fs::path& base_dir) {
  RunConfig c;
  Fields top(doc, "config");
  {
    Fields grid(top.raw("grid"), "grid");
    Fields origin(grid.raw("origin"), "grid.origin");
    c.origin = {origin.get<double>("lat"), origin.get<double>("lon")};
    origin.finish();
    c.tile_km = grid.get<double>("tile_km", 1.0);
    c.tiles_lat = grid.get<std::uint32_t>("tiles_lat");
    c.tiles_lon = grid.get<std::uint32_t>("tiles_lon");
    grid.finish();
  }
  {
    Fields in(top.raw("inputs"), "inputs");
    c.inputs.tiles = resolve(base_dir, in.get<std::string>("tiles"));
    c.inputs.polygon = resolve(base_dir, in.get<std::string>("polygon", ""));
    c.inputs.age_distribution = resolve(base_dir, in.get<std::string>("age_distribution"));
    c.inputs.roles = resolve(base_dir, in.get<std::string>("roles", ""));
    c.inputs.sizes = resolve(base_dir, in.get<std::string>("sizes", ""));
    c.inputs.contact_matrix = resolve(base_dir, in.get<std::string>("contact_matrix", ""));
    in.finish();
  }
  c.mu = top.get<double>("mu", c.mu);
  if (top.has("distance_kernel")) {
    Fields k(top.raw("distance_kernel"), "distance_kernel");
    const auto kind = k.get<std::string>("kind", "inverse-power");
    if (kind == "inverse-power") {
      c.kernel.kind = KernelKind::InversePower;
    } else if (kind == "constant-one") {
      c.kernel.kind = KernelKind::ConstantOne;
    } else {
      fail(ErrorKind::Config, fmt::format("distance_kernel.kind must be 'inverse-power' or 'constant-one', got '{}'",
                                          kind));
    }
    c.kernel.beta = k.get<double>("beta", c.kernel.beta);
    k.finish();
  }
  if (top.has("fitness")) c.fitness = parse_fitness(top.raw("fitness"));
  c.mixing = parse_mixing(top.get<std::string>("mixing", "data"));
  c.population = parse_density(top.get<std::string>("population", "real-density"));
  c.group_sizes = parse_group_sizes(top.get<std::string>("group_sizes", "real"));
  c.households = top.get<bool>("households", c.households);
  if (top.has("target_population")) c.target_population = top.get<std::uint64_t>("target_population");
  c.age_perturbation = top.get<double>("age_perturbation", 0.0);
  c.seed = top.get<std::uint64_t>("seed", c.seed);
  c.runs = top.get<std::uint32_t>("runs", c.runs);
  c.output_dir = resolve(base_dir, top.get<std::string>("output_dir", "out"));
  c.path_length_sources = top.get<std::size_t>("path_length_sources", c.path_length_sources);
  c.path_length_exact_limit = top.get<std::size_t>("path_length_exact_limit", c.path_length_exact_limit);
  c.communities = top.get<bool>("communities", c.communities);
  top.finish();

  try {
    (void)c.grid();
    c.kernel.validate();
  } catch (const Error& e) {
    fail(ErrorKind::Config, e.what());
  }
  if (!(c.mu >= 0.0) || !std::isfinite(c.mu)) fail(ErrorKind::Config, "mu must be >= 0");
  if (c.runs < 1) fail(ErrorKind::Config, "runs must be >= 1");
  if (!(c.age_perturbation >= 0.0)) fail(ErrorKind::Config, "age_perturbation must be >= 0");
  if (c.target_population && *c.target_population == 0) fail(ErrorKind::Config, "target_population must be >= 1");

  require_file(c.inputs.tiles, "tiles");
  require_file(c.inputs.age_distribution, "age_distribution");
  if (!c.inputs.polygon.empty()) require_file(c.inputs.polygon, "polygon");
  if (c.households) {
    require_file(c.inputs.roles, "roles");
    require_file(c.inputs.sizes, "sizes");
  }
  if (c.mixing == MixingMode::Data) require_file(c.inputs.contact_matrix, "contact_matrix");
  return c;
}

RunConfig load_run_config(const fs::path& file) {
  return parse_run_config(read_json_file(file), fs::absolute(file).parent_path());
}

json to_json(const RunConfig& c) {
  json j;
  j["grid"] = {{"origin", {{"lat", c.origin.lat}, {"lon", c.origin.lon}}},
               {"tile_km", c.tile_km},
               {"tiles_lat", c.tiles_lat},
               {"tiles_lon", c.tiles_lon}};
  json in = {{"tiles", c.inputs.tiles.string()}, {"age_distribution", c.inputs.age_distribution.string()}};
  if (!c.inputs.polygon.empty()) in["polygon"] = c.inputs.polygon.string();
  if (!c.inputs.roles.empty()) in["roles"] = c.inputs.roles.string();
  if (!c.inputs.sizes.empty()) in["sizes"] = c.inputs.sizes.string();
  if (!c.inputs.contact_matrix.empty()) in["contact_matrix"] = c.inputs.contact_matrix.string();
  j["inputs"] = in;
  j["mu"] = c.mu;
  j["distance_kernel"] = {{"kind", c.kernel.kind == KernelKind::ConstantOne ? "constant-one" : "inverse-power"},
                          {"beta", c.kernel.beta}};
  j["fitness"] = fitness_json(c.fitness);
  j["mixing"] = to_string(c.mixing);
  j["population"] = to_string(c.population);
  j["group_sizes"] = to_string(c.group_sizes);
  j["households"] = c.households;
  if (c.target_population) j["target_population"] = *c.target_population;
  j["age_perturbation"] = c.age_perturbation;
  j["seed"] = c.seed;
  j["runs"] = c.runs;
  j["output_dir"] = c.output_dir.string();
  j["path_length_sources"] = c.path_length_sources;
  j["path_length_exact_limit"] = c.path_length_exact_limit;
  j["communities"] = c.communities;
  return j;
}

std::string config_hash(const RunConfig& c) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  h = fnv1a(generation_json(c).dump(), h);
  const std::pair<const char*, const fs::path*> files[] = {
      {"tiles", &c.inputs.tiles},   {"polygon", &c.inputs.polygon}, {"age_distribution", &c.inputs.age_distribution},
      {"roles", &c.inputs.roles},   {"sizes", &c.inputs.sizes},     {"contact_matrix", &c.inputs.contact_matrix},
  };
  for (const auto& [label, path] : files) {
    const bool used = !path->empty() && (std::string_view(label) != "roles" || c.households) &&
                      (std::string_view(label) != "sizes" || c.households) &&
                      (std::string_view(label) != "contact_matrix" || c.mixing == MixingMode::Data);
    if (!used) continue;
    h = fnv1a(label, h);
    h = fnv1a(slurp(*path), h);
  }
  return fmt::format("{:016x}", h);
}

bool is_experiment_config(const json& doc) { return doc.is_object() && doc.contains("axes"); }

ExperimentConfig parse_experiment_config(const json& doc, const fs::path& base_dir) {
  Fields top(doc, "experiment");
  ExperimentConfig e;
  const auto& base = top.raw("base");
  json base_doc;
  fs::path base_root = base_dir;
  if (base.is_string()) {
    const auto file = resolve(base_dir, base.get<std::string>());
    base_doc = read_json_file(file);
    base_root = file.parent_path();
  } else {
    base_doc = base;
  }
  if (top.has("seed")) base_doc["seed"] = top.get<std::uint64_t>("seed");
  if (top.has("runs")) base_doc["runs"] = top.get<std::uint32_t>("runs");
  if (top.has("output_dir")) base_doc["output_dir"] = resolve(base_dir, top.get<std::string>("output_dir")).string();
  e.base = parse_run_config(base_doc, base_root);
  e.write_graphs = top.get<bool>("write_graphs", false);

  Fields axes(top.raw("axes"), "axes");
  auto list = [&](const char* key) -> json {
    if (!axes.has(key)) return json::array();
    const auto& v = axes.raw(key);
    if (!v.is_array() || v.empty()) fail(ErrorKind::Config, fmt::format("axes.{} must be a nonempty array", key));
    return v;
  };
  try {
    for (const auto& v : list("mu")) e.axes.mu.push_back(v.get<double>());
    for (const auto& v : list("beta")) e.axes.beta.push_back(v.get<double>());
    for (const auto& v : list("fitness")) e.axes.fitness.push_back(parse_fitness(v));
    for (const auto& v : list("mixing")) e.axes.mixing.push_back(parse_mixing(v.get<std::string>()));
    for (const auto& v : list("population")) e.axes.population.push_back(parse_density(v.get<std::string>()));
    for (const auto& v : list("group_sizes")) e.axes.group_sizes.push_back(parse_group_sizes(v.get<std::string>()));
    for (const auto& v : list("households")) e.axes.households.push_back(v.get<bool>());
  } catch (const json::exception& ex) {
    fail(ErrorKind::Config, fmt::format("axes: {}", ex.what()));
  }
  axes.finish();
  top.finish();

  if (e.axes.mu.empty()) e.axes.mu = {e.base.mu};
  if (e.axes.beta.empty()) e.axes.beta = {e.base.kernel.beta};
  if (e.axes.fitness.empty()) e.axes.fitness = {e.base.fitness};
  if (e.axes.mixing.empty()) e.axes.mixing = {e.base.mixing};
  if (e.axes.population.empty()) e.axes.population = {e.base.population};
  if (e.axes.group_sizes.empty()) e.axes.group_sizes = {e.base.group_sizes};
  if (e.axes.households.empty()) e.axes.households = {e.base.households};
  for (auto mu : e.axes.mu) {
    if (!(mu >= 0.0)) fail(ErrorKind::Config, "axes.mu values must be >= 0");
  }
  for (auto b : e.axes.beta) {
    if (!(b >= 0.0)) fail(ErrorKind::Config, "axes.beta values must be >= 0");
  }
  for (auto m : e.axes.mixing) {
    if (m == MixingMode::Data) require_file(e.base.inputs.contact_matrix, "contact_matrix");
  }
  for (auto h : e.axes.households) {
    if (h) {
      require_file(e.base.inputs.roles, "roles");
      require_file(e.base.inputs.sizes, "sizes");
    }
  }
  return e;
}

ExperimentConfig load_experiment_config(const fs::path& file) {
  return parse_experiment_config(read_json_file(file), fs::absolute(file).parent_path());
}

std::vector<ExperimentCell> expand(const ExperimentConfig& e) {
  std::vector<ExperimentCell> cells;
  for (auto mu : e.axes.mu) {
    for (auto beta : e.axes.beta) {
      for (const auto& fit : e.axes.fitness) {
        for (auto mix : e.axes.mixing) {
          for (auto pop : e.axes.population) {
            for (auto gs : e.axes.group_sizes) {
              for (bool hh : e.axes.households) {
                ExperimentCell cell;
                cell.config = e.base;
                cell.config.mu = mu;
                cell.config.kernel.beta = beta;
                cell.config.fitness = fit;
                cell.config.mixing = mix;
                cell.config.population = pop;
                cell.config.group_sizes = gs;
                cell.config.households = hh;
                cell.name = fmt::format("mu={} beta={} fitness={} mixing={} population={} group_sizes={} households={}",
                                        number_label(mu), number_label(beta), fitness_label(fit), to_string(mix),
                                        to_string(pop), to_string(gs), hh ? "on" : "off");
                cells.push_back(std::move(cell));
              }
            }
          }
        }
      }
    }
  }
  return cells;
}

}  // namespace urbangraph
