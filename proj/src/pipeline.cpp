#include "urbangraph/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <fmt/format.h>
#include <fmt/ranges.h>

#include "urbangraph/error.hpp"
#include "urbangraph/friendship.hpp"
#include "urbangraph/io.hpp"

namespace urbangraph {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::ifstream open_input(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) fail(ErrorKind::Io, fmt::format("cannot open {}", p.string()));
  return in;
}

void make_dirs(const fs::path& p) {
  std::error_code ec;
  fs::create_directories(p, ec);
  if (ec) fail(ErrorKind::Io, fmt::format("cannot create {}: {}", p.string(), ec.message()));
}

using Extractor = double (*)(const MetricsReport&);

const std::vector<std::pair<const char*, Extractor>>& scalar_metrics() {
  static const std::vector<std::pair<const char*, Extractor>> list = {
      {"K", [](const MetricsReport& m) { return m.K; }},
      {"nu", [](const MetricsReport& m) { return m.nu; }},
      {"mu_hat", [](const MetricsReport& m) { return m.mu_hat; }},
      {"avg_path_length", [](const MetricsReport& m) { return m.path.mean; }},
      {"clustering_global", [](const MetricsReport& m) { return m.clustering.global; }},
      {"clustering_local", [](const MetricsReport& m) { return m.clustering.local_mean; }},
      {"assortativity", [](const MetricsReport& m) { return m.assortativity.rho; }},
      {"components", [](const MetricsReport& m) { return static_cast<double>(m.component_count); }},
      {"giant_fraction", [](const MetricsReport& m) { return m.giant_fraction; }},
      {"friendship_giant_fraction", [](const MetricsReport& m) { return m.friendship_giant_fraction; }},
      {"modularity", [](const MetricsReport& m) { return m.modularity; }},
      {"communities", [](const MetricsReport& m) { return static_cast<double>(m.community_count); }},
      {"kl_poisson", [](const MetricsReport& m) { return m.degrees.kl; }},
      {"lognormal_tail_residual", [](const MetricsReport& m) { return m.degrees.residuals.lognormal; }},
      {"poisson_tail_residual", [](const MetricsReport& m) { return m.degrees.residuals.poisson; }},
  };
  return list;
}

std::vector<double> pool(const std::vector<MetricsReport>& reports) {
  std::vector<double> pooled;
  for (const auto& r : reports) {
    if (r.degrees.histogram.size() > pooled.size()) pooled.resize(r.degrees.histogram.size(), 0.0);
    for (std::size_t k = 0; k < r.degrees.histogram.size(); ++k) pooled[k] += r.degrees.histogram[k];
  }
  return pooled;
}

json aggregate_json(const std::vector<MetricsReport>& reports) {
  json metrics = json::object();
  for (const auto& [name, get] : scalar_metrics()) {
    std::vector<double> v;
    for (const auto& r : reports) v.push_back(get(r));
    const auto s = summarize(v);
    metrics[name] = {{"mean", s.mean}, {"ci95_low", s.low}, {"ci95_high", s.high}, {"n", s.n}};
  }
  json j;
  j["runs"] = reports.size();
  j["interval"] = "95% percentile interval across runs";
  j["metrics"] = metrics;
  const auto pooled = pool(reports);
  if (!pooled.empty()) j["kl_poisson_pooled"] = kl_poisson(pooled);
  return j;
}

void write_pooled_histogram(const fs::path& file, const std::vector<MetricsReport>& reports) {
  std::ofstream out(file);
  if (!out) fail(ErrorKind::Io, fmt::format("cannot write {}", file.string()));
  out << "degree,count\n";
  const auto pooled = pool(reports);
  for (std::size_t k = 0; k < pooled.size(); ++k) {
    if (pooled[k] > 0) out << k << ',' << pooled[k] << '\n';
  }
}

json manifest_json(const RunConfig& config, std::uint32_t run, const GeneratedGraph& g) {
  json j;
  j["run"] = run;
  j["seed"] = g.seed;
  j["base_seed"] = config.seed;
  j["config_hash"] = config_hash(config);
  j["config"] = to_json(config);
  j["nodes"] = g.graph.node_count();
  j["households"] = g.households.households.size();
  j["unassigned"] = g.households.unassigned.size();
  j["household_edges"] = g.graph.household.size();
  j["friendship_edges"] = g.graph.friendship.size();
  j["overlapping_pairs"] = g.graph.overlapping_pairs;
  j["age_probabilities"] = g.age_probabilities;
  j["mu_max"] = std::isfinite(g.mu_max) ? json(g.mu_max) : json(nullptr);
  j["warnings"] = g.warnings;
  return j;
}

}  // namespace

LoadedInputs load_inputs(const RunConfig& config) {
  LoadedInputs in;
  in.grid = config.grid();
  TileMask mask = TileMask::all_active(in.grid);
  if (!config.inputs.polygon.empty()) {
    auto poly_in = open_input(config.inputs.polygon);
    const auto polygon = load_polygon(poly_in);
    auto filtered = filter_tiles(in.grid, polygon);
    if (filtered.disjoint) in.warnings.push_back("the polygon contains no tile center");
    mask = std::move(filtered.mask);
  }
  {
    auto tiles_in = open_input(config.inputs.tiles);
    auto load = load_tile_population(in.grid, mask, tiles_in, config.inputs.tiles.filename().string());
    if (load.dropped_rows > 0) {
      in.warnings.push_back(fmt::format("{} tile rows ({} residents) lie outside the active area and were dropped",
                                        load.dropped_rows, load.dropped_population));
    }
    in.mask = std::move(load.mask);
  }
  if (config.target_population) in.mask = rescale_population(in.mask, *config.target_population);
  {
    auto ages_in = open_input(config.inputs.age_distribution);
    in.ages = load_age_distribution(ages_in, config.inputs.age_distribution.filename().string());
  }
  const auto groups = in.ages.group_count();
  if (!config.inputs.roles.empty()) {
    auto roles_in = open_input(config.inputs.roles);
    in.roles = load_role_table(roles_in, config.inputs.roles.filename().string());
    if (in.roles->group_count() != groups) {
      fail(ErrorKind::Config, fmt::format("role table covers {} age groups, the age distribution has {}",
                                          in.roles->group_count(), groups));
    }
  }
  if (!config.inputs.sizes.empty()) {
    auto sizes_in = open_input(config.inputs.sizes);
    in.sizes = load_size_table(sizes_in, config.inputs.sizes.filename().string());
  }
  if (!config.inputs.contact_matrix.empty()) {
    auto contacts_in = open_input(config.inputs.contact_matrix);
    in.contacts = load_contact_matrix(contacts_in, config.inputs.contact_matrix.filename().string());
    if (in.contacts->gamma.size() != groups) {
      fail(ErrorKind::Config, fmt::format("contact matrix has {} groups, the age distribution has {}",
                                          in.contacts->gamma.size(), groups));
    }
  }
  return in;
}

GeneratedGraph generate(const RunConfig& config, const LoadedInputs& inputs, std::uint64_t seed,
                        const fs::path* report_dir) {
  GeneratedGraph out;
  out.seed = seed;
  out.warnings = inputs.warnings;

  const TileMask mask =
      config.population == DensityMode::Uniform ? uniform_density_mask(inputs.mask, seed) : inputs.mask;

  const auto groups = inputs.ages.group_count();
  std::vector<double> probs(inputs.ages.probabilities().begin(), inputs.ages.probabilities().end());
  if (config.group_sizes == GroupSizeMode::Uniform) std::fill(probs.begin(), probs.end(), 1.0 / groups);
  if (config.age_perturbation > 0.0) probs = perturb_age_distribution(probs, config.age_perturbation, seed);
  {
    double sum = 0.0;
    for (std::size_t i = 0; i + 1 < probs.size(); ++i) sum += probs[i];
    probs.back() = std::max(0.0, 1.0 - sum);
  }
  out.age_probabilities = probs;
  const AgeDistribution ages(std::vector<double>(inputs.ages.lower_breaks().begin(), inputs.ages.lower_breaks().end()),
                             probs);

  auto persons = synthesize_population(mask, ages, config.fitness, seed);

  EdgeSet household{Layer::Household, {}};
  if (config.households) {
    if (!inputs.roles || !inputs.sizes) fail(ErrorKind::Config, "households need role and size tables");
    assign_roles(persons, *inputs.roles, seed);
    out.households = build_households(persons, *inputs.sizes, seed);
    apply_households(persons, out.households);
    household = household_edges(out.households);
    const double unassigned =
        static_cast<double>(out.households.unassigned.size()) / static_cast<double>(persons.size());
    if (unassigned > 0.01) {
      out.warnings.push_back(fmt::format("{:.2f}% of persons could not be placed in a household", 100 * unassigned));
    }
  }

  const auto sizes = group_sizes(persons, groups);
  MixingMatrix mixing;
  if (config.mixing == MixingMode::Data) {
    if (!inputs.contacts) fail(ErrorKind::Config, "data-driven mixing needs a contact matrix");
    mixing = edge_frequency_matrix(reciprocity_correct(*inputs.contacts, sizes), sizes);
  } else {
    mixing = homogeneous_S(groups);
  }

  const auto ctx = FriendshipContext::build(persons, inputs.grid, mixing, config.kernel, config.mu);
  for (const auto& w : ctx.warnings()) out.warnings.push_back(w);
  out.mu_max = ctx.max_feasible_mu();
  const bool feasible = !(config.mu > out.mu_max * (1.0 + 1e-12));
  if (report_dir) {
    write_json(*report_dir / "feasibility.json",
               {{"mu", config.mu},
                {"mu_max", std::isfinite(out.mu_max) ? json(out.mu_max) : json(nullptr)},
                {"feasible", feasible},
                {"mean_kernel", ctx.mean_kernel()},
                {"mean_fitness", ctx.mean_fitness()}});
  }
  validate_mu(ctx);
  auto friendship = sample_friendship_edges(ctx, seed);
  out.graph = assemble_graph(std::move(persons), std::move(household), std::move(friendship));
  return out;
}

AnalysisOptions analysis_options(const RunConfig& config, std::uint64_t seed) {
  AnalysisOptions o;
  o.seed = seed;
  o.path_sources = config.path_length_sources;
  o.exact_limit = config.path_length_exact_limit;
  o.communities = config.communities;
  o.tail_threshold = std::max(1.0, config.mu);
  return o;
}

std::uint64_t run_seed(const RunConfig& config, std::uint32_t run) { return split_seed(config.seed, run); }

fs::path run_directory(const fs::path& root, std::uint32_t run) { return root / fmt::format("run_{:03}", run); }

void run_generate(const RunConfig& config, std::ostream& log) {
  const auto inputs = load_inputs(config);
  for (const auto& w : inputs.warnings) log << "warning: " << w << '\n';
  for (std::uint32_t r = 0; r < config.runs; ++r) {
    const auto dir = run_directory(config.output_dir, r);
    make_dirs(dir);
    const auto seed = run_seed(config, r);
    const auto g = generate(config, inputs, seed, &dir);
    write_nodes(dir / "nodes.csv", g.graph.persons, inputs.grid);
    write_edges(dir / "edges.csv", g.graph.household, g.graph.friendship);
    write_households(dir / "households.csv", g.households);
    write_json(dir / "manifest.json", manifest_json(config, r, g));
    log << fmt::format("run {:03}: seed {} N={} |E_H|={} |E_F|={} mu_max={:.4g} -> {}\n", r, seed,
                       g.graph.node_count(), g.graph.household.size(), g.graph.friendship.size(), g.mu_max,
                       dir.string());
  }
}

Interval summarize(std::vector<double> values) {
  values.erase(std::remove_if(values.begin(), values.end(), [](double v) { return !std::isfinite(v); }), values.end());
  Interval s;
  s.n = values.size();
  if (values.empty()) {
    s.mean = s.low = s.high = std::numeric_limits<double>::quiet_NaN();
    return s;
  }
  std::sort(values.begin(), values.end());
  double sum = 0.0;
  for (double v : values) sum += v;
  s.mean = sum / static_cast<double>(values.size());
  auto quantile = [&](double q) {
    const double pos = q * static_cast<double>(values.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, values.size() - 1);
    return values[lo] + (pos - static_cast<double>(lo)) * (values[hi] - values[lo]);
  };
  s.low = quantile(0.025);
  s.high = quantile(0.975);
  return s;
}

void run_analyze(const RunConfig& config, const fs::path& root, bool allow_hash_mismatch, std::ostream& log) {
  std::vector<fs::path> dirs;
  std::error_code ec;
  if (fs::is_regular_file(root / "manifest.json", ec)) {
    dirs.push_back(root);
  } else if (fs::is_directory(root, ec)) {
    for (const auto& entry : fs::directory_iterator(root)) {
      if (entry.is_directory() && fs::is_regular_file(entry.path() / "manifest.json")) dirs.push_back(entry.path());
    }
    std::sort(dirs.begin(), dirs.end());
  }
  if (dirs.empty()) fail(ErrorKind::Io, fmt::format("no generated runs found under {}", root.string()));

  const auto grid = config.grid();
  std::size_t groups = 0;
  {
    auto ages_in = open_input(config.inputs.age_distribution);
    groups = load_age_distribution(ages_in).group_count();
  }
  const auto expected_hash = config_hash(config);
  std::vector<MetricsReport> reports;
  for (const auto& dir : dirs) {
    const auto manifest = read_json_file(dir / "manifest.json");
    if (!manifest.contains("config_hash") || !manifest.contains("seed")) {
      fail(ErrorKind::Data, fmt::format("{}: manifest lacks config_hash or seed", dir.string()));
    }
    const auto hash = manifest["config_hash"].get<std::string>();
    if (hash != expected_hash) {
      if (!allow_hash_mismatch) {
        fail(ErrorKind::Config, fmt::format("{}: manifest config hash {} differs from the current config ({}); "
                                            "pass --allow-hash-mismatch to analyse anyway",
                                            dir.string(), hash, expected_hash));
      }
      log << fmt::format("warning: {}: config hash mismatch ({} vs {})\n", dir.string(), hash, expected_hash);
    }
    const auto seed = manifest["seed"].get<std::uint64_t>();
    auto persons = read_nodes(dir / "nodes.csv", grid);
    auto [household, friendship] = read_edges(dir / "edges.csv");
    for (const auto& p : persons) groups = std::max<std::size_t>(groups, p.group + 1u);
    const auto graph = assemble_graph(std::move(persons), std::move(household), std::move(friendship));
    const auto analysis = analyze(graph, grid, groups, analysis_options(config, seed));
    write_analysis(dir, analysis, grid);
    const auto& m = analysis.metrics;
    log << fmt::format("{}: N={} K={:.3f} giant={:.4f} C={:.4g} rho={:.3f} dist={:.3f} Q={:.3f}\n", dir.string(),
                       m.nodes, m.K, m.giant_fraction, m.clustering.global, m.assortativity.rho, m.path.mean,
                       m.modularity);
    reports.push_back(analysis.metrics);
  }
  if (dirs.size() > 1 || dirs.front() != root) {
    auto agg = aggregate_json(reports);
    agg["config_hash"] = expected_hash;
    write_json(root / "aggregate.json", agg);
    write_pooled_histogram(root / "degree_hist_pooled.csv", reports);
  }
}

std::size_t run_experiment(const ExperimentConfig& experiment, std::ostream& log) {
  const auto& base = experiment.base;
  make_dirs(base.output_dir);
  const auto inputs = load_inputs(base);
  for (const auto& w : inputs.warnings) log << "warning: " << w << '\n';
  const auto cells = expand(experiment);

  std::ofstream giant(base.output_dir / "table_giant.csv");
  std::ofstream table(base.output_dir / "table_metrics.csv");
  if (!giant || !table) fail(ErrorKind::Io, fmt::format("cannot write tables in {}", base.output_dir.string()));
  const char* axes = "cell,mu,beta,fitness,mixing,population,group_sizes,households,runs";
  giant << axes << ",giant_F_mean,giant_F_low,giant_F_high,giant_G_mean,giant_G_low,giant_G_high,status\n";
  table << axes;
  for (const auto& [name, get] : scalar_metrics()) table << ',' << name << "_mean," << name << "_low," << name << "_high";
  table << ",kl_poisson_pooled,status\n";

  std::size_t failures = 0;
  for (std::size_t c = 0; c < cells.size(); ++c) {
    const auto& cell = cells[c];
    const auto& cfg = cell.config;
    const auto dir = base.output_dir / fmt::format("cell_{:03}", c);
    const auto prefix =
        fmt::format("{},{},{},{},{},{},{},{},{}", c, cfg.mu, cfg.kernel.beta, fitness_label(cfg.fitness),
                    to_string(cfg.mixing), to_string(cfg.population), to_string(cfg.group_sizes),
                    cfg.households ? "on" : "off", cfg.runs);
    log << fmt::format("cell {:03}: {}\n", c, cell.name);
    std::vector<MetricsReport> reports;
    std::string status = "ok";
    try {
      make_dirs(dir);
      write_json(dir / "cell.json", {{"name", cell.name}, {"config", to_json(cfg)}, {"config_hash", config_hash(cfg)}});
      for (std::uint32_t r = 0; r < cfg.runs; ++r) {
        const auto rdir = run_directory(dir, r);
        make_dirs(rdir);
        const auto seed = run_seed(cfg, r);
        const auto g = generate(cfg, inputs, seed, &rdir);
        if (experiment.write_graphs) {
          write_nodes(rdir / "nodes.csv", g.graph.persons, inputs.grid);
          write_edges(rdir / "edges.csv", g.graph.household, g.graph.friendship);
          write_households(rdir / "households.csv", g.households);
        }
        write_json(rdir / "manifest.json", manifest_json(cfg, r, g));
        const auto analysis = analyze(g.graph, inputs.grid, inputs.ages.group_count(), analysis_options(cfg, seed));
        write_analysis(rdir, analysis, inputs.grid);
        reports.push_back(analysis.metrics);
      }
      write_json(dir / "aggregate.json", aggregate_json(reports));
    } catch (const Error& e) {
      status = fmt::format("failed ({}): {}", to_string(e.kind()), e.what());
      ++failures;
      log << "  " << status << '\n';
    } catch (const std::exception& e) {
      status = fmt::format("failed: {}", e.what());
      ++failures;
      log << "  " << status << '\n';
    }
    std::replace(status.begin(), status.end(), ',', ';');
    std::replace(status.begin(), status.end(), '\n', ' ');

    std::vector<double> gf;
    std::vector<double> gg;
    for (const auto& r : reports) {
      gf.push_back(r.friendship_giant_fraction);
      gg.push_back(r.giant_fraction);
    }
    const auto sf = summarize(gf);
    const auto sg = summarize(gg);
    giant << prefix << fmt::format(",{},{},{},{},{},{},{}\n", sf.mean, sf.low, sf.high, sg.mean, sg.low, sg.high, status);
    table << prefix;
    for (const auto& [name, get] : scalar_metrics()) {
      std::vector<double> v;
      for (const auto& r : reports) v.push_back(get(r));
      const auto s = summarize(v);
      table << fmt::format(",{},{},{}", s.mean, s.low, s.high);
    }
    const auto pooled = pool(reports);
    table << ',' << (pooled.empty() ? std::numeric_limits<double>::quiet_NaN() : kl_poisson(pooled)) << ',' << status
          << '\n';
    giant.flush();
    table.flush();
  }
  return failures;
}

}  // namespace urbangraph
