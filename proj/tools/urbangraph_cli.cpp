// urbangraph: synthesize and analyse geo-referenced social graphs.

#include <iostream>
#include <optional>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <omp.h>

#include "urbangraph/config.hpp"
#include "urbangraph/error.hpp"
#include "urbangraph/households.hpp"
#include "urbangraph/pipeline.hpp"

namespace {

using namespace urbangraph;

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Feasibility:
    case ErrorKind::ModelDegenerate: return 3;
    case ErrorKind::Io:
    case ErrorKind::Parse:
    case ErrorKind::Data: return 4;
    default: return 2;
  }
}

struct Overrides {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<std::uint32_t> runs;
  std::optional<int> threads;
};

void add_common(CLI::App* cmd, Overrides& o, bool generation) {
  cmd->add_option("--config", o.config, "configuration file (JSON)")->required()->check(CLI::ExistingFile);
  cmd->add_option("--out", o.out, "output directory");
  cmd->add_option("--threads", o.threads, "worker threads")->check(CLI::PositiveNumber);
  if (generation) {
    cmd->add_option("--seed", o.seed, "base seed");
    cmd->add_option("--runs", o.runs, "number of runs")->check(CLI::PositiveNumber);
  }
}

void apply(RunConfig& c, const Overrides& o) {
  if (o.seed) c.seed = *o.seed;
  if (o.runs) c.runs = *o.runs;
  if (o.out) c.output_dir = std::filesystem::absolute(*o.out);
}

void describe(const RunConfig& c, const LoadedInputs& in) {
  std::cout << fmt::format("grid {}x{} tiles of {} km, {} residents on {} active tiles\n", c.tiles_lat, c.tiles_lon,
                           c.tile_km, in.mask.total_population(), in.mask.active_count());
  std::cout << fmt::format("{} age groups, mu = {}, mixing = {}, population = {}, group sizes = {}, households = {}\n",
                           in.ages.group_count(), c.mu, to_string(c.mixing), to_string(c.population),
                           to_string(c.group_sizes), c.households ? "on" : "off");
  if (in.roles && in.sizes) {
    const auto expected = expected_type_distribution(in.ages.probabilities(), *in.roles, *in.sizes);
    std::cout << "expected household types:";
    for (std::size_t t = 0; t < expected.size(); ++t) {
      std::cout << fmt::format(" {}={:.3f}", to_string(static_cast<HouseholdType>(t)), expected[t]);
    }
    std::cout << '\n';
  }
  for (const auto& w : in.warnings) std::cout << "warning: " << w << '\n';
  std::cout << "config hash " << config_hash(c) << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Synthesize and analyse geo-referenced urban social graphs"};
  app.require_subcommand(1);

  Overrides gen_o;
  Overrides ana_o;
  Overrides exp_o;
  Overrides val_o;
  bool allow_mismatch = false;

  auto* gen = app.add_subcommand("generate", "generate graphs for every run of a configuration");
  add_common(gen, gen_o, true);
  auto* ana = app.add_subcommand("analyze", "compute metrics for generated runs");
  add_common(ana, ana_o, false);
  ana->add_flag("--allow-hash-mismatch", allow_mismatch, "analyse runs generated from a different configuration");
  auto* exp = app.add_subcommand("experiment", "run an experiment matrix and write consolidated tables");
  add_common(exp, exp_o, true);
  auto* val = app.add_subcommand("validate-config", "check a run or experiment configuration and its inputs");
  val->add_option("--config", val_o.config, "configuration file (JSON)")->required()->check(CLI::ExistingFile);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    for (const auto* o : {&gen_o, &ana_o, &exp_o}) {
      if (o->threads) omp_set_num_threads(*o->threads);
    }
    if (gen->parsed()) {
      auto c = load_run_config(gen_o.config);
      apply(c, gen_o);
      run_generate(c, std::cout);
    } else if (ana->parsed()) {
      auto c = load_run_config(ana_o.config);
      const auto root = ana_o.out ? std::filesystem::path(*ana_o.out) : c.output_dir;
      run_analyze(c, root, allow_mismatch, std::cout);
    } else if (exp->parsed()) {
      auto e = load_experiment_config(exp_o.config);
      apply(e.base, exp_o);
      const auto failed = run_experiment(e, std::cout);
      if (failed > 0) {
        std::cerr << fmt::format("warning: {} experiment cell(s) failed; see table_metrics.csv\n", failed);
      }
    } else if (val->parsed()) {
      const auto doc = read_json_file(val_o.config);
      const auto base = std::filesystem::absolute(val_o.config).parent_path();
      if (is_experiment_config(doc)) {
        const auto e = parse_experiment_config(doc, base);
        const auto inputs = load_inputs(e.base);
        describe(e.base, inputs);
        std::cout << fmt::format("experiment with {} cells x {} runs\n", expand(e).size(), e.base.runs);
      } else {
        const auto c = parse_run_config(doc, base);
        describe(c, load_inputs(c));
      }
      std::cout << "configuration is valid\n";
    }
  } catch (const Error& e) {
    std::cerr << "error (" << to_string(e.kind()) << "): " << e.what() << '\n';
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 4;
  }
  return 0;
}
