#include "kgsim/cli.hpp"

#include <fmt/format.h>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iostream>
#include <random>
#include <set>
#include <thread>

#include "kgsim/csv.hpp"
#include "kgsim/degree_scan.hpp"
#include "kgsim/edge_stream.hpp"
#include "kgsim/evaluate.hpp"
#include "kgsim/generator.hpp"
#include "kgsim/ingest.hpp"
#include "kgsim/manifest.hpp"
#include "kgsim/random.hpp"
#include "kgsim/stats.hpp"
#include "kgsim/theory.hpp"

namespace kgsim::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

template <class T>
Binding& bind_option(Command& command, const std::string& key, T& value, const std::string& help) {
  auto* option = command.app->add_option("--" + key, value, help);
  if constexpr (!std::is_same_v<T, std::string> && !std::is_same_v<T, std::vector<std::string>>) {
    option->capture_default_str();
  }
  command.bindings.push_back(
      {key, option, [&value](const json& j) { value = j.get<T>(); }, [&value] { return json(value); }, true});
  return command.bindings.back();
}

Binding& bind_flag(Command& command, const std::string& key, bool& value, const std::string& help) {
  auto* option = command.app->add_flag("--" + key, value, help);
  command.bindings.push_back(
      {key, option, [&value](const json& j) { value = j.get<bool>(); }, [&value] { return json(value); }, true});
  return command.bindings.back();
}

std::vector<Role> parse_roles(const std::string& text) {
  if (text == "both") return {Role::out, Role::in};
  try {
    return {parse_role(text)};
  } catch (const std::exception&) {
    throw UsageError(fmt::format("role must be in, out or both, got '{}'", text));
  }
}

void require(const std::string& value, const char* flag) {
  if (value.empty()) throw UsageError(fmt::format("--{} is required", flag));
}

std::uint64_t resolve_seed(const std::string& text) {
  if (text == "random") {
    std::random_device device;
    return (static_cast<std::uint64_t>(device()) << 32) ^ device();
  }
  std::uint64_t seed = 0;
  const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), seed);
  if (ec != std::errc() || end != text.data() + text.size()) {
    throw UsageError(fmt::format("--seed expects an unsigned integer or 'random', got '{}'", text));
  }
  return seed;
}

/// "a:b:step" inclusive of b up to rounding.
std::vector<double> parse_range(const std::string& text, const char* flag) {
  std::vector<double> fields;
  std::size_t start = 0;
  for (int i = 0; i < 3; ++i) {
    const std::size_t colon = text.find(':', start);
    const std::string field = text.substr(start, colon == std::string::npos ? std::string::npos : colon - start);
    try {
      std::size_t used = 0;
      fields.push_back(std::stod(field, &used));
      if (used != field.size()) throw std::invalid_argument(field);
    } catch (const std::exception&) {
      throw UsageError(fmt::format("--{} expects start:stop:step, got '{}'", flag, text));
    }
    if (colon == std::string::npos) break;
    start = colon + 1;
  }
  if (fields.size() == 1) return fields;
  if (fields.size() != 3 || !(fields[2] > 0.0) || fields[1] < fields[0]) {
    throw UsageError(fmt::format("--{} expects start:stop:step with step > 0, got '{}'", flag, text));
  }
  const auto count = static_cast<std::size_t>(std::floor((fields[1] - fields[0]) / fields[2] + 1e-9)) + 1;
  std::vector<double> values;
  // snap accumulated rounding error, e.g. 0.30000000000000004
  for (std::size_t i = 0; i < count; ++i) {
    values.push_back(std::stod(fmt::format("{:.12g}", fields[0] + static_cast<double>(i) * fields[2])));
  }
  return values;
}

json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError(fmt::format("cannot open '{}'", path.string()));
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw UsageError(fmt::format("'{}' is not valid JSON: {}", path.string(), e.what()));
  }
}

void write_relationship_names(const fs::path& dir, std::uint32_t count) {
  std::vector<std::string> names;
  for (std::uint32_t r = 0; r < count; ++r) names.push_back(fmt::format("r{}", r));
  write_lines(dir / kRelationshipsFile, names);
}

bool is_generation_config(const json& document) {
  return document.is_object() && (document.contains("relationships") || document.contains("homogeneous"));
}

}  // namespace

struct Application::State {
  // globals
  unsigned threads = std::max(1u, std::thread::hardware_concurrency());
  std::string out;
  std::string seed = std::to_string(kDefaultSeed);
  std::string log_level = "info";
  std::string config;
  std::vector<Binding> global_bindings;
  json section = json::object();  // values loaded from --config for the selected command
  std::uint64_t resolved_seed = kDefaultSeed;

  struct {
    std::string input, prefix, predicates;
    bool dedup = false;
    unsigned groups = 1;
    std::size_t spill_threshold = 0;
  } ingest;
  struct {
    std::string edges, role = "both";
    unsigned groups = 1;
  } fit;
  struct {
    bool per_relationship = false;
    std::uint64_t steps = 0;
  } generate;
  struct {
    std::string stats, role = "both";
    double scale = 1.0;
    unsigned seeds = 5;
    std::vector<std::string> variants;
  } ablate;
  struct {
    double sigma = 0.0;
    std::uint64_t steps = 2'000'000;
  } fig3a;
  struct {
    std::string runs;
  } telemetry;
  struct {
    std::vector<std::string> summaries;
  } longitudinal;
  struct {
    int n = 0;
    double sigma = 0.0;
  } pr;
  struct {
    std::string n_range, sigma_range, out;
    int r = 3;
  } heatmap;
  struct {
    std::string input, prefix, role = "both";
    bool dedup = false;
    unsigned groups = 1;
    double scale = 1.0;
    unsigned seeds = 5;
  } pipeline;
};

Application::Application(std::ostream& out, std::ostream& err)
    : out_(out), err_(err), app_(std::make_unique<CLI::App>("Knowledge-graph topology analysis and generation", "kgsim")),
      state_(std::make_unique<State>()) {
  build();
}

Application::~Application() = default;

Command& Application::add_command(CLI::App* app, std::string path) {
  commands_.push_back(std::make_unique<Command>());
  commands_.back()->app = app;
  commands_.back()->path = std::move(path);
  app->fallthrough();
  return *commands_.back();
}

namespace {

json resolved_config(const std::vector<Binding>& globals, const Command& command) {
  json config = json::object();
  for (const auto* list : {&globals, &command.bindings}) {
    for (const auto& b : *list) {
      if (b.recorded) config[b.key] = b.save();
    }
  }
  return config;
}

IngestOptions ingest_options(const std::string& prefix, bool dedup, const std::string& predicates, std::size_t spill,
                             unsigned threads, const fs::path& out) {
  IngestOptions options;
  options.filter.entity_prefix = prefix;
  if (!predicates.empty()) {
    const auto lines = read_lines(predicates);
    options.filter.keep_predicates.emplace(lines.begin(), lines.end());
  }
  options.dedup = dedup;
  options.threads = threads;
  options.spill_threshold = spill;
  options.spill_dir = out;
  return options;
}

/// Per-relationship facts and role statistics of an edge stream, computed by
/// the grouped degree scan.
void write_relationship_counts(const fs::path& dir, unsigned groups) {
  const auto source = EdgeSource::from_file(dir / kEdgesFile);
  const auto out_tables = scan_degrees(source, Role::out, groups);
  const auto in_tables = scan_degrees(source, Role::in, groups);
  std::ofstream csv(dir / "relationship_counts.csv");
  if (!csv) throw IoError(fmt::format("cannot write relationship_counts.csv in '{}'", dir.string()));
  csv << "relationship,facts,out_entities,out_max_degree,in_entities,in_max_degree\n";
  const std::uint32_t n = std::max(out_tables.relationship_count, in_tables.relationship_count);
  for (std::uint32_t r = 0; r < n; ++r) {
    const DegreeTable empty;
    const auto& o = r < out_tables.per_relationship.size() ? out_tables.per_relationship[r] : empty;
    const auto& i = r < in_tables.per_relationship.size() ? in_tables.per_relationship[r] : empty;
    csv << r << ',' << o.facts() << ',' << o.degrees.size() << ',' << o.max_degree() << ',' << i.degrees.size()
        << ',' << i.max_degree() << '\n';
  }
}

void write_ingest_summary(const fs::path& dir, const IngestSummary& summary) {
  std::ofstream out(dir / "ingest_summary.json");
  if (!out) throw IoError(fmt::format("cannot write ingest_summary.json in '{}'", dir.string()));
  out << json(summary).dump(2) << '\n';
}

void run_fit(const fs::path& edges_dir, const std::string& role, unsigned groups, const fs::path& out) {
  const auto roles = parse_roles(role);
  std::vector<std::string> names;
  if (fs::exists(edges_dir / kRelationshipsFile)) names = read_lines(edges_dir / kRelationshipsFile);
  const auto fit = fit_graph(EdgeSource::from_file(edges_dir / kEdgesFile), roles, groups, names);
  write_fit(out, fit);
  for (Role r : roles) {
    if (const auto& s = fit.summary.role(r)) {
      spdlog::info("{}: |E| = {}, sigma = {:.6g}, k_max = {}{}", role_name(r), s->entities, s->sigma, s->max_degree,
                   s->relationship_constraint ? "" : " (n > 1/sigma - 1 violated)");
    }
  }
}

DivergenceReport run_ablate(const fs::path& stats_dir, const std::string& role, double scale, unsigned seed_count,
                            const std::vector<std::string>& variant_names, std::uint64_t base_seed,
                            unsigned threads) {
  if (seed_count == 0) throw UsageError("--seeds must be >= 1");
  const auto stats = read_stats(stats_dir);
  std::vector<Role> roles;
  for (Role r : parse_roles(role)) {
    if (stats.summary.role(r) && stats.global_histograms.count(r)) roles.push_back(r);
  }
  if (roles.empty()) throw DomainError(fmt::format("'{}' has no fitted role matching '{}'", stats_dir.string(), role));
  std::vector<Variant> variants;
  if (variant_names.empty()) {
    variants.assign(std::begin(kAllVariants), std::end(kAllVariants));
  } else {
    for (const auto& name : variant_names) {
      try {
        variants.push_back(parse_variant(name));
      } catch (const std::exception&) {
        throw UsageError(fmt::format("unknown variant '{}'", name));
      }
    }
  }
  std::vector<std::uint64_t> seeds;
  for (unsigned i = 0; i < seed_count; ++i) seeds.push_back(derive_seed(base_seed, i));
  return ablate(stats, roles, variants, seeds, scale, threads);
}

void log_divergence(const DivergenceReport& report) {
  std::vector<std::pair<Variant, Role>> seen;
  for (const auto& e : report.entries) {
    if (std::find(seen.begin(), seen.end(), std::pair{e.variant, e.role}) != seen.end()) continue;
    seen.emplace_back(e.variant, e.role);
    spdlog::info("{} {}: mean KL = {:.6g}", variant_name(e.variant), role_name(e.role),
                 report.mean_kl(e.variant, e.role));
  }
}

}  // namespace

void Application::build() {
  auto& app = *app_;
  auto& s = *state_;
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Print help for every subcommand");

  // Global options live in a pseudo-command so they share the binding machinery.
  Command globals;
  globals.app = &app;
  bind_option(globals, "threads", s.threads, "Worker threads for parallel stages");
  bind_option(globals, "out", s.out, "Output directory").recorded = false;
  bind_option(globals, "seed", s.seed, "RNG seed, or 'random' for an entropy seed");
  bind_option(globals, "log-level", s.log_level, "trace, debug, info, warn, error or off").recorded = false;
  bind_option(globals, "config", s.config, "JSON config file or run manifest; flags override its values").recorded = false;
  s.global_bindings = std::move(globals.bindings);

  {
    auto& c = add_command(app.add_subcommand("ingest", "Parse N-Triples into an edge stream and dictionaries"),
                          "ingest");
    bind_option(c, "input", s.ingest.input, "N-Triples file, optionally gzip-compressed (required)");
    bind_option(c, "prefix", s.ingest.prefix, "IRI prefix of internal entities (required)");
    bind_flag(c, "dedup", s.ingest.dedup, "Drop exact duplicate triples");
    bind_option(c, "groups", s.ingest.groups, "Relationship groups per degree-scan pass").option->check(CLI::PositiveNumber);
    bind_option(c, "spill-threshold", s.ingest.spill_threshold, "Dictionary size that triggers on-disk runs (0 = never)");
    bind_option(c, "predicates", s.ingest.predicates, "File of predicate IRIs to keep, one per line");
    c.run = [this, &s, &c] {
      require(s.ingest.input, "input");
      require(s.ingest.prefix, "prefix");
      require(s.out, "out");
      ManifestRecorder recorder(c.path, resolved_config(s.global_bindings, c), 0);
      recorder.add_input(s.ingest.input);
      const fs::path out = s.out;
      const auto summary = ingest_to_directory(
          s.ingest.input,
          ingest_options(s.ingest.prefix, s.ingest.dedup, s.ingest.predicates, s.ingest.spill_threshold, s.threads,
                         out),
          out);
      write_ingest_summary(out, summary);
      write_relationship_counts(out, s.ingest.groups);
      recorder.write(out);
    };
  }
  {
    auto& c = add_command(app.add_subcommand("fit", "Estimate model parameters and degree histograms"), "fit");
    bind_option(c, "edges", s.fit.edges, "Directory holding edges.bin (required)");
    bind_option(c, "role", s.fit.role, "in, out or both");
    bind_option(c, "groups", s.fit.groups, "Relationship groups per degree-scan pass").option->check(CLI::PositiveNumber);
    c.run = [&s, &c] {
      require(s.fit.edges, "edges");
      require(s.out, "out");
      ManifestRecorder recorder(c.path, resolved_config(s.global_bindings, c), 0);
      recorder.add_input(fs::path(s.fit.edges) / kEdgesFile);
      run_fit(s.fit.edges, s.fit.role, s.fit.groups, s.out);
      recorder.write(s.out);
    };
  }
  {
    auto& c = add_command(app.add_subcommand("generate", "Simulate a graph from a generation config (--config)"),
                          "generate");
    bind_flag(c, "per-relationship", s.generate.per_relationship,
              "Replay attachment per relationship after fixing the timeline");
    bind_option(c, "steps", s.generate.steps, "Override the config's step count (0 keeps it)");
    c.run = [&s, &c] {
      require(s.out, "out");
      json document;
      if (s.section.contains("generation")) {
        document = s.section.at("generation");
      } else {
        throw UsageError("generate needs --config with a generation config or a generate manifest");
      }
      auto config = document.get<GenerationConfig>();
      if (s.generate.steps > 0) config.steps = s.generate.steps;
      const auto seed_binding = std::find_if(s.global_bindings.begin(), s.global_bindings.end(),
                                             [](const Binding& b) { return b.key == "seed"; });
      const bool seed_given = seed_binding->option->count() > 0 || s.section.contains("seed");
      if (seed_given || !document.contains("seed")) config.seed = s.resolved_seed;
      s.resolved_seed = config.seed;
      validate(config);

      auto recorded = resolved_config(s.global_bindings, c);
      recorded["seed"] = std::to_string(config.seed);
      recorded["generation"] = config;
      ManifestRecorder recorder(c.path, recorded, config.seed);
      const auto result =
          s.generate.per_relationship ? generate_per_relationship(config, s.threads) : generate(config);
      const fs::path out = s.out;
      fs::create_directories(out);
      write_edges(out / kEdgesFile, result.edges);
      write_relationship_names(out, config.relationship_count());
      write_telemetry_csv(out / "telemetry.csv", result.telemetry);
      const auto& last = result.telemetry.last();
      spdlog::info("{} facts, {} entities, {} exceptional steps", result.edges.size(), last.entities,
                   last.exceptional);
      recorder.write(out);
    };
  }

  auto* evaluate = app.add_subcommand("evaluate", "Compare generated and reference graphs");
  evaluate->require_subcommand(1);
  evaluate->fallthrough();
  {
    auto& c = add_command(evaluate->add_subcommand("ablate", "KL divergence of the four model variants"),
                          "evaluate ablate");
    bind_option(c, "stats", s.ablate.stats, "Directory written by fit (required)");
    bind_option(c, "scale", s.ablate.scale, "Generated facts as a fraction of the reference |F|");
    bind_option(c, "seeds", s.ablate.seeds, "Number of seeds per variant");
    bind_option(c, "role", s.ablate.role, "in, out or both");
    bind_option(c, "variants", s.ablate.variants,
         "Subset of multiplex_param, multiplex_linear, simplex_param, simplex_linear");
    c.run = [&s, &c] {
      require(s.ablate.stats, "stats");
      require(s.out, "out");
      ManifestRecorder recorder(c.path, resolved_config(s.global_bindings, c), s.resolved_seed);
      recorder.add_input(s.ablate.stats);
      const auto report = run_ablate(s.ablate.stats, s.ablate.role, s.ablate.scale, s.ablate.seeds,
                                     s.ablate.variants, s.resolved_seed, s.threads);
      write_divergence(s.out, report);
      log_divergence(report);
      recorder.write(s.out);
    };
  }
  {
    auto& c = add_command(
        evaluate->add_subcommand("fig3a", "Degree and relationship-count distributions, 25 homogeneous relationships"),
        "evaluate fig3a");
    bind_option(c, "sigma", s.fig3a.sigma, "Superficiality (required)");
    bind_option(c, "steps", s.fig3a.steps, "Generation steps");
    c.run = [&s, &c] {
      if (!(s.fig3a.sigma > 0.0)) throw UsageError("--sigma is required and must be > 0");
      require(s.out, "out");
      ManifestRecorder recorder(c.path, resolved_config(s.global_bindings, c), s.resolved_seed);
      const auto figure = homogeneous_experiment(s.fig3a.sigma, s.fig3a.steps, s.resolved_seed);
      fs::create_directories(s.out);
      write_homogeneous_csv(fs::path(s.out) / fmt::format("fig3a_sigma{:g}.csv", s.fig3a.sigma), figure);
      const auto peak = std::max_element(figure.relationships.begin(), figure.relationships.end());
      spdlog::info("argmax_r P(r) = {}, exceptional steps = {}", peak - figure.relationships.begin() + 1,
                   figure.exceptional);
      recorder.write(s.out);
    };
  }
  {
    auto& c = add_command(evaluate->add_subcommand("telemetry", "Check growth laws over replicated generate runs"),
                          "evaluate telemetry");
    bind_option(c, "runs", s.telemetry.runs, "Directory of generate output directories (required)");
    c.run = [this, &s, &c] {
      require(s.telemetry.runs, "runs");
      std::vector<fs::path> dirs;
      for (const auto& entry : fs::directory_iterator(s.telemetry.runs)) {
        if (entry.is_directory() && fs::exists(entry.path() / kManifestFile)) dirs.push_back(entry.path());
      }
      std::sort(dirs.begin(), dirs.end());
      if (dirs.empty()) throw DomainError(fmt::format("no generate runs under '{}'", s.telemetry.runs));
      const fs::path out = s.out.empty() ? fs::path(s.telemetry.runs) : fs::path(s.out);
      ManifestRecorder recorder(c.path, resolved_config(s.global_bindings, c), 0);

      std::optional<GenerationConfig> config;
      json reference;
      std::vector<SimulationTelemetry> runs;
      for (const auto& dir : dirs) {
        const auto manifest = read_manifest(dir / kManifestFile);
        if (manifest.subcommand != "generate") continue;
        json generation = manifest.config.at("generation");
        generation.erase("seed");
        if (!config) {
          reference = generation;
          config = generation.get<GenerationConfig>();
        } else if (generation != reference) {
          throw DomainError(fmt::format("run '{}' uses a different generation config", dir.string()));
        }
        recorder.add_input(dir / "telemetry.csv");
        runs.push_back(read_telemetry_csv(dir / "telemetry.csv", config->relationship_count(), config->active_roles()));
      }
      if (!config) throw DomainError(fmt::format("no generate runs under '{}'", s.telemetry.runs));
      const auto report = telemetry_checks(runs, *config);
      fs::create_directories(out);
      std::ofstream(out / "telemetry_report.json") << json(report).dump(2) << '\n';
      const auto failed = std::count_if(report.checks.begin(), report.checks.end(),
                                        [](const LawCheck& ch) { return !ch.skipped && !ch.passed; });
      out_ << fmt::format("{} runs, {} checks, {} failed\n", report.runs, report.checks.size(), failed);
      recorder.write(out);
    };
  }
  {
    auto& c = add_command(evaluate->add_subcommand("longitudinal", "Tabulate fitted summaries across snapshots"),
                          "evaluate longitudinal");
    bind_option(c, "summary", s.longitudinal.summaries, "LABEL=PATH of a summary.json or fit directory (repeatable)");
    c.run = [&s, &c] {
      if (s.longitudinal.summaries.empty()) throw UsageError("--summary is required");
      require(s.out, "out");
      ManifestRecorder recorder(c.path, resolved_config(s.global_bindings, c), 0);
      std::vector<std::pair<std::string, GraphSummary>> snapshots;
      for (const auto& item : s.longitudinal.summaries) {
        const auto eq = item.find('=');
        if (eq == std::string::npos) throw UsageError(fmt::format("--summary expects LABEL=PATH, got '{}'", item));
        fs::path path = item.substr(eq + 1);
        if (fs::is_directory(path)) path /= "summary.json";
        recorder.add_input(path);
        snapshots.emplace_back(item.substr(0, eq), read_json(path).get<GraphSummary>());
      }
      fs::create_directories(s.out);
      write_longitudinal_csv(fs::path(s.out) / "longitudinal.csv", longitudinal_report(snapshots));
      recorder.write(s.out);
    };
  }

  auto* theory_app = app.add_subcommand("theory", "Closed-form results");
  theory_app->require_subcommand(1);
  theory_app->fallthrough();
  {
    auto& c = add_command(theory_app->add_subcommand("pr", "Distribution of distinct relationships per entity"),
                          "theory pr");
    bind_option(c, "n", s.pr.n, "Number of relationships (required)");
    bind_option(c, "sigma", s.pr.sigma, "Superficiality (required)");
    c.run = [this, &s] {
      if (s.pr.n <= 0) throw UsageError("--n is required and must be >= 1");
      const auto dist = theory::relationship_count_distribution(s.pr.n, s.pr.sigma);
      out_ << "r,P_r\n";
      for (int r = 1; r <= s.pr.n; ++r) out_ << r << ',' << csv::number(dist.at(r)) << '\n';
    };
  }
  {
    auto& c = add_command(theory_app->add_subcommand("heatmap", "Share of entities with at most r relationships"),
                          "theory heatmap");
    bind_option(c, "n-range", s.heatmap.n_range, "start:stop:step of n (required)");
    bind_option(c, "sigma-range", s.heatmap.sigma_range, "start:stop:step of sigma (required)");
    bind_option(c, "r", s.heatmap.r, "Relationship-count threshold").option->check(CLI::PositiveNumber);
    bind_option(c, "out", s.heatmap.out, "Output CSV path (required)");
    c.run = [&s, &c] {
      require(s.heatmap.n_range, "n-range");
      require(s.heatmap.sigma_range, "sigma-range");
      require(s.heatmap.out, "out");
      ManifestRecorder recorder(c.path, resolved_config(s.global_bindings, c), 0);
      std::vector<int> ns;
      for (double v : parse_range(s.heatmap.n_range, "n-range")) ns.push_back(static_cast<int>(std::lround(v)));
      const auto sigmas = parse_range(s.heatmap.sigma_range, "sigma-range");
      const auto grid = theory::heatmap_grid(ns, sigmas, s.heatmap.r);
      const fs::path path = s.heatmap.out;
      const fs::path dir = path.has_parent_path() ? path.parent_path() : fs::path(".");
      fs::create_directories(dir);
      std::ofstream csv_out(path);
      if (!csv_out) throw IoError(fmt::format("cannot open '{}' for writing", path.string()));
      csv_out << "n,sigma,value,defined\n";
      for (const auto& cell : grid) {
        csv_out << cell.n << ',' << csv::number(cell.sigma) << ',' << (cell.defined ? csv::number(cell.value) : "")
                << ',' << (cell.defined ? 1 : 0) << '\n';
      }
      recorder.write(dir);
    };
  }
  {
    auto& c = add_command(app.add_subcommand("pipeline", "ingest, fit and ablate one input under --out"),
                          "pipeline");
    bind_option(c, "input", s.pipeline.input, "N-Triples file (required)");
    bind_option(c, "prefix", s.pipeline.prefix, "IRI prefix of internal entities (required)");
    bind_flag(c, "dedup", s.pipeline.dedup, "Drop exact duplicate triples");
    bind_option(c, "groups", s.pipeline.groups, "Relationship groups per degree-scan pass").option->check(CLI::PositiveNumber);
    bind_option(c, "role", s.pipeline.role, "in, out or both");
    bind_option(c, "scale", s.pipeline.scale, "Generated facts as a fraction of the reference |F|");
    bind_option(c, "seeds", s.pipeline.seeds, "Number of seeds per variant");
    c.run = [&s, &c] {
      require(s.pipeline.input, "input");
      require(s.pipeline.prefix, "prefix");
      require(s.out, "out");
      const fs::path root = s.out;
      const auto config = resolved_config(s.global_bindings, c);

      ManifestRecorder ingest_recorder("pipeline ingest", config, 0);
      ingest_recorder.add_input(s.pipeline.input);
      const auto summary = ingest_to_directory(
          s.pipeline.input, ingest_options(s.pipeline.prefix, s.pipeline.dedup, "", 0, s.threads, root / "ingest"),
          root / "ingest");
      write_ingest_summary(root / "ingest", summary);
      write_relationship_counts(root / "ingest", s.pipeline.groups);
      ingest_recorder.write(root / "ingest");

      ManifestRecorder fit_recorder("pipeline fit", config, 0);
      fit_recorder.add_input(root / "ingest" / kEdgesFile);
      run_fit(root / "ingest", s.pipeline.role, s.pipeline.groups, root / "fit");
      fit_recorder.write(root / "fit");

      ManifestRecorder ablate_recorder("pipeline ablate", config, s.resolved_seed);
      ablate_recorder.add_input(root / "fit");
      const auto report = run_ablate(root / "fit", s.pipeline.role, s.pipeline.scale, s.pipeline.seeds, {},
                                     s.resolved_seed, s.threads);
      write_divergence(root / "ablate", report);
      log_divergence(report);
      ablate_recorder.write(root / "ablate");
    };
  }
}

int Application::execute(Command& command) {
  auto& s = *state_;
  auto logger = spdlog::stderr_color_mt(fmt::format("kgsim-{}", static_cast<const void*>(this)));
  logger->set_pattern("%^%l%$: %v");
  const auto level = spdlog::level::from_str(s.log_level);
  if (level == spdlog::level::off && s.log_level != "off") {
    spdlog::drop(logger->name());
    throw UsageError(fmt::format("unknown --log-level '{}'", s.log_level));
  }
  logger->set_level(level);
  auto previous = spdlog::default_logger();
  spdlog::set_default_logger(logger);
  struct Restore {
    std::shared_ptr<spdlog::logger> previous;
    std::string name;
    ~Restore() {
      spdlog::set_default_logger(previous);
      spdlog::drop(name);
    }
  } restore{previous, logger->name()};

  if (!s.config.empty()) {
    const json document = read_json(s.config);
    if (is_manifest(document)) {
      const auto manifest = document.get<RunManifest>();
      if (manifest.subcommand != command.path) {
        throw UsageError(fmt::format("manifest '{}' records '{}', not '{}'", s.config, manifest.subcommand,
                                     command.path));
      }
      s.section = manifest.config;
    } else if (command.path == "generate" && is_generation_config(document)) {
      s.section = json{{"generation", document}};
    } else if (document.is_object()) {
      s.section = document;
    } else {
      throw UsageError(fmt::format("config '{}' must be a JSON object", s.config));
    }
    std::set<std::string> known{"generation"};
    for (const auto* list : {&s.global_bindings, &command.bindings}) {
      for (auto& b : *list) {
        known.insert(b.key);
        if (b.option->count() == 0 && s.section.contains(b.key) && b.key != "config") {
          try {
            b.load(s.section.at(b.key));
          } catch (const json::exception& e) {
            throw UsageError(fmt::format("config key '{}': {}", b.key, e.what()));
          }
        }
      }
    }
    for (const auto& [key, value] : s.section.items()) {
      if (!known.count(key)) throw UsageError(fmt::format("unknown config key '{}' for {}", key, command.path));
    }
  }
  if (s.threads == 0) throw UsageError("--threads must be >= 1");
  s.resolved_seed = resolve_seed(s.seed);
  s.seed = std::to_string(s.resolved_seed);
  command.run();
  return kExitOk;
}

int Application::run(int argc, const char* const* argv) {
  try {
    app_->parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app_->exit(e, out_, err_);
    return code == 0 ? kExitOk : kExitUsage;
  }
  Command* selected = nullptr;
  for (auto& command : commands_) {
    if (command->app->parsed()) selected = command.get();
  }
  if (selected == nullptr) {
    err_ << app_->help();
    return kExitUsage;
  }
  try {
    return execute(*selected);
  } catch (const UsageError& e) {
    err_ << "usage error: " << e.what() << "\nRun with --help for usage.\n";
    return kExitUsage;
  } catch (const DomainError& e) {
    err_ << "error: " << e.what() << '\n';
    return kExitDomain;
  } catch (const std::exception& e) {
    err_ << "error: " << e.what() << '\n';
    return kExitDomain;
  }
}

int Application::run(const std::vector<std::string>& args) {
  std::vector<const char*> argv{"kgsim"};
  for (const auto& a : args) argv.push_back(a.c_str());
  return run(static_cast<int>(argv.size()), argv.data());
}

int dispatch(int argc, const char* const* argv) {
  Application application(std::cout, std::cerr);
  return application.run(argc, argv);
}

}  // namespace kgsim::cli
