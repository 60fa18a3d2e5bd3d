#include <doctest.h>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>
#include <regex>
#include <set>
#include <sstream>

#include "helpers.hpp"
#include "kgsim/cli.hpp"
#include "kgsim/edge_stream.hpp"
#include "kgsim/generator.hpp"
#include "kgsim/manifest.hpp"

using namespace kgsim;
using namespace kgsim::testing;
namespace fs = std::filesystem;

namespace {

struct Invocation {
  int code = 0;
  std::string out;
  std::string err;
};

Invocation kgsim_run(std::vector<std::string> args) {
  args.insert(args.begin(), {"--log-level", "off"});
  std::ostringstream out;
  std::ostringstream err;
  cli::Application app(out, err);
  const int code = app.run(args);
  return {code, out.str(), err.str()};
}

fs::path write_generation_config(const fs::path& dir, const GenerationConfig& config) {
  const auto path = dir / "generation.json";
  spit(path, nlohmann::json(config).dump());
  return path;
}

}  // namespace

TEST_CASE("every bound option is documented and every documented flag is bound") {
  std::ostringstream out;
  std::ostringstream err;
  cli::Application app(out, err);
  const std::regex flag(R"(--([a-z][a-z0-9-]*))");
  std::set<std::string> global;
  for (const auto* option : app.app().get_options()) global.insert(option->get_single_name());
  for (const auto& command : app.commands()) {
    CAPTURE(command->path);
    const std::string help = command->app->help();
    std::set<std::string> bound;
    for (const auto& binding : command->bindings) {
      bound.insert(binding.key);
      CHECK(help.find("--" + binding.key) != std::string::npos);
    }
    for (std::sregex_iterator it(help.begin(), help.end(), flag), end; it != end; ++it) {
      const std::string name = (*it)[1];
      if (name == "help" || name == "help-all" || global.count(name) > 0) continue;
      CAPTURE(name);
      CHECK(bound.count(name) == 1);
    }
  }
}

TEST_CASE("theory pr exit codes") {
  const auto ok = kgsim_run({"theory", "pr", "--n", "25", "--sigma", "0.5"});
  CHECK(ok.code == cli::kExitOk);
  CHECK(ok.out.starts_with("r,P_r\n1,"));

  const auto domain = kgsim_run({"theory", "pr", "--n", "10", "--sigma", "0.05"});
  CHECK(domain.code == cli::kExitDomain);
  CHECK(domain.err.find("n > 1/sigma - 1") != std::string::npos);
  CHECK(domain.err.find("19") != std::string::npos);

  CHECK(kgsim_run({"theory", "pr", "--n", "10", "--bogus", "1"}).code == cli::kExitUsage);
  CHECK(kgsim_run({"theory", "pr", "--sigma", "0.5"}).code == cli::kExitUsage);
  CHECK(kgsim_run({"--help"}).code == cli::kExitOk);
}

TEST_CASE("global flags may follow the subcommand") {
  const auto dir = scratch("cli_order");
  const auto config = write_generation_config(dir, GenerationConfig::homogeneous(3, 0.5, 1.0, 0.5, 100));
  const auto run = kgsim_run({"generate", "--config", config.string(), "--out", (dir / "g").string(), "--seed", "5"});
  CHECK(run.code == cli::kExitOk);
  CHECK(read_manifest(dir / "g" / kManifestFile).seed == 5);
}

TEST_CASE("pipeline writes a manifest per stage") {
  const auto dir = scratch("cli_pipeline");
  const auto run = kgsim_run({"--out", dir.string(), "pipeline", "--input", data_path("golden_10.nt").string(),
                              "--prefix", "p:", "--scale", "2", "--seeds", "2"});
  REQUIRE(run.code == cli::kExitOk);
  for (const char* stage : {"ingest", "fit", "ablate"}) {
    CAPTURE(stage);
    CHECK(fs::exists(dir / stage / kManifestFile));
  }
  CHECK(read_manifest(dir / "ingest" / kManifestFile).subcommand == "pipeline ingest");
  CHECK(fs::exists(dir / "ingest" / "ingest_summary.json"));
  CHECK(fs::exists(dir / "ablate" / "divergence.csv"));
}

TEST_CASE("ingest, fit and ablate one by one") {
  const auto dir = scratch("cli_stages");
  REQUIRE(kgsim_run({"--out", (dir / "i").string(), "ingest", "--input", data_path("golden_200.nt").string(),
                     "--prefix", "http://example.org/e/", "--groups", "3"})
              .code == cli::kExitOk);
  const auto summary = nlohmann::json::parse(slurp(dir / "i" / "ingest_summary.json"));
  CHECK(summary.at("facts") == 134);
  CHECK(slurp(dir / "i" / "relationship_counts.csv").starts_with("relationship,facts,"));
  REQUIRE(kgsim_run({"--out", (dir / "f").string(), "fit", "--edges", (dir / "i").string()}).code == cli::kExitOk);
  CHECK(fs::exists(dir / "f" / "profiles.json"));
  REQUIRE(kgsim_run({"--out", (dir / "a").string(), "evaluate", "ablate", "--stats", (dir / "f").string(), "--seeds",
                     "1", "--role", "out"})
              .code == cli::kExitOk);
  CHECK(fs::exists(dir / "a" / "divergence_seeds.csv"));
  CHECK(kgsim_run({"--out", (dir / "x").string(), "evaluate", "ablate", "--stats", (dir / "f").string(), "--scale",
                   "0"})
            .code == cli::kExitDomain);
  CHECK(kgsim_run({"--out", (dir / "x").string(), "fit", "--edges", (dir / "missing").string()}).code ==
        cli::kExitDomain);
}

TEST_CASE("generate replays bit-identically from its manifest") {
  const auto dir = scratch("cli_replay");
  auto generation = GenerationConfig::homogeneous(4, 0.7, 0.8, 0.5, 5000);
  generation.mode = GenerationMode::joint;
  const auto config = write_generation_config(dir, generation);
  REQUIRE(kgsim_run({"--config", config.string(), "--seed", "random", "--out", (dir / "a").string(), "generate"})
              .code == cli::kExitOk);
  const auto manifest = read_manifest(dir / "a" / kManifestFile);
  CHECK(manifest.config.at("seed").get<std::string>() == std::to_string(manifest.seed));

  const auto manifest_path = (dir / "a" / kManifestFile).string();
  REQUIRE(kgsim_run({"--config", manifest_path, "--out", (dir / "b").string(), "generate"}).code == cli::kExitOk);
  REQUIRE(kgsim_run({"generate", "--config", manifest_path, "--out", (dir / "c").string(), "--per-relationship"})
              .code == cli::kExitOk);
  CHECK(slurp(dir / "a" / kEdgesFile) == slurp(dir / "b" / kEdgesFile));
  CHECK(slurp(dir / "a" / "telemetry.csv") == slurp(dir / "b" / "telemetry.csv"));
  CHECK(read_edges(dir / "c" / kEdgesFile).size() == read_edges(dir / "a" / kEdgesFile).size());

  CHECK(kgsim_run({"--config", manifest_path, "--out", (dir / "d").string(), "theory", "pr"}).code ==
        cli::kExitUsage);
}

TEST_CASE("figure experiment replays from its manifest") {
  const auto dir = scratch("cli_fig");
  REQUIRE(kgsim_run({"--out", (dir / "a").string(), "evaluate", "fig3a", "--sigma", "0.5", "--steps", "5000"}).code ==
          cli::kExitOk);
  REQUIRE(kgsim_run({"--config", (dir / "a" / kManifestFile).string(), "--out", (dir / "b").string(), "evaluate",
                     "fig3a"})
              .code == cli::kExitOk);
  CHECK(slurp(dir / "a" / "fig3a_sigma0.5.csv") == slurp(dir / "b" / "fig3a_sigma0.5.csv"));
  CHECK(!slurp(dir / "a" / "fig3a_sigma0.5.csv").empty());
}

TEST_CASE("flat config file with flag override") {
  const auto dir = scratch("cli_flat");
  spit(dir / "flat.json", R"({"n": 25, "sigma": 0.05})");
  const auto from_file = kgsim_run({"--config", (dir / "flat.json").string(), "theory", "pr"});
  CHECK(from_file.code == cli::kExitOk);
  const auto overridden = kgsim_run({"--config", (dir / "flat.json").string(), "theory", "pr", "--sigma", "1"});
  CHECK(overridden.code == cli::kExitOk);
  CHECK(overridden.out.find("1,1\n") != std::string::npos);
  CHECK(from_file.out != overridden.out);

  spit(dir / "bad.json", R"({"n": 25, "sgima": 0.05})");
  CHECK(kgsim_run({"--config", (dir / "bad.json").string(), "theory", "pr"}).code == cli::kExitUsage);
}

TEST_CASE("generate rejects configs violating the relationship constraint") {
  const auto dir = scratch("cli_constraint");
  const auto config = write_generation_config(dir, GenerationConfig::homogeneous(10, 0.5, 1.0, 0.05, 100));
  const auto run = kgsim_run({"--config", config.string(), "--out", (dir / "g").string(), "generate"});
  CHECK(run.code == cli::kExitDomain);
  CHECK(run.err.find("n > 1/sigma - 1") != std::string::npos);
}

TEST_CASE("theory heatmap") {
  const auto dir = scratch("cli_heatmap");
  const auto path = dir / "heat.csv";
  REQUIRE(kgsim_run({"theory", "heatmap", "--n-range", "10:30:10", "--sigma-range", "0.05:0.5:0.45", "--out",
                     path.string()})
              .code == cli::kExitOk);
  const auto text = slurp(path);
  CHECK(text.starts_with("n,sigma,value,defined\n10,0.050000000000000003,,0\n"));
  CHECK(text.find("\n30,0.5,") != std::string::npos);
  CHECK(fs::exists(dir / kManifestFile));
  CHECK(kgsim_run({"theory", "heatmap", "--n-range", "10:x", "--sigma-range", "0.1:0.2:0.1", "--out", path.string()})
            .code == cli::kExitUsage);
}

TEST_CASE("telemetry over replicated runs") {
  const auto dir = scratch("cli_telemetry");
  const auto config = write_generation_config(dir, GenerationConfig::homogeneous(3, 0.5, 1.0, 0.6, 4000));
  for (int i = 0; i < 5; ++i) {
    REQUIRE(kgsim_run({"--config", config.string(), "--seed", std::to_string(100 + i), "--out",
                       (dir / "runs" / ("r" + std::to_string(i))).string(), "generate"})
                .code == cli::kExitOk);
  }
  const auto run = kgsim_run({"evaluate", "telemetry", "--runs", (dir / "runs").string()});
  CHECK(run.code == cli::kExitOk);
  CHECK(run.out.starts_with("5 runs, "));
  CHECK(fs::exists(dir / "runs" / "telemetry_report.json"));

  const auto other = write_generation_config(dir, GenerationConfig::homogeneous(3, 0.4, 1.0, 0.6, 4000));
  REQUIRE(kgsim_run({"--config", other.string(), "--out", (dir / "runs" / "z").string(), "generate"}).code ==
          cli::kExitOk);
  CHECK(kgsim_run({"evaluate", "telemetry", "--runs", (dir / "runs").string()}).code == cli::kExitDomain);
}

TEST_CASE("longitudinal summary table") {
  const auto dir = scratch("cli_longitudinal");
  for (const char* name : {"golden_10.nt", "golden_200.nt"}) {
    const std::string stem = fs::path(name).stem().string();
    const std::string prefix = stem == "golden_10" ? "p:" : "http://example.org/e/";
    REQUIRE(kgsim_run({"--out", (dir / stem).string(), "pipeline", "--input", data_path(name).string(), "--prefix",
                       prefix, "--seeds", "1"})
                .code == cli::kExitOk);
  }
  REQUIRE(kgsim_run({"--out", (dir / "table").string(), "evaluate", "longitudinal", "--summary",
                     "a=" + (dir / "golden_10" / "fit").string(), "--summary",
                     "b=" + (dir / "golden_200" / "fit" / "summary.json").string()})
              .code == cli::kExitOk);
  const auto text = slurp(dir / "table" / "longitudinal.csv");
  CHECK(text.find("\na,out,") != std::string::npos);
  CHECK(text.find("\nb,in,") != std::string::npos);
  CHECK(kgsim_run({"--out", (dir / "t2").string(), "evaluate", "longitudinal", "--summary", "nolabel"}).code ==
        cli::kExitUsage);
}
