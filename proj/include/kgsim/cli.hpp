#pragma once

#include <functional>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

namespace kgsim::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitDomain = 1;
inline constexpr int kExitUsage = 2;

/// One command-line option that can also be supplied by a JSON config file
/// under the same key (flags win) and is recorded in the run manifest.
struct Binding {
  std::string key;
  CLI::Option* option = nullptr;
  std::function<void(const nlohmann::json&)> load;
  std::function<nlohmann::json()> save;
  bool recorded = true;
};

struct Command {
  std::string path;  // "ingest", "evaluate ablate", ...
  CLI::App* app = nullptr;
  std::vector<Binding> bindings;
  std::function<void()> run;
};

/// The full command tree. Build a fresh one per invocation; CLI11 keeps parse
/// state in the tree.
class Application {
 public:
  Application(std::ostream& out, std::ostream& err);
  ~Application();

  CLI::App& app() { return *app_; }
  const std::vector<std::unique_ptr<Command>>& commands() const { return commands_; }

  /// argv[0] is the program name. Returns the process exit code.
  int run(int argc, const char* const* argv);
  int run(const std::vector<std::string>& args);

 private:
  struct State;

  Command& add_command(CLI::App* app, std::string path);
  void build();
  int execute(Command& command);

  std::ostream& out_;
  std::ostream& err_;
  std::unique_ptr<CLI::App> app_;
  std::vector<std::unique_ptr<Command>> commands_;
  std::unique_ptr<State> state_;
};

/// Convenience entry point writing to std::cout / std::cerr.
int dispatch(int argc, const char* const* argv);

}  // namespace kgsim::cli
