#include <CLI11.hpp>
#include <iostream>

#include "commands.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Continuous scene representation experiments"};
  app.require_subcommand(1);

  std::string config_file;
  csr::cli::Overrides overrides;
  std::uint64_t seed = 0;
  std::string out;
  std::size_t workers = 1;
  std::size_t episodes = 0;

  const std::vector<std::pair<std::string, std::string>> commands = {
      {"gen-scenes", "Generate seeded scene files and a manifest"},
      {"rearrange", "Run two-phase rearrangement episodes"},
      {"track", "Cluster identity features over detection streams"},
      {"retrieve", "Score triplet retrieval of relationship features"},
      {"probe", "Train linear probes on relationship features"}};
  for (const auto& [name, help] : commands) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("--config", config_file, "JSON config file");
    sub->add_option("--seed", seed, "Base seed");
    sub->add_option("--out", out, "Output directory");
    sub->add_option("--workers", workers, "Worker threads")->check(CLI::PositiveNumber);
    sub->add_option("--episodes", episodes, "Number of episodes, scenes, streams or triplets");
    sub->add_option("--sigma", overrides.sigmas, "View-noise scale (repeatable)")->take_all();
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);  // prints help or the parse error
    return code == 0 ? csr::cli::kExitOk : csr::cli::kExitUsage;
  }
  CLI::App* chosen = app.get_subcommands().front();
  if (chosen->count("--seed")) overrides.seed = seed;
  if (chosen->count("--out")) overrides.out = out;
  if (chosen->count("--workers")) overrides.workers = workers;
  if (chosen->count("--episodes")) overrides.episodes = episodes;

  try {
    const auto command = csr::cli::command_from_string(chosen->get_name());
    const std::optional<std::filesystem::path> file =
        config_file.empty() ? std::nullopt : std::optional<std::filesystem::path>(config_file);
    const csr::cli::RunConfig config = csr::cli::load_config(command, file, overrides);
    return csr::cli::run_command(config, std::cout);
  } catch (const csr::cli::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return csr::cli::kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return csr::cli::kExitEpisodesFailed;
  }
}
