#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "csr/world.hpp"

namespace csr::cli {

/// Raised for anything wrong with the command line or config file. Always
/// thrown before the command has side effects.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Command { GenScenes, Rearrange, Track, Retrieve, Probe };

Command command_from_string(const std::string& name);
std::string to_string(Command c);

/// Values given on the command line; they win over the config file.
struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::filesystem::path> out;
  std::optional<std::size_t> workers;
  std::optional<std::size_t> episodes;
  std::vector<double> sigmas;
};

struct Thresholds {
  double node = 0.5;
  double object = 0.4;
  double moved = 0.8;
};

struct RunConfig {
  Command command = Command::Rearrange;
  std::uint64_t seed = 0;
  std::filesystem::path out = "out";
  std::size_t workers = 1;
  std::size_t episodes = 0;  // scenes, episodes, streams, triplets or probe scenes
  std::vector<double> sigmas;
  SceneConfig scene;
  std::size_t dim = 512;
  std::optional<std::uint64_t> encoder_seed;  // defaults to seed
  Thresholds thresholds;
  std::vector<int> shuffle_k = {1, 2, 3, 4, 5};    // rearrange: episode i uses shuffle_k[i % size]
  std::vector<std::string> rows = {"ours", "gt-bt", "gt-mbt"};  // rearrange
  std::size_t frames = 30;                          // track
  std::optional<std::filesystem::path> stream_file;  // track: external JSON-lines stream
  std::size_t control_seeds = 5;                    // probe

  std::uint64_t effective_encoder_seed() const { return encoder_seed.value_or(seed); }
};

/// Builds and validates the configuration for `command` from an optional
/// JSON document plus overrides. Unknown keys and out-of-range values raise
/// ConfigError.
RunConfig make_config(Command command, const nlohmann::json& doc, const Overrides& overrides);
RunConfig load_config(Command command, const std::optional<std::filesystem::path>& file, const Overrides& overrides);

/// The effective configuration, as echoed into summaries.
nlohmann::json config_to_json(const RunConfig& config);

}  // namespace csr::cli
