#include "config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

#include "csr/errors.hpp"
#include "csr/random.hpp"

namespace csr::cli {
namespace {

using nlohmann::json;

const std::vector<std::string> kRowNames = {"ours", "gt-bt", "gt-mbt"};

std::set<std::string> allowed_keys(Command c) {
  std::set<std::string> keys = {"seed", "out", "workers", "episodes", "scene"};
  if (c == Command::GenScenes) return keys;
  keys.insert({"sigma", "encoder"});
  switch (c) {
    case Command::Rearrange: keys.insert({"thresholds", "shuffle_k", "rows"}); break;
    case Command::Track: keys.insert({"thresholds", "frames", "stream_file"}); break;
    case Command::Probe: keys.insert("control_seeds"); break;
    default: break;
  }
  return keys;
}

void reject_unknown(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
  if (!obj.is_object()) throw ConfigError(where + " must be a JSON object");
  for (const auto& [key, value] : obj.items()) {
    if (!allowed.contains(key)) throw ConfigError("unknown config key '" + where + key + "'");
  }
}

template <typename T>
T get(const json& obj, const std::string& key, const std::string& where) {
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError("config key '" + where + key + "' has the wrong type");
  }
}

std::uint64_t get_unsigned(const json& obj, const std::string& key, const std::string& where) {
  const json& v = obj.at(key);
  const bool ok = v.is_number_unsigned() || (v.is_number_integer() && v.get<std::int64_t>() >= 0);
  if (!ok) {
    throw ConfigError("config key '" + where + key + "' must be a non-negative integer");
  }
  return v.get<std::uint64_t>();
}

std::size_t get_count(const json& obj, const std::string& key, const std::string& where) {
  return static_cast<std::size_t>(get_unsigned(obj, key, where));
}

void read_scene(const json& j, SceneConfig& s) {
  reject_unknown(j, {"width", "height", "receptacles", "objects", "capacity", "walls"}, "scene.");
  if (j.contains("width")) s.width = get<int>(j, "width", "scene.");
  if (j.contains("height")) s.height = get<int>(j, "height", "scene.");
  if (j.contains("receptacles")) s.num_receptacles = get<int>(j, "receptacles", "scene.");
  if (j.contains("objects")) s.num_objects = get<int>(j, "objects", "scene.");
  if (j.contains("capacity")) s.capacity = get<int>(j, "capacity", "scene.");
  if (j.contains("walls")) s.num_walls = get<int>(j, "walls", "scene.");
}

std::size_t default_episodes(Command c) {
  switch (c) {
    case Command::GenScenes: return 10;
    case Command::Rearrange: return 200;
    case Command::Track: return 30;
    case Command::Retrieve: return 1000;
    case Command::Probe: return 40;
  }
  return 0;
}

std::vector<double> default_sigmas(Command c) {
  switch (c) {
    case Command::Track: return {0.0, 0.4};
    case Command::Retrieve: return {0.0, 0.1, 0.2, 0.4};
    default: return {0.0};
  }
}

void check_threshold(double v, const std::string& name) {
  if (!(v >= -1.0 && v <= 1.0)) throw ConfigError("threshold '" + name + "' must lie in [-1, 1]");
}

void validate(const RunConfig& c) {
  if (c.workers == 0) throw ConfigError("workers must be at least 1");
  if (c.command != Command::GenScenes && c.episodes == 0 && !c.stream_file) {
    throw ConfigError("episodes must be at least 1");
  }
  if (c.dim == 0) throw ConfigError("encoder.dim must be positive");
  if (c.command != Command::GenScenes && c.sigmas.empty()) throw ConfigError("at least one sigma is required");
  for (double s : c.sigmas) {
    if (!(s >= 0.0) || !std::isfinite(s)) throw ConfigError("sigma values must be finite and non-negative");
  }
  check_threshold(c.thresholds.node, "node");
  check_threshold(c.thresholds.object, "object");
  check_threshold(c.thresholds.moved, "moved");
  if (c.shuffle_k.empty()) throw ConfigError("shuffle_k must not be empty");
  for (int k : c.shuffle_k) {
    if (k < 1 || k > 5) throw ConfigError("shuffle_k values must lie in [1, 5]");
  }
  if (c.rows.empty()) throw ConfigError("rows must not be empty");
  for (const std::string& r : c.rows) {
    if (std::find(kRowNames.begin(), kRowNames.end(), r) == kRowNames.end()) {
      throw ConfigError("unknown row '" + r + "' (expected ours, gt-bt or gt-mbt)");
    }
  }
  if (c.frames == 0) throw ConfigError("frames must be at least 1");
  if (c.command == Command::Probe && c.episodes < 2) throw ConfigError("probe needs at least 2 scenes");
  if (c.command == Command::Probe && c.control_seeds == 0) throw ConfigError("control_seeds must be at least 1");
  // A dry run of the generator catches infeasible scene settings up front.
  try {
    generate_scene(c.scene, c.seed);
  } catch (const InfeasibleRequest& e) {
    throw ConfigError(std::string("scene config: ") + e.what());
  }
  if (c.command == Command::Rearrange) {
    const int k_max = *std::max_element(c.shuffle_k.begin(), c.shuffle_k.end());
    if (k_max > c.scene.num_objects || c.scene.num_receptacles < 2) {
      throw ConfigError("scene config cannot support the requested shuffle_k");
    }
  }
}

}  // namespace

Command command_from_string(const std::string& name) {
  if (name == "gen-scenes") return Command::GenScenes;
  if (name == "rearrange") return Command::Rearrange;
  if (name == "track") return Command::Track;
  if (name == "retrieve") return Command::Retrieve;
  if (name == "probe") return Command::Probe;
  throw ConfigError("unknown command '" + name + "'");
}

std::string to_string(Command c) {
  switch (c) {
    case Command::GenScenes: return "gen-scenes";
    case Command::Rearrange: return "rearrange";
    case Command::Track: return "track";
    case Command::Retrieve: return "retrieve";
    case Command::Probe: return "probe";
  }
  return "?";
}

RunConfig make_config(Command command, const json& doc, const Overrides& overrides) {
  RunConfig c;
  c.command = command;
  c.episodes = default_episodes(command);
  c.sigmas = default_sigmas(command);
  const json root = doc.is_null() ? json::object() : doc;
  reject_unknown(root, allowed_keys(command), "");

  if (root.contains("seed")) c.seed = get_unsigned(root, "seed", "");
  if (root.contains("out")) c.out = get<std::string>(root, "out", "");
  if (root.contains("workers")) c.workers = get_count(root, "workers", "");
  if (root.contains("episodes")) c.episodes = get_count(root, "episodes", "");
  if (root.contains("sigma")) {
    const json& s = root["sigma"];
    c.sigmas = s.is_array() ? get<std::vector<double>>(root, "sigma", "") : std::vector{get<double>(root, "sigma", "")};
  }
  if (root.contains("scene")) read_scene(root["scene"], c.scene);
  if (root.contains("encoder")) {
    const json& e = root["encoder"];
    reject_unknown(e, {"dim", "seed"}, "encoder.");
    if (e.contains("dim")) c.dim = get_count(e, "dim", "encoder.");
    if (e.contains("seed")) c.encoder_seed = get_unsigned(e, "seed", "encoder.");
  }
  if (root.contains("thresholds")) {
    const json& t = root["thresholds"];
    if (command == Command::Track) {
      reject_unknown(t, {"node"}, "thresholds.");
    } else {
      reject_unknown(t, {"node", "object", "moved"}, "thresholds.");
    }
    if (t.contains("node")) c.thresholds.node = get<double>(t, "node", "thresholds.");
    if (t.contains("object")) c.thresholds.object = get<double>(t, "object", "thresholds.");
    if (t.contains("moved")) c.thresholds.moved = get<double>(t, "moved", "thresholds.");
  }
  if (root.contains("shuffle_k")) {
    const json& k = root["shuffle_k"];
    c.shuffle_k = k.is_array() ? get<std::vector<int>>(root, "shuffle_k", "") : std::vector{get<int>(root, "shuffle_k", "")};
  }
  if (root.contains("rows")) c.rows = get<std::vector<std::string>>(root, "rows", "");
  if (root.contains("frames")) c.frames = get_count(root, "frames", "");
  if (root.contains("stream_file")) c.stream_file = get<std::string>(root, "stream_file", "");
  if (root.contains("control_seeds")) c.control_seeds = get_count(root, "control_seeds", "");

  if (overrides.seed) c.seed = *overrides.seed;
  if (overrides.out) c.out = *overrides.out;
  if (overrides.workers) c.workers = *overrides.workers;
  if (overrides.episodes) c.episodes = *overrides.episodes;
  if (!overrides.sigmas.empty()) c.sigmas = overrides.sigmas;
  validate(c);
  return c;
}

RunConfig load_config(Command command, const std::optional<std::filesystem::path>& file, const Overrides& overrides) {
  json doc;
  if (file) {
    std::ifstream in(*file);
    if (!in) throw ConfigError("cannot read config file " + file->string());
    try {
      doc = json::parse(in);
    } catch (const json::parse_error& e) {
      throw ConfigError("config file " + file->string() + ": " + e.what());
    }
  }
  return make_config(command, doc, overrides);
}

json config_to_json(const RunConfig& c) {
  json j = {{"command", to_string(c.command)},
            {"seed", c.seed},
            {"episodes", c.episodes},
            {"scene",
             {{"width", c.scene.width},
              {"height", c.scene.height},
              {"receptacles", c.scene.num_receptacles},
              {"objects", c.scene.num_objects},
              {"capacity", c.scene.capacity},
              {"walls", c.scene.num_walls}}}};
  if (c.command == Command::GenScenes) return j;
  j["sigma"] = c.sigmas;
  j["encoder"] = {{"dim", c.dim}, {"seed", c.effective_encoder_seed()}};
  switch (c.command) {
    case Command::Rearrange:
      j["thresholds"] = {{"node", c.thresholds.node}, {"object", c.thresholds.object}, {"moved", c.thresholds.moved}};
      j["shuffle_k"] = c.shuffle_k;
      j["rows"] = c.rows;
      break;
    case Command::Track:
      j["thresholds"] = {{"node", c.thresholds.node}};
      j["frames"] = c.frames;
      if (c.stream_file) j["stream_file"] = c.stream_file->string();
      break;
    case Command::Probe: j["control_seeds"] = c.control_seeds; break;
    default: break;
  }
  return j;
}

}  // namespace csr::cli
