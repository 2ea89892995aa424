#include "csr/serialization.hpp"

#include <string>

#include "csr/errors.hpp"

namespace csr {
namespace {

using nlohmann::json;

void check_version(const json& j, const char* kind) {
  if (!j.is_object()) throw InvalidInput(std::string(kind) + ": expected a JSON object");
  if (!j.contains("version") || j["version"] != kSchemaVersion) {
    throw InvalidInput(std::string(kind) + ": unsupported or missing version");
  }
}

json cell_json(Cell c) { return json::array({c.x, c.y}); }

Cell cell_from(const json& j) {
  if (!j.is_array() || j.size() != 2) throw InvalidInput("cell must be [x, y]");
  return {j[0].get<int>(), j[1].get<int>()};
}

json pose_json(const AgentPose& p) {
  return {{"cell", cell_json(p.cell)}, {"heading", std::string(to_string(p.heading))}};
}

AgentPose pose_from(const json& j) {
  return {cell_from(j.at("cell")), heading_from_string(j.at("heading").get<std::string>())};
}

json feature_json(const FeatureVec& f) { return std::vector<double>(f.values().begin(), f.values().end()); }

FeatureVec feature_from(const json& j) { return FeatureVec::from_unit(j.get<std::vector<double>>(), 1e-6); }

json action_json(const Action& a) {
  json j = {{"type", std::string(to_string(a.type))}};
  if (!a.is_navigation()) j["target"] = a.target;
  return j;
}

Action action_from(const json& j) {
  Action a{action_type_from_string(j.at("type").get<std::string>()), -1};
  if (!a.is_navigation()) a.target = j.at("target").get<int>();
  return a;
}

// Runs a parser, turning library exceptions into InvalidInput.
template <typename F>
auto guarded(const char* kind, F&& parse) {
  try {
    return parse();
  } catch (const json::exception& e) {
    throw InvalidInput(std::string(kind) + ": " + e.what());
  }
}

}  // namespace

json scene_to_json(const Scene& scene) {
  json walls = json::array();
  for (Cell w : scene.walls) walls.push_back(cell_json(w));
  json receptacles = json::array();
  for (const Receptacle& r : scene.receptacles) {
    receptacles.push_back({{"id", r.id}, {"cell", cell_json(r.cell)}, {"capacity", r.capacity}});
  }
  json objects = json::array();
  for (const ObjectPlacement& o : scene.objects) {
    objects.push_back({{"id", o.id}, {"receptacle", o.receptacle}, {"offset", o.offset}});
  }
  return {{"version", kSchemaVersion},
          {"width", scene.width},
          {"height", scene.height},
          {"seed", scene.seed},
          {"start", pose_json(scene.start)},
          {"walls", walls},
          {"receptacles", receptacles},
          {"objects", objects},
          {"held", scene.held ? json(*scene.held) : json(nullptr)}};
}

Scene scene_from_json(const json& j) {
  check_version(j, "scene");
  Scene s = guarded("scene", [&] {
    Scene s;
    s.width = j.at("width").get<int>();
    s.height = j.at("height").get<int>();
    s.seed = j.at("seed").get<std::uint64_t>();
    s.start = pose_from(j.at("start"));
    for (const json& w : j.at("walls")) s.walls.push_back(cell_from(w));
    for (const json& r : j.at("receptacles")) {
      s.receptacles.push_back({r.at("id").get<int>(), cell_from(r.at("cell")), r.at("capacity").get<int>()});
    }
    for (const json& o : j.at("objects")) {
      s.objects.push_back({o.at("id").get<int>(), o.at("receptacle").get<int>(), o.at("offset").get<int>()});
    }
    if (j.contains("held") && !j["held"].is_null()) s.held = j["held"].get<int>();
    return s;
  });
  validate_scene(s);
  return s;
}

json csr_graph_to_json(const CsrGraph& graph) {
  json nodes = json::array();
  for (const auto& [id, n] : graph.nodes) {
    nodes.push_back({{"id", id},
                     {"scene", feature_json(n.scene)},
                     {"identity", feature_json(n.identity)},
                     {"count", n.merge_count},
                     {"truth_id", n.truth_id}});
  }
  json edges = json::array();
  for (const auto& [key, e] : graph.edges) {
    edges.push_back({{"from", key.first}, {"to", key.second}, {"feature", feature_json(e.feature)},
                     {"count", e.merge_count}});
  }
  return {{"version", kSchemaVersion}, {"next_id", graph.next_id}, {"nodes", nodes}, {"edges", edges}};
}

CsrGraph csr_graph_from_json(const json& j) {
  check_version(j, "csr graph");
  CsrGraph g = guarded("csr graph", [&] {
    CsrGraph g;
    g.next_id = j.at("next_id").get<NodeId>();
    for (const json& n : j.at("nodes")) {
      const NodeId id = n.at("id").get<NodeId>();
      const CsrNode node{feature_from(n.at("scene")), feature_from(n.at("identity")),
                         n.at("count").get<std::size_t>(), n.at("truth_id").get<int>()};
      if (!g.nodes.emplace(id, node).second) throw InvalidInput("csr graph: duplicate node " + std::to_string(id));
    }
    for (const json& e : j.at("edges")) {
      const std::pair key{e.at("from").get<NodeId>(), e.at("to").get<NodeId>()};
      if (!g.edges.emplace(key, CsrEdge{feature_from(e.at("feature")), e.at("count").get<std::size_t>()}).second) {
        throw InvalidInput("csr graph: duplicate edge");
      }
    }
    return g;
  });
  validate(g);
  return g;
}

json state_graph_to_json(const StateGraph& graph) {
  json states = json::array();
  for (std::size_t i = 0; i < graph.states().size(); ++i) {
    const State& s = graph.states()[i];
    states.push_back({{"id", i}, {"pose", pose_json(s.pose)}, {"observed", s.observed}});
  }
  json transitions = json::array();
  for (const auto& [key, to] : graph.transitions()) {
    transitions.push_back({{"from", key.first}, {"action", action_json(key.second)}, {"to", to}});
  }
  return {{"version", kSchemaVersion},
          {"initial", graph.initial() ? json(*graph.initial()) : json(nullptr)},
          {"states", states},
          {"transitions", transitions}};
}

StateGraph state_graph_from_json(const json& j) {
  check_version(j, "state graph");
  return guarded("state graph", [&] {
    std::vector<State> states;
    for (const json& s : j.at("states")) {
      if (s.at("id").get<std::size_t>() != states.size()) throw InvalidInput("state graph: state ids must be 0..n-1");
      states.push_back({pose_from(s.at("pose")), s.at("observed").get<std::set<NodeId>>()});
    }
    std::map<std::pair<StateId, Action>, StateId> transitions;
    for (const json& t : j.at("transitions")) {
      const std::pair key{t.at("from").get<StateId>(), action_from(t.at("action"))};
      if (!transitions.emplace(key, t.at("to").get<StateId>()).second) {
        throw InvalidInput("state graph: duplicate transition");
      }
    }
    std::optional<StateId> initial;
    if (!j.at("initial").is_null()) initial = j["initial"].get<StateId>();
    return StateGraph::from_parts(std::move(states), std::move(transitions), initial);
  });
}

}  // namespace csr
