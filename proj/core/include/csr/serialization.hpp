#pragma once

// Versioned JSON documents for scenes and graphs. Readers check the version
// and validate the result, throwing InvalidInput on any schema problem.

#include <nlohmann/json.hpp>

#include "csr/scene_graph.hpp"
#include "csr/state_graph.hpp"
#include "csr/world.hpp"

namespace csr {

inline constexpr int kSchemaVersion = 1;

nlohmann::json scene_to_json(const Scene& scene);
Scene scene_from_json(const nlohmann::json& j);

nlohmann::json csr_graph_to_json(const CsrGraph& graph);
CsrGraph csr_graph_from_json(const nlohmann::json& j);

nlohmann::json state_graph_to_json(const StateGraph& graph);
StateGraph state_graph_from_json(const nlohmann::json& j);

}  // namespace csr
