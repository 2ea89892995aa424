#include "csr/state_graph.hpp"

#include <algorithm>
#include <string>

#include "csr/errors.hpp"

namespace csr {

std::optional<StateId> StateGraph::find(const AgentPose& pose) const {
  auto it = by_pose_.find(pose);
  if (it == by_pose_.end()) return std::nullopt;
  return it->second;
}

StateId StateGraph::ensure(const AgentPose& pose) {
  auto [it, inserted] = by_pose_.try_emplace(pose, states_.size());
  if (inserted) states_.push_back({pose, {}});
  return it->second;
}

StateId StateGraph::start(const AgentPose& pose, const std::vector<NodeId>& observed) {
  if (initial_ && states_[*initial_].pose != pose) {
    throw InvalidInput("state graph already starts at a different pose");
  }
  const StateId id = ensure(pose);
  states_[id].observed.insert(observed.begin(), observed.end());
  initial_ = id;
  return id;
}

StateId StateGraph::record(StateId prev, const Action& action, const AgentPose& pose,
                           const std::vector<NodeId>& observed) {
  if (prev >= states_.size()) throw InvalidInput("record: unknown previous state " + std::to_string(prev));
  const StateId id = ensure(pose);
  states_[id].observed.insert(observed.begin(), observed.end());
  auto [it, inserted] = transitions_.try_emplace({prev, action}, id);
  if (!inserted && it->second != id) {
    throw std::logic_error("record: transition " + std::to_string(prev) + " --" + to_string(action) +
                           "--> already leads to state " + std::to_string(it->second));
  }
  return id;
}

StateGraph StateGraph::from_parts(std::vector<State> states,
                                  std::map<std::pair<StateId, Action>, StateId> transitions,
                                  std::optional<StateId> initial) {
  StateGraph g;
  for (std::size_t i = 0; i < states.size(); ++i) {
    if (!g.by_pose_.try_emplace(states[i].pose, i).second) {
      throw InvalidInput("state graph: states " + std::to_string(g.by_pose_.at(states[i].pose)) + " and " +
                         std::to_string(i) + " share a pose");
    }
  }
  g.states_ = std::move(states);
  g.transitions_ = std::move(transitions);
  g.initial_ = initial;
  validate(g);
  return g;
}

void validate(const StateGraph& graph) {
  const std::size_t n = graph.states().size();
  if (n == 0) {
    if (graph.initial() || !graph.transitions().empty()) throw InvalidInput("state graph: empty graph has links");
    return;
  }
  if (!graph.initial() || *graph.initial() >= n) throw InvalidInput("state graph: missing initial state");
  std::set<AgentPose> poses;
  for (const State& s : graph.states()) {
    if (!poses.insert(s.pose).second) throw InvalidInput("state graph: two states share a pose");
  }
  for (const auto& [key, to] : graph.transitions()) {
    if (key.first >= n || to >= n) throw InvalidInput("state graph: transition endpoint missing");
  }
}

StateGraph fuse(const StateGraph& walk, const StateGraph& un) {
  if (walk.empty() || un.empty()) throw InvalidInput("fuse: both graphs must be nonempty");
  const AgentPose& start = walk.states()[*walk.initial()].pose;
  if (start != un.states()[*un.initial()].pose) throw InvalidInput("fuse: initial poses differ");

  StateGraph out = walk;
  std::vector<StateId> remap(un.states().size());
  for (std::size_t i = 0; i < un.states().size(); ++i) {
    const State& s = un.states()[i];
    const std::vector<NodeId> ids(s.observed.begin(), s.observed.end());
    if (i == *un.initial()) {
      remap[i] = out.start(s.pose, ids);
      continue;
    }
    const std::optional<StateId> existing = out.find(s.pose);
    remap[i] = existing ? *existing : out.ensure(s.pose);
    out.states_[remap[i]].observed.insert(ids.begin(), ids.end());
  }
  for (const auto& [key, to] : un.transitions()) {
    auto [it, inserted] = out.transitions_.try_emplace({remap[key.first], key.second}, remap[to]);
    if (!inserted && it->second != remap[to]) {
      throw std::logic_error("fuse: trajectories disagree on the outcome of " + to_string(key.second));
    }
  }
  return out;
}

Plan plan_to_node(const StateGraph& graph, StateId start, NodeId target) {
  const std::size_t n = graph.states().size();
  if (start >= n) throw InvalidInput("plan_to_node: unknown start state " + std::to_string(start));
  const bool observed = std::any_of(graph.states().begin(), graph.states().end(),
                                    [&](const State& s) { return s.observed.contains(target); });
  if (!observed) {
    throw PlanError(PlanError::Kind::TargetNotObserved, "no state observes node " + std::to_string(target));
  }

  // Outgoing transitions in (state, action) order come straight from the map.
  std::vector<std::vector<std::pair<Action, StateId>>> out(n);
  for (const auto& [key, to] : graph.transitions()) out[key.first].emplace_back(key.second, to);

  constexpr StateId kUnseen = static_cast<StateId>(-1);
  std::vector<StateId> parent(n, kUnseen);
  std::vector<Action> via(n);
  parent[start] = start;
  std::vector<StateId> layer{start};
  while (!layer.empty()) {
    std::sort(layer.begin(), layer.end());
    for (StateId s : layer) {
      if (!graph.states()[s].observed.contains(target)) continue;
      Plan plan;
      plan.goal_state = s;
      for (StateId cur = s; cur != start; cur = parent[cur]) plan.actions.push_back(via[cur]);
      std::reverse(plan.actions.begin(), plan.actions.end());
      return plan;
    }
    std::vector<StateId> next;
    for (StateId s : layer) {
      for (const auto& [action, to] : out[s]) {
        if (parent[to] != kUnseen) continue;
        parent[to] = s;
        via[to] = action;
        next.push_back(to);
      }
    }
    layer = std::move(next);
  }
  throw PlanError(PlanError::Kind::Unreachable,
                  "node " + std::to_string(target) + " is not reachable from state " + std::to_string(start));
}

}  // namespace csr
