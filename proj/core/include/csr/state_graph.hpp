#pragma once

// Embodied state graph: one state per agent pose, action-labelled
// transitions between them, and the CSR nodes seen from each state.

#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <utility>
#include <vector>

#include "csr/scene_graph.hpp"
#include "csr/world.hpp"

namespace csr {

using StateId = std::size_t;

struct State {
  AgentPose pose;
  std::set<NodeId> observed;
  bool operator==(const State&) const = default;
};

class StateGraph {
 public:
  const std::vector<State>& states() const noexcept { return states_; }
  const std::map<std::pair<StateId, Action>, StateId>& transitions() const noexcept { return transitions_; }
  std::optional<StateId> initial() const noexcept { return initial_; }
  bool empty() const noexcept { return states_.empty(); }
  std::optional<StateId> find(const AgentPose& pose) const;

  /// First observation of a trajectory. Throws InvalidInput if the graph
  /// already has an initial state at a different pose.
  StateId start(const AgentPose& pose, const std::vector<NodeId>& observed);

  /// Adds (or revisits) the state for `pose`, unions `observed` into it and
  /// records prev --action--> state. Throws InvalidInput if prev does not
  /// exist and std::logic_error if the transition already leads elsewhere.
  StateId record(StateId prev, const Action& action, const AgentPose& pose, const std::vector<NodeId>& observed);

  /// Rebuilds a graph from stored parts; validates the result.
  static StateGraph from_parts(std::vector<State> states, std::map<std::pair<StateId, Action>, StateId> transitions,
                               std::optional<StateId> initial);

  bool operator==(const StateGraph&) const = default;

 private:
  friend StateGraph fuse(const StateGraph& walk, const StateGraph& un);
  StateId ensure(const AgentPose& pose);

  std::vector<State> states_;
  std::map<std::pair<StateId, Action>, StateId> transitions_;
  std::map<AgentPose, StateId> by_pose_;
  std::optional<StateId> initial_;
};

/// Throws InvalidInput if a transition endpoint or the initial state is
/// missing, or two states share a pose.
void validate(const StateGraph& graph);

/// Union of two trajectories' graphs keyed by pose; the initial states must
/// share a pose and become one. `walk` keeps its state ids, states only in
/// `un` are appended in their original order.
StateGraph fuse(const StateGraph& walk, const StateGraph& un);

struct Plan {
  std::vector<Action> actions;
  StateId goal_state = 0;
};

class PlanError : public std::runtime_error {
 public:
  enum class Kind { TargetNotObserved, Unreachable };
  PlanError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

/// Shortest action sequence from `start` to a state that observes `target`.
/// Breadth-first by layers; states in a layer are expanded in id order and
/// their transitions in action order, and among goal states at the minimal
/// depth the lowest id wins. Throws InvalidInput for an unknown start.
Plan plan_to_node(const StateGraph& graph, StateId start, NodeId target);

}  // namespace csr
