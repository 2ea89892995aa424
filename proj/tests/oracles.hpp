#pragma once

// Independent reference implementations used only by tests. None of these
// call into the library code they check.

#include <functional>
#include <optional>
#include <utility>
#include <vector>

#include "csr/state_graph.hpp"
#include "csr/world.hpp"

namespace oracle {

struct BruteAssignment {
  std::vector<std::pair<std::size_t, std::size_t>> pairs;  // sorted by row
  double total = 0.0;
};

/// Exhaustive search over every one-to-one matching of size min(rows, cols).
/// Ties within `tol` go to the lexicographically smallest row->column vector
/// with "unmatched" ranked after every column.
BruteAssignment brute_force_assignment(const std::vector<std::vector<double>>& scores, double tol = 1e-9);

/// Line of sight by dense sampling of the segment between cell centers: a
/// sample strictly inside a wall cell (other than the target) blocks it.
bool sampled_visible(const csr::Scene& scene, const csr::AgentPose& pose, csr::Cell target, int depth = 5,
                     int half_width = 2);

/// Instance ids that sampled_visible says are in view: visible receptacles
/// and the objects on them.
std::vector<csr::InstanceId> sampled_detections(const csr::Scene& scene, const csr::AgentPose& pose);

/// Shortest number of transitions from `start` to any state observing
/// `target`, by plain BFS over an adjacency list. nullopt if none.
std::optional<std::size_t> shortest_plan_length(const csr::StateGraph& graph, csr::StateId start,
                                                csr::NodeId target);

/// ARI by enumerating all n(n-1)/2 pairs instead of a contingency table.
double pair_counting_ari(const std::vector<int>& a, const std::vector<int>& b);

/// Central finite-difference gradient of f at x.
std::vector<double> numeric_gradient(const std::function<double(const std::vector<double>&)>& f,
                                     std::vector<double> x, double h = 1e-6);

/// ||a - b|| / ||b|| in the L2 norm (denominator floored at 1e-12).
double relative_error(const std::vector<double>& a, const std::vector<double>& b);

}  // namespace oracle
