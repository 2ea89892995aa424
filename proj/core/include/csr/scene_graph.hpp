#pragma once

// The global continuous scene graph: local graphs are folded in one at a time
// by Hungarian matching on node features, and two graphs from different
// trajectories are compared to find moved objects.

#include <cstdint>
#include <map>
#include <utility>
#include <vector>

#include "csr/encoder.hpp"
#include "csr/numerics.hpp"

namespace csr {

using NodeId = std::uint64_t;

struct CsrNode {
  FeatureVec scene;
  FeatureVec identity;
  std::size_t merge_count = 1;
  InstanceId truth_id = -1;  // evaluators and ground-truth ablations only
  bool operator==(const CsrNode&) const = default;
};

struct CsrEdge {
  FeatureVec feature;
  std::size_t merge_count = 1;
  bool operator==(const CsrEdge&) const = default;
};

struct CsrGraph {
  std::map<NodeId, CsrNode> nodes;
  std::map<std::pair<NodeId, NodeId>, CsrEdge> edges;
  NodeId next_id = 0;  // set to an offset to keep ids of two graphs disjoint

  bool empty() const { return nodes.empty(); }
  bool operator==(const CsrGraph&) const = default;
};

/// Throws InvalidInput naming the first broken invariant: non-unit or
/// mixed-length features, zero counts, dangling or self-loop edges, or an id
/// at or above next_id.
void validate(const CsrGraph& graph);

/// normalize(count * old + new). Throws DegenerateFeature when the weighted
/// sum vanishes and InvalidInput when count is 0 or lengths differ.
FeatureVec merge_feature(const FeatureVec& old, std::size_t count, const FeatureVec& incoming);

enum class MatchMode { Estimated, GroundTruth };

struct IngestOptions {
  double node_threshold = 0.5;
  MatchMode mode = MatchMode::Estimated;
};

struct NodeMatch {
  std::size_t local = 0;
  NodeId node = 0;
  double score = 0.0;
};

struct MatchReport {
  std::vector<NodeMatch> matched;
  std::vector<std::size_t> new_nodes;
  std::vector<NodeId> local_to_node;  // global id for every local index
};

/// Folds `local` into `graph` in place. In Estimated mode local nodes are
/// Hungarian-matched to global nodes on scene-feature cosine and a pair
/// counts as the same node only if its score exceeds the threshold. In
/// GroundTruth mode nodes match iff their truth ids agree (score 1).
/// Throws InvalidInput on a feature-length mismatch or threshold outside
/// [-1, 1].
MatchReport ingest(CsrGraph& graph, const LocalGraph& local, const IngestOptions& options = {});

struct Correspondence {
  NodeId walk = 0;
  NodeId unshuffle = 0;
  double identity_score = 0.0;
  double scene_score = 0.0;
  bool operator==(const Correspondence&) const = default;
};

struct ChangeReport {
  std::vector<Correspondence> correspondences;  // ordered by walk id
  std::vector<Correspondence> moved;
  std::vector<NodeId> unmatched_walk;
  std::vector<NodeId> unmatched_un;
};

struct ChangeOptions {
  double object_threshold = 0.4;
  double moved_threshold = 0.8;
  MatchMode mode = MatchMode::Estimated;
};

/// Matches nodes across two trajectories on identity-feature cosine and
/// flags a correspondence as moved when its scene-feature cosine falls
/// strictly below the moved threshold.
ChangeReport detect_changes(const CsrGraph& walk, const CsrGraph& un, const ChangeOptions& options = {});

}  // namespace csr
