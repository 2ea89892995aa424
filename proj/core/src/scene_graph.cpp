#include "csr/scene_graph.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>

#include "csr/errors.hpp"

namespace csr {
namespace {

void check_threshold(double t, const char* name) {
  if (!(t >= -1.0 && t <= 1.0)) throw InvalidInput(std::string(name) + " must lie in [-1, 1]");
}

void check_unit(const FeatureVec& f, std::size_t dim, const std::string& what) {
  if (f.size() != dim) throw InvalidInput(what + " has length " + std::to_string(f.size()));
  if (std::abs(l2_norm(f) - 1.0) > 1e-6) throw InvalidInput(what + " is not unit norm");
}

std::optional<std::size_t> graph_dim(const CsrGraph& g) {
  if (g.nodes.empty()) return std::nullopt;
  return g.nodes.begin()->second.scene.size();
}

}  // namespace

void validate(const CsrGraph& graph) {
  const std::optional<std::size_t> dim = graph_dim(graph);
  for (const auto& [id, node] : graph.nodes) {
    const std::string name = "node " + std::to_string(id);
    if (id >= graph.next_id) throw InvalidInput(name + " is not below next_id");
    check_unit(node.scene, *dim, name + " scene feature");
    check_unit(node.identity, *dim, name + " identity feature");
    if (node.merge_count == 0) throw InvalidInput(name + " has merge_count 0");
  }
  for (const auto& [key, edge] : graph.edges) {
    const std::string name = "edge " + std::to_string(key.first) + "->" + std::to_string(key.second);
    if (key.first == key.second) throw InvalidInput(name + " is a self loop");
    if (!graph.nodes.contains(key.first) || !graph.nodes.contains(key.second)) {
      throw InvalidInput(name + " has a missing endpoint");
    }
    check_unit(edge.feature, *dim, name + " feature");
    if (edge.merge_count == 0) throw InvalidInput(name + " has merge_count 0");
  }
}

FeatureVec merge_feature(const FeatureVec& old, std::size_t count, const FeatureVec& incoming) {
  if (count == 0) throw InvalidInput("merge_feature: count must be at least 1");
  if (old.size() != incoming.size()) throw InvalidInput("merge_feature: length mismatch");
  // The 1/(count+1) factor of the mean cancels under normalization.
  std::vector<double> sum(old.size());
  const double w = static_cast<double>(count);
  for (std::size_t d = 0; d < sum.size(); ++d) sum[d] = w * old[d] + incoming[d];
  if (l2_norm(sum) <= 1e-12 * (w + 1.0)) throw DegenerateFeature("merge_feature: features cancel");
  return normalize(sum);
}

MatchReport ingest(CsrGraph& graph, const LocalGraph& local, const IngestOptions& options) {
  check_threshold(options.node_threshold, "node_threshold");
  const std::size_t n = local.nodes.size();
  const std::optional<std::size_t> dim = graph_dim(graph);
  for (const LocalNode& node : local.nodes) {
    const std::size_t want = dim.value_or(local.nodes.front().scene.size());
    if (node.scene.size() != want || node.identity.size() != want) {
      throw InvalidInput("ingest: local feature length does not match the graph");
    }
  }
  for (const auto& [key, f] : local.edges) {
    if (key.first >= n || key.second >= n || key.first == key.second) {
      throw InvalidInput("ingest: local edge references a bad index");
    }
    if (n > 0 && f.size() != local.nodes.front().scene.size()) {
      throw InvalidInput("ingest: local edge feature length mismatch");
    }
  }

  MatchReport report;
  report.local_to_node.assign(n, 0);
  std::vector<char> matched(n, 0);

  if (!graph.empty() && n > 0) {
    std::vector<NodeId> ids;
    ids.reserve(graph.nodes.size());
    for (const auto& [id, node] : graph.nodes) ids.push_back(id);

    if (options.mode == MatchMode::GroundTruth) {
      std::map<InstanceId, NodeId> by_truth;
      for (const auto& [id, node] : graph.nodes) by_truth.try_emplace(node.truth_id, id);
      for (std::size_t l = 0; l < n; ++l) {
        auto it = by_truth.find(local.nodes[l].truth_id);
        if (it == by_truth.end()) continue;
        matched[l] = 1;
        report.local_to_node[l] = it->second;
        report.matched.push_back({l, it->second, 1.0});
        by_truth.erase(it);
      }
    } else {
      ScoreMatrix scores(ids.size(), n);
      std::size_t r = 0;
      for (const auto& [id, node] : graph.nodes) {
        for (std::size_t l = 0; l < n; ++l) scores.at(r, l) = cos_sim(node.scene, local.nodes[l].scene);
        ++r;
      }
      for (const auto& [row, col] : max_assignment(scores).pairs) {
        const double s = scores.at(row, col);
        if (!(s > options.node_threshold)) continue;
        matched[col] = 1;
        report.local_to_node[col] = ids[row];
        report.matched.push_back({col, ids[row], s});
      }
      std::sort(report.matched.begin(), report.matched.end(),
                [](const NodeMatch& a, const NodeMatch& b) { return a.local < b.local; });
    }
  }

  for (const NodeMatch& m : report.matched) {
    CsrNode& node = graph.nodes.at(m.node);
    const LocalNode& in = local.nodes[m.local];
    node.scene = merge_feature(node.scene, node.merge_count, in.scene);
    node.identity = merge_feature(node.identity, node.merge_count, in.identity);
    ++node.merge_count;
  }
  for (std::size_t l = 0; l < n; ++l) {
    if (matched[l]) continue;
    const NodeId id = graph.next_id++;
    graph.nodes.emplace(id, CsrNode{local.nodes[l].scene, local.nodes[l].identity, 1, local.nodes[l].truth_id});
    report.local_to_node[l] = id;
    report.new_nodes.push_back(l);
  }

  for (const auto& [key, f] : local.edges) {
    const std::pair<NodeId, NodeId> gkey{report.local_to_node[key.first], report.local_to_node[key.second]};
    if (gkey.first == gkey.second) continue;  // two locals folded into one node
    auto it = graph.edges.find(gkey);
    if (it == graph.edges.end()) {
      graph.edges.emplace(gkey, CsrEdge{f, 1});
    } else {
      it->second.feature = merge_feature(it->second.feature, it->second.merge_count, f);
      ++it->second.merge_count;
    }
  }
  return report;
}

ChangeReport detect_changes(const CsrGraph& walk, const CsrGraph& un, const ChangeOptions& options) {
  check_threshold(options.object_threshold, "object_threshold");
  check_threshold(options.moved_threshold, "moved_threshold");
  ChangeReport report;
  std::vector<NodeId> walk_ids;
  std::vector<NodeId> un_ids;
  for (const auto& [id, node] : walk.nodes) walk_ids.push_back(id);
  for (const auto& [id, node] : un.nodes) un_ids.push_back(id);
  if (walk_ids.empty() || un_ids.empty()) {
    report.unmatched_walk = walk_ids;
    report.unmatched_un = un_ids;
    return report;
  }
  if (walk.nodes.begin()->second.scene.size() != un.nodes.begin()->second.scene.size()) {
    throw InvalidInput("detect_changes: graphs use different feature lengths");
  }

  std::vector<char> walk_used(walk_ids.size(), 0);
  std::vector<char> un_used(un_ids.size(), 0);
  auto accept = [&](std::size_t w, std::size_t u, double identity_score) {
    const CsrNode& a = walk.nodes.at(walk_ids[w]);
    const CsrNode& b = un.nodes.at(un_ids[u]);
    const Correspondence c{walk_ids[w], un_ids[u], identity_score, cos_sim(a.scene, b.scene)};
    report.correspondences.push_back(c);
    if (c.scene_score < options.moved_threshold) report.moved.push_back(c);
    walk_used[w] = 1;
    un_used[u] = 1;
  };

  if (options.mode == MatchMode::GroundTruth) {
    for (std::size_t w = 0; w < walk_ids.size(); ++w) {
      for (std::size_t u = 0; u < un_ids.size(); ++u) {
        if (un_used[u] || un.nodes.at(un_ids[u]).truth_id != walk.nodes.at(walk_ids[w]).truth_id) continue;
        accept(w, u, 1.0);
        break;
      }
    }
  } else {
    ScoreMatrix scores(walk_ids.size(), un_ids.size());
    for (std::size_t w = 0; w < walk_ids.size(); ++w) {
      const FeatureVec& a = walk.nodes.at(walk_ids[w]).identity;
      for (std::size_t u = 0; u < un_ids.size(); ++u) scores.at(w, u) = cos_sim(a, un.nodes.at(un_ids[u]).identity);
    }
    for (const auto& [w, u] : max_assignment(scores).pairs) {
      if (scores.at(w, u) > options.object_threshold) accept(w, u, scores.at(w, u));
    }
  }

  for (std::size_t w = 0; w < walk_ids.size(); ++w) {
    if (!walk_used[w]) report.unmatched_walk.push_back(walk_ids[w]);
  }
  for (std::size_t u = 0; u < un_ids.size(); ++u) {
    if (!un_used[u]) report.unmatched_un.push_back(un_ids[u]);
  }
  return report;
}

}  // namespace csr
