#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <map>

namespace oracle {

BruteAssignment brute_force_assignment(const std::vector<std::vector<double>>& scores, double tol) {
  const std::size_t rows = scores.size();
  const std::size_t cols = rows == 0 ? 0 : scores[0].size();
  const std::size_t want = std::min(rows, cols);
  const std::size_t none = cols;

  // Visits every feasible row->column vector in lexicographic order.
  std::vector<std::size_t> pick(rows, none);
  std::vector<char> used(cols, 0);
  std::vector<std::pair<std::vector<std::size_t>, double>> all;
  std::function<void(std::size_t, std::size_t, double)> rec = [&](std::size_t r, std::size_t matched, double sum) {
    if (r == rows) {
      if (matched == want) all.emplace_back(pick, sum);
      return;
    }
    if (matched + (rows - r) < want) return;
    for (std::size_t c = 0; c <= cols; ++c) {
      if (c < cols && used[c]) continue;
      pick[r] = c;
      if (c < cols) {
        used[c] = 1;
        rec(r + 1, matched + 1, sum + scores[r][c]);
        used[c] = 0;
      } else {
        rec(r + 1, matched, sum);
      }
    }
    pick[r] = none;
  };
  rec(0, 0, 0.0);

  double best = -std::numeric_limits<double>::infinity();
  for (const auto& [p, s] : all) best = std::max(best, s);
  BruteAssignment out;
  for (const auto& [p, s] : all) {
    if (s < best - tol) continue;
    for (std::size_t r = 0; r < rows; ++r) {
      if (p[r] != none) out.pairs.emplace_back(r, p[r]);
    }
    out.total = s;
    break;
  }
  return out;
}

namespace {

// Viewer-frame coordinates of `t`: steps ahead and steps to the side.
std::pair<int, int> to_view(const csr::AgentPose& pose, csr::Cell t) {
  const int dx = t.x - pose.cell.x;
  const int dy = t.y - pose.cell.y;
  switch (pose.heading) {
    case csr::Heading::North: return {-dy, dx};
    case csr::Heading::East: return {dx, dy};
    case csr::Heading::South: return {dy, -dx};
    case csr::Heading::West: return {-dx, -dy};
  }
  return {0, 0};
}

}  // namespace

bool sampled_visible(const csr::Scene& scene, const csr::AgentPose& pose, csr::Cell target, int depth,
                     int half_width) {
  if (!scene.in_bounds(target)) return false;
  const auto [ahead, side] = to_view(pose, target);
  if (ahead < 1 || ahead > depth || std::abs(side) > half_width) return false;
  constexpr int kSamples = 20000;
  constexpr double kInside = 0.5 - 1e-9;
  for (int s = 1; s < kSamples; ++s) {
    const double t = static_cast<double>(s) / kSamples;
    const double x = pose.cell.x + t * (target.x - pose.cell.x);
    const double y = pose.cell.y + t * (target.y - pose.cell.y);
    for (const csr::Cell& w : scene.walls) {
      if (w == target) continue;
      if (std::abs(x - w.x) < kInside && std::abs(y - w.y) < kInside) return false;
    }
  }
  return true;
}

std::vector<csr::InstanceId> sampled_detections(const csr::Scene& scene, const csr::AgentPose& pose) {
  std::vector<csr::InstanceId> ids;
  for (const csr::Receptacle& r : scene.receptacles) {
    if (!sampled_visible(scene, pose, r.cell)) continue;
    ids.push_back(r.id);
    for (const csr::ObjectPlacement& o : scene.objects) {
      if (o.receptacle == r.id) ids.push_back(o.id);
    }
  }
  std::sort(ids.begin(), ids.end());
  return ids;
}

std::optional<std::size_t> shortest_plan_length(const csr::StateGraph& graph, csr::StateId start,
                                                csr::NodeId target) {
  std::map<csr::StateId, std::vector<csr::StateId>> adj;
  for (const auto& [key, to] : graph.transitions()) adj[key.first].push_back(to);
  std::vector<std::size_t> dist(graph.states().size(), std::numeric_limits<std::size_t>::max());
  std::deque<csr::StateId> queue{start};
  dist[start] = 0;
  while (!queue.empty()) {
    const csr::StateId s = queue.front();
    queue.pop_front();
    if (graph.states()[s].observed.count(target)) return dist[s];
    for (csr::StateId t : adj[s]) {
      if (dist[t] != std::numeric_limits<std::size_t>::max()) continue;
      dist[t] = dist[s] + 1;
      queue.push_back(t);
    }
  }
  return std::nullopt;
}

double pair_counting_ari(const std::vector<int>& a, const std::vector<int>& b) {
  double n11 = 0, n10 = 0, n01 = 0, n00 = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = i + 1; j < a.size(); ++j) {
      const bool sa = a[i] == a[j];
      const bool sb = b[i] == b[j];
      if (sa && sb) ++n11;
      else if (sa) ++n10;
      else if (sb) ++n01;
      else ++n00;
    }
  }
  const double denom = (n00 + n01) * (n01 + n11) + (n00 + n10) * (n10 + n11);
  if (denom == 0.0) return 1.0;
  return 2.0 * (n00 * n11 - n01 * n10) / denom;
}

std::vector<double> numeric_gradient(const std::function<double(const std::vector<double>&)>& f,
                                     std::vector<double> x, double h) {
  std::vector<double> g(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double keep = x[i];
    x[i] = keep + h;
    const double up = f(x);
    x[i] = keep - h;
    const double down = f(x);
    x[i] = keep;
    g[i] = (up - down) / (2.0 * h);
  }
  return g;
}

double relative_error(const std::vector<double>& a, const std::vector<double>& b) {
  double diff = 0.0;
  double norm = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    diff += (a[i] - b[i]) * (a[i] - b[i]);
    norm += b[i] * b[i];
  }
  return std::sqrt(diff) / std::max(std::sqrt(norm), 1e-12);
}

}  // namespace oracle
