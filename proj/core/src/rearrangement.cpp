#include "csr/rearrangement.hpp"

#include <algorithm>
#include <deque>
#include <map>
#include <optional>

#include "csr/errors.hpp"
#include "csr/metrics.hpp"
#include "csr/random.hpp"
#include "csr/state_graph.hpp"

namespace csr {
namespace {

enum : std::uint64_t { kTagScene = 1, kTagShuffle, kTagFrame, kTagRestore };
enum : std::uint64_t { kWalkPhase = 0, kUnshufflePhase = 1 };

// Keeps node ids of the two trajectories disjoint so the fused state graph
// can refer to both.
constexpr NodeId kUnshuffleFirstId = NodeId{1} << 32;

using RegionMemory = std::map<std::pair<AgentPose, NodeId>, Region>;

struct Trajectory {
  CsrGraph csr;
  StateGraph states;
  AgentPose end;
  std::size_t actions = 0;
};

Trajectory record_trajectory(const Scene& scene, const AgentPose& start, const std::vector<Action>& actions,
                             const Encoder& encoder, const IngestOptions& options, NodeId first_id,
                             std::uint64_t seed, std::uint64_t phase, RegionMemory& regions) {
  Trajectory t;
  t.csr.next_id = first_id;
  std::uint64_t frame_no = 0;
  auto look = [&](const AgentPose& pose) {
    const Observation obs = observe(scene, pose, hash_seed({seed, kTagFrame, phase, frame_no++}));
    const LocalGraph local = encoder.encode_observation(scene, obs);
    const MatchReport report = ingest(t.csr, local, options);
    for (std::size_t i = 0; i < local.nodes.size(); ++i) {
      regions[{pose, report.local_to_node[i]}] = local.nodes[i].region;
    }
    return report.local_to_node;
  };

  AgentPose pose = start;
  StateId state = t.states.start(pose, look(pose));
  for (const Action& a : actions) {
    const StepResult r = step(scene, pose, a);
    ++t.actions;
    if (r.status != StepStatus::Ok) continue;
    const StateId prev = state;
    pose = r.pose;
    state = t.states.record(prev, a, pose, look(pose));
    // Navigation is reversible, so the way back is known without trying it.
    if (const std::optional<Action> back = inverse(a)) t.states.record(state, *back, t.states.states()[prev].pose, {});
  }
  t.end = pose;
  return t;
}

// Mutable state of the restore loop.
class Restorer {
 public:
  Restorer(const EpisodeConfig& config, const Encoder& encoder, const StateGraph& fused, const RegionMemory& regions,
           const CsrGraph& un_csr, Scene world, AgentPose pose)
      : config_(config), encoder_(encoder), fused_(fused), regions_(regions), un_csr_(un_csr),
        world_(std::move(world)), pose_(pose) {}

  const Scene& world() const { return world_; }
  std::size_t actions() const { return actions_; }

  // Restores each flagged object; one whose destination is full is put back
  // and retried once after the others.
  void run(std::vector<Correspondence> moved) {
    std::stable_sort(moved.begin(), moved.end(), [](const Correspondence& a, const Correspondence& b) {
      return a.identity_score > b.identity_score;
    });
    std::deque<std::pair<Correspondence, bool>> queue;
    for (const Correspondence& c : moved) queue.emplace_back(c, false);
    while (!queue.empty() && !world_.held) {
      const auto [c, retried] = queue.front();
      queue.pop_front();
      if (!go_to(c.unshuffle) || !pick(c.unshuffle)) continue;
      if (go_to(c.walk) && place(c.walk)) continue;
      // Put it back where it was found so the hand is free again.
      if (go_to(c.unshuffle) && place(c.unshuffle) && !retried) queue.emplace_back(c, true);
    }
  }

 private:
  bool go_to(NodeId node) {
    const std::optional<StateId> here = fused_.find(pose_);
    if (!here) return false;
    Plan plan;
    try {
      plan = plan_to_node(fused_, *here, node);
    } catch (const PlanError&) {
      return false;
    }
    for (const Action& a : plan.actions) {
      const StepResult r = step(world_, pose_, a);
      ++actions_;
      if (r.status != StepStatus::Ok) return false;
      pose_ = r.pose;
    }
    return true;
  }

  bool pick(NodeId node) {
    const CsrNode& target = un_csr_.nodes.at(node);
    const Observation obs =
        observe(world_, pose_, hash_seed({config_.seed, kTagRestore, restore_frames_++}));
    const LocalGraph local = encoder_.encode_observation(world_, obs);
    std::optional<std::size_t> best;
    double best_score = config_.object_threshold;
    for (std::size_t i = 0; i < local.nodes.size(); ++i) {
      if (world_.find_object(local.nodes[i].truth_id) == nullptr) continue;  // receptacles cannot be picked
      if (config_.gt_matching) {
        if (local.nodes[i].truth_id == target.truth_id) best = i;
        continue;
      }
      const double s = cos_sim(local.nodes[i].identity, target.identity);
      if (s > best_score) {
        best = i;
        best_score = s;
      }
    }
    if (!best) return false;
    const StepResult r = step(world_, pose_, Action::pick_up(obs.detections[*best].instance_id));
    ++actions_;
    if (r.status != StepStatus::Ok) return false;
    world_ = r.scene;
    return true;
  }

  bool place(NodeId node) {
    auto it = regions_.find({pose_, node});
    if (it == regions_.end()) return false;
    const std::optional<InstanceId> receptacle =
        receptacle_in_view(world_, pose_, it->second.forward, it->second.lateral);
    if (!receptacle) return false;
    const StepResult r = step(world_, pose_, Action::place(*receptacle));
    ++actions_;
    if (r.status != StepStatus::Ok) return false;
    world_ = r.scene;
    return true;
  }

  const EpisodeConfig& config_;
  const Encoder& encoder_;
  const StateGraph& fused_;
  const RegionMemory& regions_;
  const CsrGraph& un_csr_;
  Scene world_;
  AgentPose pose_;
  std::size_t actions_ = 0;
  std::uint64_t restore_frames_ = 0;
};

}  // namespace

void validate(const EpisodeConfig& config) {
  auto check = [](double t, const char* name) {
    if (!(t >= -1.0 && t <= 1.0)) throw InvalidInput(std::string(name) + " must lie in [-1, 1]");
  };
  check(config.node_threshold, "node_threshold");
  check(config.object_threshold, "object_threshold");
  check(config.moved_threshold, "moved_threshold");
  if (config.shuffle_k < 1 || config.shuffle_k > 5) throw InvalidInput("shuffle k must lie in [1, 5]");
  if (!config.gt_boxes) throw InvalidInput("only ground-truth boxes are supported");
  if (!(config.encoder.sigma >= 0.0)) throw InvalidInput("sigma must be non-negative");
}

EpisodeMetrics run_rearrangement(const EpisodeConfig& config, const Encoder& encoder) {
  validate(config);
  if (encoder.params().dim != config.encoder.dim || encoder.params().sigma != config.encoder.sigma ||
      encoder.params().seed != config.encoder.seed) {
    throw InvalidInput("encoder does not match the episode's encoder parameters");
  }

  const Scene target = generate_scene(config.scene, hash_seed({config.seed, kTagScene}));
  const ShuffleResult shuffled = shuffle(target, config.shuffle_k, hash_seed({config.seed, kTagShuffle}));
  const Scene& initial = shuffled.scene;
  const AgentPose start = target.start;

  std::vector<Action> walk_actions;
  std::vector<Action> un_actions;
  if (config.heuristic_trajectory) {
    walk_actions = heuristic_explore(target, initial, shuffled.moved, start, Phase::Walkthrough).actions;
    un_actions = heuristic_explore(target, initial, shuffled.moved, start, Phase::Unshuffle).actions;
  } else {
    walk_actions = coverage_explore(target, start);
    un_actions = coverage_explore(initial, start);
  }

  const MatchMode mode = config.gt_matching ? MatchMode::GroundTruth : MatchMode::Estimated;
  const IngestOptions ingest_options{config.node_threshold, mode};
  RegionMemory regions;
  const Trajectory walk = record_trajectory(target, start, walk_actions, encoder, ingest_options, 0, config.seed,
                                            kWalkPhase, regions);
  const Trajectory un = record_trajectory(initial, start, un_actions, encoder, ingest_options, kUnshuffleFirstId,
                                          config.seed, kUnshufflePhase, regions);
  const StateGraph fused = fuse(walk.states, un.states);
  const ChangeReport changes =
      detect_changes(walk.csr, un.csr, ChangeOptions{config.object_threshold, config.moved_threshold, mode});

  Restorer restorer(config, encoder, fused, regions, un.csr, initial, un.end);
  restorer.run(changes.moved);

  EpisodeMetrics m;
  const Scene& final_scene = restorer.world();
  m.success = success_metric(final_scene, target);
  m.fixed_strict = fixed_strict_metric(final_scene, target, shuffled.moved);
  m.energy_ratio = energy_metric(initial, final_scene, target);
  for (const Correspondence& c : changes.moved) m.moved_detected.push_back(un.csr.nodes.at(c.unshuffle).truth_id);
  std::sort(m.moved_detected.begin(), m.moved_detected.end());
  m.moved_detected.erase(std::unique(m.moved_detected.begin(), m.moved_detected.end()), m.moved_detected.end());
  m.moved_truth = shuffled.moved;
  m.action_count = walk.actions + un.actions + restorer.actions();
  return m;
}

EpisodeMetrics run_rearrangement(const EpisodeConfig& config) {
  validate(config);
  const Encoder encoder(config.encoder);
  return run_rearrangement(config, encoder);
}

}  // namespace csr
