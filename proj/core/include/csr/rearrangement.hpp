#pragma once

// Two-phase room rearrangement: a walkthrough of the target layout, a
// shuffle, an unshuffle trajectory, change detection between the two scene
// graphs, and a pick/place loop planned over the fused state graph.

#include <cstdint>
#include <string>
#include <vector>

#include "csr/encoder.hpp"
#include "csr/scene_graph.hpp"
#include "csr/world.hpp"

namespace csr {

struct EpisodeConfig {
  SceneConfig scene;
  int shuffle_k = 3;
  EncoderParams encoder;
  double node_threshold = 0.5;
  double object_threshold = 0.4;
  double moved_threshold = 0.8;
  bool gt_matching = false;
  bool gt_boxes = true;  // detections always come from ground-truth boxes
  bool heuristic_trajectory = true;
  std::uint64_t seed = 0;
};

/// Throws InvalidInput for thresholds outside [-1, 1], k outside [1, 5] or
/// gt_boxes = false.
void validate(const EpisodeConfig& config);

struct EpisodeMetrics {
  int success = 0;
  double fixed_strict = 0.0;
  double energy_ratio = 0.0;
  std::vector<InstanceId> moved_detected;  // truth ids of the flagged objects, ascending
  std::vector<InstanceId> moved_truth;     // ascending
  std::size_t action_count = 0;            // exploration plus restore actions
};

/// Runs one episode. `encoder` must have been built from config.encoder;
/// sharing one across episodes reuses its caches.
EpisodeMetrics run_rearrangement(const EpisodeConfig& config, const Encoder& encoder);
EpisodeMetrics run_rearrangement(const EpisodeConfig& config);

}  // namespace csr
