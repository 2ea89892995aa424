#pragma once

// Object tracking as online clustering of identity features, scored with the
// Adjusted Rand Index against instance labels.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <vector>

#include "csr/encoder.hpp"
#include "csr/numerics.hpp"
#include "csr/world.hpp"

namespace csr {

struct TrackDetection {
  FeatureVec feature;
  std::optional<int> label;  // ground truth; never read by the clustering
  bool operator==(const TrackDetection&) const = default;
};

struct TrackFrame {
  std::vector<TrackDetection> detections;
  bool operator==(const TrackFrame&) const = default;
};

struct TrackStream {
  std::vector<TrackFrame> frames;
  bool operator==(const TrackStream&) const = default;
};

struct TrackStreamConfig {
  SceneConfig scene;
  std::size_t frames = 30;
};

/// Frames seen from seeded random poses in one seeded scene; each detection
/// carries the encoder's per-frame identity feature and its instance id as
/// label. Frames without detections are skipped.
TrackStream make_track_stream(const TrackStreamConfig& config, const Encoder& encoder, std::uint64_t seed);

struct TrackResult {
  std::vector<int> assignments;  // cluster per detection, in stream order
  std::size_t clusters = 0;
  std::optional<double> ari;  // when every detection has a label and there are >= 2
};

/// Per frame, Hungarian-matches detections to cluster features; a match
/// scoring above `node_threshold` joins the cluster (and is merged into its
/// feature when `update` is set), anything else starts a new cluster.
/// Throws InvalidInput for an empty stream.
TrackResult run_tracking(const TrackStream& stream, double node_threshold, bool update);

struct SweepPoint {
  double threshold = 0.0;
  double ari = 0.0;
};

/// run_tracking with update on at each threshold; requires labels.
std::vector<SweepPoint> threshold_sweep(const TrackStream& stream, const std::vector<double>& thresholds);

/// JSON lines: one frame per line, {"detections": [{"feature": [...],
/// "label": int?}, ...]}. Features must be unit length.
TrackStream load_track_stream(std::istream& in);
void save_track_stream(std::ostream& out, const TrackStream& stream);

}  // namespace csr
