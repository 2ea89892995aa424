#include "csr/tracking.hpp"

#include <istream>
#include <nlohmann/json.hpp>
#include <ostream>
#include <string>

#include "csr/errors.hpp"
#include "csr/random.hpp"
#include "csr/scene_graph.hpp"

namespace csr {

TrackStream make_track_stream(const TrackStreamConfig& config, const Encoder& encoder, std::uint64_t seed) {
  const Scene scene = generate_scene(config.scene, hash_seed({seed, 0x7ac}));
  const std::vector<Cell> cells = reachable_cells(scene, scene.start.cell);
  Rng rng(hash_seed({seed, 0x7ac, 1}));
  TrackStream stream;
  // Bounded retries keep a pathological layout from spinning forever.
  for (std::size_t draw = 0; stream.frames.size() < config.frames && draw < 50 * config.frames + 50; ++draw) {
    const AgentPose pose{cells[rng.index(cells.size())], static_cast<Heading>(rng.index(4))};
    const std::uint64_t frame = hash_seed({seed, 0x7ac, 2, draw});
    const Observation obs = observe(scene, pose, frame);
    if (obs.detections.empty()) continue;
    TrackFrame f;
    for (const Detection& d : obs.detections) {
      f.detections.push_back({encoder.identity_feature(d.instance_id, frame), d.instance_id});
    }
    stream.frames.push_back(std::move(f));
  }
  return stream;
}

TrackResult run_tracking(const TrackStream& stream, double node_threshold, bool update) {
  if (stream.frames.empty()) throw InvalidInput("run_tracking: empty stream");
  if (!(node_threshold >= -1.0 && node_threshold <= 1.0)) {
    throw InvalidInput("run_tracking: threshold must lie in [-1, 1]");
  }
  std::vector<FeatureVec> clusters;
  std::vector<std::size_t> counts;
  TrackResult result;
  for (const TrackFrame& frame : stream.frames) {
    const std::size_t n = frame.detections.size();
    std::vector<int> assigned(n, -1);
    if (!clusters.empty() && n > 0) {
      ScoreMatrix scores(clusters.size(), n);
      for (std::size_t c = 0; c < clusters.size(); ++c) {
        for (std::size_t d = 0; d < n; ++d) scores.at(c, d) = cos_sim(clusters[c], frame.detections[d].feature);
      }
      for (const auto& [c, d] : max_assignment(scores).pairs) {
        if (scores.at(c, d) > node_threshold) assigned[d] = static_cast<int>(c);
      }
    }
    for (std::size_t d = 0; d < n; ++d) {
      const FeatureVec& f = frame.detections[d].feature;
      if (assigned[d] < 0) {
        assigned[d] = static_cast<int>(clusters.size());
        clusters.push_back(f);
        counts.push_back(1);
      } else if (update) {
        const auto c = static_cast<std::size_t>(assigned[d]);
        clusters[c] = merge_feature(clusters[c], counts[c], f);
        ++counts[c];
      }
      result.assignments.push_back(assigned[d]);
    }
  }
  result.clusters = clusters.size();

  std::vector<int> truth;
  for (const TrackFrame& frame : stream.frames) {
    for (const TrackDetection& d : frame.detections) {
      if (d.label) truth.push_back(*d.label);
    }
  }
  if (truth.size() == result.assignments.size() && truth.size() >= 2) {
    result.ari = adjusted_rand_index(result.assignments, truth);
  }
  return result;
}

std::vector<SweepPoint> threshold_sweep(const TrackStream& stream, const std::vector<double>& thresholds) {
  std::vector<SweepPoint> out;
  for (double t : thresholds) {
    const TrackResult r = run_tracking(stream, t, true);
    if (!r.ari) throw InvalidInput("threshold_sweep: stream lacks labels");
    out.push_back({t, *r.ari});
  }
  return out;
}

TrackStream load_track_stream(std::istream& in) {
  TrackStream stream;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = "track stream line " + std::to_string(line_no) + ": ";
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw InvalidInput(where + e.what());
    }
    if (!j.is_object() || !j.contains("detections") || !j["detections"].is_array()) {
      throw InvalidInput(where + "expected an object with a \"detections\" array");
    }
    TrackFrame frame;
    for (const auto& d : j["detections"]) {
      if (!d.is_object() || !d.contains("feature") || !d["feature"].is_array()) {
        throw InvalidInput(where + "detection lacks a \"feature\" array");
      }
      TrackDetection det;
      try {
        det.feature = FeatureVec::from_unit(d["feature"].get<std::vector<double>>(), 1e-6);
        if (d.contains("label") && !d["label"].is_null()) det.label = d["label"].get<int>();
      } catch (const nlohmann::json::exception& e) {
        throw InvalidInput(where + e.what());
      } catch (const InvalidInput& e) {
        throw InvalidInput(where + e.what());
      }
      if (!frame.detections.empty() && det.feature.size() != frame.detections.front().feature.size()) {
        throw InvalidInput(where + "feature lengths differ");
      }
      frame.detections.push_back(std::move(det));
    }
    stream.frames.push_back(std::move(frame));
  }
  return stream;
}

void save_track_stream(std::ostream& out, const TrackStream& stream) {
  for (const TrackFrame& frame : stream.frames) {
    nlohmann::json dets = nlohmann::json::array();
    for (const TrackDetection& d : frame.detections) {
      nlohmann::json j;
      j["feature"] = std::vector<double>(d.feature.values().begin(), d.feature.values().end());
      if (d.label) j["label"] = *d.label;
      dets.push_back(std::move(j));
    }
    out << nlohmann::json{{"detections", dets}}.dump() << '\n';
  }
}

}  // namespace csr
