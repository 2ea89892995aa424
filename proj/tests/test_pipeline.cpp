#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <sstream>

#include "csr/errors.hpp"
#include "csr/metrics.hpp"
#include "csr/probe_dataset.hpp"
#include "csr/rearrangement.hpp"
#include "csr/retrieval.hpp"
#include "csr/tracking.hpp"
#include "fixtures.hpp"

using namespace csr;
using fixture::make_scene;

namespace {

// Five receptacles along the top row at x = 0, 2, 4, 6, 8; objects 5..8
// start on receptacles 0..3.
Scene line_scene() {
  return make_scene(10, 3, {{0, 0}, {2, 0}, {4, 0}, {6, 0}, {8, 0}}, {{0, 0}, {1, 0}, {2, 0}, {3, 0}},
                    {{1, 2}, Heading::North});
}

Scene moved(Scene s, InstanceId object, InstanceId receptacle) {
  const int offset = *s.free_offset(receptacle);
  for (ObjectPlacement& o : s.objects) {
    if (o.id == object) {
      o.receptacle = receptacle;
      o.offset = offset;
    }
  }
  validate_scene(s);
  return s;
}

Scene holding(Scene s, InstanceId object) {
  s.objects.erase(std::find_if(s.objects.begin(), s.objects.end(), [&](const ObjectPlacement& o) { return o.id == object; }));
  s.held = object;
  return s;
}

}  // namespace

TEST(Metrics, SuccessExamples) {
  const Scene target = line_scene();
  EXPECT_EQ(success_metric(target, target), 1);
  EXPECT_EQ(success_metric(moved(target, 5, 4), target), 0);
  EXPECT_EQ(success_metric(holding(target, 6), target), 0);
  Scene other = target;
  other.objects.pop_back();
  EXPECT_THROW(success_metric(other, target), InvalidInput);
}

TEST(Metrics, FixedStrictExamples) {
  const Scene target = line_scene();
  const Scene initial = moved(moved(moved(moved(target, 5, 4), 6, 4), 7, 4), 8, 4);
  const std::vector<InstanceId> shuffled{5, 6, 7, 8};
  EXPECT_DOUBLE_EQ(fixed_strict_metric(initial, target, shuffled), 0.0);
  const Scene half = moved(moved(initial, 5, 0), 6, 1);
  EXPECT_DOUBLE_EQ(fixed_strict_metric(half, target, shuffled), 0.5);
  EXPECT_DOUBLE_EQ(fixed_strict_metric(target, target, shuffled), 1.0);
  // One shuffled object restored but an unshuffled one disturbed.
  const Scene one = moved(target, 5, 4);
  EXPECT_DOUBLE_EQ(fixed_strict_metric(moved(target, 6, 4), target, {5}), 0.0);
  EXPECT_DOUBLE_EQ(fixed_strict_metric(one, target, {}), 0.0);
  EXPECT_DOUBLE_EQ(fixed_strict_metric(target, target, {}), 1.0);
}

TEST(Metrics, EnergyExamples) {
  const Scene target = line_scene();
  const Scene initial = moved(moved(target, 5, 2), 6, 3);  // 5 is 4 cells off, 6 is 2
  EXPECT_DOUBLE_EQ(energy(initial, initial, target), 2.0);
  EXPECT_DOUBLE_EQ(energy_metric(initial, initial, target), 1.0);
  EXPECT_DOUBLE_EQ(energy_metric(initial, target, target), 0.0);
  // Object 5 halfway home.
  EXPECT_DOUBLE_EQ(energy_metric(initial, moved(initial, 5, 1), target), (0.5 + 1.0) / 2.0);
  // Object 5 further away (capped at 1) plus a newly displaced object 7.
  const Scene worse = moved(moved(initial, 5, 4), 7, 0);
  EXPECT_GT(energy_metric(initial, worse, target), 1.0);
  EXPECT_DOUBLE_EQ(energy(holding(initial, 6), initial, target), 2.0);
  EXPECT_DOUBLE_EQ(energy_metric(target, target, target), 0.0);
}

TEST(Metrics, EnergyStrictlyDecreasesAsObjectsApproach) {
  const Scene target = line_scene();
  const Scene initial = moved(target, 5, 4);  // 8 cells from home
  double prev = energy(initial, initial, target);
  for (InstanceId r : {3, 2, 1, 0}) {
    const double e = energy(moved(initial, 5, r), initial, target);
    EXPECT_LT(e, prev) << "receptacle " << r;
    prev = e;
  }
  EXPECT_DOUBLE_EQ(prev, 0.0);
}

TEST(Metrics, BootstrapInterval) {
  const std::vector<double> v{0, 1, 1, 0, 1, 1, 1, 0, 1, 1};
  const MeanInterval ci = bootstrap_mean_ci(v, 3);
  EXPECT_DOUBLE_EQ(ci.mean, 0.7);
  EXPECT_LE(ci.lo, ci.mean);
  EXPECT_GE(ci.hi, ci.mean);
  EXPECT_GT(ci.hi - ci.lo, 0.1);
  const MeanInterval again = bootstrap_mean_ci(v, 3);
  EXPECT_EQ(ci.lo, again.lo);
  EXPECT_EQ(ci.hi, again.hi);
  const MeanInterval flat = bootstrap_mean_ci(std::vector<double>(20, 1.0), 1);
  EXPECT_DOUBLE_EQ(flat.lo, 1.0);
  EXPECT_DOUBLE_EQ(flat.hi, 1.0);
  EXPECT_THROW(bootstrap_mean_ci({}, 1), InvalidInput);
  EXPECT_THROW(bootstrap_mean_ci(v, 1, 100, 1.0), InvalidInput);
}

// ---------------------------------------------------------------------------

TEST(Rearrangement, ValidatesConfig) {
  EpisodeConfig c;
  c.shuffle_k = 0;
  EXPECT_THROW(validate(c), InvalidInput);
  c = {};
  c.moved_threshold = 1.2;
  EXPECT_THROW(validate(c), InvalidInput);
  c = {};
  c.gt_boxes = false;
  EXPECT_THROW(validate(c), InvalidInput);
  c = {};
  EXPECT_NO_THROW(validate(c));
  const Encoder other(EncoderParams{64, 0.0, 0});
  EXPECT_THROW(run_rearrangement(c, other), InvalidInput);
}

TEST(Rearrangement, OracleRowSucceeds) {
  EpisodeConfig c;
  c.gt_matching = true;
  c.heuristic_trajectory = true;
  const Encoder enc(c.encoder);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    c.seed = seed;
    c.shuffle_k = 1 + static_cast<int>(seed % 5);
    const EpisodeMetrics m = run_rearrangement(c, enc);
    EXPECT_EQ(m.success, 1) << "seed " << seed;
    EXPECT_DOUBLE_EQ(m.energy_ratio, 0.0);
    EXPECT_EQ(m.moved_detected, m.moved_truth);
    EXPECT_EQ(m.moved_truth.size(), static_cast<std::size_t>(c.shuffle_k));
    EXPECT_GT(m.action_count, 0u);
  }
}

TEST(Rearrangement, MetricsStayConsistentUnderNoise) {
  for (double sigma : {0.0, 0.5, 1.0}) {
    EpisodeConfig c;
    c.encoder.sigma = sigma;
    c.heuristic_trajectory = sigma != 0.5;
    const Encoder enc(c.encoder);
    for (std::uint64_t seed = 0; seed < 8; ++seed) {
      c.seed = seed;
      const EpisodeMetrics m = run_rearrangement(c, enc);
      EXPECT_GE(m.fixed_strict, 0.0);
      EXPECT_LE(m.fixed_strict, 1.0);
      EXPECT_GE(m.energy_ratio, 0.0);
      if (m.success == 1) {
        EXPECT_DOUBLE_EQ(m.fixed_strict, 1.0);
        EXPECT_DOUBLE_EQ(m.energy_ratio, 0.0);
      }
    }
  }
}

TEST(Rearrangement, Deterministic) {
  EpisodeConfig c;
  c.encoder.sigma = 0.3;
  c.seed = 77;
  const EpisodeMetrics a = run_rearrangement(c);
  const EpisodeMetrics b = run_rearrangement(c);
  EXPECT_EQ(a.success, b.success);
  EXPECT_EQ(a.fixed_strict, b.fixed_strict);
  EXPECT_EQ(a.energy_ratio, b.energy_ratio);
  EXPECT_EQ(a.moved_detected, b.moved_detected);
  EXPECT_EQ(a.action_count, b.action_count);
}

// ---------------------------------------------------------------------------

TEST(Tracking, ZeroNoiseIsPerfect) {
  const Encoder enc(EncoderParams{512, 0.0, 1});
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const TrackStream s = make_track_stream({}, enc, seed);
    for (bool update : {true, false}) {
      const TrackResult r = run_tracking(s, 0.5, update);
      ASSERT_TRUE(r.ari);
      EXPECT_DOUBLE_EQ(*r.ari, 1.0);
    }
  }
}

TEST(Tracking, SingleFrameGivesOneClusterPerDetection) {
  const Encoder enc(EncoderParams{128, 0.4, 1});
  TrackStream s = make_track_stream({}, enc, 3);
  s.frames.resize(1);
  const TrackResult r = run_tracking(s, 0.5, true);
  EXPECT_EQ(r.clusters, s.frames[0].detections.size());
  if (r.assignments.size() >= 2) {
    EXPECT_DOUBLE_EQ(*r.ari, 1.0);
  }
}

TEST(Tracking, LabelsDoNotInfluenceClustering) {
  const Encoder enc(EncoderParams{128, 0.4, 1});
  const TrackStream s = make_track_stream({}, enc, 4);
  TrackStream blind = s;
  for (TrackFrame& f : blind.frames) {
    for (TrackDetection& d : f.detections) d.label.reset();
  }
  const TrackResult a = run_tracking(s, 0.5, true);
  const TrackResult b = run_tracking(blind, 0.5, true);
  EXPECT_EQ(a.assignments, b.assignments);
  EXPECT_FALSE(b.ari);
  EXPECT_THROW(threshold_sweep(blind, {0.5}), InvalidInput);
}

TEST(Tracking, StreamShape) {
  const Encoder enc(EncoderParams{64, 0.0, 1});
  TrackStreamConfig cfg;
  cfg.frames = 12;
  const TrackStream s = make_track_stream(cfg, enc, 9);
  EXPECT_EQ(s.frames.size(), 12u);
  for (const TrackFrame& f : s.frames) {
    EXPECT_FALSE(f.detections.empty());
    for (const TrackDetection& d : f.detections) EXPECT_TRUE(d.label);
  }
  EXPECT_EQ(s, make_track_stream(cfg, enc, 9));
  EXPECT_THROW(run_tracking(TrackStream{}, 0.5, true), InvalidInput);
  EXPECT_THROW(run_tracking(s, 2.0, true), InvalidInput);
}

TEST(Tracking, HighThresholdSplitsEverything) {
  const Encoder enc(EncoderParams{128, 0.4, 1});
  const TrackStream s = make_track_stream({}, enc, 5);
  const TrackResult r = run_tracking(s, 1.0, true);
  std::size_t n = 0;
  for (const TrackFrame& f : s.frames) n += f.detections.size();
  EXPECT_EQ(r.clusters, n);
  const std::vector<SweepPoint> sweep = threshold_sweep(s, {0.1, 0.5, 1.0});
  ASSERT_EQ(sweep.size(), 3u);
  EXPECT_DOUBLE_EQ(sweep[1].ari, *run_tracking(s, 0.5, true).ari);
}

TEST(TrackStreamIo, JsonLinesRoundTrip) {
  const Encoder enc(EncoderParams{16, 0.4, 2});
  TrackStreamConfig cfg;
  cfg.frames = 5;
  TrackStream s = make_track_stream(cfg, enc, 1);
  s.frames[1].detections[0].label.reset();
  std::stringstream buf;
  save_track_stream(buf, s);
  std::string line;
  std::size_t lines = 0;
  for (std::stringstream copy(buf.str()); std::getline(copy, line);) ++lines;
  EXPECT_EQ(lines, 5u);
  EXPECT_EQ(load_track_stream(buf), s);
}

TEST(TrackStreamIo, RejectsMalformedLines) {
  std::stringstream not_json("{\"detections\": [\n");
  EXPECT_THROW(load_track_stream(not_json), InvalidInput);
  std::stringstream no_array("{\"frames\": 1}\n");
  EXPECT_THROW(load_track_stream(no_array), InvalidInput);
  std::stringstream not_unit("{\"detections\": [{\"feature\": [1.0, 1.0]}]}\n");
  EXPECT_THROW(load_track_stream(not_unit), InvalidInput);
  std::stringstream mixed("{\"detections\": [{\"feature\": [1.0, 0.0]}, {\"feature\": [1.0]}]}\n");
  EXPECT_THROW(load_track_stream(mixed), InvalidInput);
  std::stringstream blank("\n{\"detections\": [{\"feature\": [0.0, 1.0], \"label\": 3}]}\n\n");
  const TrackStream s = load_track_stream(blank);
  ASSERT_EQ(s.frames.size(), 1u);
  EXPECT_EQ(s.frames[0].detections[0].label, 3);
}

// ---------------------------------------------------------------------------

TEST(Retrieval, ZeroNoiseIsPerfect) {
  const std::vector<Triplet> triplets = make_triplets({}, 200, 1);
  ASSERT_EQ(triplets.size(), 200u);
  const Encoder enc(EncoderParams{512, 0.0, 1});
  const EncoderFeatures source(enc);
  for (const Triplet& t : triplets) {
    const FeatureVec q = source.feature(t.query);
    EXPECT_NEAR(cos_sim(q, source.feature(t.positive)), 1.0, 1e-12);
    EXPECT_LT(cos_sim(q, source.feature(t.negative)), 0.5);
  }
  EXPECT_DOUBLE_EQ(run_retrieval(triplets, source), 1.0);
}

TEST(Retrieval, TripletsAreWellFormed) {
  const std::vector<Triplet> triplets = make_triplets({}, 50, 2);
  for (const Triplet& t : triplets) {
    EXPECT_NO_THROW(validate(t));
    EXPECT_NE(t.query.pose, t.positive.pose);
    EXPECT_EQ(t.negative.pose, t.positive.pose);
  }
  Triplet same = triplets[0];
  same.negative.scene = same.positive.scene;
  EXPECT_THROW(validate(same), InvalidInput);
  Triplet other_pair = triplets[0];
  other_pair.positive.j = other_pair.positive.i;
  EXPECT_THROW(validate(other_pair), InvalidInput);
  EXPECT_THROW(run_retrieval({}, RandomFeatures(8, 0)), InvalidInput);
}

TEST(Retrieval, QueryEqualToPositiveIsCorrect) {
  std::vector<Triplet> triplets = make_triplets({}, 30, 3);
  for (Triplet& t : triplets) t.positive = t.query;
  for (Triplet& t : triplets) {
    // Keep the negative consistent with the new positive pose when it can be seen.
    t.negative.pose = t.positive.pose;
  }
  std::vector<Triplet> usable;
  for (const Triplet& t : triplets) {
    try {
      validate(t);
      usable.push_back(t);
    } catch (const InvalidInput&) {
    }
  }
  ASSERT_FALSE(usable.empty());
  EXPECT_DOUBLE_EQ(run_retrieval(usable, RandomFeatures(64, 4)), 1.0);
}

TEST(Retrieval, Deterministic) {
  const std::vector<Triplet> a = make_triplets({}, 20, 8);
  const std::vector<Triplet> b = make_triplets({}, 20, 8);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].query.scene, b[i].query.scene);
    EXPECT_EQ(a[i].negative.scene, b[i].negative.scene);
    EXPECT_EQ(a[i].query.pose, b[i].query.pose);
  }
}

// ---------------------------------------------------------------------------

namespace {

std::vector<Scene> scenes(std::size_t n, std::uint64_t seed, SceneConfig cfg = {}) {
  std::vector<Scene> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(generate_scene(cfg, seed * 1000 + i));
  return out;
}

std::vector<std::size_t> class_counts(const ProbeSplit& s, std::size_t classes) {
  std::vector<std::size_t> counts(classes, 0);
  for (int y : s.labels) ++counts[static_cast<std::size_t>(y)];
  return counts;
}

}  // namespace

TEST(ProbeDataset, BalancedSplits) {
  const Encoder enc(EncoderParams{128, 0.0, 0});
  for (ProbeTask task : {ProbeTask::Support, ProbeTask::Sibling}) {
    const ProbeDataset d = build_probe_dataset(scenes(10, 1), task, enc, 5);
    for (const ProbeSplit* split : {&d.train, &d.test}) {
      const std::vector<std::size_t> counts = class_counts(*split, num_classes(task));
      EXPECT_GT(counts[0], 0u);
      for (std::size_t c : counts) EXPECT_EQ(c, counts[0]);
      EXPECT_EQ(split->features.size(), split->labels.size());
    }
    EXPECT_GT(d.train.labels.size(), d.test.labels.size());
  }
}

TEST(ProbeDataset, ReversedPairFlipsSupportLabel) {
  const Scene s = generate_scene({}, 3);
  for (const ObjectPlacement& o : s.objects) {
    EXPECT_EQ(relation_bucket(s, o.receptacle, o.id).kind, RelationKind::ISupportsJ);
    EXPECT_EQ(relation_bucket(s, o.id, o.receptacle).kind, RelationKind::JSupportsI);
    for (const ObjectPlacement& p : s.objects) {
      if (p.id == o.id) continue;
      const bool same = p.receptacle == o.receptacle;
      EXPECT_EQ(relation_bucket(s, o.id, p.id).kind, same ? RelationKind::Sibling : RelationKind::CrossReceptacle);
    }
  }
}

TEST(ProbeDataset, SupportIsLinearlyDecodable) {
  const Encoder enc(EncoderParams{512, 0.0, 0});
  const ProbeDataset d = build_probe_dataset(scenes(20, 4), ProbeTask::Support, enc, 6);
  const ProbeFit fit = train_probe(d.train.features, d.train.labels, num_classes(ProbeTask::Support));
  EXPECT_GE(probe_accuracy(fit.model, d.test.features, d.test.labels), 0.9);
}

TEST(ProbeDataset, EmptyClassIsNamed) {
  const Encoder enc(EncoderParams{64, 0.0, 0});
  SceneConfig bare;
  bare.num_objects = 0;
  try {
    build_probe_dataset(scenes(5, 1, bare), ProbeTask::Support, enc, 1);
    FAIL();
  } catch (const InvalidInput& e) {
    EXPECT_NE(std::string(e.what()).find("i-supports-j"), std::string::npos) << e.what();
  }
  SceneConfig single;
  single.capacity = 1;
  single.num_objects = 3;
  try {
    build_probe_dataset(scenes(5, 1, single), ProbeTask::Sibling, enc, 1);
    FAIL();
  } catch (const InvalidInput& e) {
    EXPECT_NE(std::string(e.what()).find("same-receptacle"), std::string::npos) << e.what();
  }
  EXPECT_THROW(build_probe_dataset(scenes(1, 1), ProbeTask::Support, enc, 1), InvalidInput);
}
