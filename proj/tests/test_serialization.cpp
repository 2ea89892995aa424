#include <gtest/gtest.h>

#include "csr/errors.hpp"
#include "csr/random.hpp"
#include "csr/serialization.hpp"

using namespace csr;
using nlohmann::json;

namespace {

CsrGraph sample_graph() {
  const Encoder enc(EncoderParams{32, 0.3, 1});
  const Scene s = generate_scene({}, 5);
  CsrGraph g;
  g.next_id = 40;
  for (std::uint64_t f = 0; f < 3; ++f) ingest(g, enc.encode_observation(s, observe(s, s.start, f)));
  ingest(g, enc.encode_observation(s, observe_all(s, 9)));
  return g;
}

StateGraph sample_states() {
  const Scene s = generate_scene({}, 6);
  StateGraph g;
  AgentPose pose = s.start;
  StateId id = g.start(pose, {1, 2});
  Rng rng(3);
  const Action moves[] = {Action::move_forward(), Action::rotate_left(), Action::move_right()};
  for (int t = 0; t < 40; ++t) {
    const Action a = moves[rng.index(3)];
    const StepResult r = step(s, pose, a);
    if (r.status != StepStatus::Ok) continue;
    pose = r.pose;
    id = g.record(id, a, pose, {static_cast<NodeId>(rng.index(30))});
  }
  return g;
}

}  // namespace

TEST(Serialization, SceneRoundTrip) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Scene s = generate_scene({}, seed);
    if (seed % 3 == 0) {
      s.held = s.objects.back().id;
      s.objects.pop_back();
    }
    const json j = scene_to_json(s);
    EXPECT_EQ(j.at("version"), kSchemaVersion);
    EXPECT_EQ(scene_from_json(j), s);
    EXPECT_EQ(scene_from_json(json::parse(j.dump())), s);
  }
}

TEST(Serialization, CsrGraphRoundTripIsLossless) {
  const CsrGraph g = sample_graph();
  const json j = csr_graph_to_json(g);
  EXPECT_EQ(csr_graph_from_json(json::parse(j.dump())), g);
}

TEST(Serialization, StateGraphRoundTrip) {
  const StateGraph g = sample_states();
  EXPECT_EQ(state_graph_from_json(json::parse(state_graph_to_json(g).dump())), g);
  EXPECT_EQ(state_graph_from_json(state_graph_to_json(StateGraph{})), StateGraph{});
}

TEST(Serialization, RejectsWrongVersionAndBrokenDocuments) {
  json scene = scene_to_json(generate_scene({}, 1));
  json bad_version = scene;
  bad_version["version"] = kSchemaVersion + 1;
  EXPECT_THROW(scene_from_json(bad_version), InvalidInput);
  json missing = scene;
  missing.erase("receptacles");
  EXPECT_THROW(scene_from_json(missing), InvalidInput);
  json overlap = scene;
  overlap["objects"][1] = overlap["objects"][0];
  EXPECT_THROW(scene_from_json(overlap), InvalidInput);

  json graph = csr_graph_to_json(sample_graph());
  graph["nodes"][0]["scene"][0] = 5.0;  // no longer unit length
  EXPECT_THROW(csr_graph_from_json(graph), InvalidInput);

  json states = state_graph_to_json(sample_states());
  json duplicate = states;
  duplicate["transitions"].push_back(duplicate["transitions"][0]);
  EXPECT_THROW(state_graph_from_json(duplicate), InvalidInput);
  json dangling = states;
  dangling["transitions"][0]["to"] = 9999;
  EXPECT_THROW(state_graph_from_json(dangling), InvalidInput);
  EXPECT_THROW(state_graph_from_json(json::array()), InvalidInput);
}
