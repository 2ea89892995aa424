#include <gtest/gtest.h>

#include <deque>
#include <set>

#include "csr/errors.hpp"
#include "csr/random.hpp"
#include "csr/state_graph.hpp"
#include "oracles.hpp"

using namespace csr;

namespace {

AgentPose at(int x, int y, Heading h = Heading::North) { return {{x, y}, h}; }

const Action kNav[] = {Action::move_forward(), Action::move_back(),   Action::move_left(),
                       Action::move_right(),   Action::rotate_left(), Action::rotate_right()};

std::set<StateId> reachable(const StateGraph& g, StateId from) {
  std::set<StateId> seen{from};
  std::deque<StateId> q{from};
  while (!q.empty()) {
    const StateId s = q.front();
    q.pop_front();
    for (const auto& [key, to] : g.transitions()) {
      if (key.first == s && seen.insert(to).second) q.push_back(to);
    }
  }
  return seen;
}

StateGraph random_graph(Rng& rng, std::size_t n) {
  std::vector<State> states;
  for (std::size_t i = 0; i < n; ++i) {
    State s{at(static_cast<int>(i), 0), {}};
    for (NodeId node = 0; node < 10; ++node) {
      if (rng.uniform() < 0.08) s.observed.insert(node);
    }
    states.push_back(s);
  }
  std::map<std::pair<StateId, Action>, StateId> transitions;
  for (std::size_t i = 0; i < n; ++i) {
    for (const Action& a : kNav) {
      if (rng.uniform() < 0.35) transitions[{i, a}] = rng.index(n);
    }
  }
  return StateGraph::from_parts(std::move(states), std::move(transitions), StateId{0});
}

}  // namespace

TEST(StateGraph, FirstRecord) {
  StateGraph g;
  const StateId s = g.start(at(1, 1), {4, 2});
  EXPECT_EQ(g.states().size(), 1u);
  EXPECT_TRUE(g.transitions().empty());
  EXPECT_EQ(g.initial(), s);
  EXPECT_EQ(g.states()[s].observed, (std::set<NodeId>{2, 4}));
  EXPECT_THROW(g.start(at(2, 2), {}), InvalidInput);
  EXPECT_NO_THROW(g.start(at(1, 1), {7}));
  EXPECT_EQ(g.states()[s].observed, (std::set<NodeId>{2, 4, 7}));
}

TEST(StateGraph, LoopRevisitsState) {
  StateGraph g;
  StateId s = g.start(at(1, 1), {});
  s = g.record(s, Action::rotate_right(), at(1, 1, Heading::East), {});
  s = g.record(s, Action::rotate_right(), at(1, 1, Heading::South), {});
  s = g.record(s, Action::rotate_right(), at(1, 1, Heading::West), {});
  EXPECT_EQ(g.states().size(), 4u);
  s = g.record(s, Action::rotate_right(), at(1, 1), {9});
  EXPECT_EQ(g.states().size(), 4u);
  EXPECT_EQ(g.transitions().size(), 4u);
  EXPECT_EQ(s, *g.initial());
  EXPECT_TRUE(g.states()[s].observed.count(9));
}

TEST(StateGraph, RecordErrorsAndIdempotence) {
  StateGraph g;
  const StateId s0 = g.start(at(1, 1), {1});
  const StateId s1 = g.record(s0, Action::move_forward(), at(1, 0), {2});
  const StateGraph snapshot = g;
  EXPECT_EQ(g.record(s0, Action::move_forward(), at(1, 0), {2}), s1);
  EXPECT_EQ(g, snapshot);
  EXPECT_THROW(g.record(s0, Action::move_forward(), at(3, 3), {}), std::logic_error);
  EXPECT_THROW(g.record(99, Action::move_forward(), at(3, 3), {}), InvalidInput);
}

TEST(StateGraph, FromPartsValidates) {
  std::vector<State> states{{at(0, 0), {}}, {at(1, 0), {}}};
  std::map<std::pair<StateId, Action>, StateId> bad{{{0, Action::move_right()}, 5}};
  EXPECT_THROW(StateGraph::from_parts(states, bad, StateId{0}), InvalidInput);
  EXPECT_THROW(StateGraph::from_parts(states, {}, StateId{4}), InvalidInput);
  std::vector<State> dup{{at(0, 0), {}}, {at(0, 0), {}}};
  EXPECT_THROW(StateGraph::from_parts(dup, {}, StateId{0}), InvalidInput);
  const StateGraph ok = StateGraph::from_parts(states, {{{0, Action::move_right()}, 1}}, StateId{0});
  EXPECT_EQ(ok.find(at(1, 0)), StateId{1});
  EXPECT_FALSE(ok.find(at(2, 0)));
}

// ---------------------------------------------------------------------------

TEST(Fuse, SelfFuseIsUnchanged) {
  StateGraph g;
  StateId s = g.start(at(2, 2), {1});
  s = g.record(s, Action::move_forward(), at(2, 1), {2});
  s = g.record(s, Action::rotate_left(), at(2, 1, Heading::West), {3});
  const StateGraph f = fuse(g, g);
  EXPECT_EQ(f.states().size(), g.states().size());
  EXPECT_EQ(f.transitions().size(), g.transitions().size());
  EXPECT_NO_THROW(validate(f));
}

TEST(Fuse, DisjointTrajectoriesShareOnlyStart) {
  StateGraph walk;
  StateId w = walk.start(at(5, 5), {1});
  w = walk.record(w, Action::move_forward(), at(5, 4), {2});
  w = walk.record(w, Action::move_forward(), at(5, 3), {3});
  StateGraph un;
  StateId u = un.start(at(5, 5), {100});
  u = un.record(u, Action::move_back(), at(5, 6), {101});
  const StateGraph f = fuse(walk, un);
  EXPECT_EQ(f.states().size(), walk.states().size() + un.states().size() - 1);
  EXPECT_EQ(f.states()[*f.initial()].observed, (std::set<NodeId>{1, 100}));
  // Walk ids are preserved.
  for (StateId i = 0; i < walk.states().size(); ++i) EXPECT_EQ(f.states()[i].pose, walk.states()[i].pose);
  const Plan p = plan_to_node(f, *f.initial(), 101);
  EXPECT_EQ(p.actions, std::vector<Action>{Action::move_back()});
}

TEST(Fuse, InitialPosesMustAgree) {
  StateGraph a;
  a.start(at(0, 0), {});
  StateGraph b;
  b.start(at(1, 0), {});
  EXPECT_THROW(fuse(a, b), InvalidInput);
  EXPECT_THROW(fuse(a, StateGraph{}), InvalidInput);
}

TEST(Fuse, RandomTrajectoriesStayValidAndReachable) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const Scene scene = generate_scene({}, seed);
    Rng rng(seed);
    StateGraph graphs[2];
    for (StateGraph& g : graphs) {
      AgentPose pose = scene.start;
      StateId s = g.start(pose, {rng.index(20)});
      for (int t = 0; t < 80; ++t) {
        const Action a = kNav[rng.index(6)];
        const StepResult r = step(scene, pose, a);
        if (r.status != StepStatus::Ok) continue;
        pose = r.pose;
        s = g.record(s, a, pose, {rng.index(20)});
      }
    }
    const StateGraph f = fuse(graphs[0], graphs[1]);
    ASSERT_NO_THROW(validate(f));
    const std::set<StateId> fused_reach = reachable(f, *f.initial());
    for (const StateGraph& g : graphs) {
      for (StateId s : reachable(g, *g.initial())) {
        const std::optional<StateId> mapped = f.find(g.states()[s].pose);
        ASSERT_TRUE(mapped);
        EXPECT_TRUE(fused_reach.count(*mapped));
        for (NodeId id : g.states()[s].observed) EXPECT_TRUE(f.states()[*mapped].observed.count(id));
      }
    }
  }
}

// ---------------------------------------------------------------------------

TEST(Plan, TargetAtStartIsEmpty) {
  StateGraph g;
  const StateId s = g.start(at(0, 0), {3});
  const Plan p = plan_to_node(g, s, 3);
  EXPECT_TRUE(p.actions.empty());
  EXPECT_EQ(p.goal_state, s);
}

TEST(Plan, LinearChain) {
  StateGraph g;
  StateId s = g.start(at(0, 2), {});
  s = g.record(s, Action::move_forward(), at(0, 1), {});
  s = g.record(s, Action::move_forward(), at(0, 0), {8});
  const Plan p = plan_to_node(g, *g.initial(), 8);
  EXPECT_EQ(p.actions, (std::vector<Action>{Action::move_forward(), Action::move_forward()}));
  EXPECT_EQ(p.goal_state, s);
}

TEST(Plan, DistinctErrors) {
  StateGraph g;
  StateId s = g.start(at(0, 2), {});
  g.record(s, Action::move_forward(), at(0, 1), {});
  // State 2 observes node 5 but nothing leads there.
  const StateGraph h = StateGraph::from_parts(
      {g.states()[0], g.states()[1], State{at(4, 4), {5}}},
      {{{0, Action::move_forward()}, 1}}, StateId{0});
  try {
    plan_to_node(h, 0, 42);
    FAIL();
  } catch (const PlanError& e) {
    EXPECT_EQ(e.kind(), PlanError::Kind::TargetNotObserved);
  }
  try {
    plan_to_node(h, 0, 5);
    FAIL();
  } catch (const PlanError& e) {
    EXPECT_EQ(e.kind(), PlanError::Kind::Unreachable);
  }
  EXPECT_THROW(plan_to_node(h, 17, 5), InvalidInput);
}

TEST(Plan, TiesGoToLowestGoalThenActionOrder) {
  // From 0, MoveBack reaches 2 and MoveForward reaches 1; both observe 7.
  const StateGraph g = StateGraph::from_parts(
      {State{at(0, 1), {}}, State{at(0, 0), {7}}, State{at(0, 2), {7}}},
      {{{0, Action::move_back()}, 2}, {{0, Action::move_forward()}, 1}}, StateId{0});
  const Plan p = plan_to_node(g, 0, 7);
  EXPECT_EQ(p.goal_state, 1u);
  EXPECT_EQ(p.actions, std::vector<Action>{Action::move_forward()});
  // Two actions into the same goal: declaration order picks MoveForward.
  const StateGraph h = StateGraph::from_parts(
      {State{at(0, 1), {}}, State{at(0, 0), {7}}},
      {{{0, Action::rotate_left()}, 1}, {{0, Action::move_forward()}, 1}}, StateId{0});
  EXPECT_EQ(plan_to_node(h, 0, 7).actions, std::vector<Action>{Action::move_forward()});
}

TEST(Plan, RandomGraphsMatchShortestPathOracle) {
  Rng rng(12345);
  std::size_t planned = 0;
  for (int trial = 0; trial < 300; ++trial) {
    const StateGraph g = random_graph(rng, 2 + rng.index(49));
    const StateId start = rng.index(g.states().size());
    for (NodeId target = 0; target < 10; ++target) {
      const std::optional<std::size_t> want = oracle::shortest_plan_length(g, start, target);
      bool observed = false;
      for (const State& s : g.states()) observed = observed || s.observed.count(target);
      try {
        const Plan p = plan_to_node(g, start, target);
        ASSERT_TRUE(want);
        EXPECT_EQ(p.actions.size(), *want);
        // Replay over the transition map.
        StateId cur = start;
        for (const Action& a : p.actions) cur = g.transitions().at({cur, a});
        EXPECT_EQ(cur, p.goal_state);
        EXPECT_TRUE(g.states()[cur].observed.count(target));
        ++planned;
      } catch (const PlanError& e) {
        EXPECT_FALSE(want);
        EXPECT_EQ(e.kind(), observed ? PlanError::Kind::Unreachable : PlanError::Kind::TargetNotObserved);
      }
    }
  }
  EXPECT_GT(planned, 500u);
}

TEST(Plan, WalkthroughReplayReferencesEveryNode) {
  const Encoder enc(EncoderParams{256, 0.0, 0});
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const Scene scene = generate_scene({}, seed);
    CsrGraph csr;
    StateGraph g;
    AgentPose pose = scene.start;
    std::uint64_t frame = 0;
    auto look = [&] { return ingest(csr, enc.encode_observation(scene, observe(scene, pose, frame++))).local_to_node; };
    StateId s = g.start(pose, look());
    for (const Action& a : coverage_explore(scene, scene.start)) {
      const StepResult r = step(scene, pose, a);
      ASSERT_EQ(r.status, StepStatus::Ok);
      pose = r.pose;
      s = g.record(s, a, pose, look());
    }
    std::set<NodeId> referenced;
    for (const State& st : g.states()) referenced.insert(st.observed.begin(), st.observed.end());
    for (const auto& [id, node] : csr.nodes) {
      EXPECT_TRUE(referenced.count(id));
      const Plan p = plan_to_node(g, *g.initial(), id);
      EXPECT_EQ(p.actions.size(), *oracle::shortest_plan_length(g, *g.initial(), id));
    }
  }
}
