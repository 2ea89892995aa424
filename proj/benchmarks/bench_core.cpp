#include <benchmark/benchmark.h>

#include "csr/encoder.hpp"
#include "csr/numerics.hpp"
#include "csr/random.hpp"
#include "csr/rearrangement.hpp"
#include "csr/scene_graph.hpp"
#include "csr/tracking.hpp"

using namespace csr;

namespace {

ScoreMatrix random_scores(std::size_t n, bool ties) {
  Rng rng(n);
  ScoreMatrix s(n, n);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < n; ++c) s.at(r, c) = ties ? static_cast<double>(rng.index(3)) : rng.normal();
  }
  return s;
}

void BM_MaxAssignment(benchmark::State& state) {
  const ScoreMatrix s = random_scores(static_cast<std::size_t>(state.range(0)), false);
  for (auto _ : state) benchmark::DoNotOptimize(max_assignment(s));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_MaxAssignment)->RangeMultiplier(2)->Range(4, 128)->Complexity();

// Heavy ties exercise the lexicographic tie-break path.
void BM_MaxAssignmentTies(benchmark::State& state) {
  const ScoreMatrix s = random_scores(static_cast<std::size_t>(state.range(0)), true);
  for (auto _ : state) benchmark::DoNotOptimize(max_assignment(s));
}
BENCHMARK(BM_MaxAssignmentTies)->RangeMultiplier(2)->Range(4, 64);

void BM_EncodeObservation(benchmark::State& state) {
  const Encoder enc(EncoderParams{static_cast<std::size_t>(state.range(0)), 0.3, 0});
  const Scene scene = generate_scene({}, 1);
  std::uint64_t frame = 0;
  for (auto _ : state) {
    const Observation obs = observe_all(scene, ++frame);
    benchmark::DoNotOptimize(enc.encode_observation(scene, obs));
  }
}
BENCHMARK(BM_EncodeObservation)->Arg(128)->Arg(512);

void BM_Ingest(benchmark::State& state) {
  const Encoder enc(EncoderParams{512, 0.3, 0});
  const Scene scene = generate_scene({}, 2);
  std::vector<LocalGraph> views;
  for (std::uint64_t f = 0; f < 20; ++f) views.push_back(enc.encode_observation(scene, observe_all(scene, f)));
  for (auto _ : state) {
    CsrGraph g;
    for (const LocalGraph& v : views) ingest(g, v);
    benchmark::DoNotOptimize(g);
  }
}
BENCHMARK(BM_Ingest);

void BM_Tracking(benchmark::State& state) {
  const Encoder enc(EncoderParams{512, 0.4, 0});
  const TrackStream stream = make_track_stream({}, enc, 3);
  for (auto _ : state) benchmark::DoNotOptimize(run_tracking(stream, 0.5, true));
}
BENCHMARK(BM_Tracking);

void BM_RearrangementEpisode(benchmark::State& state) {
  EpisodeConfig c;
  c.encoder.sigma = 0.3;
  c.heuristic_trajectory = state.range(0) == 1;
  const Encoder enc(c.encoder);
  std::uint64_t seed = 0;
  for (auto _ : state) {
    c.seed = ++seed;
    benchmark::DoNotOptimize(run_rearrangement(c, enc));
  }
}
BENCHMARK(BM_RearrangementEpisode)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
