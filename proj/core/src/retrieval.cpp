#include "csr/retrieval.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

#include "csr/errors.hpp"
#include "csr/random.hpp"

namespace csr {
namespace {

std::optional<Detection> find_detection(const Observation& obs, InstanceId id) {
  for (const Detection& d : obs.detections) {
    if (d.instance_id == id) return d;
  }
  return std::nullopt;
}

bool sees(const Scene& scene, const AgentPose& pose, InstanceId i, InstanceId j) {
  const Observation obs = observe(scene, pose);
  return find_detection(obs, i) && find_detection(obs, j);
}

std::optional<Triplet> try_triplet(const Scene& scene, const std::vector<AgentPose>& poses,
                                   const std::vector<std::vector<InstanceId>>& visible, Rng& rng,
                                   std::uint64_t frame_base) {
  std::vector<std::size_t> busy;
  for (std::size_t p = 0; p < poses.size(); ++p) {
    if (visible[p].size() >= 2) busy.push_back(p);
  }
  if (busy.empty()) return std::nullopt;
  const std::size_t p1 = busy[rng.index(busy.size())];
  const std::vector<InstanceId>& ids = visible[p1];
  const InstanceId i = ids[rng.index(ids.size())];
  InstanceId j = ids[rng.index(ids.size() - 1)];
  if (j == i) j = ids.back();
  if (!scene.is_object(i) && !scene.is_object(j)) return std::nullopt;

  std::vector<std::size_t> others;
  for (std::size_t p = 0; p < poses.size(); ++p) {
    if (p == p1) continue;
    const auto& v = visible[p];
    if (std::find(v.begin(), v.end(), i) != v.end() && std::find(v.begin(), v.end(), j) != v.end()) {
      others.push_back(p);
    }
  }
  if (others.empty()) return std::nullopt;
  const std::size_t p2 = others[rng.index(others.size())];

  std::vector<InstanceId> movable;
  if (scene.is_object(i)) movable.push_back(i);
  if (scene.is_object(j)) movable.push_back(j);
  const InstanceId m = movable[rng.index(movable.size())];
  const InstanceId from = scene.find_object(m)->receptacle;
  std::vector<InstanceId> targets;
  for (const Receptacle& r : scene.receptacles) {
    if (r.id != from && scene.free_offset(r.id) && cell_visible(scene, poses[p2], r.cell)) targets.push_back(r.id);
  }
  if (targets.empty()) return std::nullopt;
  const InstanceId to = targets[rng.index(targets.size())];

  Scene moved = scene;
  const int offset = *scene.free_offset(to);
  for (ObjectPlacement& o : moved.objects) {
    if (o.id == m) o = {m, to, offset};
  }
  if (!sees(moved, poses[p2], i, j)) return std::nullopt;

  return Triplet{{scene, poses[p1], i, j, hash_seed({frame_base, 0})},
                 {scene, poses[p2], i, j, hash_seed({frame_base, 1})},
                 {moved, poses[p2], i, j, hash_seed({frame_base, 2})}};
}

}  // namespace

std::vector<Triplet> make_triplets(const RetrievalConfig& config, std::size_t count, std::uint64_t seed) {
  std::vector<Triplet> out;
  const std::size_t max_scenes = 20 * count + 20;
  for (std::size_t s = 0; out.size() < count && s < max_scenes; ++s) {
    const Scene scene = generate_scene(config.scene, hash_seed({seed, 0x7e7, s}));
    std::vector<AgentPose> poses;
    std::vector<std::vector<InstanceId>> visible;
    for (Cell c : reachable_cells(scene, scene.start.cell)) {
      for (int h = 0; h < 4; ++h) {
        const AgentPose pose{c, static_cast<Heading>(h)};
        std::vector<InstanceId> ids;
        for (const Detection& d : observe(scene, pose).detections) ids.push_back(d.instance_id);
        poses.push_back(pose);
        visible.push_back(std::move(ids));
      }
    }
    Rng rng(hash_seed({seed, 0x7e7, s, 1}));
    for (int attempt = 0; attempt < 20; ++attempt) {
      if (auto t = try_triplet(scene, poses, visible, rng, hash_seed({seed, 0x7e7, s, 2}))) {
        out.push_back(std::move(*t));
        break;
      }
    }
  }
  if (out.size() < count) throw InfeasibleRequest("scene config yields too few retrieval triplets");
  return out;
}

void validate(const Triplet& t) {
  auto fail = [](const std::string& what) { throw InvalidInput("malformed triplet: " + what); };
  const PairContext* contexts[] = {&t.query, &t.positive, &t.negative};
  for (const PairContext* c : contexts) {
    if (c->i != t.query.i || c->j != t.query.j) fail("contexts name different pairs");
    if (c->i == c->j) fail("pair must name two instances");
    if (!sees(c->scene, c->pose, c->i, c->j)) fail("pair not visible in a context");
  }
  if (!(t.query.scene == t.positive.scene)) fail("query and positive scenes differ");
  Scene layout = t.negative.scene;
  layout.objects = t.positive.scene.objects;
  layout.held = t.positive.scene.held;
  if (!(layout == t.positive.scene)) fail("negative scene changes more than object placements");
  const std::vector<InstanceId> moved = moved_objects(t.positive.scene, t.negative.scene);
  if (moved.size() != 1 || (moved[0] != t.query.i && moved[0] != t.query.j)) {
    fail("negative must relocate exactly one object of the pair");
  }
  for (const ObjectPlacement& o : t.positive.scene.objects) {
    const ObjectPlacement* n = t.negative.scene.find_object(o.id);
    if (o.id != moved[0] && (n == nullptr || !(*n == o))) fail("negative disturbs another object");
  }
}

FeatureVec EncoderFeatures::feature(const PairContext& context) const {
  const Observation obs = observe(context.scene, context.pose, context.frame);
  const std::optional<Detection> a = find_detection(obs, context.i);
  const std::optional<Detection> b = find_detection(obs, context.j);
  if (!a || !b) throw InvalidInput("pair not visible in context");
  return encoder_.scene_feature(context.scene, *a, *b);
}

FeatureVec RandomFeatures::feature(const PairContext& context) const {
  Rng rng(hash_seed({seed_, context.frame, static_cast<std::uint64_t>(context.i),
                     static_cast<std::uint64_t>(context.j)}));
  std::vector<double> v(dim_);
  for (double& x : v) x = rng.normal();
  return normalize(v);
}

double run_retrieval(const std::vector<Triplet>& triplets, const FeatureSource& source) {
  if (triplets.empty()) throw InvalidInput("run_retrieval: no triplets");
  std::size_t correct = 0;
  for (const Triplet& t : triplets) {
    validate(t);
    const FeatureVec q = source.feature(t.query);
    if (cos_sim(q, source.feature(t.positive)) > cos_sim(q, source.feature(t.negative))) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(triplets.size());
}

}  // namespace csr
