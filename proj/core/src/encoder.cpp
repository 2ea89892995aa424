#include "csr/encoder.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <string>

#include "csr/errors.hpp"
#include "csr/random.hpp"

namespace csr {
namespace {

// Stream tags keep the seeded draws for different purposes independent.
enum : std::uint64_t {
  kTagP = 1,
  kTagQ,
  kTagIdentity,
  kTagKind,
  kTagBucket,
  kTagSlot,
  kTagProjected,
  kTagSceneNoise,
  kTagIdentityNoise,
};

constexpr double kSlotWeight = 3.0;

struct Slot {
  InstanceId receptacle;
  int offset;  // -1 for the receptacle itself
};

Slot slot_of(const Scene& scene, InstanceId id) {
  if (const Receptacle* r = scene.find_receptacle(id)) return {r->id, -1};
  if (const ObjectPlacement* o = scene.find_object(id)) return {o->receptacle, o->offset};
  throw InvalidInput("instance " + std::to_string(id) + " is not placed in the scene");
}

std::uint64_t word(long long v) { return static_cast<std::uint64_t>(v); }

}  // namespace

std::string_view to_string(RelationKind k) {
  switch (k) {
    case RelationKind::NodeContext: return "node-context";
    case RelationKind::ISupportsJ: return "i-supports-j";
    case RelationKind::JSupportsI: return "j-supports-i";
    case RelationKind::Sibling: return "sibling";
    case RelationKind::CrossReceptacle: return "cross-receptacle";
  }
  return "?";
}

RelationBucket relation_bucket(const Scene& scene, InstanceId i, InstanceId j) {
  const Slot si = slot_of(scene, i);
  const Slot sj = slot_of(scene, j);
  RelationBucket b;
  if (i == j) return b;

  const bool i_rec = si.offset < 0;
  const bool j_rec = sj.offset < 0;
  if (i_rec && !j_rec && sj.receptacle == i) {
    b.kind = RelationKind::ISupportsJ;
  } else if (j_rec && !i_rec && si.receptacle == j) {
    b.kind = RelationKind::JSupportsI;
  } else if (!i_rec && !j_rec && si.receptacle == sj.receptacle) {
    b.kind = RelationKind::Sibling;
  } else {
    b.kind = RelationKind::CrossReceptacle;
  }
  const Cell ci = scene.find_receptacle(si.receptacle)->cell;
  const Cell cj = scene.find_receptacle(sj.receptacle)->cell;
  b.dx = std::clamp(cj.x - ci.x, -kDisplacementClamp, kDisplacementClamp);
  b.dy = std::clamp(cj.y - ci.y, -kDisplacementClamp, kDisplacementClamp);
  return b;
}

Encoder::Encoder(EncoderParams params) : params_(params) {
  if (params_.dim == 0) throw InvalidInput("encoder dimension must be positive");
  if (!(params_.sigma >= 0.0) || !std::isfinite(params_.sigma)) {
    throw InvalidInput("encoder sigma must be finite and non-negative");
  }
  const std::size_t n = params_.dim * params_.dim;
  const double scale = 1.0 / std::sqrt(static_cast<double>(params_.dim));
  Rng rp(hash_seed({params_.seed, kTagP}));
  Rng rq(hash_seed({params_.seed, kTagQ}));
  p_.resize(n);
  q_.resize(n);
  for (double& x : p_) x = rp.normal() * scale;
  for (double& x : q_) x = rq.normal() * scale;
}

Encoder::~Encoder() = default;

std::vector<double> Encoder::gaussian(std::uint64_t stream) const {
  Rng rng(stream);
  const double scale = 1.0 / std::sqrt(static_cast<double>(params_.dim));
  std::vector<double> v(params_.dim);
  for (double& x : v) x = rng.normal() * scale;
  return v;
}

const std::vector<double>& Encoder::basis(std::uint64_t key) const {
  {
    std::shared_lock lock(mutex_);
    auto it = cache_.find(key);
    if (it != cache_.end()) return *it->second;
  }
  auto v = std::make_unique<std::vector<double>>(gaussian(hash_seed({params_.seed, key})));
  std::unique_lock lock(mutex_);
  auto [it, inserted] = cache_.try_emplace(key, std::move(v));
  return *it->second;
}

const std::vector<double>& Encoder::projected(int which, InstanceId id) const {
  const std::uint64_t key = hash_seed({kTagProjected, word(which), word(id)});
  {
    std::shared_lock lock(mutex_);
    auto it = cache_.find(key);
    if (it != cache_.end()) return *it->second;
  }
  const FeatureVec u = identity_feature(id);
  const std::vector<double>& m = which == 0 ? p_ : q_;
  const std::size_t n = params_.dim;
  auto out = std::make_unique<std::vector<double>>(n, 0.0);
  for (std::size_t r = 0; r < n; ++r) {
    const double* row = m.data() + r * n;
    double acc = 0.0;
    for (std::size_t c = 0; c < n; ++c) acc += row[c] * u[c];
    (*out)[r] = acc;
  }
  std::unique_lock lock(mutex_);
  auto [it, inserted] = cache_.try_emplace(key, std::move(out));
  return *it->second;
}

FeatureVec Encoder::identity_feature(InstanceId id) const {
  return normalize(gaussian(hash_seed({params_.seed, kTagIdentity, word(id)})));
}

FeatureVec Encoder::identity_feature(InstanceId id, std::uint64_t frame) const {
  return add_noise(identity_feature(id), hash_seed({params_.seed, kTagIdentityNoise, frame, word(id)}));
}

FeatureVec Encoder::add_noise(const FeatureVec& clean, std::uint64_t stream) const {
  if (params_.sigma == 0.0) return clean;
  if (clean.size() != params_.dim) throw InvalidInput("add_noise: feature dimension mismatch");
  std::vector<double> v = gaussian(stream);
  for (std::size_t d = 0; d < v.size(); ++d) v[d] = clean[d] + params_.sigma * v[d];
  return normalize(v);
}

FeatureVec Encoder::clean_feature(const Scene& scene, InstanceId i, InstanceId j) const {
  const RelationBucket b = relation_bucket(scene, i, j);
  const Slot si = slot_of(scene, i);
  const Slot sj = slot_of(scene, j);
  const auto kind = word(static_cast<long long>(b.kind));

  const std::vector<double>& k = basis(hash_seed({kTagKind, kind}));
  const std::vector<double>& r = basis(hash_seed({kTagBucket, kind, word(b.dx), word(b.dy)}));
  const std::vector<double>& s =
      basis(hash_seed({kTagSlot, word(si.receptacle), word(si.offset), word(sj.receptacle), word(sj.offset)}));
  const std::vector<double>& pu = projected(0, i);
  const std::vector<double>& qu = projected(1, j);

  std::vector<double> v(params_.dim);
  for (std::size_t d = 0; d < v.size(); ++d) v[d] = k[d] + r[d] + kSlotWeight * s[d] + pu[d] + qu[d];
  return normalize(v);
}

FeatureVec Encoder::scene_feature(const Scene& scene, const Detection& i, const Detection& j) const {
  if (i.frame != j.frame) throw InvalidInput("scene_feature: detections come from different observations");
  const FeatureVec clean = clean_feature(scene, i.instance_id, j.instance_id);
  return add_noise(clean, hash_seed({params_.seed, kTagSceneNoise, i.frame, word(i.instance_id),
                                     word(j.instance_id)}));
}

LocalGraph Encoder::encode_observation(const Scene& scene, const Observation& obs) const {
  LocalGraph g;
  const auto& dets = obs.detections;
  g.nodes.reserve(dets.size());
  for (const Detection& d : dets) {
    g.nodes.push_back({scene_feature(scene, d, d), identity_feature(d.instance_id, d.frame), d.instance_id,
                       d.region});
  }
  for (std::size_t a = 0; a < dets.size(); ++a) {
    for (std::size_t b = 0; b < dets.size(); ++b) {
      if (a != b) g.edges.emplace(std::pair(a, b), scene_feature(scene, dets[a], dets[b]));
    }
  }
  return g;
}

}  // namespace csr
