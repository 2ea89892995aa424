#pragma once

// Seeded analytic encoder. It maps (scene, detection pair) to a unit feature
// that depends only on the pair's placement in the static layout, so two
// views of an unchanged scene agree exactly while a relocation changes the
// feature. Optional Gaussian view noise is keyed by (seed, frame, pair).
//
// Edge feature for the directed pair (i, j), before normalization:
//
//   K e_kind + R e_(kind, dx, dy) + 3 S(slot_i, slot_j) + P u_i + Q u_j
//
// where kind is the ground-truth relation, (dx, dy) the clamped receptacle
// displacement, slot = (receptacle, offset) of each instance, u the identity
// features and K, R, S, P, Q seeded Gaussian maps with N(0, 1/L) entries.
// Node features are the i = j case with kind NodeContext.

#include <cstdint>
#include <map>
#include <memory>
#include <shared_mutex>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "csr/numerics.hpp"
#include "csr/world.hpp"

namespace csr {

struct EncoderParams {
  std::size_t dim = kDefaultFeatureDim;
  double sigma = 0.0;
  std::uint64_t seed = 0;
};

enum class RelationKind { NodeContext, ISupportsJ, JSupportsI, Sibling, CrossReceptacle };

std::string_view to_string(RelationKind k);

inline constexpr int kDisplacementClamp = 3;

struct RelationBucket {
  RelationKind kind = RelationKind::NodeContext;
  int dx = 0;
  int dy = 0;
  auto operator<=>(const RelationBucket&) const = default;
};

/// Ground-truth relation of the directed pair (i, j) in `scene`. Throws
/// InvalidInput if either id is not a receptacle or placed object.
RelationBucket relation_bucket(const Scene& scene, InstanceId i, InstanceId j);

/// One detection of a local graph.
struct LocalNode {
  FeatureVec scene;
  FeatureVec identity;
  InstanceId truth_id = -1;  // evaluators and ground-truth ablations only
  Region region;
};

/// CSR fragment from a single observation: n nodes and n^2 - n directed edges.
struct LocalGraph {
  std::vector<LocalNode> nodes;
  std::map<std::pair<std::size_t, std::size_t>, FeatureVec> edges;
};

class Encoder {
 public:
  /// Throws InvalidInput if dim is 0 or sigma is negative or non-finite.
  explicit Encoder(EncoderParams params);
  ~Encoder();
  Encoder(const Encoder&) = delete;
  Encoder& operator=(const Encoder&) = delete;

  const EncoderParams& params() const noexcept { return params_; }

  /// Noise-free identity embedding; depends only on (seed, id).
  FeatureVec identity_feature(InstanceId id) const;
  /// Identity embedding as seen in observation `frame` (noisy when sigma > 0).
  FeatureVec identity_feature(InstanceId id, std::uint64_t frame) const;

  /// Throws InvalidInput if the detections come from different frames or
  /// name instances absent from `scene`.
  FeatureVec scene_feature(const Scene& scene, const Detection& i, const Detection& j) const;

  LocalGraph encode_observation(const Scene& scene, const Observation& obs) const;

  /// Adds view noise: normalize(v + sigma g), g ~ N(0, I / L) from the
  /// stream `stream`. The cosine to the clean vector concentrates at
  /// 1 / sqrt(1 + sigma^2). Returns `clean` unchanged when sigma is 0.
  FeatureVec add_noise(const FeatureVec& clean, std::uint64_t stream) const;

 private:
  // Seeded N(0, 1/L) vector for a key, cached.
  const std::vector<double>& basis(std::uint64_t key) const;
  // P u or Q u for an instance, cached.
  const std::vector<double>& projected(int which, InstanceId id) const;
  std::vector<double> gaussian(std::uint64_t stream) const;
  FeatureVec clean_feature(const Scene& scene, InstanceId i, InstanceId j) const;

  EncoderParams params_;
  std::vector<double> p_;  // L x L
  std::vector<double> q_;  // L x L
  mutable std::shared_mutex mutex_;
  mutable std::unordered_map<std::uint64_t, std::unique_ptr<std::vector<double>>> cache_;
};

}  // namespace csr
