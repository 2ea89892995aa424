#pragma once

// Triplet retrieval: does a relationship feature sit closer to the same
// relationship seen from another viewpoint than to the same pair after one
// object was relocated?

#include <cstdint>
#include <vector>

#include "csr/encoder.hpp"
#include "csr/world.hpp"

namespace csr {

/// A directed pair (i, j) as seen from `pose` in `scene`, in observation
/// `frame`.
struct PairContext {
  Scene scene;
  AgentPose pose;
  InstanceId i = 0;
  InstanceId j = 0;
  std::uint64_t frame = 0;
};

struct Triplet {
  PairContext query;
  PairContext positive;  // same scene, another pose
  PairContext negative;  // positive pose, scene with one of i, j relocated
};

struct RetrievalConfig {
  SceneConfig scene;
};

/// Builds `count` triplets from seeded scenes. Throws InfeasibleRequest if
/// the scene config keeps producing layouts with no usable triplet.
std::vector<Triplet> make_triplets(const RetrievalConfig& config, std::size_t count, std::uint64_t seed);

/// Throws InvalidInput unless both instances are detected in every context,
/// query and positive share a scene, and the negative scene differs from it
/// by exactly one object relocation involving i or j.
void validate(const Triplet& t);

class FeatureSource {
 public:
  virtual ~FeatureSource() = default;
  virtual FeatureVec feature(const PairContext& context) const = 0;
};

/// Features from the encoder.
class EncoderFeatures final : public FeatureSource {
 public:
  explicit EncoderFeatures(const Encoder& encoder) : encoder_(encoder) {}
  FeatureVec feature(const PairContext& context) const override;

 private:
  const Encoder& encoder_;
};

/// Independent random unit vectors, one per context frame (chance baseline).
class RandomFeatures final : public FeatureSource {
 public:
  RandomFeatures(std::size_t dim, std::uint64_t seed) : dim_(dim), seed_(seed) {}
  FeatureVec feature(const PairContext& context) const override;

 private:
  std::size_t dim_;
  std::uint64_t seed_;
};

/// Fraction of triplets with cos(query, positive) > cos(query, negative).
/// Validates every triplet; throws InvalidInput for an empty list.
double run_retrieval(const std::vector<Triplet>& triplets, const FeatureSource& source);

}  // namespace csr
