#pragma once

// Labelled edge-feature datasets for linear probes of discrete relations.

#include <cstdint>
#include <string_view>
#include <vector>

#include "csr/encoder.hpp"
#include "csr/numerics.hpp"
#include "csr/world.hpp"

namespace csr {

enum class ProbeTask { Support, Sibling };

std::string_view to_string(ProbeTask task);

/// Support classes: 0 = i supports j, 1 = j supports i, 2 = neither.
/// Sibling classes: 0 = different receptacles, 1 = same receptacle.
std::size_t num_classes(ProbeTask task);
std::string_view class_name(ProbeTask task, int label);

struct ProbeSplit {
  std::vector<FeatureVec> features;
  std::vector<int> labels;
};

struct ProbeDataset {
  ProbeTask task = ProbeTask::Support;
  ProbeSplit train;
  ProbeSplit test;
};

/// Edge features of every directed pair in each scene (support: all
/// instance pairs; sibling: object pairs), split 80/20 by scene after a
/// seeded permutation and balanced per split by seeded subsampling to the
/// smallest class. Throws InvalidInput naming a class that ends up empty in
/// either split.
ProbeDataset build_probe_dataset(const std::vector<Scene>& scenes, ProbeTask task, const Encoder& encoder,
                                 std::uint64_t seed);

}  // namespace csr
