#include "csr/probe_dataset.hpp"

#include <algorithm>
#include <string>

#include "csr/errors.hpp"
#include "csr/random.hpp"

namespace csr {

std::string_view to_string(ProbeTask task) { return task == ProbeTask::Support ? "support" : "sibling"; }

std::size_t num_classes(ProbeTask task) { return task == ProbeTask::Support ? 3 : 2; }

std::string_view class_name(ProbeTask task, int label) {
  if (task == ProbeTask::Support) {
    switch (label) {
      case 0: return "i-supports-j";
      case 1: return "j-supports-i";
      case 2: return "none";
    }
  } else {
    switch (label) {
      case 0: return "different-receptacle";
      case 1: return "same-receptacle";
    }
  }
  throw InvalidInput("label " + std::to_string(label) + " out of range for " + std::string(to_string(task)));
}

namespace {

std::optional<int> label_for(ProbeTask task, const Scene& scene, InstanceId i, InstanceId j) {
  const RelationKind kind = relation_bucket(scene, i, j).kind;
  if (task == ProbeTask::Support) {
    if (kind == RelationKind::ISupportsJ) return 0;
    if (kind == RelationKind::JSupportsI) return 1;
    return 2;
  }
  if (!scene.is_object(i) || !scene.is_object(j)) return std::nullopt;
  return kind == RelationKind::Sibling ? 1 : 0;
}

ProbeSplit balance(ProbeTask task, std::vector<ProbeSplit> by_class, Rng& rng, const char* split_name) {
  std::size_t smallest = by_class.front().features.size();
  for (std::size_t c = 0; c < by_class.size(); ++c) {
    if (by_class[c].features.empty()) {
      throw InvalidInput("probe dataset: class '" + std::string(class_name(task, static_cast<int>(c))) +
                         "' is empty in the " + split_name + " split");
    }
    smallest = std::min(smallest, by_class[c].features.size());
  }
  ProbeSplit out;
  for (ProbeSplit& cls : by_class) {
    std::vector<std::size_t> order(cls.features.size());
    for (std::size_t k = 0; k < order.size(); ++k) order[k] = k;
    rng.shuffle(order);
    order.resize(smallest);
    std::sort(order.begin(), order.end());
    for (std::size_t k : order) {
      out.features.push_back(cls.features[k]);
      out.labels.push_back(cls.labels[k]);
    }
  }
  return out;
}

}  // namespace

ProbeDataset build_probe_dataset(const std::vector<Scene>& scenes, ProbeTask task, const Encoder& encoder,
                                 std::uint64_t seed) {
  if (scenes.size() < 2) throw InvalidInput("probe dataset: need at least two scenes to split");
  Rng rng(hash_seed({seed, 0x960be}));
  std::vector<std::size_t> order(scenes.size());
  for (std::size_t k = 0; k < order.size(); ++k) order[k] = k;
  rng.shuffle(order);
  const std::size_t n_train = std::clamp<std::size_t>((scenes.size() * 4 + 4) / 5, 1, scenes.size() - 1);

  const std::size_t classes = num_classes(task);
  std::vector<ProbeSplit> train(classes);
  std::vector<ProbeSplit> test(classes);
  for (std::size_t rank = 0; rank < order.size(); ++rank) {
    const std::size_t s = order[rank];
    const Scene& scene = scenes[s];
    const Observation obs = observe_all(scene, hash_seed({seed, 0x960be, s}));
    auto& target = rank < n_train ? train : test;
    for (const Detection& a : obs.detections) {
      for (const Detection& b : obs.detections) {
        if (a.instance_id == b.instance_id) continue;
        const std::optional<int> label = label_for(task, scene, a.instance_id, b.instance_id);
        if (!label) continue;
        target[static_cast<std::size_t>(*label)].features.push_back(encoder.scene_feature(scene, a, b));
        target[static_cast<std::size_t>(*label)].labels.push_back(*label);
      }
    }
  }

  ProbeDataset out;
  out.task = task;
  out.train = balance(task, std::move(train), rng, "train");
  out.test = balance(task, std::move(test), rng, "test");
  return out;
}

}  // namespace csr
