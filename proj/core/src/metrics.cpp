#include "csr/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <optional>

#include "csr/errors.hpp"
#include "csr/random.hpp"

namespace csr {
namespace {

void check_ids(const Scene& a, const Scene& b) {
  if (a.object_ids() != b.object_ids()) throw InvalidInput("scenes do not share the same object ids");
}

// Receptacle cell of an object, or nullopt when it is held.
std::optional<Cell> location(const Scene& scene, InstanceId id) {
  const ObjectPlacement* o = scene.find_object(id);
  if (o == nullptr) return std::nullopt;
  const Receptacle* r = scene.find_receptacle(o->receptacle);
  if (r == nullptr) throw InvalidInput("object " + std::to_string(id) + " sits on an unknown receptacle");
  return r->cell;
}

bool displaced(const Scene& scene, const Scene& target, InstanceId id) {
  const ObjectPlacement* a = scene.find_object(id);
  const ObjectPlacement* b = target.find_object(id);
  return a == nullptr || b == nullptr || a->receptacle != b->receptacle;
}

int manhattan(Cell a, Cell b) { return std::abs(a.x - b.x) + std::abs(a.y - b.y); }

}  // namespace

int success_metric(const Scene& final_scene, const Scene& target) {
  check_ids(final_scene, target);
  for (InstanceId id : target.object_ids()) {
    if (displaced(final_scene, target, id)) return 0;
  }
  return 1;
}

double fixed_strict_metric(const Scene& final_scene, const Scene& target, const std::vector<InstanceId>& shuffled) {
  check_ids(final_scene, target);
  std::size_t restored = 0;
  for (InstanceId id : target.object_ids()) {
    const bool is_shuffled = std::find(shuffled.begin(), shuffled.end(), id) != shuffled.end();
    const bool off = displaced(final_scene, target, id);
    if (!is_shuffled && off) return 0.0;
    if (is_shuffled && !off) ++restored;
  }
  if (shuffled.empty()) return 1.0;
  return static_cast<double>(restored) / static_cast<double>(shuffled.size());
}

double energy(const Scene& scene, const Scene& initial, const Scene& target) {
  check_ids(scene, target);
  check_ids(initial, target);
  double total = 0.0;
  for (InstanceId id : target.object_ids()) {
    if (!displaced(scene, target, id)) continue;
    const std::optional<Cell> here = location(scene, id);
    const std::optional<Cell> goal = location(target, id);
    if (!here || !goal) {
      total += 1.0;
      continue;
    }
    const double d = manhattan(*here, *goal);
    const std::optional<Cell> start = location(initial, id);
    const double d0 = start ? manhattan(*start, *goal) : 0.0;
    total += d0 > 0.0 ? std::min(1.0, d / d0) : std::min(1.0, d);
  }
  return total;
}

double energy_metric(const Scene& initial, const Scene& final_scene, const Scene& target) {
  const double e0 = energy(initial, initial, target);
  if (e0 == 0.0) return 0.0;
  return energy(final_scene, initial, target) / e0;
}

MeanInterval bootstrap_mean_ci(const std::vector<double>& values, std::uint64_t seed, std::size_t resamples,
                               double level) {
  if (values.empty()) throw InvalidInput("bootstrap: empty sample");
  if (!(level > 0.0 && level < 1.0)) throw InvalidInput("bootstrap: level must lie in (0, 1)");
  if (resamples == 0) throw InvalidInput("bootstrap: need at least one resample");

  MeanInterval out;
  for (double v : values) out.mean += v;
  out.mean /= static_cast<double>(values.size());

  Rng rng(hash_seed({seed, 0xb0075}));
  std::vector<double> means(resamples);
  for (double& m : means) {
    double sum = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) sum += values[rng.index(values.size())];
    m = sum / static_cast<double>(values.size());
  }
  std::sort(means.begin(), means.end());
  const double tail = (1.0 - level) / 2.0;
  auto quantile = [&](double q) {
    const double pos = q * static_cast<double>(resamples - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, resamples - 1);
    return means[lo] + (pos - static_cast<double>(lo)) * (means[hi] - means[lo]);
  };
  out.lo = quantile(tail);
  out.hi = quantile(1.0 - tail);
  return out;
}

}  // namespace csr
