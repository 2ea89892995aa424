#pragma once

// Rearrangement scores. An object is displaced when its receptacle differs
// from the target layout; an object still in the agent's hand is displaced.

#include <cstdint>
#include <vector>

#include "csr/world.hpp"

namespace csr {

/// 1 iff no object is displaced in `final_scene` relative to `target`.
/// Throws InvalidInput if the scenes disagree on object ids.
int success_metric(const Scene& final_scene, const Scene& target);

/// 0 if any object outside `shuffled` is displaced, otherwise the fraction
/// of `shuffled` objects back on their target receptacle. 1 for an empty
/// shuffled set.
double fixed_strict_metric(const Scene& final_scene, const Scene& target, const std::vector<InstanceId>& shuffled);

/// Sum over displaced objects of min(1, d / d0), where d is the Manhattan
/// distance between the current and target receptacle cells and d0 that
/// distance in `initial` (min(1, d) when d0 is 0). A held object counts 1.
double energy(const Scene& scene, const Scene& initial, const Scene& target);

/// energy(final) / energy(initial); 0 when the initial energy is 0.
double energy_metric(const Scene& initial, const Scene& final_scene, const Scene& target);

struct MeanInterval {
  double mean = 0.0;
  double lo = 0.0;
  double hi = 0.0;
};

/// Percentile bootstrap interval for the mean. Throws InvalidInput on an
/// empty sample or a level outside (0, 1).
MeanInterval bootstrap_mean_ci(const std::vector<double>& values, std::uint64_t seed,
                               std::size_t resamples = 2000, double level = 0.95);

}  // namespace csr
