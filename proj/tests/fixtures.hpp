#pragma once

// Hand-built scenes shared by several test files.

#include <algorithm>
#include <vector>

#include "csr/world.hpp"

namespace fixture {

struct Placement {
  csr::InstanceId receptacle;
  int offset;
};

/// Receptacles get ids 0..R-1 in the given order, objects R.. in the given
/// order. No walls unless given.
inline csr::Scene make_scene(int width, int height, const std::vector<csr::Cell>& receptacles,
                             const std::vector<Placement>& objects, csr::AgentPose start,
                             std::vector<csr::Cell> walls = {}, int capacity = 4) {
  csr::Scene s;
  s.width = width;
  s.height = height;
  std::sort(walls.begin(), walls.end());
  s.walls = walls;
  const int r = static_cast<int>(receptacles.size());
  for (int i = 0; i < r; ++i) s.receptacles.push_back({i, receptacles[static_cast<std::size_t>(i)], capacity});
  for (std::size_t i = 0; i < objects.size(); ++i) {
    s.objects.push_back({r + static_cast<int>(i), objects[i].receptacle, objects[i].offset});
  }
  s.start = start;
  csr::validate_scene(s);
  return s;
}

inline csr::SceneConfig small_config() { return csr::SceneConfig{}; }

}  // namespace fixture
