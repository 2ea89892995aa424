#include "csr/world.hpp"

#include <algorithm>
#include <array>
#include <cstdlib>
#include <deque>
#include <map>

#include "csr/errors.hpp"
#include "csr/random.hpp"

namespace csr {

std::string_view to_string(Heading h) {
  switch (h) {
    case Heading::North: return "N";
    case Heading::East: return "E";
    case Heading::South: return "S";
    case Heading::West: return "W";
  }
  return "?";
}

Heading heading_from_string(std::string_view s) {
  if (s == "N") return Heading::North;
  if (s == "E") return Heading::East;
  if (s == "S") return Heading::South;
  if (s == "W") return Heading::West;
  throw InvalidInput("unknown heading '" + std::string(s) + "'");
}

Heading rotate_left(Heading h) { return static_cast<Heading>((static_cast<int>(h) + 3) % 4); }
Heading rotate_right(Heading h) { return static_cast<Heading>((static_cast<int>(h) + 1) % 4); }

Cell heading_step(Heading h) {
  switch (h) {
    case Heading::North: return {0, -1};
    case Heading::East: return {1, 0};
    case Heading::South: return {0, 1};
    case Heading::West: return {-1, 0};
  }
  return {0, 0};
}

namespace {

constexpr std::array<std::string_view, 8> kActionNames = {
    "MoveForward", "MoveBack", "MoveLeft", "MoveRight", "RotateLeft", "RotateRight", "PickUp", "Place"};

Cell add(Cell a, Cell b) { return {a.x + b.x, a.y + b.y}; }

}  // namespace

std::string_view to_string(ActionType t) { return kActionNames[static_cast<std::size_t>(t)]; }

ActionType action_type_from_string(std::string_view s) {
  for (std::size_t i = 0; i < kActionNames.size(); ++i) {
    if (kActionNames[i] == s) return static_cast<ActionType>(i);
  }
  throw InvalidInput("unknown action '" + std::string(s) + "'");
}

std::string to_string(const Action& a) {
  std::string out(to_string(a.type));
  if (!a.is_navigation()) out += "(" + std::to_string(a.target) + ")";
  return out;
}

std::optional<Action> inverse(const Action& a) {
  switch (a.type) {
    case ActionType::MoveForward: return Action::move_back();
    case ActionType::MoveBack: return Action::move_forward();
    case ActionType::MoveLeft: return Action::move_right();
    case ActionType::MoveRight: return Action::move_left();
    case ActionType::RotateLeft: return Action::rotate_right();
    case ActionType::RotateRight: return Action::rotate_left();
    case ActionType::PickUp:
    case ActionType::Place: return std::nullopt;
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Scene queries

bool Scene::is_wall(Cell c) const { return std::binary_search(walls.begin(), walls.end(), c); }

bool Scene::traversable(Cell c) const {
  return in_bounds(c) && !is_wall(c) && receptacle_at(c) == nullptr;
}

const Receptacle* Scene::receptacle_at(Cell c) const {
  for (const Receptacle& r : receptacles) {
    if (r.cell == c) return &r;
  }
  return nullptr;
}

const Receptacle* Scene::find_receptacle(InstanceId id) const {
  auto it = std::lower_bound(receptacles.begin(), receptacles.end(), id,
                             [](const Receptacle& r, InstanceId v) { return r.id < v; });
  return (it != receptacles.end() && it->id == id) ? &*it : nullptr;
}

const ObjectPlacement* Scene::find_object(InstanceId id) const {
  auto it = std::lower_bound(objects.begin(), objects.end(), id,
                             [](const ObjectPlacement& o, InstanceId v) { return o.id < v; });
  return (it != objects.end() && it->id == id) ? &*it : nullptr;
}

std::vector<InstanceId> Scene::object_ids() const {
  std::vector<InstanceId> ids;
  ids.reserve(objects.size() + 1);
  for (const ObjectPlacement& o : objects) ids.push_back(o.id);
  if (held) ids.push_back(*held);
  std::sort(ids.begin(), ids.end());
  return ids;
}

std::optional<int> Scene::free_offset(InstanceId receptacle) const {
  const Receptacle* r = find_receptacle(receptacle);
  if (r == nullptr) return std::nullopt;
  std::vector<char> taken(static_cast<std::size_t>(r->capacity), 0);
  for (const ObjectPlacement& o : objects) {
    if (o.receptacle == receptacle && o.offset >= 0 && o.offset < r->capacity) taken[o.offset] = 1;
  }
  for (int off = 0; off < r->capacity; ++off) {
    if (!taken[off]) return off;
  }
  return std::nullopt;
}

void validate_scene(const Scene& scene) {
  auto fail = [](const std::string& what) { throw InvalidInput("invalid scene: " + what); };
  if (scene.width <= 0 || scene.height <= 0) fail("non-positive dimensions");
  if (!std::is_sorted(scene.walls.begin(), scene.walls.end()) ||
      std::adjacent_find(scene.walls.begin(), scene.walls.end()) != scene.walls.end()) {
    fail("walls must be sorted and unique");
  }
  for (Cell w : scene.walls) {
    if (!scene.in_bounds(w)) fail("wall out of bounds");
  }
  std::set<Cell> receptacle_cells;
  for (std::size_t i = 0; i < scene.receptacles.size(); ++i) {
    const Receptacle& r = scene.receptacles[i];
    if (i > 0 && scene.receptacles[i - 1].id >= r.id) fail("receptacle ids must be sorted and unique");
    if (!scene.in_bounds(r.cell)) fail("receptacle " + std::to_string(r.id) + " out of bounds");
    if (scene.is_wall(r.cell)) fail("receptacle " + std::to_string(r.id) + " on a wall");
    if (!receptacle_cells.insert(r.cell).second) fail("two receptacles share a cell");
    if (r.capacity < 1) fail("receptacle " + std::to_string(r.id) + " has no capacity");
  }
  std::set<std::pair<InstanceId, int>> slots;
  for (std::size_t i = 0; i < scene.objects.size(); ++i) {
    const ObjectPlacement& o = scene.objects[i];
    if (i > 0 && scene.objects[i - 1].id >= o.id) fail("object ids must be sorted and unique");
    if (scene.find_receptacle(o.id) != nullptr) fail("object id collides with a receptacle id");
    const Receptacle* r = scene.find_receptacle(o.receptacle);
    if (r == nullptr) fail("object " + std::to_string(o.id) + " on unknown receptacle");
    if (o.offset < 0 || o.offset >= r->capacity) fail("object " + std::to_string(o.id) + " offset out of range");
    if (!slots.insert({o.receptacle, o.offset}).second) fail("two objects share a slot");
  }
  if (scene.held) {
    if (scene.find_object(*scene.held) != nullptr) fail("held object is also placed");
    if (scene.find_receptacle(*scene.held) != nullptr) fail("held id is a receptacle");
  }
  if (!scene.traversable(scene.start.cell)) fail("start pose is not traversable");
}

// ---------------------------------------------------------------------------
// Generation

namespace {

bool layout_ok(const Scene& scene) {
  std::vector<Cell> free;
  for (int y = 0; y < scene.height; ++y) {
    for (int x = 0; x < scene.width; ++x) {
      if (scene.traversable({x, y})) free.push_back({x, y});
    }
  }
  if (free.empty()) return false;
  if (reachable_cells(scene, free.front()).size() != free.size()) return false;
  for (const Receptacle& r : scene.receptacles) {
    bool touches = false;
    for (int h = 0; h < 4 && !touches; ++h) {
      touches = scene.traversable(add(r.cell, heading_step(static_cast<Heading>(h))));
    }
    if (!touches) return false;
  }
  return true;
}

}  // namespace

Scene generate_scene(const SceneConfig& config, std::uint64_t seed) {
  if (config.width < 2 || config.height < 2) throw InfeasibleRequest("grid must be at least 2x2");
  if (config.num_receptacles < 0 || config.num_objects < 0 || config.num_walls < 0) {
    throw InfeasibleRequest("counts must be non-negative");
  }
  if (config.capacity < 1) throw InfeasibleRequest("receptacle capacity must be positive");
  const long cells = static_cast<long>(config.width) * config.height;
  if (config.num_walls + config.num_receptacles + 1 > cells) {
    throw InfeasibleRequest("walls and receptacles do not fit the grid");
  }
  if (static_cast<long>(config.num_objects) > static_cast<long>(config.num_receptacles) * config.capacity) {
    throw InfeasibleRequest("not enough receptacle slots for the objects");
  }

  Rng rng(hash_seed({seed, 0x5ce7e}));
  std::vector<Cell> all;
  for (int y = 0; y < config.height; ++y) {
    for (int x = 0; x < config.width; ++x) all.push_back({x, y});
  }

  Scene scene;
  scene.width = config.width;
  scene.height = config.height;
  scene.seed = seed;

  bool found = false;
  for (int attempt = 0; attempt < 500 && !found; ++attempt) {
    rng.shuffle(all);
    scene.walls.assign(all.begin(), all.begin() + config.num_walls);
    std::sort(scene.walls.begin(), scene.walls.end());
    scene.receptacles.clear();
    for (int r = 0; r < config.num_receptacles; ++r) {
      scene.receptacles.push_back({r, all[static_cast<std::size_t>(config.num_walls + r)], config.capacity});
    }
    found = layout_ok(scene);
  }
  if (!found) throw InfeasibleRequest("could not find a connected layout for the requested counts");

  std::vector<std::pair<InstanceId, int>> slots;
  for (const Receptacle& r : scene.receptacles) {
    for (int off = 0; off < r.capacity; ++off) slots.emplace_back(r.id, off);
  }
  rng.shuffle(slots);
  for (int i = 0; i < config.num_objects; ++i) {
    scene.objects.push_back({config.num_receptacles + i, slots[static_cast<std::size_t>(i)].first,
                             slots[static_cast<std::size_t>(i)].second});
  }

  std::vector<Cell> free;
  for (Cell c : all) {
    if (scene.traversable(c)) free.push_back(c);
  }
  std::sort(free.begin(), free.end());
  scene.start.cell = free[rng.index(free.size())];
  scene.start.heading = static_cast<Heading>(rng.index(4));
  return scene;
}

// ---------------------------------------------------------------------------
// Visibility

namespace {

// A non-negative-denominator fraction for exact segment clipping.
struct Frac {
  long long num;
  long long den;
};

bool less(Frac a, Frac b) { return a.num * b.den < b.num * a.den; }

// Open parameter interval (lo, hi) on which coordinate p0 + t*d lies strictly
// inside (lower, lower + 2). Returns false if it never does.
bool axis_interval(long long p0, long long d, long long lower, Frac& lo, Frac& hi) {
  if (d == 0) {
    if (p0 > lower && p0 < lower + 2) {
      lo = {-1, 1};
      hi = {2, 1};
      return true;
    }
    return false;
  }
  Frac a{lower - p0, d};
  Frac b{lower + 2 - p0, d};
  if (d < 0) {
    a = {-a.num, -a.den};
    b = {-b.num, -b.den};
    std::swap(a, b);
  }
  lo = a;
  hi = b;
  return true;
}

bool segment_crosses_wall(Cell from, Cell to, Cell wall) {
  // Doubled coordinates keep cell centers and edges integral.
  const long long x0 = 2LL * from.x + 1;
  const long long y0 = 2LL * from.y + 1;
  const long long dx = 2LL * (to.x - from.x);
  const long long dy = 2LL * (to.y - from.y);
  Frac lx{}, hx{}, ly{}, hy{};
  if (!axis_interval(x0, dx, 2LL * wall.x, lx, hx)) return false;
  if (!axis_interval(y0, dy, 2LL * wall.y, ly, hy)) return false;
  Frac lo{0, 1};
  Frac hi{1, 1};
  if (less(lo, lx)) lo = lx;
  if (less(lo, ly)) lo = ly;
  if (less(hx, hi)) hi = hx;
  if (less(hy, hi)) hi = hy;
  return less(lo, hi);
}

// Viewer-relative coordinates of `target`.
void relative(const AgentPose& pose, Cell target, int& forward, int& lateral) {
  const Cell f = heading_step(pose.heading);
  const Cell r = heading_step(rotate_right(pose.heading));
  const int dx = target.x - pose.cell.x;
  const int dy = target.y - pose.cell.y;
  forward = dx * f.x + dy * f.y;
  lateral = dx * r.x + dy * r.y;
}

Cell absolute(const AgentPose& pose, int forward, int lateral) {
  const Cell f = heading_step(pose.heading);
  const Cell r = heading_step(rotate_right(pose.heading));
  return {pose.cell.x + forward * f.x + lateral * r.x, pose.cell.y + forward * f.y + lateral * r.y};
}

void append_receptacle(const Scene& scene, const Receptacle& r, Region region, std::uint64_t frame,
                       Observation& obs) {
  region.slot = -1;
  obs.detections.push_back({frame, region, r.id});
  std::vector<ObjectPlacement> on;
  for (const ObjectPlacement& o : scene.objects) {
    if (o.receptacle == r.id) on.push_back(o);
  }
  std::sort(on.begin(), on.end(), [](const auto& a, const auto& b) { return a.offset < b.offset; });
  for (const ObjectPlacement& o : on) {
    region.slot = o.offset;
    obs.detections.push_back({frame, region, o.id});
  }
}

}  // namespace

bool cell_visible(const Scene& scene, const AgentPose& pose, Cell target, const ViewParams& view) {
  if (!scene.in_bounds(target)) return false;
  int forward = 0;
  int lateral = 0;
  relative(pose, target, forward, lateral);
  if (forward < 1 || forward > view.depth || std::abs(lateral) > view.half_width) return false;
  const int min_x = std::min(pose.cell.x, target.x);
  const int max_x = std::max(pose.cell.x, target.x);
  const int min_y = std::min(pose.cell.y, target.y);
  const int max_y = std::max(pose.cell.y, target.y);
  for (Cell w : scene.walls) {
    if (w == target || w.x < min_x || w.x > max_x || w.y < min_y || w.y > max_y) continue;
    if (segment_crosses_wall(pose.cell, target, w)) return false;
  }
  return true;
}

Observation observe(const Scene& scene, const AgentPose& pose, std::uint64_t frame, const ViewParams& view) {
  Observation obs;
  obs.pose = pose;
  obs.frame = frame;
  for (int forward = 1; forward <= view.depth; ++forward) {
    for (int lateral = -view.half_width; lateral <= view.half_width; ++lateral) {
      const Cell c = absolute(pose, forward, lateral);
      if (!scene.in_bounds(c)) continue;
      const Receptacle* r = scene.receptacle_at(c);
      if (r == nullptr || !cell_visible(scene, pose, c, view)) continue;
      append_receptacle(scene, *r, Region{forward, lateral, -1}, frame, obs);
    }
  }
  return obs;
}

Observation observe_all(const Scene& scene, std::uint64_t frame) {
  Observation obs;
  obs.pose = scene.start;
  obs.frame = frame;
  for (const Receptacle& r : scene.receptacles) append_receptacle(scene, r, Region{}, frame, obs);
  return obs;
}

std::optional<InstanceId> receptacle_in_view(const Scene& scene, const AgentPose& pose, int forward,
                                             int lateral, const ViewParams& view) {
  const Cell c = absolute(pose, forward, lateral);
  const Receptacle* r = scene.in_bounds(c) ? scene.receptacle_at(c) : nullptr;
  if (r == nullptr || !cell_visible(scene, pose, c, view)) return std::nullopt;
  return r->id;
}

// ---------------------------------------------------------------------------
// Dynamics

StepResult step(const Scene& scene, const AgentPose& pose, const Action& action) {
  StepResult out{pose, scene, StepStatus::Failed};
  if (action.is_navigation() && action.target != -1) {
    throw InvalidInput("navigation action carries a target: " + to_string(action));
  }

  auto try_move = [&](Heading direction) {
    const Cell next = add(pose.cell, heading_step(direction));
    if (!scene.traversable(next)) return;
    out.pose.cell = next;
    out.status = StepStatus::Ok;
  };

  switch (action.type) {
    case ActionType::MoveForward: try_move(pose.heading); break;
    case ActionType::MoveBack: try_move(rotate_right(rotate_right(pose.heading))); break;
    case ActionType::MoveLeft: try_move(rotate_left(pose.heading)); break;
    case ActionType::MoveRight: try_move(rotate_right(pose.heading)); break;
    case ActionType::RotateLeft:
      out.pose.heading = rotate_left(pose.heading);
      out.status = StepStatus::Ok;
      break;
    case ActionType::RotateRight:
      out.pose.heading = rotate_right(pose.heading);
      out.status = StepStatus::Ok;
      break;
    case ActionType::PickUp: {
      if (!scene.is_object(action.target)) throw InvalidInput("PickUp of unknown object " + std::to_string(action.target));
      if (scene.held) break;
      const Observation obs = observe(scene, pose);
      const bool seen = std::any_of(obs.detections.begin(), obs.detections.end(),
                                    [&](const Detection& d) { return d.instance_id == action.target; });
      if (!seen) break;
      auto& objs = out.scene.objects;
      objs.erase(std::remove_if(objs.begin(), objs.end(), [&](const ObjectPlacement& o) { return o.id == action.target; }),
                 objs.end());
      out.scene.held = action.target;
      out.status = StepStatus::Ok;
      break;
    }
    case ActionType::Place: {
      const Receptacle* r = scene.find_receptacle(action.target);
      if (r == nullptr) throw InvalidInput("Place on unknown receptacle " + std::to_string(action.target));
      if (!scene.held || !cell_visible(scene, pose, r->cell)) break;
      const std::optional<int> offset = scene.free_offset(r->id);
      if (!offset) break;
      auto& objs = out.scene.objects;
      objs.push_back({*scene.held, r->id, *offset});
      std::sort(objs.begin(), objs.end());
      out.scene.held.reset();
      out.status = StepStatus::Ok;
      break;
    }
  }
  if (out.status == StepStatus::Failed) {
    out.pose = pose;
    out.scene = scene;
  }
  return out;
}

ShuffleResult shuffle(const Scene& scene, int k, std::uint64_t seed) {
  if (k < 1 || k > 5) throw InfeasibleRequest("shuffle count must be in [1, 5]");
  if (scene.receptacles.size() < 2) throw InfeasibleRequest("shuffle needs at least two receptacles");
  if (static_cast<std::size_t>(k) > scene.objects.size()) {
    throw InfeasibleRequest("shuffle count exceeds the number of placed objects");
  }

  Rng rng(hash_seed({seed, 0x5401f1e}));
  std::vector<InstanceId> ids;
  for (const ObjectPlacement& o : scene.objects) ids.push_back(o.id);
  rng.shuffle(ids);
  ids.resize(static_cast<std::size_t>(k));
  std::sort(ids.begin(), ids.end());

  ShuffleResult out{scene, ids};
  for (InstanceId id : ids) {
    const InstanceId original = scene.find_object(id)->receptacle;
    std::vector<InstanceId> candidates;
    for (const Receptacle& r : out.scene.receptacles) {
      if (r.id != original && out.scene.free_offset(r.id)) candidates.push_back(r.id);
    }
    if (candidates.empty()) {
      throw InfeasibleRequest("no free receptacle to move object " + std::to_string(id) + " to");
    }
    const InstanceId target = candidates[rng.index(candidates.size())];
    const int offset = *out.scene.free_offset(target);
    for (ObjectPlacement& o : out.scene.objects) {
      if (o.id == id) {
        o.receptacle = target;
        o.offset = offset;
      }
    }
  }
  return out;
}

std::vector<InstanceId> moved_objects(const Scene& before, const Scene& after) {
  std::vector<InstanceId> moved;
  for (InstanceId id : before.object_ids()) {
    const ObjectPlacement* a = before.find_object(id);
    const ObjectPlacement* b = after.find_object(id);
    if (a == nullptr || b == nullptr || a->receptacle != b->receptacle) moved.push_back(id);
  }
  return moved;
}

}  // namespace csr
