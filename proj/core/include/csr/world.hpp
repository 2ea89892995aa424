#pragma once

// Deterministic 2D gridworld: a room of wall cells, receptacles (furniture
// cells that hold objects in numbered slots) and movable objects, plus an
// agent with relative moves, 90 degree turns, pick-up and place.
//
// Coordinates: x grows east, y grows south. Receptacle and wall cells are not
// traversable. Receptacles and objects share one instance-id space so that
// both can be detected and encoded.

#include <compare>
#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace csr {

using InstanceId = int;

struct Cell {
  int x = 0;
  int y = 0;
  auto operator<=>(const Cell&) const = default;
};

enum class Heading { North, East, South, West };

std::string_view to_string(Heading h);
Heading heading_from_string(std::string_view s);
Heading rotate_left(Heading h);
Heading rotate_right(Heading h);
/// Unit step for a heading (North = (0, -1)).
Cell heading_step(Heading h);

struct AgentPose {
  Cell cell;
  Heading heading = Heading::North;
  auto operator<=>(const AgentPose&) const = default;
};

/// Declaration order doubles as the planner's tie-break order.
enum class ActionType { MoveForward, MoveBack, MoveLeft, MoveRight, RotateLeft, RotateRight, PickUp, Place };

std::string_view to_string(ActionType t);
ActionType action_type_from_string(std::string_view s);

struct Action {
  ActionType type = ActionType::MoveForward;
  InstanceId target = -1;  // object for PickUp, receptacle for Place; -1 otherwise

  static Action move_forward() { return {ActionType::MoveForward, -1}; }
  static Action move_back() { return {ActionType::MoveBack, -1}; }
  static Action move_left() { return {ActionType::MoveLeft, -1}; }
  static Action move_right() { return {ActionType::MoveRight, -1}; }
  static Action rotate_left() { return {ActionType::RotateLeft, -1}; }
  static Action rotate_right() { return {ActionType::RotateRight, -1}; }
  static Action pick_up(InstanceId object) { return {ActionType::PickUp, object}; }
  static Action place(InstanceId receptacle) { return {ActionType::Place, receptacle}; }

  bool is_navigation() const { return type != ActionType::PickUp && type != ActionType::Place; }
  auto operator<=>(const Action&) const = default;
};

std::string to_string(const Action& a);

/// The navigation action that undoes `a` (MoveForward <-> MoveBack, ...);
/// nullopt for PickUp and Place.
std::optional<Action> inverse(const Action& a);

struct Receptacle {
  InstanceId id = 0;
  Cell cell;
  int capacity = 1;
  auto operator<=>(const Receptacle&) const = default;
};

struct ObjectPlacement {
  InstanceId id = 0;
  InstanceId receptacle = 0;
  int offset = 0;
  auto operator<=>(const ObjectPlacement&) const = default;
};

struct Scene {
  int width = 0;
  int height = 0;
  std::vector<Cell> walls;                 // sorted
  std::vector<Receptacle> receptacles;     // sorted by id
  std::vector<ObjectPlacement> objects;    // sorted by id; excludes the held object
  std::optional<InstanceId> held;          // object in the agent's hand
  AgentPose start;                         // room entry pose
  std::uint64_t seed = 0;

  bool in_bounds(Cell c) const { return c.x >= 0 && c.y >= 0 && c.x < width && c.y < height; }
  bool is_wall(Cell c) const;
  bool traversable(Cell c) const;
  const Receptacle* receptacle_at(Cell c) const;
  const Receptacle* find_receptacle(InstanceId id) const;
  const ObjectPlacement* find_object(InstanceId id) const;
  bool is_object(InstanceId id) const { return find_object(id) != nullptr || held == id; }
  /// Ids of all objects, including a held one, ascending.
  std::vector<InstanceId> object_ids() const;
  std::optional<int> free_offset(InstanceId receptacle) const;

  bool operator==(const Scene&) const = default;
};

/// Throws InvalidInput naming the first violated scene invariant.
void validate_scene(const Scene& scene);

struct SceneConfig {
  int width = 10;
  int height = 10;
  int num_receptacles = 4;
  int num_objects = 10;
  int capacity = 6;
  int num_walls = 6;
};

/// Deterministic in (config, seed). Throws InfeasibleRequest when the counts
/// cannot fit the grid.
Scene generate_scene(const SceneConfig& config, std::uint64_t seed);

enum class StepStatus { Ok, Failed };

struct StepResult {
  AgentPose pose;
  Scene scene;
  StepStatus status = StepStatus::Ok;
};

/// Applies one action. Blocked or disallowed actions return the inputs
/// unchanged with StepStatus::Failed. Throws InvalidInput for a malformed
/// action (unknown target id, or a target on a navigation action).
StepResult step(const Scene& scene, const AgentPose& pose, const Action& action);

struct ViewParams {
  int depth = 5;       // cells ahead
  int half_width = 2;  // cells to each side
};

/// Viewer-relative footprint of a detection: the receptacle cell in
/// (forward, lateral) coordinates, plus the slot for objects (-1 for the
/// receptacle itself).
struct Region {
  int forward = 0;
  int lateral = 0;
  int slot = -1;
  auto operator<=>(const Region&) const = default;
};

struct Detection {
  std::uint64_t frame = 0;  // observation the detection belongs to
  Region region;
  InstanceId instance_id = 0;  // ground truth; for the oracle encoder and evaluators only
  bool operator==(const Detection&) const = default;
};

struct Observation {
  AgentPose pose;
  std::uint64_t frame = 0;
  std::vector<Detection> detections;
};

/// True if `target` lies in the forward frustum of `pose` and the segment
/// between cell centers does not pass through the interior of a wall cell.
bool cell_visible(const Scene& scene, const AgentPose& pose, Cell target, const ViewParams& view = {});

/// Receptacles in view and the objects on them, in viewer scan order
/// (near to far, left to right, receptacle before its objects).
Observation observe(const Scene& scene, const AgentPose& pose, std::uint64_t frame = 0,
                    const ViewParams& view = {});

/// Every receptacle and object as if seen at once (dataset construction).
Observation observe_all(const Scene& scene, std::uint64_t frame = 0);

/// Receptacle whose cell sits at the given viewer-relative position, if any.
std::optional<InstanceId> receptacle_in_view(const Scene& scene, const AgentPose& pose, int forward,
                                             int lateral, const ViewParams& view = {});

struct ShuffleResult {
  Scene scene;
  std::vector<InstanceId> moved;  // ascending
};

/// Moves k distinct objects, each to a receptacle other than its current
/// one (lowest free slot). Deterministic in (scene, k, seed).
ShuffleResult shuffle(const Scene& scene, int k, std::uint64_t seed);

/// Ids of objects whose receptacle differs between two scenes.
std::vector<InstanceId> moved_objects(const Scene& before, const Scene& after);

enum class Phase { Walkthrough, Unshuffle };

struct Waypoint {
  InstanceId object = 0;
  Cell location;  // receptacle cell to look at
  Cell viewpoint;  // traversable cell it is observed from
  bool operator==(const Waypoint&) const = default;
};

struct ExplorationPlan {
  std::vector<Waypoint> waypoints;  // visiting order
  std::vector<Action> actions;
};

/// Privileged heuristic trajectory: for each moved object, the traversable
/// cell nearest (Euclidean) to its receptacle before and after the shuffle
/// from which that receptacle is visible. The walkthrough orders the 2n
/// waypoints greedily by path length from `start`; the unshuffle visits the
/// same list reversed. Paths are shortest 4-connected grid paths.
/// Throws InfeasibleRequest naming an object whose location cannot be seen.
ExplorationPlan heuristic_explore(const Scene& before, const Scene& after,
                                  const std::vector<InstanceId>& moved, const AgentPose& start,
                                  Phase phase, const ViewParams& view = {});

/// Non-privileged coverage trajectory using only the wall layout: repeatedly
/// moves to the nearest pose that reveals a not-yet-seen cell.
std::vector<Action> coverage_explore(const Scene& scene, const AgentPose& start,
                                     const ViewParams& view = {});

/// Reachable traversable cells, breadth-first from `from`.
std::vector<Cell> reachable_cells(const Scene& scene, Cell from);

}  // namespace csr
