#include <algorithm>
#include <deque>
#include <limits>
#include <map>

#include "csr/errors.hpp"
#include "csr/world.hpp"

namespace csr {
namespace {

constexpr Heading kHeadings[] = {Heading::North, Heading::East, Heading::South, Heading::West};

Cell add(Cell a, Cell b) { return {a.x + b.x, a.y + b.y}; }

std::size_t cell_index(const Scene& scene, Cell c) {
  return static_cast<std::size_t>(c.y) * static_cast<std::size_t>(scene.width) + static_cast<std::size_t>(c.x);
}

// Breadth-first distances and parents over traversable cells.
struct CellBfs {
  std::vector<int> dist;
  std::vector<Cell> parent;
};

CellBfs bfs_cells(const Scene& scene, Cell from) {
  const std::size_t n = static_cast<std::size_t>(scene.width) * static_cast<std::size_t>(scene.height);
  CellBfs out{std::vector<int>(n, -1), std::vector<Cell>(n)};
  if (!scene.traversable(from)) return out;
  std::deque<Cell> queue{from};
  out.dist[cell_index(scene, from)] = 0;
  while (!queue.empty()) {
    const Cell c = queue.front();
    queue.pop_front();
    for (Heading h : kHeadings) {
      const Cell next = add(c, heading_step(h));
      if (!scene.traversable(next) || out.dist[cell_index(scene, next)] >= 0) continue;
      out.dist[cell_index(scene, next)] = out.dist[cell_index(scene, c)] + 1;
      out.parent[cell_index(scene, next)] = c;
      queue.push_back(next);
    }
  }
  return out;
}

std::vector<Cell> path_to(const Scene& scene, const CellBfs& bfs, Cell from, Cell to) {
  std::vector<Cell> path;
  for (Cell c = to; c != from; c = bfs.parent[cell_index(scene, c)]) path.push_back(c);
  std::reverse(path.begin(), path.end());
  return path;
}

// Relative move actions that walk `path` without turning.
void append_moves(AgentPose& pose, const std::vector<Cell>& path, std::vector<Action>& actions) {
  for (Cell next : path) {
    const Cell d{next.x - pose.cell.x, next.y - pose.cell.y};
    if (d == heading_step(pose.heading)) {
      actions.push_back(Action::move_forward());
    } else if (d == heading_step(rotate_right(pose.heading))) {
      actions.push_back(Action::move_right());
    } else if (d == heading_step(rotate_left(pose.heading))) {
      actions.push_back(Action::move_left());
    } else {
      actions.push_back(Action::move_back());
    }
    pose.cell = next;
  }
}

// Fewest turns that bring `location` into view; nullopt if no heading does.
std::optional<std::vector<Action>> turns_to_see(const Scene& scene, const AgentPose& pose, Cell location,
                                                const ViewParams& view) {
  const Heading right = rotate_right(pose.heading);
  const Heading left = rotate_left(pose.heading);
  if (cell_visible(scene, pose, location, view)) return std::vector<Action>{};
  if (cell_visible(scene, {pose.cell, right}, location, view)) return std::vector<Action>{Action::rotate_right()};
  if (cell_visible(scene, {pose.cell, left}, location, view)) return std::vector<Action>{Action::rotate_left()};
  if (cell_visible(scene, {pose.cell, rotate_right(right)}, location, view)) {
    return std::vector<Action>{Action::rotate_right(), Action::rotate_right()};
  }
  return std::nullopt;
}

std::optional<Cell> viewpoint_for(const Scene& scene, const std::vector<Cell>& reachable, Cell location,
                                  const ViewParams& view) {
  std::optional<Cell> best;
  long best_d2 = std::numeric_limits<long>::max();
  for (Cell c : reachable) {
    bool sees = false;
    for (Heading h : kHeadings) sees = sees || cell_visible(scene, {c, h}, location, view);
    if (!sees) continue;
    const long dx = c.x - location.x;
    const long dy = c.y - location.y;
    const long d2 = dx * dx + dy * dy;
    if (d2 < best_d2 || (d2 == best_d2 && std::pair(c.y, c.x) < std::pair(best->y, best->x))) {
      best = c;
      best_d2 = d2;
    }
  }
  return best;
}

Cell object_location(const Scene& scene, InstanceId id, const char* which) {
  const ObjectPlacement* o = scene.find_object(id);
  if (o == nullptr) {
    throw InvalidInput("object " + std::to_string(id) + " is not placed in the " + which + " scene");
  }
  return scene.find_receptacle(o->receptacle)->cell;
}

}  // namespace

std::vector<Cell> reachable_cells(const Scene& scene, Cell from) {
  if (!scene.traversable(from)) return {};
  std::vector<Cell> out{from};
  std::vector<char> seen(static_cast<std::size_t>(scene.width) * static_cast<std::size_t>(scene.height), 0);
  seen[cell_index(scene, from)] = 1;
  for (std::size_t i = 0; i < out.size(); ++i) {
    for (Heading h : kHeadings) {
      const Cell next = add(out[i], heading_step(h));
      if (!scene.traversable(next) || seen[cell_index(scene, next)]) continue;
      seen[cell_index(scene, next)] = 1;
      out.push_back(next);
    }
  }
  return out;
}

ExplorationPlan heuristic_explore(const Scene& before, const Scene& after, const std::vector<InstanceId>& moved,
                                  const AgentPose& start, Phase phase, const ViewParams& view) {
  if (!before.traversable(start.cell)) throw InvalidInput("exploration start is not traversable");
  const std::vector<Cell> reachable = reachable_cells(before, start.cell);

  std::vector<Waypoint> pending;
  for (InstanceId id : moved) {
    for (Cell location : {object_location(before, id, "walkthrough"), object_location(after, id, "unshuffle")}) {
      const std::optional<Cell> vp = viewpoint_for(before, reachable, location, view);
      if (!vp) throw InfeasibleRequest("object " + std::to_string(id) + " cannot be observed from any reachable cell");
      pending.push_back({id, location, *vp});
    }
  }

  ExplorationPlan plan;
  Cell current = start.cell;
  while (!pending.empty()) {
    const CellBfs bfs = bfs_cells(before, current);
    std::size_t best = 0;
    for (std::size_t i = 1; i < pending.size(); ++i) {
      if (bfs.dist[cell_index(before, pending[i].viewpoint)] < bfs.dist[cell_index(before, pending[best].viewpoint)]) {
        best = i;
      }
    }
    current = pending[best].viewpoint;
    plan.waypoints.push_back(pending[best]);
    pending.erase(pending.begin() + static_cast<std::ptrdiff_t>(best));
  }
  if (phase == Phase::Unshuffle) std::reverse(plan.waypoints.begin(), plan.waypoints.end());

  AgentPose pose = start;
  for (const Waypoint& w : plan.waypoints) {
    const CellBfs bfs = bfs_cells(before, pose.cell);
    append_moves(pose, path_to(before, bfs, pose.cell, w.viewpoint), plan.actions);
    const std::optional<std::vector<Action>> turns = turns_to_see(before, pose, w.location, view);
    if (!turns) throw InfeasibleRequest("viewpoint does not see its location");
    for (const Action& turn : *turns) {
      plan.actions.push_back(turn);
      pose.heading = turn.type == ActionType::RotateLeft ? rotate_left(pose.heading) : rotate_right(pose.heading);
    }
  }
  return plan;
}

std::vector<Action> coverage_explore(const Scene& scene, const AgentPose& start, const ViewParams& view) {
  if (!scene.traversable(start.cell)) throw InvalidInput("exploration start is not traversable");
  const std::size_t cells = static_cast<std::size_t>(scene.width) * static_cast<std::size_t>(scene.height);
  auto pose_index = [&](const AgentPose& p) { return cell_index(scene, p.cell) * 4 + static_cast<std::size_t>(p.heading); };

  // Cells each pose can see, and the union over all reachable poses.
  std::map<std::size_t, std::vector<std::size_t>> visible;
  std::vector<char> target(cells, 0);
  for (Cell c : reachable_cells(scene, start.cell)) {
    for (Heading h : kHeadings) {
      const AgentPose p{c, h};
      std::vector<std::size_t>& seen = visible[pose_index(p)];
      for (int y = 0; y < scene.height; ++y) {
        for (int x = 0; x < scene.width; ++x) {
          if (!scene.is_wall({x, y}) && cell_visible(scene, p, {x, y}, view)) {
            seen.push_back(cell_index(scene, {x, y}));
            target[seen.back()] = 1;
          }
        }
      }
    }
  }

  std::vector<char> seen(cells, 0);
  std::size_t remaining = static_cast<std::size_t>(std::count(target.begin(), target.end(), 1));
  auto look = [&](const AgentPose& p) {
    for (std::size_t c : visible[pose_index(p)]) {
      if (!seen[c]) {
        seen[c] = 1;
        --remaining;
      }
    }
  };
  auto reveals = [&](const AgentPose& p) {
    const auto& v = visible[pose_index(p)];
    return std::any_of(v.begin(), v.end(), [&](std::size_t c) { return !seen[c]; });
  };

  const std::vector<Action> moves = {Action::move_forward(), Action::move_back(),   Action::move_left(),
                                     Action::move_right(),   Action::rotate_left(), Action::rotate_right()};
  std::vector<Action> actions;
  AgentPose pose = start;
  look(pose);
  while (remaining > 0) {
    // Breadth-first over poses to the first one that shows something new.
    std::vector<int> parent(cells * 4, -2);
    std::vector<int> via(cells * 4, -1);
    std::vector<AgentPose> order{pose};
    parent[pose_index(pose)] = -1;
    std::optional<AgentPose> goal;
    for (std::size_t i = 0; i < order.size() && !goal; ++i) {
      for (std::size_t a = 0; a < moves.size(); ++a) {
        const StepResult r = step(scene, order[i], moves[a]);
        if (r.status != StepStatus::Ok || parent[pose_index(r.pose)] != -2) continue;
        parent[pose_index(r.pose)] = static_cast<int>(pose_index(order[i]));
        via[pose_index(r.pose)] = static_cast<int>(a);
        order.push_back(r.pose);
        if (reveals(r.pose)) {
          goal = r.pose;
          break;
        }
      }
    }
    if (!goal) break;  // nothing left that a reachable pose can reveal

    std::vector<std::size_t> chain;
    for (int idx = static_cast<int>(pose_index(*goal)); parent[idx] != -1; idx = parent[idx]) {
      chain.push_back(static_cast<std::size_t>(idx));
    }
    std::reverse(chain.begin(), chain.end());
    for (std::size_t idx : chain) {
      actions.push_back(moves[static_cast<std::size_t>(via[idx])]);
      pose = AgentPose{{static_cast<int>((idx / 4) % static_cast<std::size_t>(scene.width)),
                        static_cast<int>((idx / 4) / static_cast<std::size_t>(scene.width))},
                       static_cast<Heading>(idx % 4)};
      look(pose);
    }
  }
  return actions;
}

}  // namespace csr
