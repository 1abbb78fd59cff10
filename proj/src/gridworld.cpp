#include "normrl/gridworld.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <sstream>

namespace normrl {

namespace {

const char* kBehaviors[] = {"pick", "transfer", "exit", "receive_payment", "lift", "leave"};

std::string pair_key(const std::string& a, const std::string& b) { return a + "|" + b; }

Cell add(Cell a, Cell b) { return {a.col + b.col, a.row + b.row}; }
Cell sub(Cell a, Cell b) { return {a.col - b.col, a.row - b.row}; }

Orientation rotate(Orientation o, int quarter_turns) {
  return static_cast<Orientation>((static_cast<int>(o) + quarter_turns + 4) % 4);
}

}  // namespace

bool known_behavior(const std::string& b) {
  for (const char* k : kBehaviors)
    if (b == k) return true;
  return false;
}

bool grab_behavior(const std::string& b) { return b == "pick" || b == "lift"; }

WorldLayout WorldLayout::store_small() {
  WorldLayout w;
  w.width = 9;
  w.height = 9;
  for (int c = 0; c < w.width; ++c) {
    w.walls.insert({c, 0});
    w.walls.insert({c, w.height - 1});
  }
  for (int r = 0; r < w.height; ++r) {
    w.walls.insert({0, r});
    w.walls.insert({w.width - 1, r});
  }
  w.shelf_cells = {{2, 1}, {4, 1}, {6, 1}};
  w.markers = {{"register", {4, 5}}, {"door", {4, 7}}};
  w.items = {"battery", "axe", "drill"};
  w.agents = {{"robby", {4, 2}, Orientation::North, 1},
              {"kobby", {6, 5}, Orientation::North, 1}};
  w.door_marker = "door";
  w.max_episode_steps = 300;
  return w;
}

WorldLayout WorldLayout::store_full() {
  WorldLayout w;
  w.width = 11;
  w.height = 11;
  for (int c = 0; c < w.width; ++c) {
    w.walls.insert({c, 0});
    w.walls.insert({c, w.height - 1});
  }
  for (int r = 0; r < w.height; ++r) {
    w.walls.insert({0, r});
    w.walls.insert({w.width - 1, r});
  }
  for (int c = 1; c <= 9; ++c) w.shelf_cells.push_back({c, 1});
  w.shelf_cells.push_back({1, 2});
  w.shelf_cells.push_back({3, 2});
  w.shelf_cells.push_back({5, 2});
  w.shelf_cells.push_back({7, 2});
  w.markers = {{"register", {5, 6}}, {"door", {5, 9}}};
  w.items = {"battery", "drill", "axe", "screwdriver", "hammer", "saw", "wrench",
             "pliers", "tape", "glue", "rope", "bucket", "lamp"};
  w.agents = {{"robby", {5, 3}, Orientation::North, 1},
              {"kobby", {7, 6}, Orientation::North, 1}};
  w.door_marker = "door";
  w.max_episode_steps = 300;
  return w;
}

WorldLayout WorldLayout::factory(bool static_items) {
  WorldLayout w;
  w.width = 13;
  w.height = 13;
  for (int c = 0; c < w.width; ++c) {
    w.walls.insert({c, 0});
    w.walls.insert({c, w.height - 1});
  }
  for (int r = 0; r < w.height; ++r) {
    w.walls.insert({0, r});
    w.walls.insert({w.width - 1, r});
  }
  w.markers = {{"hatch", {6, 5}}};
  w.agents = {{"forky", {6, 3}, Orientation::North, 2}};
  w.max_episode_steps = 300;
  if (static_items) {
    w.shelf_cells = {{4, 2}, {6, 2}, {8, 2}};
    w.items = {"box1", "box2", "box3"};
  } else {
    ConveyorSpec belt;
    for (int c = 1; c <= 11; ++c) belt.path.push_back({c, 2});
    belt.period = 2;
    belt.riders = {"box1", "box2", "box3"};
    belt.max_entry_delay = 24;
    w.conveyor = belt;
  }
  return w;
}

GridWorld::GridWorld(WorldLayout layout, uint64_t seed) : layout_(std::move(layout)) {
  if (layout_.items.size() > layout_.shelf_cells.size() && !layout_.items.empty())
    throw ConfigError("more items (" + std::to_string(layout_.items.size()) +
                      ") than shelf cells (" + std::to_string(layout_.shelf_cells.size()) + ")");
  for (const auto& a : layout_.agents)
    if (!walkable(a.spawn)) throw ConfigError("agent " + a.id + " spawns on a wall");
  for (const auto& [id, cell] : layout_.markers)
    if (!walkable(cell)) throw ConfigError("marker " + id + " placed on a wall");
  reset(seed);
}

void GridWorld::reset(uint64_t seed) {
  std::mt19937_64 rng(seed);
  t_ = 0;
  agents_.clear();
  objects_.clear();
  executed_.clear();
  active_last_step_.clear();
  used_last_step_.clear();
  near_state_.clear();
  assignments_.clear();

  for (const auto& spec : layout_.agents)
    agents_[spec.id] = AgentState{spec.spawn, spec.dir, std::nullopt, spec.act_period};

  for (const auto& [id, cell] : layout_.markers)
    objects_[id] = ObjectState{cell, false, false, 0};

  if (!layout_.items.empty()) {
    std::vector<Cell> cells = layout_.shelf_cells;
    std::shuffle(cells.begin(), cells.end(), rng);
    for (size_t i = 0; i < layout_.items.size(); ++i)
      objects_[layout_.items[i]] = ObjectState{cells[i], true, false, 0};
  }

  if (layout_.conveyor) {
    std::uniform_int_distribution<int> delay(0, layout_.conveyor->max_entry_delay);
    for (const auto& id : layout_.conveyor->riders) {
      ObjectState st;
      st.mobile = true;
      st.rider = true;
      st.entry_step = delay(rng);
      objects_[id] = st;
    }
  }

  // Initial assignments: positions of everything present, plus near flags.
  for (const auto& [id, st] : agents_) emit(position_var(id), st.pos);
  for (const auto& [id, st] : objects_)
    if (st.pos) emit(position_var(id), *st.pos);
  emit_near_updates();
}

void GridWorld::emit(const StateVariable& var, Value v) {
  assignments_.emplace_back(var, std::move(v));
}

const AgentState& GridWorld::agent(const std::string& id) const {
  auto it = agents_.find(id);
  if (it == agents_.end()) throw Error("unknown agent '" + id + "'");
  return it->second;
}

const ObjectState& GridWorld::object(const std::string& id) const {
  auto it = objects_.find(id);
  if (it == objects_.end()) throw Error("unknown object '" + id + "'");
  return it->second;
}

std::vector<std::string> GridWorld::agent_ids() const {
  std::vector<std::string> out;
  for (const auto& [id, st] : agents_) out.push_back(id);
  return out;
}

std::vector<std::string> GridWorld::object_ids() const {
  std::vector<std::string> out;
  for (const auto& [id, st] : objects_) out.push_back(id);
  return out;
}

bool GridWorld::executed(const std::string& behavior, const std::string& agent) const {
  auto it = executed_.find(pair_key(behavior, agent));
  return it != executed_.end() && it->second;
}

bool GridWorld::in_bounds(Cell c) const {
  return c.col >= 0 && c.col < layout_.width && c.row >= 0 && c.row < layout_.height;
}

bool GridWorld::wall_at(Cell c) const { return layout_.walls.count(c) > 0; }

bool GridWorld::agent_occupies(Cell c) const {
  for (const auto& [id, st] : agents_)
    if (st.pos == c) return true;
  return false;
}

const std::string* GridWorld::agent_at(Cell c, const std::string& exclude) const {
  for (const auto& [id, st] : agents_)
    if (id != exclude && st.pos == c) return &id;
  return nullptr;
}

const std::string* GridWorld::object_at(Cell c) const {
  for (const auto& [id, st] : objects_)
    if (st.pos && *st.pos == c) return &id;
  return nullptr;
}

const std::string* GridWorld::mobile_object_at(Cell c) const {
  for (const auto& [id, st] : objects_)
    if (st.mobile && st.pos && *st.pos == c) return &id;
  return nullptr;
}

void GridWorld::step(const std::map<std::string, BehaviorCommand>& commands) {
  for (const auto& [id, cmd] : commands) {
    if (!agents_.count(id)) throw Error("command for unknown agent '" + id + "'");
    if (cmd.kind == CommandKind::Invoke && !known_behavior(cmd.behavior))
      throw Error("unknown behavior '" + cmd.behavior + "'");
  }
  for (const auto& [id, st] : agents_)
    if (!commands.count(id)) throw Error("missing command for agent '" + id + "'");

  assignments_.clear();
  const int t_next = t_ + 1;
  std::set<std::string> active_now;
  std::set<std::string> used_now;  // non-none usedObj, closed out next step

  // Movement, in ascending agent-id order; losers of a cell conflict stay.
  for (auto& [id, st] : agents_) {
    const BehaviorCommand& cmd = commands.at(id);
    if (t_next % st.act_period != 0) continue;  // slow agents idle between act steps
    switch (cmd.kind) {
      case CommandKind::RotateLeft:
        st.dir = rotate(st.dir, -1);
        break;
      case CommandKind::RotateRight:
        st.dir = rotate(st.dir, 1);
        break;
      case CommandKind::MoveForward:
      case CommandKind::MoveBackward: {
        Cell delta = orientation_vector(st.dir);
        Cell target = cmd.kind == CommandKind::MoveForward ? add(st.pos, delta)
                                                           : sub(st.pos, delta);
        if (walkable(target) && !agent_occupies(target)) {
          st.pos = target;
          emit(position_var(id), st.pos);
        }
        break;
      }
      default:
        break;
    }
  }

  // Invocations.
  for (auto& [id, st] : agents_) {
    const BehaviorCommand& cmd = commands.at(id);
    if (cmd.kind != CommandKind::Invoke) continue;
    if (t_next % st.act_period != 0) continue;
    const std::string& b = cmd.behavior;
    emit(active_var(b, id), true);
    active_now.insert(pair_key(b, id));

    if (grab_behavior(b)) {
      const std::string* target = nullptr;
      if (!st.held) {
        target = mobile_object_at(st.pos);  // the cell underfoot wins
        if (!target) target = mobile_object_at(add(st.pos, orientation_vector(st.dir)));
      }
      if (target) {
        std::string obj = *target;
        st.held = obj;
        objects_[obj].pos.reset();
        emit(position_var(obj), std::monostate{});
        emit(used_obj_var(b, id), obj);
        emit(has_var(id, obj), true);
        used_now.insert(pair_key(b, id));
      }
      // An empty grab leaves usedObj at none: either untracked (defaults to
      // none) or closed out below after last step's grab.
    }

    bool perform = true;
    if (b == "exit") {
      perform = false;
      for (const auto& [mid, cell] : layout_.markers)
        if (mid == layout_.door_marker && agents_.at(id).pos == cell) perform = true;
    }
    std::string ekey = pair_key(b, id);
    if (perform && !executed_[ekey]) {
      executed_[ekey] = true;
      emit(executed_var(b, id), true);
    }
  }

  // Close out last step's pulses, except those re-triggered this step.
  for (const auto& key : active_last_step_) {
    if (active_now.count(key)) continue;
    auto bar = key.find('|');
    emit(active_var(key.substr(0, bar), key.substr(bar + 1)), false);
  }
  for (const auto& key : used_last_step_) {
    if (used_now.count(key)) continue;
    auto bar = key.find('|');
    emit(used_obj_var(key.substr(0, bar), key.substr(bar + 1)), std::monostate{});
  }

  // Conveyor: advance riders, then admit scheduled entries.
  if (layout_.conveyor && t_next % layout_.conveyor->period == 0) {
    const auto& belt = *layout_.conveyor;
    auto path_index = [&](Cell c) -> int {
      for (size_t i = 0; i < belt.path.size(); ++i)
        if (belt.path[i] == c) return static_cast<int>(i);
      return -1;
    };
    auto occupied_by_rider = [&](Cell c) {
      for (const auto& rid : belt.riders) {
        const auto& st = objects_.at(rid);
        if (st.pos && *st.pos == c) return true;
      }
      return false;
    };
    for (const auto& rid : belt.riders) {
      auto& st = objects_.at(rid);
      if (!st.pos) continue;
      int idx = path_index(*st.pos);
      if (idx < 0) continue;  // carried off the belt and dropped? not possible, but safe
      Cell next = belt.path[(idx + 1) % belt.path.size()];
      if (!occupied_by_rider(next)) {
        st.pos = next;
        emit(position_var(rid), next);
      }
    }
    for (const auto& rid : belt.riders) {
      auto& st = objects_.at(rid);
      if (st.pos) continue;
      bool was_taken = false;
      for (const auto& [aid, ast] : agents_)
        if (ast.held == rid) was_taken = true;
      if (!was_taken && t_next >= st.entry_step && !occupied_by_rider(belt.path.front())) {
        st.pos = belt.path.front();
        emit(position_var(rid), belt.path.front());
      }
    }
  }

  emit_near_updates();
  active_last_step_ = std::move(active_now);
  used_last_step_ = std::move(used_now);
  t_ = t_next;
}

void GridWorld::emit_near_updates() {
  for (const auto& [aid, ast] : agents_) {
    for (const auto& [oid, ost] : objects_) {
      bool near = ost.pos && chebyshev(ast.pos, *ost.pos) <= 1;
      std::string key = pair_key(aid, oid);
      auto it = near_state_.find(key);
      bool prev = it != near_state_.end() && it->second;
      if (near != prev) {
        near_state_[key] = near;
        emit(near_var(aid, oid), near);
      }
    }
  }
}

std::array<RayHit, 7> GridWorld::ray_sense(const std::string& agent_id) const {
  const AgentState& a = agent(agent_id);
  std::array<RayHit, 7> hits;
  Cell f = orientation_vector(a.dir);
  const double fx = f.col;
  const double fy = f.row;
  const int range = layout_.sense_range;

  for (int r = 0; r < 7; ++r) {
    const double angle = (r - 3) * 30.0 * M_PI / 180.0;
    const double ux = fx * std::cos(angle) - fy * std::sin(angle);
    const double uy = fx * std::sin(angle) + fy * std::cos(angle);
    RayHit hit;
    hit.kind = RayHit::Kind::None;
    hit.distance = range;
    const int d0 = (r == 3) ? 0 : 1;  // center ray senses the cell underfoot
    for (int d = d0; d <= range; ++d) {
      Cell c = {a.pos.col + static_cast<int>(std::lround(d * ux)),
                a.pos.row + static_cast<int>(std::lround(d * uy))};
      if (d > 0 && c == a.pos) continue;
      if (!in_bounds(c)) break;
      if (wall_at(c)) {
        hit = {RayHit::Kind::Wall, "wall", d};
        break;
      }
      if (const std::string* other = agent_at(c, agent_id)) {
        hit = {RayHit::Kind::Agent, *other, d};
        break;
      }
      if (const std::string* obj = object_at(c)) {
        hit = {RayHit::Kind::Object, *obj, d};
        break;
      }
    }
    hits[r] = hit;
  }
  return hits;
}

std::string GridWorld::render() const {
  std::ostringstream out;
  for (int row = 0; row < layout_.height; ++row) {
    for (int col = 0; col < layout_.width; ++col) {
      Cell c{col, row};
      char ch = '.';
      if (wall_at(c)) ch = '#';
      for (const auto& [id, st] : objects_)
        if (st.pos && *st.pos == c)
          ch = st.mobile ? 'o' : static_cast<char>(std::toupper(static_cast<unsigned char>(id[0])));
      for (const auto& [id, st] : agents_)
        if (st.pos == c)
          ch = static_cast<char>(std::toupper(static_cast<unsigned char>(id[0])));
      out << ch;
    }
    out << '\n';
  }
  return out.str();
}

}  // namespace normrl
