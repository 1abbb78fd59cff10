#pragma once

#include <array>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "normrl/common.hpp"
#include "normrl/trajectory.hpp"

namespace normrl {

enum class CommandKind : uint8_t {
  MoveForward,
  MoveBackward,
  RotateLeft,
  RotateRight,
  Noop,
  Invoke
};

/// Commands are atomic: one per agent per step.
struct BehaviorCommand {
  CommandKind kind = CommandKind::Noop;
  std::string behavior;  // for Invoke

  static BehaviorCommand move_forward() { return {CommandKind::MoveForward, {}}; }
  static BehaviorCommand move_backward() { return {CommandKind::MoveBackward, {}}; }
  static BehaviorCommand rotate_left() { return {CommandKind::RotateLeft, {}}; }
  static BehaviorCommand rotate_right() { return {CommandKind::RotateRight, {}}; }
  static BehaviorCommand noop() { return {CommandKind::Noop, {}}; }
  static BehaviorCommand invoke(std::string b) { return {CommandKind::Invoke, std::move(b)}; }
};

/// The invocable behaviors the environments implement.
bool known_behavior(const std::string& b);
/// pick/lift take an object from the faced or current cell.
bool grab_behavior(const std::string& b);

struct AgentSpec {
  std::string id;
  Cell spawn;
  Orientation dir = Orientation::North;
  int act_period = 1;  // commands take effect every act_period-th step
};

struct ConveyorSpec {
  std::vector<Cell> path;  // riders advance along this cycle
  int period = 2;          // advance every `period` steps
  std::vector<std::string> riders;
  int max_entry_delay = 24;  // rider enters at a seeded step in [0, max_entry_delay]
};

/// Static description of a scenario board. Markers are immobile objects
/// (register, door, hatch); items are mobile objects shuffled over the shelf
/// cells at reset.
struct WorldLayout {
  int width = 9;
  int height = 9;
  std::set<Cell> walls;
  std::vector<Cell> shelf_cells;
  std::vector<std::pair<std::string, Cell>> markers;
  std::vector<std::string> items;
  std::vector<AgentSpec> agents;
  std::optional<ConveyorSpec> conveyor;
  int max_episode_steps = 300;
  int sense_range = 10;
  std::string door_marker;  // exit only registers as executed on this marker's cell

  static WorldLayout store_small();
  static WorldLayout store_full();
  static WorldLayout factory(bool static_items);
};

struct AgentState {
  Cell pos;
  Orientation dir = Orientation::North;
  std::optional<std::string> held;
  int act_period = 1;
};

struct ObjectState {
  std::optional<Cell> pos;  // absent objects (held, not yet entered) have none
  bool mobile = false;
  bool rider = false;
  int entry_step = 0;
};

struct RayHit {
  enum class Kind : uint8_t { None, Wall, Agent, Object };
  Kind kind = Kind::None;
  std::string entity;
  int distance = 0;
};

/// Deterministic discrete-grid environment with simultaneous stepping.
/// Movement resolves in ascending agent-id order (lower id wins conflicts),
/// then invocations, then conveyor advance. Emits the state-variable
/// assignments of each transition for trajectory recording.
class GridWorld {
 public:
  GridWorld(WorldLayout layout, uint64_t seed);

  /// Re-places items (seeded), respawns agents, t back to 0. The emitted
  /// assignments describe the initial state.
  void reset(uint64_t seed);

  /// Advances one step. Requires exactly one command per agent.
  void step(const std::map<std::string, BehaviorCommand>& commands);

  const std::vector<Assignment>& last_assignments() const { return assignments_; }

  /// 7 rays over the front semicircle at 30-degree spacing, ordered from
  /// -90 to +90 degrees relative to the facing direction. The center ray
  /// starts at the agent's own cell (distance 0), side rays at distance 1.
  std::array<RayHit, 7> ray_sense(const std::string& agent) const;

  int t() const { return t_; }
  int max_episode_steps() const { return layout_.max_episode_steps; }
  int width() const { return layout_.width; }
  int height() const { return layout_.height; }
  int sense_range() const { return layout_.sense_range; }
  const WorldLayout& layout() const { return layout_; }

  const AgentState& agent(const std::string& id) const;
  const ObjectState& object(const std::string& id) const;
  std::vector<std::string> agent_ids() const;   // ascending
  std::vector<std::string> object_ids() const;  // ascending
  bool executed(const std::string& behavior, const std::string& agent) const;

  bool in_bounds(Cell c) const;
  bool wall_at(Cell c) const;
  bool walkable(Cell c) const { return in_bounds(c) && !wall_at(c); }

  std::string render() const;  // ASCII board dump for debugging

 private:
  void emit(const StateVariable& var, Value v);
  void emit_near_updates();
  const std::string* object_at(Cell c) const;  // smallest mobile-or-marker id
  const std::string* mobile_object_at(Cell c) const;
  const std::string* agent_at(Cell c, const std::string& exclude) const;
  bool agent_occupies(Cell c) const;

  WorldLayout layout_;
  int t_ = 0;
  std::map<std::string, AgentState> agents_;
  std::map<std::string, ObjectState> objects_;
  std::map<std::string, bool> executed_;     // key behavior|agent
  std::set<std::string> active_last_step_;   // behavior|agent keys
  std::set<std::string> used_last_step_;     // behavior|agent keys with a used object
  std::map<std::string, bool> near_state_;   // key agent|object
  std::vector<Assignment> assignments_;
};

}  // namespace normrl
