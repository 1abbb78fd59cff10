#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <unordered_map>
#include <variant>
#include <vector>

#include "normrl/common.hpp"

namespace normrl {

/// Equivalence-class tag of a state variable.
enum class VarKind : uint8_t { Active, UsedObj, Position, Near, Has, Executed };

std::string to_string(VarKind k);
VarKind var_kind_from_string(const std::string& s);

/// monostate = "none" (no object used, entity absent from the board).
using Value = std::variant<std::monostate, bool, std::string, Cell>;

bool value_matches_kind(VarKind kind, const Value& v);
Value default_value(VarKind kind);  // false for boolean kinds, none otherwise

/// A state variable, identified by kind + subject entities.
/// active/usedObj/executed: (behavior, agent); position: (entity);
/// near/has: (agent, object).
struct StateVariable {
  VarKind kind = VarKind::Active;
  std::vector<std::string> subject;

  std::string key() const;  // stable string key, also used as map index
  friend bool operator==(const StateVariable&, const StateVariable&) = default;
};

StateVariable active_var(const std::string& behavior, const std::string& agent);
StateVariable used_obj_var(const std::string& behavior, const std::string& agent);
StateVariable position_var(const std::string& entity);
StateVariable near_var(const std::string& agent, const std::string& object);
StateVariable has_var(const std::string& agent, const std::string& object);
StateVariable executed_var(const std::string& behavior, const std::string& agent);

using Assignment = std::pair<StateVariable, Value>;

/// Maximal run of one constant value: value holds on [t_begin, t_end].
struct Run {
  int t_begin = 0;
  int t_end = 0;
  Value value;
};

struct Track {
  StateVariable var;
  std::vector<Run> runs;  // contiguous, non-overlapping, adjacent runs differ
};

/// Time-indexed record of the domain state, one run-length track per state
/// variable. Time is the environment step counter; the covered interval is
/// [0, t_now]. Append-only: recorded values never change.
///
/// A variable first assigned at t > 0 is backfilled with its kind default, so
/// an untracked variable reads as constantly false/none.
class Trajectory {
 public:
  bool empty() const { return t_now_ < 0; }
  int t_start() const { return 0; }
  int t_now() const { return t_now_; }
  int length() const { return t_now_ + 1; }

  /// Extends the trajectory to the next time point. Variables missing from
  /// `assignments` keep their previous value. Throws Error on a value/kind
  /// type mismatch or a duplicate assignment within one step.
  void record_step(const std::vector<Assignment>& assignments);

  /// Value of the run containing t; throws on unknown variable or t outside
  /// [0, t_now].
  const Value& value_at(const StateVariable& var, int t) const;

  /// Like value_at but an untracked variable reads as its kind default.
  Value value_or_default(const StateVariable& var, int t) const;

  /// Ascending times where active(behavior, agent) is true; empty when the
  /// variable was never tracked.
  std::vector<int> activation_times(const std::string& behavior, const std::string& agent) const;

  bool tracked(const StateVariable& var) const;
  size_t run_count(const StateVariable& var) const;
  std::vector<const Track*> tracks() const;  // sorted by key

 private:
  const Track* find(const StateVariable& var) const;
  void append(const StateVariable& var, const Value& v, int t);

  int t_now_ = -1;
  std::unordered_map<std::string, Track> tracks_;
};

// JSON-lines trace files: one object per step,
// {"t": N, "assignments": [{"kind": ..., "subject": [...], "value": ...}]}.
// Unchanged variables may be omitted from later steps.
void export_trace(const Trajectory& traj, std::ostream& out);
Trajectory import_trace(std::istream& in);  // ParseError with line numbers

}  // namespace normrl
