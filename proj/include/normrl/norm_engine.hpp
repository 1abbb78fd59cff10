#pragma once

#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "normrl/institution.hpp"
#include "normrl/trajectory.hpp"

namespace normrl {

enum class NormState : uint8_t { Fulfilled = 0, Violated = 1, Neutral = 2 };

char to_char(NormState s);
std::string to_string(NormState s);

struct EngineOptions {
  /// When true, a use-family activation with a non-grounded object counts as
  /// a violation instead of staying neutral.
  bool strict_use = false;
  /// Chebyshev tolerance for positional (at) fulfillment; 0 = same cell.
  int at_tolerance = 0;
};

/// A norm triple with its grounding projections resolved.
struct GroundedTriple {
  std::vector<std::string> agents;     // A_role
  std::vector<std::string> behaviors;  // B_act
  std::vector<std::string> objects;    // O_art

  /// A norm over an unresolvable triple stays neutral forever.
  bool inert() const { return agents.empty() || behaviors.empty(); }
};

GroundedTriple resolve_triple(const Triple& t, const Grounding& g, const Institution& inst);

/// Evaluates a norm against a complete trajectory, directly from the
/// fulfillment/violation trajectory-set definitions (full scan, no
/// incremental state). Pure; returns exactly one state.
NormState oracle_eval(const Norm& norm, const Trajectory& traj, const Grounding& g,
                      const Institution& inst, const EngineOptions& opts = {});

/// Incremental evaluator for one norm. step() must be called exactly once per
/// recorded trajectory step, in order; it inspects only the newest time point
/// and keeps a constant-size progress summary per qualifier.
class NormMonitor {
 public:
  NormMonitor(const Norm& norm, const Grounding& g, const Institution& inst,
              EngineOptions opts = {});

  /// Evaluates the next unprocessed time point of the trajectory and returns
  /// (previous, current). The monitor works strictly sequentially; it throws
  /// Error when asked to step past the recorded data.
  std::pair<NormState, NormState> step(const Trajectory& traj);

  NormState current() const { return current_; }
  NormState previous() const { return previous_; }
  const Norm& norm() const { return norm_; }
  const std::vector<std::string>& warnings() const { return warnings_; }
  void reset();

 private:
  struct SideProgress {
    std::set<std::string> satisfied_agents;  // must / mustUse / mustAt
    bool any_activation = false;
    bool all_used_grounded = true;  // use: no activation with a foreign object yet
    std::optional<int> first_activation;
    std::optional<int> last_activation;
  };

  bool side_active_now(const Trajectory& traj, int side, int t) const;
  void update_side(const Trajectory& traj, int side, int t);
  NormState evaluate() const;

  Norm norm_;
  EngineOptions opts_;
  std::vector<GroundedTriple> grounded_;
  std::vector<std::string> warnings_;
  bool inert_ = false;

  int next_t_ = 0;
  NormState previous_ = NormState::Neutral;
  NormState current_ = NormState::Neutral;
  SideProgress side_[2];
  bool equals_matched_ = false;
  bool equals_diverged_ = false;
  bool use_violated_ = false;
};

/// All monitors of one institution, stepped together.
class InstitutionMonitor {
 public:
  InstitutionMonitor(const Institution& inst, const Grounding& g, EngineOptions opts = {});

  /// One (previous, current) pair per norm, in institution norm order.
  std::vector<std::pair<NormState, NormState>> step(const Trajectory& traj);

  std::vector<NormState> currents() const;
  size_t size() const { return monitors_.size(); }
  const NormMonitor& monitor(size_t i) const { return monitors_[i]; }
  std::vector<std::string> warnings() const;
  void reset();

 private:
  std::vector<NormMonitor> monitors_;
};

/// True iff every norm of the institution evaluates to fulfilled on the full
/// trajectory. An empty trajectory adheres to nothing.
bool adheres(const Institution& inst, const Trajectory& traj, const Grounding& g,
             const EngineOptions& opts = {});

}  // namespace normrl
