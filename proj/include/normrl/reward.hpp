#pragma once

#include <map>
#include <string>
#include <vector>

#include "normrl/institution.hpp"
#include "normrl/norm_engine.hpp"

namespace normrl {

/// Reward per (previous, current) norm-state transition; all 9 pairs present.
struct TransitionTable {
  double value[3][3] = {};  // [prev][curr]

  double& at(NormState prev, NormState curr) {
    return value[static_cast<int>(prev)][static_cast<int>(curr)];
  }
  double at(NormState prev, NormState curr) const {
    return value[static_cast<int>(prev)][static_cast<int>(curr)];
  }
  /// Only the neutral->fulfilled transition pays.
  static TransitionTable reward_entering_fulfilled(double amount);
};

enum class ShapingScheme : uint8_t {
  AdherenceOnly,
  TransitionTable,
  StopAfterViolation,     // scheme A
  RestartAfterViolation,  // scheme B
};

ShapingScheme scheme_from_string(const std::string& s);
std::string to_string(ShapingScheme s);

struct ShapingConfig {
  ShapingScheme scheme = ShapingScheme::AdherenceOnly;
  double per_norm_reward = 0.0;  // ignored unless auto_per_norm is false
  bool auto_per_norm = true;     // per-norm reward = 1 / |norms|
  double adherence_reward = 1.0;
  double step_penalty = 1e-4;
  TransitionTable table;  // used by the TransitionTable scheme only
};

enum class EpisodeControl : uint8_t { Continue, TerminateSuccess, TerminateViolation };

struct StepOutcome {
  double reward = 0.0;
  EpisodeControl control = EpisodeControl::Continue;
};

/// Per-step reward split into its components, for multi-agent distribution.
/// penalty is already signed (<= 0 normally).
struct ShapingBreakdown {
  std::vector<double> per_norm;
  double adherence_bonus = 0.0;
  double penalty = 0.0;
  EpisodeControl control = EpisodeControl::Continue;

  double total() const;
};

/// 1 iff every norm state is fulfilled (vacuously 1 for no norms).
double full_adherence_reward(const std::vector<NormState>& current);

/// Converts the per-step norm transitions into a reward and episode-control
/// signal. Owns per-episode state (violation latch, step counter); call
/// reset() between episodes.
class ShapingPolicy {
 public:
  ShapingPolicy(ShapingConfig cfg, size_t norm_count, int max_episode_steps);

  void reset();
  ShapingBreakdown step(const std::vector<std::pair<NormState, NormState>>& transitions);
  bool violation_latched() const { return latch_; }
  double per_norm_reward() const { return per_norm_reward_; }
  const ShapingConfig& config() const { return cfg_; }

 private:
  ShapingConfig cfg_;
  size_t norm_count_;
  int max_episode_steps_;
  double per_norm_reward_;
  bool latch_ = false;
  int steps_taken_ = 0;
};

/// Convenience single-scalar form of ShapingPolicy::step.
StepOutcome shaping_step(ShapingPolicy& policy,
                         const std::vector<std::pair<NormState, NormState>>& transitions);

/// Credits norm-derived rewards to agents through the role grounding: the
/// adherence bonus goes to every agent grounded to any role; each norm's
/// shaping reward goes to the agents whose grounded role appears in that
/// norm's triples. The step penalty is per-agent and not distributed here.
std::map<std::string, double> distribute_rewards(const ShapingBreakdown& breakdown,
                                                 const Institution& inst, const Grounding& g);

}  // namespace normrl
