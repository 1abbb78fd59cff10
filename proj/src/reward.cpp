#include "normrl/reward.hpp"

#include <cmath>

namespace normrl {

TransitionTable TransitionTable::reward_entering_fulfilled(double amount) {
  TransitionTable t;
  t.at(NormState::Neutral, NormState::Fulfilled) = amount;
  return t;
}

ShapingScheme scheme_from_string(const std::string& s) {
  if (s == "adherence_only") return ShapingScheme::AdherenceOnly;
  if (s == "transition_table") return ShapingScheme::TransitionTable;
  if (s == "A" || s == "stop_after_violation") return ShapingScheme::StopAfterViolation;
  if (s == "B" || s == "restart_after_violation") return ShapingScheme::RestartAfterViolation;
  throw ConfigError("unknown shaping scheme '" + s + "'");
}

std::string to_string(ShapingScheme s) {
  switch (s) {
    case ShapingScheme::AdherenceOnly: return "adherence_only";
    case ShapingScheme::TransitionTable: return "transition_table";
    case ShapingScheme::StopAfterViolation: return "A";
    case ShapingScheme::RestartAfterViolation: return "B";
  }
  return "?";
}

double ShapingBreakdown::total() const {
  double sum = adherence_bonus + penalty;
  for (double v : per_norm) sum += v;
  return sum;
}

double full_adherence_reward(const std::vector<NormState>& current) {
  for (NormState s : current)
    if (s != NormState::Fulfilled) return 0.0;
  return 1.0;
}

ShapingPolicy::ShapingPolicy(ShapingConfig cfg, size_t norm_count, int max_episode_steps)
    : cfg_(cfg), norm_count_(norm_count), max_episode_steps_(max_episode_steps) {
  if (cfg_.step_penalty < 0) throw ConfigError("step_penalty must be >= 0");
  if (max_episode_steps_ <= 0) throw ConfigError("max_episode_steps must be positive");
  per_norm_reward_ =
      cfg_.auto_per_norm ? (norm_count_ ? 1.0 / static_cast<double>(norm_count_) : 0.0)
                         : cfg_.per_norm_reward;
  if (!std::isfinite(per_norm_reward_)) throw ConfigError("per_norm_reward must be finite");
}

void ShapingPolicy::reset() {
  latch_ = false;
  steps_taken_ = 0;
}

ShapingBreakdown ShapingPolicy::step(
    const std::vector<std::pair<NormState, NormState>>& transitions) {
  if (transitions.size() != norm_count_)
    throw Error("shaping_step: got " + std::to_string(transitions.size()) + " transitions for " +
                std::to_string(norm_count_) + " norms");
  ++steps_taken_;

  ShapingBreakdown out;
  out.per_norm.assign(norm_count_, 0.0);
  out.penalty = -cfg_.step_penalty;

  std::vector<NormState> current;
  current.reserve(norm_count_);
  for (const auto& [prev, curr] : transitions) current.push_back(curr);
  const bool adherent = full_adherence_reward(current) == 1.0;

  switch (cfg_.scheme) {
    case ShapingScheme::AdherenceOnly: {
      out.adherence_bonus = adherent ? cfg_.adherence_reward : 0.0;
      out.control = adherent ? EpisodeControl::TerminateSuccess : EpisodeControl::Continue;
      return out;
    }

    case ShapingScheme::TransitionTable: {
      for (size_t i = 0; i < norm_count_; ++i)
        out.per_norm[i] = cfg_.table.at(transitions[i].first, transitions[i].second);
      out.adherence_bonus = adherent ? cfg_.adherence_reward : 0.0;
      out.control = adherent ? EpisodeControl::TerminateSuccess : EpisodeControl::Continue;
      return out;
    }

    case ShapingScheme::StopAfterViolation:
    case ShapingScheme::RestartAfterViolation: {
      bool new_violation = false;
      if (!latch_) {
        for (const auto& [prev, curr] : transitions)
          if (curr == NormState::Violated) new_violation = true;
        if (new_violation) latch_ = true;
      }
      if (cfg_.scheme == ShapingScheme::RestartAfterViolation && new_violation) {
        // Hand out the step penalties the episode would still accumulate,
        // then stop it here.
        int remaining = max_episode_steps_ - steps_taken_;
        if (remaining < 0) remaining = 0;
        out.penalty = -static_cast<double>(remaining) * cfg_.step_penalty;
        out.control = EpisodeControl::TerminateViolation;
        return out;
      }
      if (latch_) {
        // No positive feedback at or after the first violation.
        out.control = EpisodeControl::Continue;
        return out;
      }
      for (size_t i = 0; i < norm_count_; ++i)
        if (transitions[i].first == NormState::Neutral &&
            transitions[i].second == NormState::Fulfilled)
          out.per_norm[i] = per_norm_reward_;
      out.adherence_bonus = adherent ? cfg_.adherence_reward : 0.0;
      out.control = adherent ? EpisodeControl::TerminateSuccess : EpisodeControl::Continue;
      return out;
    }
  }
  throw Error("unsupported shaping scheme");
}

StepOutcome shaping_step(ShapingPolicy& policy,
                         const std::vector<std::pair<NormState, NormState>>& transitions) {
  ShapingBreakdown b = policy.step(transitions);
  return {b.total(), b.control};
}

std::map<std::string, double> distribute_rewards(const ShapingBreakdown& breakdown,
                                                 const Institution& inst, const Grounding& g) {
  std::map<std::string, double> out;
  // Adherence bonus: every agent grounded to any role.
  for (const auto& [role, agents] : g.roles)
    for (const auto& a : agents) out[a] += breakdown.adherence_bonus;
  // Per-norm shaping: agents whose grounded role appears in the norm. An
  // agent grounded to two roles of one norm is credited once.
  for (size_t i = 0; i < breakdown.per_norm.size() && i < inst.norms.size(); ++i) {
    if (breakdown.per_norm[i] == 0.0) continue;
    std::set<std::string> credited;
    for (const auto& [role, agents] : g.roles)
      if (inst.norms[i].mentions_role(role))
        for (const auto& a : agents) credited.insert(a);
    for (const auto& a : credited) out[a] += breakdown.per_norm[i];
  }
  return out;
}

}  // namespace normrl
