#pragma once

#include <string>
#include <unordered_map>
#include <vector>

#include "normrl/gridworld.hpp"
#include "normrl/institution.hpp"
#include "normrl/norm_engine.hpp"

namespace normrl {

/// Feature layout of the institution-level observation. Depends only on the
/// institution's ordered category lists, never on domain identities, so any
/// two groundings of one institution share the layout.
///
/// Per ray: one channel per art, then other-object, other-agent, wall, then
/// the normalized hit distance. Agent block: held category one-hot
/// [none, grounded, other], one executed flag per act, normalized position,
/// orientation one-hot.
struct AbstractLayout {
  std::vector<std::string> arts;
  std::vector<std::string> acts;

  static AbstractLayout of(const Institution& inst);
  int per_ray() const { return static_cast<int>(arts.size()) + 4; }
  int size() const {
    return 7 * per_ray() + 3 + static_cast<int>(acts.size()) + 2 + 4;
  }
  friend bool operator==(const AbstractLayout&, const AbstractLayout&) = default;
};

/// Domain-level observation layout: one channel per concrete object identity.
/// Grows with the domain and is not portable across domains.
struct FullLayout {
  std::vector<std::string> objects;
  std::vector<std::string> behaviors;

  static FullLayout of(const DomainVocabulary& dom);
  int per_ray() const { return static_cast<int>(objects.size()) + 3; }
  int size() const {
    return 7 * per_ray() + static_cast<int>(objects.size()) + 1 +
           static_cast<int>(behaviors.size()) + 2 + 4;
  }
  friend bool operator==(const FullLayout&, const FullLayout&) = default;
};

/// Encodes environment states over institution categories through a
/// grounding. Pure with respect to the world; safe to share.
class AbstractEncoder {
 public:
  AbstractEncoder(const Institution& inst, const Grounding& g);

  const AbstractLayout& layout() const { return layout_; }
  std::vector<double> encode(const GridWorld& world, const std::string& agent) const;

 private:
  AbstractLayout layout_;
  Grounding grounding_;
  std::unordered_map<std::string, int> object_channel_;  // object -> art index
  std::vector<std::vector<std::string>> act_behaviors_;  // per act
  std::vector<std::string> role_grounded_agents_;
};

class FullEncoder {
 public:
  explicit FullEncoder(const DomainVocabulary& dom);

  const FullLayout& layout() const { return layout_; }
  std::vector<double> encode(const GridWorld& world, const std::string& agent) const;

 private:
  FullLayout layout_;
  std::unordered_map<std::string, int> object_channel_;
};

/// Compact state key for tabular learning: cell, orientation, held category
/// and the current per-norm states.
class TabularEncoder {
 public:
  TabularEncoder(const Institution& inst, const Grounding& g);
  uint64_t encode(const GridWorld& world, const std::string& agent,
                  const std::vector<NormState>& norm_states) const;

 private:
  Grounding grounding_;
};

/// Dispatchable action list: 5 movement actions followed by either abstract
/// institution acts (bound to behaviors through the grounding) or raw domain
/// behaviors.
struct ActionSpace {
  std::vector<std::string> labels;
  std::vector<BehaviorCommand> commands;

  int size() const { return static_cast<int>(commands.size()); }
  const BehaviorCommand& dispatch(int index) const;
};

/// Acts are taken from the norm triples of the agent's roles, in institution
/// act order; each must resolve to exactly one behavior the agent is capable
/// of, otherwise construction fails.
ActionSpace abstract_action_space(const Institution& inst, const Grounding& g,
                                  const DomainVocabulary& dom, const std::string& agent);

ActionSpace full_action_space(const DomainVocabulary& dom, const std::string& agent);

std::vector<std::string> roles_of_agent(const Grounding& g, const std::string& agent);

/// Rebinding check used by policy transfer: the target institution must
/// induce the same abstract layout the policy was trained on.
void require_layout_compatible(const AbstractLayout& trained, const AbstractLayout& target);

}  // namespace normrl
