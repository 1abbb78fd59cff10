#include "normrl/abstraction.hpp"

#include <algorithm>

namespace normrl {

AbstractLayout AbstractLayout::of(const Institution& inst) {
  return AbstractLayout{inst.arts, inst.acts};
}

FullLayout FullLayout::of(const DomainVocabulary& dom) {
  return FullLayout{dom.objects, dom.behaviors};
}

std::vector<std::string> roles_of_agent(const Grounding& g, const std::string& agent) {
  std::vector<std::string> out;
  for (const auto& [role, agents] : g.roles)
    if (std::find(agents.begin(), agents.end(), agent) != agents.end()) out.push_back(role);
  return out;
}

AbstractEncoder::AbstractEncoder(const Institution& inst, const Grounding& g)
    : layout_(AbstractLayout::of(inst)), grounding_(g) {
  for (size_t i = 0; i < layout_.arts.size(); ++i) {
    auto it = g.arts.find(layout_.arts[i]);
    if (it == g.arts.end()) continue;
    for (const auto& obj : it->second)
      object_channel_.emplace(obj, static_cast<int>(i));  // first art wins
  }
  for (const auto& act : layout_.acts) {
    auto it = g.acts.find(act);
    act_behaviors_.push_back(it == g.acts.end() ? std::vector<std::string>{} : it->second);
  }
  for (const auto& [role, agents] : g.roles)
    for (const auto& a : agents) role_grounded_agents_.push_back(a);
}

std::vector<double> AbstractEncoder::encode(const GridWorld& world,
                                            const std::string& agent) const {
  if (std::find(role_grounded_agents_.begin(), role_grounded_agents_.end(), agent) ==
      role_grounded_agents_.end())
    throw Error("agent '" + agent + "' is not grounded to any role");

  std::vector<double> v(layout_.size(), 0.0);
  const int arts = static_cast<int>(layout_.arts.size());
  const int pr = layout_.per_ray();
  const double range = world.sense_range();

  auto rays = world.ray_sense(agent);
  for (int r = 0; r < 7; ++r) {
    const RayHit& hit = rays[r];
    double* ray = v.data() + r * pr;
    double dist = 1.0;
    switch (hit.kind) {
      case RayHit::Kind::Object: {
        auto it = object_channel_.find(hit.entity);
        ray[it != object_channel_.end() ? it->second : arts] = 1.0;
        dist = hit.distance / range;
        break;
      }
      case RayHit::Kind::Agent:
        ray[arts + 1] = 1.0;
        dist = hit.distance / range;
        break;
      case RayHit::Kind::Wall:
        ray[arts + 2] = 1.0;
        dist = hit.distance / range;
        break;
      case RayHit::Kind::None:
        break;  // channels stay zero, distance saturates
    }
    ray[pr - 1] = dist > 1.0 ? 1.0 : dist;
  }

  int base = 7 * pr;
  const AgentState& st = world.agent(agent);
  if (!st.held) {
    v[base + 0] = 1.0;
  } else if (object_channel_.count(*st.held)) {
    v[base + 1] = 1.0;
  } else {
    v[base + 2] = 1.0;
  }
  base += 3;

  for (size_t i = 0; i < layout_.acts.size(); ++i) {
    for (const auto& b : act_behaviors_[i])
      if (world.executed(b, agent)) v[base + static_cast<int>(i)] = 1.0;
  }
  base += static_cast<int>(layout_.acts.size());

  v[base + 0] = world.width() > 1 ? static_cast<double>(st.pos.col) / (world.width() - 1) : 0.0;
  v[base + 1] = world.height() > 1 ? static_cast<double>(st.pos.row) / (world.height() - 1) : 0.0;
  base += 2;

  v[base + static_cast<int>(st.dir)] = 1.0;
  return v;
}

FullEncoder::FullEncoder(const DomainVocabulary& dom) : layout_(FullLayout::of(dom)) {
  for (size_t i = 0; i < layout_.objects.size(); ++i)
    object_channel_.emplace(layout_.objects[i], static_cast<int>(i));
}

std::vector<double> FullEncoder::encode(const GridWorld& world, const std::string& agent) const {
  std::vector<double> v(layout_.size(), 0.0);
  const int nobj = static_cast<int>(layout_.objects.size());
  const int pr = layout_.per_ray();
  const double range = world.sense_range();

  auto rays = world.ray_sense(agent);
  for (int r = 0; r < 7; ++r) {
    const RayHit& hit = rays[r];
    double* ray = v.data() + r * pr;
    double dist = 1.0;
    switch (hit.kind) {
      case RayHit::Kind::Object: {
        auto it = object_channel_.find(hit.entity);
        if (it != object_channel_.end()) ray[it->second] = 1.0;
        dist = hit.distance / range;
        break;
      }
      case RayHit::Kind::Agent:
        ray[nobj] = 1.0;
        dist = hit.distance / range;
        break;
      case RayHit::Kind::Wall:
        ray[nobj + 1] = 1.0;
        dist = hit.distance / range;
        break;
      case RayHit::Kind::None:
        break;
    }
    ray[pr - 1] = dist > 1.0 ? 1.0 : dist;
  }

  int base = 7 * pr;
  const AgentState& st = world.agent(agent);
  if (!st.held) {
    v[base + 0] = 1.0;
  } else {
    auto it = object_channel_.find(*st.held);
    if (it != object_channel_.end()) v[base + 1 + it->second] = 1.0;
  }
  base += nobj + 1;

  for (size_t i = 0; i < layout_.behaviors.size(); ++i)
    if (world.executed(layout_.behaviors[i], agent)) v[base + static_cast<int>(i)] = 1.0;
  base += static_cast<int>(layout_.behaviors.size());

  v[base + 0] = world.width() > 1 ? static_cast<double>(st.pos.col) / (world.width() - 1) : 0.0;
  v[base + 1] = world.height() > 1 ? static_cast<double>(st.pos.row) / (world.height() - 1) : 0.0;
  base += 2;

  v[base + static_cast<int>(st.dir)] = 1.0;
  return v;
}

TabularEncoder::TabularEncoder(const Institution&, const Grounding& g) : grounding_(g) {}

uint64_t TabularEncoder::encode(const GridWorld& world, const std::string& agent,
                                const std::vector<NormState>& norm_states) const {
  const AgentState& st = world.agent(agent);
  uint64_t key = 0;
  key = (key << 6) | static_cast<uint64_t>(st.pos.col & 0x3f);
  key = (key << 6) | static_cast<uint64_t>(st.pos.row & 0x3f);
  key = (key << 2) | static_cast<uint64_t>(st.dir);
  uint64_t held = 0;
  if (st.held) held = grounds_object(grounding_, *st.held) ? 1 : 2;
  key = (key << 2) | held;
  for (NormState s : norm_states) key = (key << 2) | static_cast<uint64_t>(s);
  return key;
}

const BehaviorCommand& ActionSpace::dispatch(int index) const {
  if (index < 0 || index >= size())
    throw Error("action index " + std::to_string(index) + " out of range (size " +
                std::to_string(size()) + ")");
  return commands[static_cast<size_t>(index)];
}

namespace {

ActionSpace movement_actions() {
  ActionSpace s;
  s.labels = {"forward", "backward", "rotate_left", "rotate_right", "noop"};
  s.commands = {BehaviorCommand::move_forward(), BehaviorCommand::move_backward(),
                BehaviorCommand::rotate_left(), BehaviorCommand::rotate_right(),
                BehaviorCommand::noop()};
  return s;
}

}  // namespace

ActionSpace abstract_action_space(const Institution& inst, const Grounding& g,
                                  const DomainVocabulary& dom, const std::string& agent) {
  ActionSpace s = movement_actions();
  std::vector<std::string> roles = roles_of_agent(g, agent);
  if (roles.empty()) throw Error("agent '" + agent + "' is not grounded to any role");

  for (const auto& act : inst.acts) {
    bool relevant = false;
    for (const auto& norm : inst.norms)
      for (const auto& trp : norm.triples)
        if (trp.act == act &&
            std::find(roles.begin(), roles.end(), trp.role) != roles.end())
          relevant = true;
    if (!relevant) continue;

    std::vector<std::string> candidates;
    for (const auto& b : behaviors_of_act(g, inst, act))
      if (dom.can(agent, b)) candidates.push_back(b);
    if (candidates.size() != 1)
      throw Error("act '" + act + "' resolves to " + std::to_string(candidates.size()) +
                  " behaviors for agent '" + agent + "' (need exactly 1)");
    s.labels.push_back(act);
    s.commands.push_back(BehaviorCommand::invoke(candidates.front()));
  }
  return s;
}

ActionSpace full_action_space(const DomainVocabulary& dom, const std::string& agent) {
  ActionSpace s = movement_actions();
  auto it = dom.capabilities.find(agent);
  if (it != dom.capabilities.end()) {
    for (const auto& b : dom.behaviors)  // domain order, deterministic
      if (it->second.count(b)) {
        s.labels.push_back(b);
        s.commands.push_back(BehaviorCommand::invoke(b));
      }
  }
  return s;
}

void require_layout_compatible(const AbstractLayout& trained, const AbstractLayout& target) {
  if (trained == target) return;
  throw Error("incompatible abstract layouts: trained on " +
              std::to_string(trained.size()) + " features (" +
              std::to_string(trained.acts.size()) + " acts, " +
              std::to_string(trained.arts.size()) + " arts), target has " +
              std::to_string(target.size()) + " features (" +
              std::to_string(target.acts.size()) + " acts, " +
              std::to_string(target.arts.size()) + " arts)");
}

}  // namespace normrl
