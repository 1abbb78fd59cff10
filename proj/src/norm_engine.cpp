#include "normrl/norm_engine.hpp"

#include <algorithm>

namespace normrl {

char to_char(NormState s) {
  switch (s) {
    case NormState::Fulfilled: return 'f';
    case NormState::Violated: return 'v';
    case NormState::Neutral: return 'n';
  }
  return '?';
}

std::string to_string(NormState s) { return std::string(1, to_char(s)); }

GroundedTriple resolve_triple(const Triple& t, const Grounding& g, const Institution& inst) {
  GroundedTriple out;
  out.agents = agents_of_role(g, inst, t.role);
  out.behaviors = behaviors_of_act(g, inst, t.act);
  out.objects = objects_of_art(g, inst, t.art);
  return out;
}

namespace {

bool is_grounded_object(const GroundedTriple& gt, const Value& used) {
  if (!std::holds_alternative<std::string>(used)) return false;
  const std::string& o = std::get<std::string>(used);
  return std::find(gt.objects.begin(), gt.objects.end(), o) != gt.objects.end();
}

// An activation whose used object names something outside O_art. A "none"
// value is not a foreign object, it is the absence of one.
bool is_foreign_object(const GroundedTriple& gt, const Value& used) {
  if (!std::holds_alternative<std::string>(used)) return false;
  return !is_grounded_object(gt, used);
}

bool positions_match(const Value& a, const Value& b, int tolerance) {
  if (!std::holds_alternative<Cell>(a) || !std::holds_alternative<Cell>(b)) return false;
  return chebyshev(std::get<Cell>(a), std::get<Cell>(b)) <= tolerance;
}

// Pooled activation times of one grounded triple, ascending, deduplicated.
std::vector<int> side_activation_times(const GroundedTriple& gt, const Trajectory& traj) {
  std::vector<int> times;
  for (const auto& b : gt.behaviors)
    for (const auto& a : gt.agents) {
      auto ts = traj.activation_times(b, a);
      times.insert(times.end(), ts.begin(), ts.end());
    }
  std::sort(times.begin(), times.end());
  times.erase(std::unique(times.begin(), times.end()), times.end());
  return times;
}

}  // namespace

NormState oracle_eval(const Norm& norm, const Trajectory& traj, const Grounding& g,
                      const Institution& inst, const EngineOptions& opts) {
  if (traj.empty()) throw Error("oracle_eval on an empty trajectory");
  std::vector<GroundedTriple> gt;
  for (const auto& t : norm.triples) gt.push_back(resolve_triple(t, g, inst));
  for (const auto& x : gt)
    if (x.inert()) return NormState::Neutral;

  const int t_end = traj.t_now();

  switch (norm.qualifier) {
    case Qualifier::Must: {
      // Every grounded agent activates some grounded behavior at least once.
      for (const auto& a : gt[0].agents) {
        bool found = false;
        for (const auto& b : gt[0].behaviors)
          if (!traj.activation_times(b, a).empty()) found = true;
        if (!found) return NormState::Neutral;
      }
      return NormState::Fulfilled;
    }

    case Qualifier::Use: {
      // Every activation of a grounded behavior uses a grounded object;
      // neutral until the first activation.
      bool any = false;
      bool all_grounded = true;
      bool foreign = false;
      for (const auto& b : gt[0].behaviors)
        for (const auto& a : gt[0].agents)
          for (int t : traj.activation_times(b, a)) {
            any = true;
            Value used = traj.value_or_default(used_obj_var(b, a), t);
            if (!is_grounded_object(gt[0], used)) all_grounded = false;
            if (is_foreign_object(gt[0], used)) foreign = true;
          }
      if (opts.strict_use && foreign) return NormState::Violated;
      if (any && all_grounded) return NormState::Fulfilled;
      return NormState::Neutral;
    }

    case Qualifier::MustUse: {
      if (opts.strict_use) {
        for (const auto& b : gt[0].behaviors)
          for (const auto& a : gt[0].agents)
            for (int t : traj.activation_times(b, a))
              if (is_foreign_object(gt[0], traj.value_or_default(used_obj_var(b, a), t)))
                return NormState::Violated;
      }
      // Every grounded agent has some activation that used a grounded object.
      for (const auto& a : gt[0].agents) {
        bool satisfied = false;
        for (const auto& b : gt[0].behaviors)
          for (int t : traj.activation_times(b, a))
            if (is_grounded_object(gt[0], traj.value_or_default(used_obj_var(b, a), t)))
              satisfied = true;
        if (!satisfied) return NormState::Neutral;
      }
      return NormState::Fulfilled;
    }

    case Qualifier::MustAt: {
      // Every grounded agent activates a grounded behavior while co-located
      // with some grounded object.
      for (const auto& a : gt[0].agents) {
        bool satisfied = false;
        for (const auto& b : gt[0].behaviors)
          for (int t : traj.activation_times(b, a)) {
            Value pa = traj.value_or_default(position_var(a), t);
            for (const auto& o : gt[0].objects)
              if (positions_match(pa, traj.value_or_default(position_var(o), t),
                                  opts.at_tolerance))
                satisfied = true;
          }
        if (!satisfied) return NormState::Neutral;
      }
      return NormState::Fulfilled;
    }

    case Qualifier::Before: {
      std::vector<int> t1 = side_activation_times(gt[0], traj);
      std::vector<int> t2 = side_activation_times(gt[1], traj);
      // Violated: some second-side activation with no first-side activation
      // strictly before it, or any cross pair out of order.
      bool violated = false;
      for (int b2 : t2) {
        bool some_before = false;
        for (int b1 : t1)
          if (b1 < b2) some_before = true;
        if (!some_before) violated = true;
      }
      for (int b1 : t1)
        for (int b2 : t2)
          if (b1 >= b2) violated = true;
      if (violated) return NormState::Violated;
      // Fulfilled: both sides activated and every cross pair is ordered.
      if (t1.empty() || t2.empty()) return NormState::Neutral;
      for (int b1 : t1)
        for (int b2 : t2)
          if (!(b1 < b2)) return NormState::Neutral;  // unreachable after the check above
      return NormState::Fulfilled;
    }

    case Qualifier::Equals: {
      std::vector<int> t1 = side_activation_times(gt[0], traj);
      std::vector<int> t2 = side_activation_times(gt[1], traj);
      // Violated: one side active at a time point where the other is not.
      for (int t = 0; t <= t_end; ++t) {
        bool a1 = std::binary_search(t1.begin(), t1.end(), t);
        bool a2 = std::binary_search(t2.begin(), t2.end(), t);
        if (a1 != a2) return NormState::Violated;
      }
      if (!t1.empty()) return NormState::Fulfilled;
      return NormState::Neutral;
    }
  }
  throw Error("unsupported qualifier");
}

NormMonitor::NormMonitor(const Norm& norm, const Grounding& g, const Institution& inst,
                         EngineOptions opts)
    : norm_(norm), opts_(opts) {
  for (const auto& t : norm.triples) {
    GroundedTriple gt = resolve_triple(t, g, inst);
    if (gt.inert())
      warnings_.push_back("triple (" + t.role + ", " + t.act + ", " + t.art +
                          ") has an ungrounded role or act; norm stays neutral");
    grounded_.push_back(std::move(gt));
  }
  inert_ = std::any_of(grounded_.begin(), grounded_.end(),
                       [](const GroundedTriple& g2) { return g2.inert(); });
}

void NormMonitor::reset() {
  next_t_ = 0;
  previous_ = current_ = NormState::Neutral;
  side_[0] = SideProgress{};
  side_[1] = SideProgress{};
  equals_matched_ = equals_diverged_ = false;
  use_violated_ = false;
}

bool NormMonitor::side_active_now(const Trajectory& traj, int side, int t) const {
  for (const auto& b : grounded_[side].behaviors)
    for (const auto& a : grounded_[side].agents) {
      Value v = traj.value_or_default(active_var(b, a), t);
      if (std::holds_alternative<bool>(v) && std::get<bool>(v)) return true;
    }
  return false;
}

void NormMonitor::update_side(const Trajectory& traj, int side, int t) {
  const GroundedTriple& gt = grounded_[side];
  SideProgress& p = side_[side];
  for (const auto& b : gt.behaviors)
    for (const auto& a : gt.agents) {
      Value av = traj.value_or_default(active_var(b, a), t);
      if (!std::holds_alternative<bool>(av) || !std::get<bool>(av)) continue;
      p.any_activation = true;
      if (!p.first_activation) p.first_activation = t;
      p.last_activation = t;

      switch (norm_.qualifier) {
        case Qualifier::Must:
          p.satisfied_agents.insert(a);
          break;
        case Qualifier::Use: {
          Value used = traj.value_or_default(used_obj_var(b, a), t);
          if (!is_grounded_object(gt, used)) p.all_used_grounded = false;
          if (is_foreign_object(gt, used)) use_violated_ = true;
          break;
        }
        case Qualifier::MustUse: {
          Value used = traj.value_or_default(used_obj_var(b, a), t);
          if (is_grounded_object(gt, used)) p.satisfied_agents.insert(a);
          if (is_foreign_object(gt, used)) use_violated_ = true;
          break;
        }
        case Qualifier::MustAt: {
          Value pa = traj.value_or_default(position_var(a), t);
          for (const auto& o : gt.objects)
            if (positions_match(pa, traj.value_or_default(position_var(o), t),
                                opts_.at_tolerance))
              p.satisfied_agents.insert(a);
          break;
        }
        default:
          break;  // before/equals only need the activation summary
      }
    }
}

NormState NormMonitor::evaluate() const {
  auto all_satisfied = [&](int side) {
    for (const auto& a : grounded_[side].agents)
      if (!side_[side].satisfied_agents.count(a)) return false;
    return true;
  };

  switch (norm_.qualifier) {
    case Qualifier::Must:
      return all_satisfied(0) ? NormState::Fulfilled : NormState::Neutral;
    case Qualifier::Use:
      if (opts_.strict_use && use_violated_) return NormState::Violated;
      return (side_[0].any_activation && side_[0].all_used_grounded) ? NormState::Fulfilled
                                                                     : NormState::Neutral;
    case Qualifier::MustUse:
      if (opts_.strict_use && use_violated_) return NormState::Violated;
      return all_satisfied(0) ? NormState::Fulfilled : NormState::Neutral;
    case Qualifier::MustAt:
      return all_satisfied(0) ? NormState::Fulfilled : NormState::Neutral;
    case Qualifier::Before: {
      const SideProgress& s1 = side_[0];
      const SideProgress& s2 = side_[1];
      if (!s2.any_activation) return NormState::Neutral;
      if (!s1.any_activation) return NormState::Violated;
      return *s1.last_activation < *s2.first_activation ? NormState::Fulfilled
                                                        : NormState::Violated;
    }
    case Qualifier::Equals:
      if (equals_diverged_) return NormState::Violated;
      if (equals_matched_) return NormState::Fulfilled;
      return NormState::Neutral;
  }
  throw Error("unsupported qualifier");
}

std::pair<NormState, NormState> NormMonitor::step(const Trajectory& traj) {
  const int t = next_t_;
  if (traj.empty() || t > traj.t_now())
    throw Error("monitor step at t=" + std::to_string(t) +
                " has no recorded trajectory step (t_now=" +
                std::to_string(traj.empty() ? -1 : traj.t_now()) + ")");
  ++next_t_;
  previous_ = current_;
  if (inert_) return {previous_, current_};

  update_side(traj, 0, t);
  if (norm_.qualifier == Qualifier::Before || norm_.qualifier == Qualifier::Equals) {
    update_side(traj, 1, t);
    if (norm_.qualifier == Qualifier::Equals) {
      bool a1 = side_active_now(traj, 0, t);
      bool a2 = side_active_now(traj, 1, t);
      if (a1 != a2) equals_diverged_ = true;
      if (a1 && a2) equals_matched_ = true;
    }
  }
  current_ = evaluate();
  return {previous_, current_};
}

InstitutionMonitor::InstitutionMonitor(const Institution& inst, const Grounding& g,
                                       EngineOptions opts) {
  monitors_.reserve(inst.norms.size());
  for (const auto& n : inst.norms) monitors_.emplace_back(n, g, inst, opts);
}

std::vector<std::pair<NormState, NormState>> InstitutionMonitor::step(const Trajectory& traj) {
  std::vector<std::pair<NormState, NormState>> out;
  out.reserve(monitors_.size());
  for (auto& m : monitors_) out.push_back(m.step(traj));
  return out;
}

std::vector<NormState> InstitutionMonitor::currents() const {
  std::vector<NormState> out;
  out.reserve(monitors_.size());
  for (const auto& m : monitors_) out.push_back(m.current());
  return out;
}

std::vector<std::string> InstitutionMonitor::warnings() const {
  std::vector<std::string> out;
  for (const auto& m : monitors_)
    out.insert(out.end(), m.warnings().begin(), m.warnings().end());
  return out;
}

void InstitutionMonitor::reset() {
  for (auto& m : monitors_) m.reset();
}

bool adheres(const Institution& inst, const Trajectory& traj, const Grounding& g,
             const EngineOptions& opts) {
  if (traj.empty()) return false;
  for (const auto& n : inst.norms)
    if (oracle_eval(n, traj, g, inst, opts) != NormState::Fulfilled) return false;
  return true;
}

}  // namespace normrl
