#include "normrl/trajectory.hpp"

#include <algorithm>
#include <istream>
#include <ostream>
#include <set>

#include "json.hpp"

namespace normrl {

using nlohmann::json;

std::string to_string(VarKind k) {
  switch (k) {
    case VarKind::Active: return "active";
    case VarKind::UsedObj: return "usedObj";
    case VarKind::Position: return "position";
    case VarKind::Near: return "near";
    case VarKind::Has: return "has";
    case VarKind::Executed: return "executed";
  }
  return "?";
}

VarKind var_kind_from_string(const std::string& s) {
  if (s == "active") return VarKind::Active;
  if (s == "usedObj") return VarKind::UsedObj;
  if (s == "position") return VarKind::Position;
  if (s == "near") return VarKind::Near;
  if (s == "has") return VarKind::Has;
  if (s == "executed") return VarKind::Executed;
  throw ParseError("unknown state-variable kind '" + s + "'");
}

bool value_matches_kind(VarKind kind, const Value& v) {
  switch (kind) {
    case VarKind::Active:
    case VarKind::Near:
    case VarKind::Has:
    case VarKind::Executed:
      return std::holds_alternative<bool>(v);
    case VarKind::UsedObj:
      return std::holds_alternative<std::string>(v) || std::holds_alternative<std::monostate>(v);
    case VarKind::Position:
      return std::holds_alternative<Cell>(v) || std::holds_alternative<std::monostate>(v);
  }
  return false;
}

Value default_value(VarKind kind) {
  switch (kind) {
    case VarKind::Active:
    case VarKind::Near:
    case VarKind::Has:
    case VarKind::Executed:
      return false;
    default:
      return std::monostate{};
  }
}

static size_t subject_arity(VarKind kind) {
  return kind == VarKind::Position ? 1 : 2;
}

std::string StateVariable::key() const {
  std::string k = to_string(kind);
  for (const auto& s : subject) {
    k += '|';
    k += s;
  }
  return k;
}

StateVariable active_var(const std::string& b, const std::string& a) {
  return {VarKind::Active, {b, a}};
}
StateVariable used_obj_var(const std::string& b, const std::string& a) {
  return {VarKind::UsedObj, {b, a}};
}
StateVariable position_var(const std::string& entity) {
  return {VarKind::Position, {entity}};
}
StateVariable near_var(const std::string& a, const std::string& o) {
  return {VarKind::Near, {a, o}};
}
StateVariable has_var(const std::string& a, const std::string& o) {
  return {VarKind::Has, {a, o}};
}
StateVariable executed_var(const std::string& b, const std::string& a) {
  return {VarKind::Executed, {b, a}};
}

const Track* Trajectory::find(const StateVariable& var) const {
  auto it = tracks_.find(var.key());
  return it == tracks_.end() ? nullptr : &it->second;
}

bool Trajectory::tracked(const StateVariable& var) const { return find(var) != nullptr; }

size_t Trajectory::run_count(const StateVariable& var) const {
  const Track* t = find(var);
  return t ? t->runs.size() : 0;
}

void Trajectory::append(const StateVariable& var, const Value& v, int t) {
  Track& track = tracks_[var.key()];
  if (track.runs.empty()) {
    track.var = var;
    Value dflt = default_value(var.kind);
    if (t > 0 && !(v == dflt)) {
      // Late first assignment: backfill the untracked prefix with the default.
      track.runs.push_back({0, t - 1, dflt});
      track.runs.push_back({t, t, v});
    } else if (t > 0) {
      track.runs.push_back({0, t, v});
    } else {
      track.runs.push_back({t, t, v});
    }
    return;
  }
  Run& last = track.runs.back();
  if (last.value == v) {
    last.t_end = t;
  } else {
    track.runs.push_back({t, t, v});
  }
}

void Trajectory::record_step(const std::vector<Assignment>& assignments) {
  int t = t_now_ + 1;
  std::set<std::string> seen;
  for (const auto& [var, value] : assignments) {
    if (var.subject.size() != subject_arity(var.kind))
      throw Error("state variable " + to_string(var.kind) + " takes " +
                  std::to_string(subject_arity(var.kind)) + " subject(s)");
    if (!value_matches_kind(var.kind, value))
      throw Error("type mismatch: value does not fit variable kind " + to_string(var.kind) +
                  " (" + var.key() + ")");
    if (!seen.insert(var.key()).second)
      throw Error("duplicate assignment for " + var.key() + " in one step");
  }
  for (const auto& [var, value] : assignments) append(var, value, t);
  // Variables not assigned this step keep their previous value.
  for (auto& [key, track] : tracks_) {
    if (seen.count(key)) continue;
    track.runs.back().t_end = t;
  }
  t_now_ = t;
}

const Value& Trajectory::value_at(const StateVariable& var, int t) const {
  if (t < 0 || t > t_now_)
    throw Error("time " + std::to_string(t) + " outside trajectory interval [0, " +
                std::to_string(t_now_) + "]");
  const Track* track = find(var);
  if (!track) throw Error("unknown state variable " + var.key());
  // Binary search for the run containing t.
  auto it = std::upper_bound(track->runs.begin(), track->runs.end(), t,
                             [](int tv, const Run& r) { return tv < r.t_begin; });
  return std::prev(it)->value;
}

Value Trajectory::value_or_default(const StateVariable& var, int t) const {
  if (t < 0 || t > t_now_)
    throw Error("time " + std::to_string(t) + " outside trajectory interval [0, " +
                std::to_string(t_now_) + "]");
  const Track* track = find(var);
  if (!track) return default_value(var.kind);
  auto it = std::upper_bound(track->runs.begin(), track->runs.end(), t,
                             [](int tv, const Run& r) { return tv < r.t_begin; });
  return std::prev(it)->value;
}

std::vector<int> Trajectory::activation_times(const std::string& behavior,
                                              const std::string& agent) const {
  const Track* track = find(active_var(behavior, agent));
  std::vector<int> out;
  if (!track) return out;
  for (const Run& r : track->runs) {
    if (std::holds_alternative<bool>(r.value) && std::get<bool>(r.value))
      for (int t = r.t_begin; t <= r.t_end; ++t) out.push_back(t);
  }
  return out;
}

std::vector<const Track*> Trajectory::tracks() const {
  std::vector<const Track*> out;
  out.reserve(tracks_.size());
  for (const auto& [key, track] : tracks_) out.push_back(&track);
  std::sort(out.begin(), out.end(),
            [](const Track* a, const Track* b) { return a->var.key() < b->var.key(); });
  return out;
}

namespace {

json value_to_json(const Value& v) {
  if (std::holds_alternative<std::monostate>(v)) return nullptr;
  if (std::holds_alternative<bool>(v)) return std::get<bool>(v);
  if (std::holds_alternative<std::string>(v)) return std::get<std::string>(v);
  const Cell& c = std::get<Cell>(v);
  return json::array({c.col, c.row});
}

Value value_from_json(const json& j, VarKind kind) {
  if (j.is_null()) return std::monostate{};
  if (j.is_boolean()) return j.get<bool>();
  if (j.is_string()) return j.get<std::string>();
  if (j.is_array() && j.size() == 2 && j[0].is_number_integer() && j[1].is_number_integer())
    return Cell{j[0].get<int>(), j[1].get<int>()};
  throw ParseError("cannot decode value for kind " + to_string(kind));
}

}  // namespace

void export_trace(const Trajectory& traj, std::ostream& out) {
  auto tracks = traj.tracks();
  for (int t = 0; t <= traj.t_now(); ++t) {
    json line;
    line["t"] = t;
    json assignments = json::array();
    for (const Track* track : tracks) {
      // Emit a variable only at the step where a run of it starts.
      for (const Run& r : track->runs) {
        if (r.t_begin == t) {
          json a;
          a["kind"] = to_string(track->var.kind);
          a["subject"] = track->var.subject;
          a["value"] = value_to_json(r.value);
          assignments.push_back(std::move(a));
        }
        if (r.t_begin >= t) break;
      }
    }
    line["assignments"] = std::move(assignments);
    out << line.dump() << '\n';
  }
}

Trajectory import_trace(std::istream& in) {
  Trajectory traj;
  std::string line;
  int line_no = 0;
  int expected_t = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::string where = "trace line " + std::to_string(line_no);
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      throw ParseError(where + ": " + e.what());
    }
    if (!j.is_object() || !j.contains("t") || !j.contains("assignments"))
      throw ParseError(where + ": expected {\"t\": ..., \"assignments\": [...]}");
    int t = j.at("t").get<int>();
    if (t != expected_t)
      throw ParseError(where + ": expected t=" + std::to_string(expected_t) + ", got " +
                       std::to_string(t));
    std::vector<Assignment> assignments;
    for (const auto& a : j.at("assignments")) {
      if (!a.is_object() || !a.contains("kind") || !a.contains("subject") || !a.contains("value"))
        throw ParseError(where + ": assignment requires kind/subject/value");
      StateVariable var;
      var.kind = var_kind_from_string(a.at("kind").get<std::string>());
      for (const auto& s : a.at("subject")) var.subject.push_back(s.get<std::string>());
      Value value = value_from_json(a.at("value"), var.kind);
      assignments.emplace_back(std::move(var), std::move(value));
    }
    try {
      traj.record_step(assignments);
    } catch (const Error& e) {
      throw ParseError(where + ": " + e.what());
    }
    ++expected_t;
  }
  return traj;
}

}  // namespace normrl
