#include "normrl/institution.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace normrl {

using nlohmann::json;

int qualifier_arity(Qualifier q) {
  switch (q) {
    case Qualifier::Before:
    case Qualifier::Equals:
      return 2;
    default:
      return 1;
  }
}

std::string to_string(Qualifier q) {
  switch (q) {
    case Qualifier::Must: return "must";
    case Qualifier::Use: return "use";
    case Qualifier::MustUse: return "mustUse";
    case Qualifier::MustAt: return "mustAt";
    case Qualifier::Before: return "before";
    case Qualifier::Equals: return "equals";
  }
  return "?";
}

Qualifier qualifier_from_string(const std::string& s) {
  if (s == "must") return Qualifier::Must;
  if (s == "use") return Qualifier::Use;
  if (s == "mustUse") return Qualifier::MustUse;
  if (s == "mustAt") return Qualifier::MustAt;
  if (s == "before") return Qualifier::Before;
  if (s == "equals") return Qualifier::Equals;
  throw ParseError("unknown qualifier '" + s + "'");
}

bool Norm::mentions_role(const std::string& role) const {
  return std::any_of(triples.begin(), triples.end(),
                     [&](const Triple& t) { return t.role == role; });
}

namespace {

bool contains(const std::vector<std::string>& v, const std::string& id) {
  return std::find(v.begin(), v.end(), id) != v.end();
}

}  // namespace

bool Institution::has_role(const std::string& id) const { return contains(roles, id); }
bool Institution::has_act(const std::string& id) const { return contains(acts, id); }
bool Institution::has_art(const std::string& id) const { return contains(arts, id); }

std::string Institution::category_fingerprint() const {
  uint64_t h = 1469598103934665603ULL;
  for (const auto& a : acts) h = fnv1a(a + ";", h);
  h = fnv1a("|", h);
  for (const auto& a : arts) h = fnv1a(a + ";", h);
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

bool DomainVocabulary::can(const std::string& agent, const std::string& behavior) const {
  auto it = capabilities.find(agent);
  return it != capabilities.end() && it->second.count(behavior) > 0;
}

bool DomainVocabulary::has_agent(const std::string& id) const { return contains(agents, id); }

std::vector<std::string> agents_of_role(const Grounding& g, const Institution& inst,
                                        const std::string& role) {
  if (!inst.has_role(role)) throw ParseError("unknown role '" + role + "'");
  auto it = g.roles.find(role);
  return it == g.roles.end() ? std::vector<std::string>{} : it->second;
}

std::vector<std::string> behaviors_of_act(const Grounding& g, const Institution& inst,
                                          const std::string& act) {
  if (!inst.has_act(act)) throw ParseError("unknown act '" + act + "'");
  auto it = g.acts.find(act);
  return it == g.acts.end() ? std::vector<std::string>{} : it->second;
}

std::vector<std::string> objects_of_art(const Grounding& g, const Institution& inst,
                                        const std::string& art) {
  // Role-valued artifacts resolve through the role grounding.
  if (inst.has_art(art)) {
    auto it = g.arts.find(art);
    return it == g.arts.end() ? std::vector<std::string>{} : it->second;
  }
  if (inst.has_role(art)) {
    auto it = g.roles.find(art);
    return it == g.roles.end() ? std::vector<std::string>{} : it->second;
  }
  throw ParseError("unknown art '" + art + "'");
}

bool grounds_object(const Grounding& g, const std::string& object) {
  for (const auto& [art, objs] : g.arts)
    if (std::find(objs.begin(), objs.end(), object) != objs.end()) return true;
  return false;
}

AdmissibilityReport check_wellformed(const Grounding& g, const Institution& inst,
                                     const DomainVocabulary& dom) {
  AdmissibilityReport rep;
  auto fail = [&](std::string msg) {
    rep.ok = false;
    rep.violations.push_back(std::move(msg));
  };
  for (const auto& [role, agents] : g.roles) {
    if (!inst.has_role(role)) fail("grounded role '" + role + "' not declared");
    for (const auto& a : agents)
      if (!dom.has_agent(a)) fail("agent '" + a + "' not in domain (role " + role + ")");
  }
  for (const auto& [act, behaviors] : g.acts) {
    if (!inst.has_act(act)) fail("grounded act '" + act + "' not declared");
    for (const auto& b : behaviors)
      if (!contains(dom.behaviors, b)) fail("behavior '" + b + "' not in domain (act " + act + ")");
  }
  for (const auto& [art, objects] : g.arts) {
    if (!inst.has_art(art)) fail("grounded art '" + art + "' not declared");
    for (const auto& o : objects)
      if (!contains(dom.objects, o)) fail("object '" + o + "' not in domain (art " + art + ")");
  }
  return rep;
}

AdmissibilityReport check_admissible(const Grounding& g, const Institution& inst,
                                     const DomainVocabulary& dom) {
  AdmissibilityReport rep;
  auto fail = [&](std::string msg) {
    rep.ok = false;
    rep.violations.push_back(std::move(msg));
  };

  for (const auto& role : inst.roles) {
    auto it = g.roles.find(role);
    if (it == g.roles.end() || it->second.empty()) {
      fail("ungrounded role " + role);
      continue;
    }
    // Acts this role must be able to perform, from the norm triples.
    std::set<std::string> role_acts;
    for (const auto& norm : inst.norms)
      for (const auto& trp : norm.triples)
        if (trp.role == role) role_acts.insert(trp.act);
    for (const auto& agent : it->second) {
      for (const auto& act : role_acts) {
        auto bit = g.acts.find(act);
        bool covered = false;
        if (bit != g.acts.end())
          for (const auto& b : bit->second)
            if (dom.can(agent, b)) covered = true;
        if (!covered) fail("(" + act + ", " + agent + ")");
      }
    }
  }
  return rep;
}

namespace {

void require_keys(const json& j, std::initializer_list<const char*> allowed,
                  const std::string& where) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool ok = false;
    for (const char* k : allowed)
      if (it.key() == k) ok = true;
    if (!ok) throw ParseError("unknown key '" + it.key() + "' in " + where);
  }
}

json parse_json(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("syntax error: ") + e.what());
  }
}

std::vector<std::string> id_list(const json& j, const std::string& where) {
  if (!j.is_array()) throw ParseError(where + " must be an array of strings");
  std::vector<std::string> out;
  std::set<std::string> seen;
  for (const auto& e : j) {
    if (!e.is_string()) throw ParseError(where + " must contain strings only");
    std::string id = e.get<std::string>();
    if (!seen.insert(id).second) throw ParseError("duplicate identifier '" + id + "' in " + where);
    out.push_back(std::move(id));
  }
  return out;
}

}  // namespace

Institution parse_institution(const std::string& json_text) {
  json j = parse_json(json_text);
  if (!j.is_object()) throw ParseError("institution document must be a JSON object");
  require_keys(j, {"name", "roles", "acts", "arts", "norms"}, "institution");
  Institution inst;
  inst.name = j.value("name", "");
  inst.roles = id_list(j.at("roles"), "roles");
  inst.acts = id_list(j.at("acts"), "acts");
  inst.arts = id_list(j.at("arts"), "arts");
  if (!j.contains("norms") || !j.at("norms").is_array())
    throw ParseError("institution requires a norms array");

  int index = 0;
  for (const auto& nj : j.at("norms")) {
    std::string where = "norm #" + std::to_string(index);
    if (!nj.is_object()) throw ParseError(where + " must be an object");
    require_keys(nj, {"qualifier", "triples"}, where);
    Norm norm;
    norm.qualifier = qualifier_from_string(nj.at("qualifier").get<std::string>());
    const auto& tj = nj.at("triples");
    if (!tj.is_array()) throw ParseError(where + ": triples must be an array");
    for (const auto& t : tj) {
      if (!t.is_array() || t.size() != 3)
        throw ParseError(where + ": each triple must be [role, act, art]");
      Triple trp{t[0].get<std::string>(), t[1].get<std::string>(), t[2].get<std::string>()};
      if (!inst.has_role(trp.role))
        throw ParseError(where + ": undeclared role '" + trp.role + "'");
      if (!inst.has_act(trp.act))
        throw ParseError(where + ": undeclared act '" + trp.act + "'");
      if (!inst.has_art(trp.art) && !inst.has_role(trp.art))
        throw ParseError(where + ": undeclared art '" + trp.art + "'");
      norm.triples.push_back(std::move(trp));
    }
    int want = qualifier_arity(norm.qualifier);
    if (static_cast<int>(norm.triples.size()) != want)
      throw ParseError(where + ": qualifier " + to_string(norm.qualifier) + " takes " +
                       std::to_string(want) + " triple(s), got " +
                       std::to_string(norm.triples.size()));
    if (std::find(inst.norms.begin(), inst.norms.end(), norm) != inst.norms.end())
      throw ParseError(where + ": duplicate norm");
    inst.norms.push_back(std::move(norm));
    ++index;
  }
  return inst;
}

std::string serialize_institution(const Institution& inst) {
  json j;
  j["name"] = inst.name;
  j["roles"] = inst.roles;
  j["acts"] = inst.acts;
  j["arts"] = inst.arts;
  j["norms"] = json::array();
  for (const auto& n : inst.norms) {
    json nj;
    nj["qualifier"] = to_string(n.qualifier);
    nj["triples"] = json::array();
    for (const auto& t : n.triples) nj["triples"].push_back({t.role, t.act, t.art});
    j["norms"].push_back(std::move(nj));
  }
  return j.dump(2);
}

std::vector<std::string> validate_institution(const Institution& inst) {
  std::vector<std::string> warnings;
  if (inst.norms.empty()) warnings.push_back("no norms: institution constrains nothing");
  return warnings;
}

DomainVocabulary parse_domain(const std::string& json_text) {
  json j = parse_json(json_text);
  if (!j.is_object()) throw ParseError("domain document must be a JSON object");
  require_keys(j, {"agents", "behaviors", "objects", "capabilities"}, "domain");
  DomainVocabulary dom;
  dom.agents = id_list(j.at("agents"), "agents");
  dom.behaviors = id_list(j.at("behaviors"), "behaviors");
  dom.objects = id_list(j.at("objects"), "objects");
  if (j.contains("capabilities")) {
    if (!j.at("capabilities").is_object())
      throw ParseError("capabilities must map agent -> [behavior, ...]");
    for (auto it = j.at("capabilities").begin(); it != j.at("capabilities").end(); ++it) {
      if (!dom.has_agent(it.key()))
        throw ParseError("capabilities reference undeclared agent '" + it.key() + "'");
      for (const auto& b : id_list(it.value(), "capabilities of " + it.key())) {
        if (!contains(dom.behaviors, b))
          throw ParseError("capabilities of '" + it.key() + "' reference undeclared behavior '" +
                           b + "'");
        dom.capabilities[it.key()].insert(b);
      }
    }
  }
  return dom;
}

std::string serialize_domain(const DomainVocabulary& dom) {
  json j;
  j["agents"] = dom.agents;
  j["behaviors"] = dom.behaviors;
  j["objects"] = dom.objects;
  j["capabilities"] = json::object();
  for (const auto& [agent, caps] : dom.capabilities)
    j["capabilities"][agent] = std::vector<std::string>(caps.begin(), caps.end());
  return j.dump(2);
}

Grounding parse_grounding(const std::string& json_text) {
  json j = parse_json(json_text);
  if (!j.is_object()) throw ParseError("grounding document must be a JSON object");
  require_keys(j, {"roles", "acts", "arts"}, "grounding");
  Grounding g;
  auto read = [&](const char* key, std::map<std::string, std::vector<std::string>>& out) {
    if (!j.contains(key)) return;
    if (!j.at(key).is_object())
      throw ParseError(std::string(key) + " must map identifier -> [name, ...]");
    for (auto it = j.at(key).begin(); it != j.at(key).end(); ++it)
      out[it.key()] = id_list(it.value(), std::string(key) + "." + it.key());
  };
  read("roles", g.roles);
  read("acts", g.acts);
  read("arts", g.arts);
  return g;
}

std::string serialize_grounding(const Grounding& g) {
  json j;
  j["roles"] = json::object();
  j["acts"] = json::object();
  j["arts"] = json::object();
  for (const auto& [k, v] : g.roles) j["roles"][k] = v;
  for (const auto& [k, v] : g.acts) j["acts"][k] = v;
  for (const auto& [k, v] : g.arts) j["arts"][k] = v;
  return j.dump(2);
}

namespace {

std::string read_file(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw ConfigError("cannot open file: " + file.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

Institution load_institution(const std::filesystem::path& file) {
  try {
    return parse_institution(read_file(file));
  } catch (const ParseError& e) {
    throw ParseError(file.string() + ": " + e.what());
  }
}

DomainVocabulary load_domain(const std::filesystem::path& file) {
  try {
    return parse_domain(read_file(file));
  } catch (const ParseError& e) {
    throw ParseError(file.string() + ": " + e.what());
  }
}

Grounding load_grounding(const std::filesystem::path& file) {
  try {
    return parse_grounding(read_file(file));
  } catch (const ParseError& e) {
    throw ParseError(file.string() + ": " + e.what());
  }
}

}  // namespace normrl
