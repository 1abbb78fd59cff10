#pragma once

#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "normrl/common.hpp"

namespace normrl {

/// The qualifier of a norm. must/use/mustUse/mustAt are unary (one triple),
/// before/equals are binary (two triples).
enum class Qualifier : uint8_t { Must, Use, MustUse, MustAt, Before, Equals };

int qualifier_arity(Qualifier q);
std::string to_string(Qualifier q);
Qualifier qualifier_from_string(const std::string& s);  // throws ParseError

/// role-act-artifact statement; art may name an artifact or a role.
struct Triple {
  std::string role;
  std::string act;
  std::string art;

  friend bool operator==(const Triple&, const Triple&) = default;
};

struct Norm {
  Qualifier qualifier = Qualifier::Must;
  std::vector<Triple> triples;

  bool mentions_role(const std::string& role) const;
  friend bool operator==(const Norm&, const Norm&) = default;
};

/// Abstract social context: roles, acts, artifacts and the norms over them.
/// Immutable after construction; declaration order of roles/acts/arts is
/// preserved and is significant (observation layouts and fingerprints use it).
struct Institution {
  std::string name;
  std::vector<std::string> roles;
  std::vector<std::string> acts;
  std::vector<std::string> arts;
  std::vector<Norm> norms;

  bool has_role(const std::string& id) const;
  bool has_act(const std::string& id) const;
  bool has_art(const std::string& id) const;

  /// Hash over the ordered act and art lists. Two institutions with the same
  /// fingerprint induce identical abstract observation layouts.
  std::string category_fingerprint() const;

  friend bool operator==(const Institution&, const Institution&) = default;
};

/// Concrete domain vocabulary: agents, the behaviors they can execute, and
/// the objects present. capabilities maps each agent to its behavior set.
struct DomainVocabulary {
  std::vector<std::string> agents;
  std::vector<std::string> behaviors;
  std::vector<std::string> objects;
  std::map<std::string, std::set<std::string>> capabilities;

  bool can(const std::string& agent, const std::string& behavior) const;
  bool has_agent(const std::string& id) const;
};

/// The three grounding relations, stored as id -> grounded-entity list with
/// list order preserved from the source document.
struct Grounding {
  std::map<std::string, std::vector<std::string>> roles;  // role -> agents
  std::map<std::string, std::vector<std::string>> acts;   // act  -> behaviors
  std::map<std::string, std::vector<std::string>> arts;   // art  -> objects

  friend bool operator==(const Grounding&, const Grounding&) = default;
};

// Projections of the grounding relations. The identifier must be declared in
// the institution; a declared but ungrounded identifier projects to an empty
// set. Throws ParseError for undeclared identifiers.
std::vector<std::string> agents_of_role(const Grounding& g, const Institution& inst,
                                        const std::string& role);
std::vector<std::string> behaviors_of_act(const Grounding& g, const Institution& inst,
                                          const std::string& act);
std::vector<std::string> objects_of_art(const Grounding& g, const Institution& inst,
                                        const std::string& art);

/// Is any grounded object/agent bound to this art (or role-valued art)?
bool grounds_object(const Grounding& g, const std::string& object);

struct AdmissibilityReport {
  bool ok = true;
  std::vector<std::string> violations;
};

/// Structural admissibility: every role grounded to at least one agent, and
/// for every (role, agent) pair, every act appearing with that role in some
/// norm triple must be executable by the agent through at least one grounded
/// behavior in its capabilities.
AdmissibilityReport check_admissible(const Grounding& g, const Institution& inst,
                                     const DomainVocabulary& dom);

/// Referential well-formedness of a grounding against institution + domain.
AdmissibilityReport check_wellformed(const Grounding& g, const Institution& inst,
                                     const DomainVocabulary& dom);

// JSON document parsing/serialization. Parsers reject unknown keys,
// undeclared identifiers, arity mismatches and duplicate norms; messages
// carry the failing position or identifier. Serialization round-trips
// field-for-field.
Institution parse_institution(const std::string& json_text);
std::string serialize_institution(const Institution& inst);
DomainVocabulary parse_domain(const std::string& json_text);
std::string serialize_domain(const DomainVocabulary& dom);
Grounding parse_grounding(const std::string& json_text);
std::string serialize_grounding(const Grounding& g);

Institution load_institution(const std::filesystem::path& file);
DomainVocabulary load_domain(const std::filesystem::path& file);
Grounding load_grounding(const std::filesystem::path& file);

/// Non-fatal issues, e.g. an institution with no norms.
std::vector<std::string> validate_institution(const Institution& inst);

}  // namespace normrl
