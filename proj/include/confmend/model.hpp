#pragma once

#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "confmend/errors.hpp"
#include "confmend/expr.hpp"
#include "confmend/values.hpp"

namespace confmend {

using EntityId = std::string;
using ConstraintId = std::string;

enum class Role { Leader, Follower, Peer };

inline const char* to_string(Role r) {
  switch (r) {
    case Role::Leader: return "leader";
    case Role::Follower: return "follower";
    case Role::Peer: return "peer";
  }
  return "?";
}

struct Attribute {
  Domain domain;
  Value value;

  bool operator==(const Attribute&) const = default;
};

struct Entity {
  EntityId id;
  std::map<std::string, Attribute> attributes;

  bool operator==(const Entity&) const = default;
};

// A boolean expression over attribute references. Participants are the
// entities of the expression's references, derived once at construction.
struct Constraint {
  ConstraintId id;
  Expr expr;
  std::set<EntityId> participants;

  static Constraint make(ConstraintId cid, Expr e) {
    Constraint c;
    c.id = std::move(cid);
    c.expr = std::move(e);
    for (const AttributeRef& r : refs(c.expr)) c.participants.insert(r.entity);
    return c;
  }

  bool operator==(const Constraint&) const = default;
};

struct WellformednessError {
  ConstraintId constraint;
  std::string rule;
  std::string message;

  bool operator==(const WellformednessError&) const = default;
};

// Thrown by parse_model when the parsed document violates role rules.
struct WellformednessFailure : Error {
  std::vector<WellformednessError> errors;

  explicit WellformednessFailure(std::vector<WellformednessError> errs)
      : Error(format(errs)), errors(std::move(errs)) {}

 private:
  static std::string format(const std::vector<WellformednessError>& errs) {
    std::string out = "model is not wellformed:";
    for (const auto& e : errs) out += "\n  " + e.constraint + ": " + e.message;
    return out;
  }
};

// The configuration model: entities with typed finite-domain attributes,
// constraints, and a per-constraint role for each participating entity.
// Immutable after construction; every mutation returns a new model.
struct ConfigurationModel {
  std::map<EntityId, Entity> entities;
  std::map<ConstraintId, Constraint> constraints;
  std::map<ConstraintId, std::map<EntityId, Role>> roles;

  std::optional<Role> role(const EntityId& e, const ConstraintId& c) const {
    auto ci = roles.find(c);
    if (ci == roles.end()) return std::nullopt;
    auto ei = ci->second.find(e);
    if (ei == ci->second.end()) return std::nullopt;
    return ei->second;
  }

  const Attribute* find_attribute(const AttributeRef& r) const {
    auto ei = entities.find(r.entity);
    if (ei == entities.end()) return nullptr;
    auto ai = ei->second.attributes.find(r.attribute);
    if (ai == ei->second.attributes.end()) return nullptr;
    return &ai->second;
  }

  const Attribute& attribute(const AttributeRef& r) const {
    const Attribute* a = find_attribute(r);
    if (!a) throw UnknownAttributeError("unknown attribute " + r.to_string());
    return *a;
  }

  Value value_of(const AttributeRef& r) const { return attribute(r).value; }
  const Domain& domain_of(const AttributeRef& r) const { return attribute(r).domain; }

  std::map<AttributeRef, Value> current_values() const {
    std::map<AttributeRef, Value> env;
    for (const auto& [eid, ent] : entities)
      for (const auto& [name, attr] : ent.attributes)
        env.emplace(AttributeRef{eid, name}, attr.value);
    return env;
  }

  bool operator==(const ConfigurationModel&) const = default;
};

// A requested set of changes, applied atomically as one unit.
struct ChangeBundle {
  std::map<AttributeRef, Value> changes;

  std::set<EntityId> changed_entities() const {
    std::set<EntityId> out;
    for (const auto& [ref, v] : changes) out.insert(ref.entity);
    return out;
  }
};

// Role rules:
//  - a constraint with a leader has at least one follower and no peer;
//  - a constraint with a peer has only peers;
//  - role entries and expression participants name the same entities.
inline std::vector<WellformednessError> check_wellformed(
    const ConfigurationModel& model) {
  std::vector<WellformednessError> errors;

  for (const auto& [cid, table] : model.roles) {
    if (!model.constraints.count(cid))
      errors.push_back({cid, "role-unknown-constraint",
                        "roles declared for unknown constraint '" + cid + "'"});
    for (const auto& [eid, role] : table) {
      (void)role;
      if (!model.entities.count(eid))
        errors.push_back({cid, "role-unknown-entity",
                          "role declared for unknown entity '" + eid + "'"});
    }
  }

  for (const auto& [cid, c] : model.constraints) {
    auto ri = model.roles.find(cid);
    const std::map<EntityId, Role> empty;
    const std::map<EntityId, Role>& table = ri == model.roles.end() ? empty : ri->second;

    for (const EntityId& p : c.participants)
      if (!table.count(p))
        errors.push_back({cid, "role-participant-mismatch",
                          "participant '" + p + "' has no role in constraint '" +
                              cid + "'"});
    for (const auto& [eid, role] : table) {
      (void)role;
      if (!c.participants.count(eid))
        errors.push_back({cid, "role-participant-mismatch",
                          "entity '" + eid + "' has a role in constraint '" + cid +
                              "' but does not appear in its expression"});
    }

    bool has_leader = false, has_follower = false, has_peer = false;
    for (const auto& [eid, role] : table) {
      (void)eid;
      if (role == Role::Leader) has_leader = true;
      if (role == Role::Follower) has_follower = true;
      if (role == Role::Peer) has_peer = true;
    }
    if (has_leader && !has_follower)
      errors.push_back({cid, "leader-without-follower",
                        "constraint '" + cid + "' has a leader but no follower"});
    if (has_leader && has_peer)
      errors.push_back({cid, "leader-with-peer",
                        "constraint '" + cid + "' mixes leader and peer roles"});
    if (has_peer && (has_leader || has_follower))
      errors.push_back({cid, "mixed-peer",
                        "constraint '" + cid +
                            "' has a peer entity but not all participants are peers"});
  }
  return errors;
}

// Returns a new model with the assigned attributes replaced; the input model
// is untouched.
inline ConfigurationModel apply_changes(
    const ConfigurationModel& model,
    const std::map<AttributeRef, Value>& assignment) {
  ConfigurationModel out = model;
  for (const auto& [ref, value] : assignment) {
    auto ei = out.entities.find(ref.entity);
    if (ei == out.entities.end())
      throw UnknownAttributeError("unknown entity " + ref.entity);
    auto ai = ei->second.attributes.find(ref.attribute);
    if (ai == ei->second.attributes.end())
      throw UnknownAttributeError("unknown attribute " + ref.to_string());
    if (!ai->second.domain.admits(value))
      throw InadmissibleValueError("value " + value.to_string() +
                                   " is not admissible for " + ref.to_string() +
                                   " : " + ai->second.domain.to_string());
    ai->second.value = value;
  }
  return out;
}

inline bool is_consistent(const ConfigurationModel& model) {
  auto env = model.current_values();
  for (const auto& [cid, c] : model.constraints) {
    (void)cid;
    if (!eval(c.expr, env).as_bool()) return false;
  }
  return true;
}

// Canonical text form, ordered by identifier throughout; parsing the output
// reproduces the model exactly.
inline std::string serialize(const ConfigurationModel& model) {
  std::ostringstream out;
  for (const auto& [eid, ent] : model.entities) {
    out << "entity " << eid << " {\n";
    for (const auto& [name, attr] : ent.attributes)
      out << "  " << name << ": " << attr.domain.to_string() << " = "
          << attr.value.to_string() << "\n";
    out << "}\n";
  }
  for (const auto& [cid, c] : model.constraints) {
    out << "constraint " << cid << " roles(";
    auto ri = model.roles.find(cid);
    bool first = true;
    if (ri != model.roles.end()) {
      for (const auto& [eid, role] : ri->second) {
        if (!first) out << ", ";
        out << eid << ": " << to_string(role);
        first = false;
      }
    }
    out << ") {\n  " << expr_to_string(c.expr) << "\n}\n";
  }
  return out.str();
}

}  // namespace confmend
