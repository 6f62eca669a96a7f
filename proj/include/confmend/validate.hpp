#pragma once

#include <map>
#include <set>
#include <string>

#include "confmend/model.hpp"

namespace confmend {

// Constraints relevant to a change bundle, split by the role the changed
// entities hold in them. A constraint can land in several categories when
// different changed entities hold different roles in it; constraints with no
// changed participant appear nowhere.
struct ConstraintCategories {
  std::set<ConstraintId> lconstraints;
  std::set<ConstraintId> fconstraints;
  std::set<ConstraintId> pconstraints;
};

struct ValidationReport {
  enum class Verdict { Accepted, Rejected, NeedsAdjustment };

  Verdict verdict = Verdict::Accepted;
  std::set<ConstraintId> rejected_fconstraints;  // violated follower constraints
  std::set<EntityId> incomplete_change_set;
  std::set<ConstraintId> violated_constraint_set;
  std::size_t constraints_evaluated = 0;
};

inline const char* to_string(ValidationReport::Verdict v) {
  switch (v) {
    case ValidationReport::Verdict::Accepted: return "accepted";
    case ValidationReport::Verdict::Rejected: return "rejected";
    case ValidationReport::Verdict::NeedsAdjustment: return "needs-adjustment";
  }
  return "?";
}

inline ConstraintCategories categorize(const ConfigurationModel& model,
                                       const ChangeBundle& bundle) {
  for (const auto& [ref, v] : bundle.changes) {
    (void)v;
    model.attribute(ref);  // throws UnknownAttributeError
  }
  ConstraintCategories cats;
  for (const EntityId& e : bundle.changed_entities()) {
    for (const auto& [cid, table] : model.roles) {
      auto it = table.find(e);
      if (it == table.end()) continue;
      switch (it->second) {
        case Role::Leader: cats.lconstraints.insert(cid); break;
        case Role::Follower: cats.fconstraints.insert(cid); break;
        case Role::Peer: cats.pconstraints.insert(cid); break;
      }
    }
  }
  return cats;
}

// Partial validation: only constraints with a changed participant are
// evaluated, follower constraints first. Any violated follower constraint
// rejects the bundle outright; leader/peer violations mark the bundle as
// needing adjustment and identify the infringing entities.
inline ValidationReport validate(const ConfigurationModel& model,
                                 const ChangeBundle& bundle) {
  ConstraintCategories cats = categorize(model, bundle);
  ConfigurationModel overlay = apply_changes(model, bundle.changes);
  auto env = overlay.current_values();

  ValidationReport report;

  for (const ConstraintId& cid : cats.fconstraints) {
    ++report.constraints_evaluated;
    if (!eval(model.constraints.at(cid).expr, env).as_bool())
      report.rejected_fconstraints.insert(cid);
  }
  if (!report.rejected_fconstraints.empty()) {
    report.verdict = ValidationReport::Verdict::Rejected;
    return report;
  }

  std::set<ConstraintId> lp = cats.lconstraints;
  lp.insert(cats.pconstraints.begin(), cats.pconstraints.end());
  for (const ConstraintId& cid : lp) {
    ++report.constraints_evaluated;
    if (!eval(model.constraints.at(cid).expr, env).as_bool())
      report.violated_constraint_set.insert(cid);
  }

  if (report.violated_constraint_set.empty()) {
    report.verdict = ValidationReport::Verdict::Accepted;
    return report;
  }

  report.verdict = ValidationReport::Verdict::NeedsAdjustment;
  for (const EntityId& e : bundle.changed_entities()) {
    for (const ConstraintId& cid : report.violated_constraint_set) {
      auto r = model.role(e, cid);
      if (r && (*r == Role::Leader || *r == Role::Peer)) {
        report.incomplete_change_set.insert(e);
        break;
      }
    }
  }
  return report;
}

}  // namespace confmend
