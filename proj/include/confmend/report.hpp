#pragma once

#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "confmend/adjust.hpp"
#include "confmend/group.hpp"
#include "confmend/model.hpp"
#include "confmend/propagate.hpp"
#include "confmend/validate.hpp"

namespace confmend {

inline nlohmann::json value_to_json(const Value& v) {
  switch (v.kind()) {
    case Kind::Bool: return v.as_bool();
    case Kind::Int: return v.as_int();
    case Kind::Enum: return v.as_label();
  }
  return nullptr;
}

// Stable machine output: keys are alphabetically ordered by construction
// (nlohmann::json objects sort keys), values never carry floats, and the
// wall time is zeroed unless timings are requested, so two runs over the
// same inputs emit identical bytes.
inline nlohmann::json stats_to_json(const EngineStats& stats, bool include_timings) {
  nlohmann::json j;
  j["changed_entities"] = stats.changed_entities;
  j["entities_visited"] = stats.entities_visited;
  j["nodes_expanded"] = stats.nodes_expanded;
  j["paths_enumerated"] = stats.paths_enumerated;
  j["solver_calls"] = stats.solver_calls;
  j["wall_time_us"] = include_timings ? stats.wall_time_us : 0;
  return j;
}

inline nlohmann::json outcome_to_json(const AdjustOutcome& outcome,
                                      const ConfigurationModel& original,
                                      bool include_timings = false) {
  nlohmann::json j;
  if (outcome.verdict == AdjustOutcome::Verdict::Adjusted &&
      outcome.report.verdict == ValidationReport::Verdict::Accepted)
    j["verdict"] = "accepted";
  else
    j["verdict"] = to_string(outcome.verdict);

  nlohmann::json changes = nlohmann::json::object();
  for (const auto& [ref, value] : outcome.solution.assignment) {
    nlohmann::json entry;
    entry["from"] = value_to_json(original.value_of(ref));
    entry["to"] = value_to_json(value);
    changes[ref.to_string()] = entry;
  }
  j["changes"] = changes;
  j["stats"] = stats_to_json(outcome.stats, include_timings);

  if (outcome.verdict == AdjustOutcome::Verdict::Rejected) {
    nlohmann::json violated = nlohmann::json::array();
    for (const ConstraintId& cid : outcome.report.rejected_fconstraints)
      violated.push_back(cid);
    j["rejected_constraints"] = violated;
  }
  if (outcome.unsolvable_group) j["unsolvable_group"] = *outcome.unsolvable_group;
  return j;
}

inline nlohmann::json validation_to_json(const ValidationReport& report) {
  nlohmann::json j;
  j["verdict"] = to_string(report.verdict);
  j["incomplete_change_set"] = report.incomplete_change_set;
  j["violated_constraints"] = report.violated_constraint_set;
  j["rejected_constraints"] = report.rejected_fconstraints;
  return j;
}

// One line per complementary change: "Entity.attr: old -> new".
inline std::vector<std::string> change_report(const AdjustOutcome& outcome,
                                              const ConfigurationModel& original) {
  std::vector<std::string> lines;
  for (const auto& [ref, value] : outcome.solution.assignment)
    lines.push_back(ref.to_string() + ": " + original.value_of(ref).to_string() +
                    " -> " + value.to_string());
  return lines;
}

inline std::string dot_graph(const ConfigurationModel& model,
                             const CompulsionGraph& graph,
                             const std::vector<PropagationScope>& scopes = {}) {
  std::ostringstream out;
  out << "digraph compulsion {\n";
  out << "  rankdir=LR;\n";
  for (const auto& [eid, ent] : model.entities) {
    (void)ent;
    bool in_scope = false;
    for (const PropagationScope& s : scopes)
      if (s.entities.count(eid)) in_scope = true;
    out << "  \"" << eid << "\"";
    if (in_scope) out << " [style=filled, fillcolor=lightgoldenrod]";
    out << ";\n";
  }
  for (const auto& [from, succs] : graph.edges)
    for (const EntityId& to : succs)
      out << "  \"" << from << "\" -> \"" << to << "\";\n";
  for (const PropagationScope& s : scopes)
    out << "  // scope of " << s.violated << " from " << s.infringing << "\n";
  out << "}\n";
  return out.str();
}

// Indented text dump of the validation verdict, scopes, paths and groups for
// one bundle against one model.
inline std::string inspect_dump(const ConfigurationModel& model,
                                const ChangeBundle& bundle,
                                std::size_t path_cap = kDefaultPathCap) {
  std::ostringstream out;
  ValidationReport report = validate(model, bundle);
  out << "verdict: " << to_string(report.verdict) << "\n";
  if (report.verdict == ValidationReport::Verdict::Rejected) {
    out << "violated follower constraints:\n";
    for (const ConstraintId& cid : report.rejected_fconstraints)
      out << "  " << cid << "\n";
    return out.str();
  }
  if (report.verdict == ValidationReport::Verdict::Accepted) return out.str();

  out << "incomplete change set:";
  for (const EntityId& e : report.incomplete_change_set) out << " " << e;
  out << "\nviolated constraints:";
  for (const ConstraintId& c : report.violated_constraint_set) out << " " << c;
  out << "\n";

  ConfigurationModel overlay = apply_changes(model, bundle.changes);
  CompulsionGraph graph = compulsion_graph(overlay);
  std::vector<PropagationScope> scopes;
  for (const ConstraintId& violated : report.violated_constraint_set) {
    EntityId infringing = detail::pick_infringing(model, bundle, violated);
    PropagationScope scope = propagation_scope(overlay, graph, infringing, violated);
    out << "scope of " << violated << " (infringing " << infringing << ")\n";
    out << "  entities:";
    for (const EntityId& e : scope.entities) out << " " << e;
    out << "\n  constraints:";
    for (const ConstraintId& c : scope.constraints) out << " " << c;
    out << "\n";
    try {
      PathCollection paths = path_collection(overlay, graph, scope, path_cap);
      for (const Path& p : paths.paths)
        out << "  path " << detail::join_path(p.entities) << "\n";
    } catch (const PathExplosionError&) {
      out << "  paths: enumeration cap exceeded\n";
    }
    scopes.push_back(std::move(scope));
  }

  GroupingResult grouping = group_scopes(scopes);
  for (std::size_t i = 0; i < grouping.groups.size(); ++i) {
    const Group& g = grouping.groups[i];
    out << "group " << g.id() << " (" << g.scopes.size() << " scope"
        << (g.scopes.size() == 1 ? "" : "s") << ")\n";
    out << "  entities:";
    for (const EntityId& e : g.entities) out << " " << e;
    out << "\n  intersect:";
    for (const EntityId& e : grouping.intersects[i].entities) out << " " << e;
    out << "\n";
  }
  return out.str();
}

}  // namespace confmend
