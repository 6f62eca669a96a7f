#pragma once

#include <chrono>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "confmend/group.hpp"
#include "confmend/model.hpp"
#include "confmend/propagate.hpp"
#include "confmend/solver.hpp"
#include "confmend/validate.hpp"

namespace confmend {

enum class Strategy { Overall, GroupBased, TotalChange };

inline const char* to_string(Strategy s) {
  switch (s) {
    case Strategy::Overall: return "overall";
    case Strategy::GroupBased: return "group_based";
    case Strategy::TotalChange: return "total_change";
  }
  return "?";
}

// Complementary changes only: attributes whose value differs from the model
// after the bundle is applied. Never touches a bundle attribute or any
// attribute of an infringing entity.
struct Solution {
  std::map<AttributeRef, Value> assignment;
  std::size_t changed_entities = 0;
};

struct GroupRun {
  std::string group_id;
  std::size_t solver_calls = 0;
  std::size_t nodes_expanded = 0;
  bool solved = false;
};

struct EngineStats {
  std::size_t solver_calls = 0;
  std::size_t nodes_expanded = 0;
  std::size_t entities_visited = 0;
  std::size_t paths_enumerated = 0;
  std::size_t changed_entities = 0;
  std::int64_t wall_time_us = 0;
  std::vector<GroupRun> group_runs;
};

struct AdjustOutcome {
  enum class Verdict { Adjusted, Unadjustable, Rejected };

  Verdict verdict = Verdict::Adjusted;
  ValidationReport report;
  Solution solution;
  std::vector<Solution> partial_solutions;
  std::optional<std::string> unsolvable_group;
  EngineStats stats;
  std::vector<std::string> trace;
};

inline const char* to_string(AdjustOutcome::Verdict v) {
  switch (v) {
    case AdjustOutcome::Verdict::Adjusted: return "adjusted";
    case AdjustOutcome::Verdict::Unadjustable: return "unadjustable";
    case AdjustOutcome::Verdict::Rejected: return "rejected";
  }
  return "?";
}

struct AdjustOptions {
  std::size_t path_cap = kDefaultPathCap;
  bool trace = false;
};

namespace detail {

inline std::string join_ids(const std::set<std::string>& ids) {
  std::string out = "{";
  bool first = true;
  for (const auto& id : ids) {
    if (!first) out += ",";
    out += id;
    first = false;
  }
  return out + "}";
}

inline std::string join_path(const std::vector<EntityId>& path) {
  std::string out = "[";
  for (std::size_t i = 0; i < path.size(); ++i) {
    if (i) out += " > ";
    out += path[i];
  }
  return out + "]";
}

}  // namespace detail

// Builds and runs solve problems against the bundle-overlaid model. Frozen
// attributes (the bundle's own values plus every attribute of an infringing
// entity) are never offered as free variables.
class EngineContext {
 public:
  EngineContext(const ConfigurationModel& overlay, std::set<AttributeRef> frozen,
                std::vector<std::string>* trace)
      : overlay_(overlay), frozen_(std::move(frozen)), trace_(trace) {}

  const ConfigurationModel& overlay() const { return overlay_; }
  SolverStats& solver_stats() { return solver_stats_; }

  void note(const std::string& line) {
    if (trace_) trace_->push_back(line);
  }

  SolveResult run(const std::set<ConstraintId>& constraint_ids,
                  const std::set<EntityId>& free_entities) {
    SolveProblem problem;
    for (const ConstraintId& cid : constraint_ids)
      problem.constraints.push_back(overlay_.constraints.at(cid));

    for (const EntityId& e : free_entities) {
      const Entity& ent = overlay_.entities.at(e);
      for (const auto& [name, attr] : ent.attributes) {
        AttributeRef ref{e, name};
        if (frozen_.count(ref)) continue;
        problem.free.insert(ref);
        problem.domains.emplace(ref, attr.domain);
        problem.seed.emplace(ref, attr.value);
      }
    }
    for (const Constraint& c : problem.constraints)
      for (const AttributeRef& r : refs(c.expr))
        if (!problem.free.count(r)) problem.fixed.emplace(r, overlay_.value_of(r));

    return solve(problem, solver_stats_);
  }

 private:
  const ConfigurationModel& overlay_;
  std::set<AttributeRef> frozen_;
  std::vector<std::string>* trace_;
  SolverStats solver_stats_;
};

// Depth-first incremental propagation over one scope. Paths are tried
// shortest first; along a path, each increment frees the next entity's
// attributes, requires the constraints where it is a follower, and tries to
// also satisfy the constraints where it leads or peers, dropping those to
// the next increment when that fails. A path whose mandatory set cannot be
// satisfied is abandoned; when every path fails the whole scope is solved at
// once.
inline SolveResult incremental_propagation(EngineContext& ctx,
                                           const PropagationScope& scope,
                                           const ConstraintId& violated,
                                           const PathCollection& paths,
                                           const std::set<ConstraintId>& constraint_set) {
  for (const Path& path : paths.paths) {
    std::set<ConstraintId> mandatory{violated};
    std::set<ConstraintId> relax;
    std::set<EntityId> free_entities;
    bool path_unsolvable = false;

    for (std::size_t i = 1; i < path.entities.size() && !path_unsolvable; ++i) {
      const EntityId& selected = path.entities[i];
      free_entities.insert(selected);
      for (const ConstraintId& cid : constraint_set) {
        auto role = ctx.overlay().role(selected, cid);
        if (!role) continue;
        if (*role == Role::Follower) mandatory.insert(cid);
        else relax.insert(cid);
      }
      std::set<ConstraintId> both = mandatory;
      both.insert(relax.begin(), relax.end());

      SolveResult full = ctx.run(both, free_entities);
      if (full.sat) {
        ctx.note("  path " + detail::join_path(path.entities) + " increment " +
                 std::to_string(i) + ": selected=" + selected + " mandatory=" +
                 detail::join_ids(mandatory) + " relax=" + detail::join_ids(relax) +
                 " -> sat");
        return full;
      }
      SolveResult mandatory_only = ctx.run(mandatory, free_entities);
      if (!mandatory_only.sat) {
        ctx.note("  path " + detail::join_path(path.entities) + " increment " +
                 std::to_string(i) + ": selected=" + selected + " mandatory=" +
                 detail::join_ids(mandatory) + " relax=" + detail::join_ids(relax) +
                 " -> path unsolvable");
        path_unsolvable = true;
      } else {
        ctx.note("  path " + detail::join_path(path.entities) + " increment " +
                 std::to_string(i) + ": selected=" + selected + " mandatory=" +
                 detail::join_ids(mandatory) + " relax=" + detail::join_ids(relax) +
                 " -> relax dropped");
        mandatory = std::move(both);
        relax.clear();
      }
    }
  }

  std::set<ConstraintId> full_set = constraint_set;
  full_set.insert(violated);
  std::set<EntityId> free_entities = scope.entities;
  free_entities.erase(scope.infringing);
  SolveResult fallback = ctx.run(full_set, free_entities);
  ctx.note(std::string("  whole-scope fallback -> ") + (fallback.sat ? "sat" : "unsat"));
  return fallback;
}

// Path bonding for a group with several scopes: every path touching the
// group's intersect is bonded into one problem whose mandatory set holds all
// constraints of the bonded entities. If that fails, the whole group is
// solved instead.
inline SolveResult bond_paths(EngineContext& ctx, const Group& group,
                              const Intersect& intersect,
                              const std::vector<const PathCollection*>& collections,
                              const std::set<EntityId>& incomplete_change_set,
                              const std::set<ConstraintId>& constraint_set) {
  std::set<EntityId> bonded;
  for (const PathCollection* collection : collections) {
    for (const Path& path : collection->paths) {
      bool touches = false;
      for (const EntityId& e : path.entities)
        if (intersect.entities.count(e)) {
          touches = true;
          break;
        }
      if (touches) bonded.insert(path.entities.begin(), path.entities.end());
    }
  }

  if (!bonded.empty()) {
    std::set<ConstraintId> mandatory;
    for (const ConstraintId& cid : constraint_set)
      for (const EntityId& e : bonded)
        if (ctx.overlay().role(e, cid)) {
          mandatory.insert(cid);
          break;
        }
    std::set<EntityId> free_entities = bonded;
    for (const EntityId& e : incomplete_change_set) free_entities.erase(e);
    SolveResult r = ctx.run(mandatory, free_entities);
    ctx.note("  bonded paths entities=" + detail::join_ids(bonded) + " mandatory=" +
             detail::join_ids(mandatory) + std::string(" -> ") +
             (r.sat ? "sat" : "unsat"));
    if (r.sat) return r;
  } else {
    ctx.note("  no path touches the intersect; widening directly");
  }

  std::set<ConstraintId> mandatory;
  for (const ConstraintId& cid : constraint_set)
    for (const EntityId& e : group.entities)
      if (ctx.overlay().role(e, cid)) {
        mandatory.insert(cid);
        break;
      }
  std::set<EntityId> free_entities = group.entities;
  for (const EntityId& e : incomplete_change_set) free_entities.erase(e);
  SolveResult r = ctx.run(mandatory, free_entities);
  ctx.note(std::string("  widened whole-group solve -> ") + (r.sat ? "sat" : "unsat"));
  return r;
}

namespace detail {

inline Solution to_solution(const SolveResult& result,
                            const ConfigurationModel& overlay) {
  Solution s;
  std::set<EntityId> entities;
  for (const auto& [ref, value] : result.assignment) {
    if (overlay.value_of(ref) == value) continue;
    s.assignment.emplace(ref, value);
    entities.insert(ref.entity);
  }
  s.changed_entities = entities.size();
  return s;
}

inline EntityId pick_infringing(const ConfigurationModel& model,
                                const ChangeBundle& bundle,
                                const ConstraintId& violated) {
  for (const EntityId& e : bundle.changed_entities()) {
    auto r = model.role(e, violated);
    if (r && (*r == Role::Leader || *r == Role::Peer)) return e;
  }
  throw NotInfringingError("no infringing entity for constraint '" + violated + "'");
}

}  // namespace detail

// The full adjustment pipeline: validate, compute one scope per violated
// constraint, group overlapping scopes, then resolve groups in order of
// their smallest violated-constraint id. Group resolution stops at the first
// unsolvable group. The three strategies share validation and grouping but
// differ in how much of the model each solve may touch.
inline AdjustOutcome adjust(const ConfigurationModel& model,
                            const ChangeBundle& bundle, Strategy strategy,
                            const AdjustOptions& options = {}) {
  auto started = std::chrono::steady_clock::now();
  AdjustOutcome outcome;
  auto finish = [&]() -> AdjustOutcome& {
    outcome.stats.wall_time_us = std::chrono::duration_cast<std::chrono::microseconds>(
                                     std::chrono::steady_clock::now() - started)
                                     .count();
    return outcome;
  };

  outcome.report = validate(model, bundle);
  if (outcome.report.verdict == ValidationReport::Verdict::Rejected) {
    outcome.verdict = AdjustOutcome::Verdict::Rejected;
    return finish();
  }
  if (outcome.report.verdict == ValidationReport::Verdict::Accepted) {
    outcome.verdict = AdjustOutcome::Verdict::Adjusted;
    return finish();
  }

  ConfigurationModel overlay = apply_changes(model, bundle.changes);
  std::set<AttributeRef> frozen;
  for (const auto& [ref, v] : bundle.changes) {
    (void)v;
    frozen.insert(ref);
  }
  for (const EntityId& e : outcome.report.incomplete_change_set)
    for (const auto& [name, attr] : overlay.entities.at(e).attributes) {
      (void)attr;
      frozen.insert(AttributeRef{e, name});
    }

  EngineContext ctx(overlay, std::move(frozen),
                    options.trace ? &outcome.trace : nullptr);

  if (strategy == Strategy::TotalChange) {
    // Everything the changed entities can impact directly or transitively
    // through shared constraints, with no role information.
    std::set<EntityId> reached = bundle.changed_entities();
    outcome.stats.entities_visited += reached.size();
    std::set<ConstraintId> constraint_ids;
    bool grew = true;
    while (grew) {
      grew = false;
      for (const auto& [cid, c] : overlay.constraints) {
        if (constraint_ids.count(cid)) continue;
        bool touches = false;
        for (const EntityId& p : c.participants)
          if (reached.count(p)) {
            touches = true;
            break;
          }
        if (!touches) continue;
        constraint_ids.insert(cid);
        for (const EntityId& p : c.participants)
          if (reached.insert(p).second) {
            ++outcome.stats.entities_visited;
            grew = true;
          }
      }
    }
    std::set<EntityId> free_entities = reached;
    for (const EntityId& e : outcome.report.incomplete_change_set)
      free_entities.erase(e);
    SolveResult r = ctx.run(constraint_ids, free_entities);
    outcome.stats.solver_calls = ctx.solver_stats().calls;
    outcome.stats.nodes_expanded = ctx.solver_stats().nodes_expanded;
    if (!r.sat) {
      outcome.verdict = AdjustOutcome::Verdict::Unadjustable;
      return finish();
    }
    outcome.solution = detail::to_solution(r, overlay);
    outcome.stats.changed_entities = outcome.solution.changed_entities;
    outcome.verdict = AdjustOutcome::Verdict::Adjusted;
    return finish();
  }

  CompulsionGraph graph = compulsion_graph(overlay);
  TraversalCounters counters;

  std::vector<PropagationScope> scopes;
  std::map<ConstraintId, PathCollection> collections;
  for (const ConstraintId& violated : outcome.report.violated_constraint_set) {
    EntityId infringing = detail::pick_infringing(model, bundle, violated);
    PropagationScope scope =
        propagation_scope(overlay, graph, infringing, violated, &counters);
    if (strategy == Strategy::Overall) {
      try {
        PathCollection paths =
            path_collection(overlay, graph, scope, options.path_cap, &counters);
        outcome.stats.paths_enumerated += paths.paths.size();
        collections.emplace(violated, std::move(paths));
      } catch (const PathExplosionError&) {
        // Fall back to whole-scope solving for this scope.
        outcome.stats.paths_enumerated += options.path_cap + 1;
        collections.emplace(violated,
                            PathCollection{scope.infringing, violated, {}});
        ctx.note("scope " + violated + ": path cap exceeded, whole-scope fallback");
      }
    }
    scopes.push_back(std::move(scope));
  }
  outcome.stats.entities_visited += counters.scope_visits + counters.path_visits;

  GroupingResult grouping = group_scopes(scopes);

  std::vector<std::size_t> order(grouping.groups.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return grouping.groups[a].id() < grouping.groups[b].id();
  });

  for (std::size_t idx : order) {
    const Group& group = grouping.groups[idx];
    const Intersect& intersect = grouping.intersects[idx];

    std::set<ConstraintId> universe = group.constraints;
    for (const PropagationScope& s : group.scopes) universe.insert(s.violated);

    std::size_t calls_before = ctx.solver_stats().calls;
    std::size_t nodes_before = ctx.solver_stats().nodes_expanded;

    SolveResult r;
    if (strategy == Strategy::GroupBased) {
      ctx.note("group " + group.id() + ": whole-group solve");
      std::set<EntityId> free_entities = group.entities;
      for (const EntityId& e : outcome.report.incomplete_change_set)
        free_entities.erase(e);
      r = ctx.run(universe, free_entities);
    } else if (group.scopes.size() == 1) {
      const PropagationScope& scope = group.scopes.front();
      ctx.note("group " + group.id() + ": incremental propagation, scope of " +
               scope.violated + " from " + scope.infringing);
      r = incremental_propagation(ctx, scope, scope.violated,
                                  collections.at(scope.violated), universe);
    } else {
      ctx.note("group " + group.id() + ": path bonding, intersect=" +
               detail::join_ids(intersect.entities));
      std::vector<const PathCollection*> group_collections;
      for (const PropagationScope& s : group.scopes)
        group_collections.push_back(&collections.at(s.violated));
      r = bond_paths(ctx, group, intersect, group_collections,
                     outcome.report.incomplete_change_set, universe);
    }

    outcome.stats.group_runs.push_back(
        GroupRun{group.id(), ctx.solver_stats().calls - calls_before,
                 ctx.solver_stats().nodes_expanded - nodes_before, r.sat});

    if (!r.sat) {
      outcome.verdict = AdjustOutcome::Verdict::Unadjustable;
      outcome.unsolvable_group = group.id();
      outcome.solution = Solution{};
      outcome.partial_solutions.clear();
      outcome.stats.solver_calls = ctx.solver_stats().calls;
      outcome.stats.nodes_expanded = ctx.solver_stats().nodes_expanded;
      return finish();
    }

    Solution partial = detail::to_solution(r, overlay);
    for (const auto& [ref, value] : partial.assignment) {
      if (!group.entities.count(ref.entity))
        throw Error("solution touches entity outside its group: " +
                    ref.to_string());
      outcome.solution.assignment[ref] = value;
    }
    outcome.partial_solutions.push_back(std::move(partial));
  }

  outcome.stats.solver_calls = ctx.solver_stats().calls;
  outcome.stats.nodes_expanded = ctx.solver_stats().nodes_expanded;

  std::set<EntityId> touched;
  for (const auto& [ref, value] : outcome.solution.assignment) {
    (void)value;
    touched.insert(ref.entity);
  }
  outcome.solution.changed_entities = touched.size();
  outcome.stats.changed_entities = touched.size();

  // Group solutions are solved against frozen values of other groups; a
  // constraint coupling two groups without a shared entity can in rare
  // shapes invalidate the union. Re-check and refuse rather than emit an
  // inconsistent adjustment.
  if (!is_consistent(apply_changes(overlay, outcome.solution.assignment))) {
    ctx.note("union of group solutions violates a cross-group constraint; "
             "reporting unadjustable");
    outcome.verdict = AdjustOutcome::Verdict::Unadjustable;
    outcome.solution = Solution{};
    outcome.partial_solutions.clear();
    outcome.stats.changed_entities = 0;
    return finish();
  }

  outcome.verdict = AdjustOutcome::Verdict::Adjusted;
  return finish();
}

}  // namespace confmend
