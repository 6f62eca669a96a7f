#pragma once

#include <algorithm>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "confmend/errors.hpp"
#include "confmend/model.hpp"

namespace confmend {

inline constexpr std::size_t kDefaultPathCap = 10'000;

// Directed influence between entities: a leader compels each follower of the
// same constraint, and peers compel each other. Reachability questions are
// answered over the transitive closure of these direct edges.
struct CompulsionGraph {
  std::map<EntityId, std::set<EntityId>> edges;

  const std::set<EntityId>& successors(const EntityId& e) const {
    static const std::set<EntityId> empty;
    auto it = edges.find(e);
    return it == edges.end() ? empty : it->second;
  }

  std::set<EntityId> reachable_from(const EntityId& start) const {
    std::set<EntityId> seen;
    std::vector<EntityId> stack{start};
    while (!stack.empty()) {
      EntityId e = stack.back();
      stack.pop_back();
      for (const EntityId& s : successors(e))
        if (seen.insert(s).second) stack.push_back(s);
    }
    return seen;
  }

  bool reaches(const EntityId& a, const EntityId& b) const {
    return reachable_from(a).count(b) > 0;
  }
};

inline CompulsionGraph compulsion_graph(const ConfigurationModel& model) {
  CompulsionGraph g;
  for (const auto& [cid, table] : model.roles) {
    (void)cid;
    for (const auto& [a, ra] : table) {
      for (const auto& [b, rb] : table) {
        if (a == b) continue;
        if ((ra == Role::Leader && rb == Role::Follower) ||
            (ra == Role::Peer && rb == Role::Peer))
          g.edges[a].insert(b);
      }
    }
  }
  return g;
}

// Entities holding only follower or peer roles in every constraint they
// participate in; entities with no constraints are excluded.
inline std::set<EntityId> sink_set(const ConfigurationModel& model) {
  std::map<EntityId, bool> participates;  // value: saw a leader role
  for (const auto& [cid, table] : model.roles) {
    (void)cid;
    for (const auto& [eid, role] : table) {
      auto [it, inserted] = participates.emplace(eid, false);
      (void)inserted;
      if (role == Role::Leader) it->second = true;
    }
  }
  std::set<EntityId> sinks;
  for (const auto& [eid, has_leader_role] : participates)
    if (!has_leader_role) sinks.insert(eid);
  return sinks;
}

// The slice of the model a violated constraint's repair may touch: the
// infringing entity, the violated constraint's followers/peers, everything
// compulsion-reachable from them, and every constraint with a participant in
// that slice other than the infringing entity itself.
struct PropagationScope {
  EntityId infringing;
  ConstraintId violated;
  std::set<EntityId> entities;
  std::set<ConstraintId> constraints;
};

struct TraversalCounters {
  std::size_t scope_visits = 0;
  std::size_t path_visits = 0;
};

inline PropagationScope propagation_scope(const ConfigurationModel& model,
                                          const CompulsionGraph& graph,
                                          const EntityId& infringing,
                                          const ConstraintId& violated,
                                          TraversalCounters* counters = nullptr) {
  auto role = model.role(infringing, violated);
  if (!role || *role == Role::Follower)
    throw NotInfringingError("entity '" + infringing +
                             "' is not a leader or peer of constraint '" +
                             violated + "'");

  PropagationScope scope;
  scope.infringing = infringing;
  scope.violated = violated;
  scope.entities.insert(infringing);

  // Depth-first over the violated constraint's followers/peers; the
  // infringing entity may itself be one of the peer seeds.
  std::set<EntityId> visited;
  std::vector<EntityId> stack;
  auto visit = [&](const EntityId& e) {
    if (!visited.insert(e).second) return;
    if (counters) ++counters->scope_visits;
    scope.entities.insert(e);
    stack.push_back(e);
  };
  auto table = model.roles.find(violated);
  if (table != model.roles.end()) {
    for (const auto& [eid, r] : table->second)
      if (r == Role::Follower || r == Role::Peer) visit(eid);
  }
  while (!stack.empty()) {
    EntityId e = stack.back();
    stack.pop_back();
    for (const EntityId& s : graph.successors(e)) visit(s);
  }

  for (const auto& [cid, c] : model.constraints) {
    for (const EntityId& p : c.participants) {
      if (p != infringing && scope.entities.count(p)) {
        scope.constraints.insert(cid);
        break;
      }
    }
  }
  return scope;
}

// A simple chain of direct compulsion edges starting at the infringing
// entity. A path is reported when it cannot be extended inside the scope:
// its terminal is a sink with no outgoing edges or every successor already
// appears on the path.
struct Path {
  std::vector<EntityId> entities;

  bool operator==(const Path&) const = default;
};

struct PathCollection {
  EntityId infringing;
  ConstraintId violated;
  std::vector<Path> paths;  // sorted by length, ties lexicographic
};

inline PathCollection path_collection(const ConfigurationModel& model,
                                      const CompulsionGraph& graph,
                                      const PropagationScope& scope,
                                      std::size_t path_cap = kDefaultPathCap,
                                      TraversalCounters* counters = nullptr) {
  (void)model;
  PathCollection out;
  out.infringing = scope.infringing;
  out.violated = scope.violated;

  std::vector<std::vector<EntityId>> stack;
  stack.push_back({scope.infringing});
  if (counters) ++counters->path_visits;

  while (!stack.empty()) {
    std::vector<EntityId> path = std::move(stack.back());
    stack.pop_back();

    bool extended = false;
    for (const EntityId& s : graph.successors(path.back())) {
      if (!scope.entities.count(s)) continue;
      if (std::find(path.begin(), path.end(), s) != path.end()) continue;
      std::vector<EntityId> next = path;
      next.push_back(s);
      stack.push_back(std::move(next));
      extended = true;
      if (counters) ++counters->path_visits;
    }
    if (!extended) {
      out.paths.push_back(Path{std::move(path)});
      if (out.paths.size() > path_cap)
        throw PathExplosionError("path enumeration exceeded cap of " +
                                 std::to_string(path_cap) + " for constraint '" +
                                 scope.violated + "'");
    }
  }

  std::sort(out.paths.begin(), out.paths.end(), [](const Path& a, const Path& b) {
    if (a.entities.size() != b.entities.size())
      return a.entities.size() < b.entities.size();
    return a.entities < b.entities;
  });
  return out;
}

}  // namespace confmend
