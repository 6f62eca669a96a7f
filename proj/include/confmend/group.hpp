#pragma once

#include <algorithm>
#include <set>
#include <string>
#include <vector>

#include "confmend/propagate.hpp"

namespace confmend {

// A maximal cluster of entity-overlapping propagation scopes. Groups within
// one result are pairwise entity-disjoint.
struct Group {
  std::vector<PropagationScope> scopes;
  std::set<EntityId> entities;
  std::set<ConstraintId> constraints;

  // Smallest violated-constraint id in the group; used as the group's id and
  // as its processing-order key.
  ConstraintId id() const {
    ConstraintId best;
    for (const PropagationScope& s : scopes)
      if (best.empty() || s.violated < best) best = s.violated;
    return best;
  }

  void absorb(const PropagationScope& scope) {
    scopes.push_back(scope);
    entities.insert(scope.entities.begin(), scope.entities.end());
    constraints.insert(scope.constraints.begin(), scope.constraints.end());
  }
};

// Entities shared between at least two scopes of the same group; empty
// exactly when the group holds a single scope.
struct Intersect {
  std::set<EntityId> entities;
};

struct GroupingResult {
  std::vector<Group> groups;
  std::vector<Intersect> intersects;  // parallel to groups
  std::size_t overlap_checks = 0;
};

namespace detail {

inline std::set<EntityId> common_entities(const std::set<EntityId>& a,
                                          const std::set<EntityId>& b) {
  std::set<EntityId> out;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(),
                        std::inserter(out, out.begin()));
  return out;
}

}  // namespace detail

// Each scope joins the first existing group it overlaps; scopes bridging
// several groups merge them into that first group. Scopes overlapping
// nothing open a new group with an empty intersect.
inline GroupingResult group_scopes(const std::vector<PropagationScope>& scopes) {
  GroupingResult result;
  auto& groups = result.groups;
  auto& intersects = result.intersects;

  for (const PropagationScope& scope : scopes) {
    std::size_t joined = groups.size();  // index of the group the scope joined
    for (std::size_t j = 0; j < groups.size(); ++j) {
      ++result.overlap_checks;
      std::set<EntityId> common = detail::common_entities(scope.entities, groups[j].entities);
      if (common.empty()) continue;
      if (joined == groups.size()) {
        intersects[j].entities.insert(common.begin(), common.end());
        groups[j].absorb(scope);
        joined = j;
      } else {
        // The scope bridges two groups: fold group j into the joined one.
        for (const PropagationScope& s : groups[j].scopes) groups[joined].absorb(s);
        intersects[joined].entities.insert(intersects[j].entities.begin(),
                                           intersects[j].entities.end());
        intersects[joined].entities.insert(common.begin(), common.end());
        groups.erase(groups.begin() + static_cast<std::ptrdiff_t>(j));
        intersects.erase(intersects.begin() + static_cast<std::ptrdiff_t>(j));
        --j;
      }
    }
    if (joined == groups.size()) {
      Group g;
      g.absorb(scope);
      groups.push_back(std::move(g));
      intersects.push_back(Intersect{});
    }
  }
  return result;
}

}  // namespace confmend
