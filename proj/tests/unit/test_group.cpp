#include "doctest.h"

#include <algorithm>

#include "confmend/bench.hpp"
#include "confmend/group.hpp"

using namespace confmend;

namespace {

PropagationScope scope_of(std::string violated, std::string infringing,
                          std::set<EntityId> entities) {
  PropagationScope s;
  s.violated = std::move(violated);
  s.infringing = std::move(infringing);
  s.entities = std::move(entities);
  s.entities.insert(s.infringing);
  return s;
}

// Order-independent signature of a grouping result.
std::set<std::set<EntityId>> partition_signature(const GroupingResult& g) {
  std::set<std::set<EntityId>> sig;
  for (const Group& group : g.groups) sig.insert(group.entities);
  return sig;
}

std::set<EntityId> all_intersects(const GroupingResult& g) {
  std::set<EntityId> out;
  for (const Intersect& i : g.intersects)
    out.insert(i.entities.begin(), i.entities.end());
  return out;
}

}  // namespace

TEST_CASE("three chained scopes collapse into one group") {
  // The first and second scope share E30; the second and third share E22 and
  // E23. All three end up in a single group whose intersect is the union of
  // those overlaps.
  std::vector<PropagationScope> scopes = {
      scope_of("C1", "E1", {"E1", "E10", "E30"}),
      scope_of("C2", "E2", {"E2", "E20", "E30", "E22", "E23"}),
      scope_of("C3", "E3", {"E3", "E22", "E23", "E31"}),
  };
  GroupingResult result = group_scopes(scopes);

  REQUIRE(result.groups.size() == 1);
  CHECK(result.groups[0].scopes.size() == 3);
  CHECK(result.intersects[0].entities == std::set<EntityId>{"E22", "E23", "E30"});
}

TEST_CASE("disjoint scopes stay apart with empty intersects") {
  std::vector<PropagationScope> scopes = {
      scope_of("C1", "A", {"A", "A1"}),
      scope_of("C2", "B", {"B", "B1"}),
  };
  GroupingResult result = group_scopes(scopes);
  REQUIRE(result.groups.size() == 2);
  CHECK(result.intersects[0].entities.empty());
  CHECK(result.intersects[1].entities.empty());
}

TEST_CASE("a late scope merges two existing groups") {
  std::vector<PropagationScope> scopes = {
      scope_of("C1", "A", {"A", "A1"}),
      scope_of("C2", "B", {"B", "B1"}),
      scope_of("C3", "X", {"X", "A1", "B1"}),
  };
  GroupingResult result = group_scopes(scopes);
  REQUIRE(result.groups.size() == 1);
  CHECK(result.groups[0].scopes.size() == 3);
  CHECK(result.groups[0].entities ==
        std::set<EntityId>{"A", "A1", "B", "B1", "X"});
  // (A ∪ A1) ∩ scope3 plus (B ∪ B1) ∩ scope3
  CHECK(result.intersects[0].entities == std::set<EntityId>{"A1", "B1"});
}

TEST_CASE("grouping properties hold under permutation fuzzing") {
  SplitMix64 rng(20260808);
  for (int round = 0; round < 100; ++round) {
    // Random scopes over a small entity pool.
    std::size_t scope_count = 2 + rng.below(6);
    std::vector<PropagationScope> scopes;
    for (std::size_t s = 0; s < scope_count; ++s) {
      std::set<EntityId> entities;
      std::size_t size = 1 + rng.below(5);
      for (std::size_t k = 0; k < size; ++k)
        entities.insert("E" + std::to_string(rng.below(12)));
      scopes.push_back(scope_of("C" + std::to_string(s),
                                "E" + std::to_string(rng.below(12)), entities));
    }

    GroupingResult base = group_scopes(scopes);

    // Partition: every scope in exactly one group; unions match.
    std::size_t total_scopes = 0;
    std::set<EntityId> union_groups, union_scopes;
    for (const Group& g : base.groups) {
      total_scopes += g.scopes.size();
      union_groups.insert(g.entities.begin(), g.entities.end());
    }
    for (const PropagationScope& s : scopes)
      union_scopes.insert(s.entities.begin(), s.entities.end());
    CHECK(total_scopes == scopes.size());
    CHECK(union_groups == union_scopes);

    // Pairwise disjoint.
    for (std::size_t i = 0; i < base.groups.size(); ++i)
      for (std::size_t j = i + 1; j < base.groups.size(); ++j) {
        std::set<EntityId> common;
        std::set_intersection(
            base.groups[i].entities.begin(), base.groups[i].entities.end(),
            base.groups[j].entities.begin(), base.groups[j].entities.end(),
            std::inserter(common, common.begin()));
        CHECK(common.empty());
      }

    // Intersect invariants: empty iff single scope; members in >= 2 scopes.
    for (std::size_t i = 0; i < base.groups.size(); ++i) {
      const Group& g = base.groups[i];
      const Intersect& isect = base.intersects[i];
      CHECK(isect.entities.empty() == (g.scopes.size() == 1));
      for (const EntityId& e : isect.entities) {
        std::size_t holders = 0;
        for (const PropagationScope& s : g.scopes) holders += s.entities.count(e);
        CHECK(holders >= 2);
      }
    }

    // Quadratic bound on overlap checks.
    std::size_t m = scopes.size();
    CHECK(base.overlap_checks <= m * (m - 1) / 2);

    // Permutation invariance of the partition and intersect contents.
    std::vector<PropagationScope> shuffled = scopes;
    for (std::size_t i = shuffled.size(); i > 1; --i)
      std::swap(shuffled[i - 1], shuffled[rng.below(i)]);
    GroupingResult permuted = group_scopes(shuffled);
    CHECK(partition_signature(base) == partition_signature(permuted));
    CHECK(all_intersects(base) == all_intersects(permuted));
  }
}
