#pragma once

#include <algorithm>
#include <cstdint>
#include <deque>
#include <sstream>
#include <string>
#include <vector>

#include "confmend/adjust.hpp"
#include "confmend/model.hpp"
#include "confmend/parse.hpp"
#include "confmend/validate.hpp"

namespace confmend {

// Portable seedable generator; all randomness in the bench module derives
// from this so generated models and CSVs are identical across platforms.
struct SplitMix64 {
  std::uint64_t state = 0;

  explicit SplitMix64(std::uint64_t seed) : state(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  std::uint64_t below(std::uint64_t bound) { return bound ? next() % bound : 0; }

  // Probability comparison via a 32-bit integer threshold; avoids any
  // platform-dependent floating point in generation.
  bool chance(double p) {
    if (p <= 0.0) return false;
    if (p >= 1.0) return true;
    auto threshold = static_cast<std::uint64_t>(p * 4294967296.0);
    return (next() >> 32) < threshold;
  }
};

struct ScenarioSpec {
  std::string id = "scenario";
  std::size_t entity_count = 24;
  std::size_t branching = 2;
  std::size_t max_depth = 3;
  std::size_t domain_size = 5;
  std::size_t bundle_size = 1;
  double peer_ratio = 0.25;
  double cycle_ratio = 0.0;
  std::uint64_t rng_seed = 1;

  enum class Flavor { Solvable, Rejection, Unsolvable } flavor = Flavor::Solvable;
};

struct GeneratedScenario {
  ConfigurationModel model;
  ChangeBundle bundle;
};

namespace detail {

inline std::string entity_name(std::size_t i) {
  std::string digits = std::to_string(i);
  while (digits.size() < 4) digits = "0" + digits;
  return "E" + digits;
}

inline std::string constraint_name(std::size_t i) {
  std::string digits = std::to_string(i);
  while (digits.size() < 4) digits = "0" + digits;
  return "C" + digits;
}

inline Expr at_least(const EntityId& e, std::int64_t threshold) {
  return Expr::binary(BinaryOp::Ge, Expr::ref(AttributeRef{e, "v"}),
                      Expr::literal(Value::integer(threshold)));
}

struct Generation {
  ConfigurationModel model;
  std::vector<EntityId> roots;
  // Per root: the threshold its own constraint triggers at; 0 when the root
  // ended up without a constraint.
  std::map<EntityId, std::int64_t> trigger_levels;
};

// Grows a forest of constraints: each expansion links a parent entity to
// fresh children, either as leader over followers or as a binary peer pair.
// Thresholds shrink with depth so that raising a root propagates down its
// subtree. Extra peer constraints between existing entities introduce
// cycles. All values start at 0, so every antecedent is initially false and
// the model is consistent by construction.
inline Generation generate_structure(const ScenarioSpec& spec, SplitMix64& rng) {
  Generation gen;
  const std::size_t n = std::max<std::size_t>(spec.entity_count, 2);
  const std::int64_t top = static_cast<std::int64_t>(
      std::min<std::size_t>(spec.domain_size - 1, spec.max_depth == 0 ? 1 : spec.max_depth));

  Domain value_domain = Domain::int_range(0, static_cast<std::int64_t>(spec.domain_size - 1));
  for (std::size_t i = 0; i < n; ++i) {
    Entity e;
    e.id = entity_name(i);
    e.attributes.emplace("v", Attribute{value_domain, Value::integer(0)});
    if (i % 2 == 0)
      e.attributes.emplace("u", Attribute{Domain::int_range(0, 1), Value::integer(0)});
    gen.model.entities.emplace(e.id, std::move(e));
  }

  std::size_t root_count = std::min<std::size_t>(std::max<std::size_t>(spec.bundle_size, 1), n / 2);
  std::deque<std::pair<std::size_t, std::size_t>> frontier;  // entity index, depth
  for (std::size_t i = 0; i < root_count; ++i) {
    gen.roots.push_back(entity_name(i));
    frontier.emplace_back(i, 0);
  }

  std::size_t next_entity = root_count;
  std::size_t next_constraint = 0;

  auto threshold_at = [&](std::size_t depth) -> std::int64_t {
    std::int64_t t = top - static_cast<std::int64_t>(depth);
    return std::max<std::int64_t>(1, t);
  };

  while (next_entity < n) {
    if (frontier.empty()) {
      // Detached extra root; keeps growth going on small specs.
      gen.roots.push_back(entity_name(next_entity));
      frontier.emplace_back(next_entity, 0);
      ++next_entity;
      continue;
    }
    auto [parent_idx, depth] = frontier.front();
    frontier.pop_front();
    if (depth >= spec.max_depth) continue;

    EntityId parent = entity_name(parent_idx);
    std::int64_t threshold = threshold_at(depth);

    if (spec.peer_ratio > 0 && rng.chance(spec.peer_ratio)) {
      EntityId child = entity_name(next_entity);
      std::size_t child_idx = next_entity++;
      Expr forward = Expr::implies(at_least(parent, threshold), at_least(child, threshold));
      Expr backward = Expr::implies(at_least(child, threshold), at_least(parent, threshold));
      ConstraintId cid = constraint_name(next_constraint++);
      gen.model.constraints.emplace(
          cid, Constraint::make(cid, Expr::conjunction(forward, backward)));
      gen.model.roles[cid] = {{parent, Role::Peer}, {child, Role::Peer}};
      frontier.emplace_back(child_idx, depth + 1);
      if (depth == 0) gen.trigger_levels.emplace(parent, threshold);
      continue;
    }

    std::size_t want = 1 + rng.below(std::max<std::size_t>(spec.branching, 1));
    std::size_t k = std::min(want, n - next_entity);
    if (k == 0) continue;
    std::vector<EntityId> children;
    for (std::size_t c = 0; c < k; ++c) {
      children.push_back(entity_name(next_entity));
      frontier.emplace_back(next_entity, depth + 1);
      ++next_entity;
    }

    Expr consequent = at_least(children[0], threshold);
    if (k >= 2 && rng.chance(0.3)) {
      // One cheap alternative against a costlier conjunction of the rest.
      Expr rest = at_least(children[1], threshold);
      for (std::size_t c = 2; c < k; ++c)
        rest = Expr::conjunction(std::move(rest), at_least(children[c], threshold));
      consequent = Expr::disjunction(std::move(consequent), std::move(rest));
    } else {
      for (std::size_t c = 1; c < k; ++c)
        consequent = Expr::conjunction(std::move(consequent), at_least(children[c], threshold));
    }

    ConstraintId cid = constraint_name(next_constraint++);
    gen.model.constraints.emplace(
        cid, Constraint::make(cid, Expr::implies(at_least(parent, threshold),
                                                 std::move(consequent))));
    auto& table = gen.model.roles[cid];
    table.emplace(parent, Role::Leader);
    for (const EntityId& child : children) table.emplace(child, Role::Follower);
    if (depth == 0) gen.trigger_levels.emplace(parent, threshold);
  }

  if (spec.cycle_ratio > 0) {
    std::size_t extras = static_cast<std::size_t>(
        spec.cycle_ratio * static_cast<double>(gen.model.constraints.size()));
    for (std::size_t i = 0; i < extras; ++i) {
      std::size_t a = rng.below(n);
      std::size_t b = rng.below(n);
      if (a == b) continue;
      EntityId ea = entity_name(a), eb = entity_name(b);
      Expr forward = Expr::implies(at_least(ea, 1), at_least(eb, 1));
      Expr backward = Expr::implies(at_least(eb, 1), at_least(ea, 1));
      ConstraintId cid = constraint_name(next_constraint++);
      gen.model.constraints.emplace(
          cid, Constraint::make(cid, Expr::conjunction(forward, backward)));
      gen.model.roles[cid] = {{ea, Role::Peer}, {eb, Role::Peer}};
    }
  }
  return gen;
}

// Rewrites one leader constraint of the chosen root's own expansion so its
// consequent demands a value outside the domain; triggering that root then
// has no possible repair.
inline bool poison_subtree(Generation& gen, const EntityId& root,
                           std::size_t domain_size) {
  for (auto& [cid, table] : gen.model.roles) {
    auto it = table.find(root);
    if (it == table.end() || it->second != Role::Leader) continue;
    EntityId follower;
    for (const auto& [eid, role] : table)
      if (role == Role::Follower) {
        follower = eid;
        break;
      }
    if (follower.empty()) continue;
    Constraint& c = gen.model.constraints.at(cid);
    Expr impossible = at_least(follower, static_cast<std::int64_t>(domain_size));
    c.expr = Expr::conjunction(c.expr, Expr::implies(at_least(root, 1), impossible));
    return true;
  }
  return false;
}

// Activates the chain under one root (every entity in its reach raised to
// the domain maximum, which satisfies every implication) so that lowering a
// follower in it violates an active constraint.
inline bool activate_subtree_and_lower_follower(Generation& gen,
                                                const EntityId& root,
                                                std::size_t domain_size,
                                                ChangeBundle& bundle) {
  CompulsionGraph graph = compulsion_graph(gen.model);
  std::set<EntityId> region = graph.reachable_from(root);
  region.insert(root);
  if (region.size() < 2) return false;

  std::int64_t maxed = static_cast<std::int64_t>(domain_size - 1);
  for (const EntityId& e : region)
    gen.model.entities.at(e).attributes.at("v").value = Value::integer(maxed);

  // Lower any follower of a constraint whose leader sits in the region.
  for (const auto& [cid, table] : gen.model.roles) {
    (void)cid;
    bool leader_in_region = false;
    for (const auto& [eid, role] : table)
      if (role == Role::Leader && region.count(eid)) leader_in_region = true;
    if (!leader_in_region) continue;
    for (const auto& [eid, role] : table)
      if (role == Role::Follower && region.count(eid)) {
        bundle.changes.emplace(AttributeRef{eid, "v"}, Value::integer(0));
        return true;
      }
  }
  return false;
}

}  // namespace detail

// Deterministically generates a wellformed model plus a bundle matching the
// spec's flavor: Solvable and Unsolvable bundles trigger leader/peer
// violations only; Rejection bundles violate a follower constraint. Retries
// with derived seeds a bounded number of times before giving up.
inline GeneratedScenario generate(const ScenarioSpec& spec) {
  for (std::uint64_t attempt = 0; attempt < 16; ++attempt) {
    SplitMix64 rng(spec.rng_seed + attempt * 0x9E3779B97F4A7C15ull);
    detail::Generation gen = detail::generate_structure(spec, rng);

    ChangeBundle bundle;
    bool ok = true;

    if (spec.flavor == ScenarioSpec::Flavor::Rejection) {
      EntityId root = gen.roots[rng.below(gen.roots.size())];
      ok = detail::activate_subtree_and_lower_follower(gen, root, spec.domain_size,
                                                       bundle);
    } else {
      if (spec.flavor == ScenarioSpec::Flavor::Unsolvable) {
        std::size_t poisoned = rng.below(std::min(gen.roots.size(), spec.bundle_size));
        ok = detail::poison_subtree(gen, gen.roots[poisoned], spec.domain_size);
      }
      std::size_t triggers = std::min<std::size_t>(spec.bundle_size, gen.roots.size());
      for (std::size_t i = 0; i < triggers && ok; ++i) {
        const EntityId& root = gen.roots[i];
        auto it = gen.trigger_levels.find(root);
        if (it == gen.trigger_levels.end()) {
          ok = false;
          break;
        }
        bundle.changes.emplace(AttributeRef{root, "v"}, Value::integer(it->second));
      }
    }
    if (!ok || bundle.changes.empty()) continue;

    if (!check_wellformed(gen.model).empty()) continue;
    if (!is_consistent(gen.model)) continue;

    ValidationReport report = validate(gen.model, bundle);
    if (spec.flavor == ScenarioSpec::Flavor::Rejection) {
      if (report.verdict != ValidationReport::Verdict::Rejected) continue;
    } else {
      if (report.verdict != ValidationReport::Verdict::NeedsAdjustment) continue;
    }
    return GeneratedScenario{std::move(gen.model), std::move(bundle)};
  }
  throw GenerationFailureError("could not generate a scenario for spec '" +
                               spec.id + "' (seed " + std::to_string(spec.rng_seed) +
                               ")");
}

struct BenchRecord {
  std::string scenario;
  std::string strategy;
  std::string verdict;
  std::size_t changed_entities = 0;
  std::size_t solver_calls = 0;
  std::size_t nodes_expanded = 0;
  std::size_t paths_enumerated = 0;
  std::int64_t wall_time_us = 0;
};

// One record per (scenario, strategy); every adjusted solution is re-checked
// for consistency here, independently of the engine's own verdict.
inline std::vector<BenchRecord> run_suite(const std::vector<ScenarioSpec>& specs,
                                          const std::vector<Strategy>& strategies,
                                          const AdjustOptions& options = {}) {
  std::vector<BenchRecord> records;
  for (const ScenarioSpec& spec : specs) {
    GeneratedScenario scenario = generate(spec);
    for (Strategy strategy : strategies) {
      AdjustOutcome outcome = adjust(scenario.model, scenario.bundle, strategy, options);
      if (outcome.verdict == AdjustOutcome::Verdict::Adjusted) {
        ConfigurationModel adjusted = apply_changes(
            apply_changes(scenario.model, scenario.bundle.changes),
            outcome.solution.assignment);
        if (!is_consistent(adjusted))
          throw Error("suite re-check failed: adjusted model is inconsistent for " +
                      spec.id);
      }
      records.push_back(BenchRecord{spec.id, to_string(strategy),
                                    to_string(outcome.verdict),
                                    outcome.stats.changed_entities,
                                    outcome.stats.solver_calls,
                                    outcome.stats.nodes_expanded,
                                    outcome.stats.paths_enumerated,
                                    outcome.stats.wall_time_us});
    }
  }
  std::sort(records.begin(), records.end(), [](const BenchRecord& a, const BenchRecord& b) {
    if (a.scenario != b.scenario) return a.scenario < b.scenario;
    return a.strategy < b.strategy;
  });
  return records;
}

// Timing is volatile, so the wall_time_us column is zeroed unless timings
// are explicitly requested; with equal seeds the CSV is then byte-identical
// across runs and platforms.
inline std::string to_csv(const std::vector<BenchRecord>& records,
                          bool include_timings = false) {
  std::ostringstream out;
  out << "scenario,strategy,verdict,changed_entities,solver_calls,"
         "nodes_expanded,paths_enumerated,wall_time_us\n";
  for (const BenchRecord& r : records) {
    out << r.scenario << "," << r.strategy << "," << r.verdict << ","
        << r.changed_entities << "," << r.solver_calls << "," << r.nodes_expanded
        << "," << r.paths_enumerated << "," << (include_timings ? r.wall_time_us : 0)
        << "\n";
  }
  return out.str();
}

// The stock evaluation suite: ten single-violation cases, fourteen
// multi-group cases, six unsolvable multi-group cases.
inline std::vector<ScenarioSpec> default_suite() {
  std::vector<ScenarioSpec> specs;
  auto pad2 = [](std::size_t i) {
    return (i < 10 ? "0" : "") + std::to_string(i);
  };
  for (std::size_t i = 1; i <= 10; ++i) {
    ScenarioSpec s;
    s.id = "single-" + pad2(i);
    s.entity_count = 16 + 2 * i;
    s.branching = 1 + i % 3;
    s.max_depth = 2 + i % 3;
    s.domain_size = 4 + i % 3;
    s.bundle_size = 1;
    s.peer_ratio = (i % 2) ? 0.25 : 0.0;
    s.cycle_ratio = (i % 4 == 0) ? 0.15 : 0.0;
    s.rng_seed = 100 + i;
    specs.push_back(std::move(s));
  }
  for (std::size_t i = 1; i <= 14; ++i) {
    ScenarioSpec s;
    s.id = "multi-" + pad2(i);
    s.entity_count = 24 + 2 * i;
    s.branching = 1 + i % 3;
    s.max_depth = 2 + i % 2;
    s.domain_size = 4 + i % 4;
    s.bundle_size = 2 + i % 3;
    s.peer_ratio = (i % 2) ? 0.3 : 0.1;
    s.cycle_ratio = (i % 5 == 0) ? 0.1 : 0.0;
    s.rng_seed = 200 + i;
    specs.push_back(std::move(s));
  }
  for (std::size_t i = 1; i <= 6; ++i) {
    ScenarioSpec s;
    s.id = "unsolv-" + pad2(i);
    s.entity_count = 24 + 4 * i;
    s.branching = 2;
    s.max_depth = 2 + i % 2;
    s.domain_size = 4;
    s.bundle_size = 2 + i % 2;
    s.peer_ratio = 0.2;
    s.cycle_ratio = 0.0;
    s.flavor = ScenarioSpec::Flavor::Unsolvable;
    s.rng_seed = 300 + i;
    specs.push_back(std::move(s));
  }
  return specs;
}

}  // namespace confmend
