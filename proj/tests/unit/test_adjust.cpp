#include "doctest.h"

#include "confmend/adjust.hpp"
#include "confmend/bench.hpp"
#include "confmend/parse.hpp"
#include "support/oracle.hpp"

using namespace confmend;

namespace {

ChangeBundle lower_desired_temp() {
  return ChangeBundle{{{{"Room", "desiredTemp"}, Value::integer(20)}}};
}

}  // namespace

TEST_CASE("safe-house adjustment with the window closed changes only the AC") {
  ConfigurationModel model = parse_model(oracle::safehouse_closed_text());
  AdjustOptions options;
  options.trace = true;
  AdjustOutcome outcome = adjust(model, lower_desired_temp(), Strategy::Overall, options);

  REQUIRE(outcome.verdict == AdjustOutcome::Verdict::Adjusted);
  std::map<AttributeRef, Value> expected = {{{"AC", "status"}, Value::label("On")}};
  CHECK(outcome.solution.assignment == expected);
  CHECK(outcome.solution.changed_entities == 1);
  CHECK(outcome.stats.solver_calls >= 1);

  // The first increment already satisfies mandatory plus relaxable.
  REQUIRE(!outcome.trace.empty());
  bool found = false;
  for (const std::string& line : outcome.trace)
    if (line.find("increment 1") != std::string::npos &&
        line.find("-> sat") != std::string::npos)
      found = true;
  CHECK(found);
}

TEST_CASE("safe-house adjustment with the window open also closes it") {
  ConfigurationModel model = parse_model(oracle::safehouse_text());
  AdjustOptions options;
  options.trace = true;
  AdjustOutcome outcome = adjust(model, lower_desired_temp(), Strategy::Overall, options);

  REQUIRE(outcome.verdict == AdjustOutcome::Verdict::Adjusted);
  std::map<AttributeRef, Value> expected = {
      {{"AC", "status"}, Value::label("On")},
      {{"Window", "state"}, Value::label("Closed")}};
  CHECK(outcome.solution.assignment == expected);
  CHECK(outcome.solution.changed_entities == 2);

  // Increment 1 cannot satisfy the peer constraint, drops it, and increment
  // 2 solves for the AC and the window together.
  bool dropped = false, second = false;
  for (const std::string& line : outcome.trace) {
    if (line.find("increment 1") != std::string::npos &&
        line.find("relax dropped") != std::string::npos)
      dropped = true;
    if (line.find("increment 2") != std::string::npos &&
        line.find("-> sat") != std::string::npos)
      second = true;
  }
  CHECK(dropped);
  CHECK(second);

  ConfigurationModel adjusted =
      apply_changes(apply_changes(model, lower_desired_temp().changes),
                    outcome.solution.assignment);
  CHECK(is_consistent(adjusted));
}

TEST_CASE("a peer violation adjusts the other peer") {
  // Turning the AC on while the window is open violates the peer constraint;
  // the repair closes the window and leaves the infringing AC untouched.
  ConfigurationModel model = parse_model(oracle::safehouse_text());
  ChangeBundle bundle{{{{"AC", "status"}, Value::label("On")}}};
  AdjustOutcome outcome = adjust(model, bundle, Strategy::Overall);

  REQUIRE(outcome.verdict == AdjustOutcome::Verdict::Adjusted);
  std::map<AttributeRef, Value> expected = {
      {{"Window", "state"}, Value::label("Closed")}};
  CHECK(outcome.solution.assignment == expected);
  CHECK(outcome.solution.changed_entities == 1);
  CHECK(outcome.report.incomplete_change_set == std::set<EntityId>{"AC"});
}

TEST_CASE("an accepted bundle adjusts to an empty solution without solving") {
  ConfigurationModel model = parse_model(oracle::safehouse_text());
  ChangeBundle bundle{{{{"Security", "level"}, Value::label("Normal")}}};
  AdjustOutcome outcome = adjust(model, bundle, Strategy::Overall);
  CHECK(outcome.verdict == AdjustOutcome::Verdict::Adjusted);
  CHECK(outcome.solution.assignment.empty());
  CHECK(outcome.stats.solver_calls == 0);
}

TEST_CASE("a rejected bundle never reaches the solver") {
  ConfigurationModel model = parse_model(oracle::safehouse_text());
  ConfigurationModel hot =
      apply_changes(model, {{{"Room", "desiredTemp"}, Value::integer(20)},
                            {{"AC", "status"}, Value::label("On")},
                            {{"Window", "state"}, Value::label("Closed")}});
  ChangeBundle bundle{{{{"AC", "status"}, Value::label("Off")}}};
  AdjustOutcome outcome = adjust(hot, bundle, Strategy::Overall);
  CHECK(outcome.verdict == AdjustOutcome::Verdict::Rejected);
  CHECK(outcome.stats.solver_calls == 0);
  CHECK(outcome.report.rejected_fconstraints == std::set<ConstraintId>{"C1"});
}

TEST_CASE("a follower with a singleton contradicting domain is unadjustable") {
  const char* text =
      "entity L { v: int[0..3] = 0 }\n"
      "entity F { v: int[1..1] = 1 }\n"
      "constraint C1 roles(L: leader, F: follower) { (L.v >= 1) implies (F.v >= 2) }\n";
  ConfigurationModel model = parse_model(text);
  ChangeBundle bundle{{{{"L", "v"}, Value::integer(1)}}};
  AdjustOutcome outcome = adjust(model, bundle, Strategy::Overall);
  CHECK(outcome.verdict == AdjustOutcome::Verdict::Unadjustable);
  CHECK(outcome.solution.assignment.empty());
  CHECK(outcome.unsolvable_group == std::string("C1"));
}

TEST_CASE("relax-and-fold walks a two-increment chain") {
  // L drives A; A drives B. Raising L forces A up, which forces B up: the
  // first increment drops A's leader constraint, the second solves both.
  const char* text =
      "entity L { v: int[0..3] = 0 }\n"
      "entity A { v: int[0..3] = 0 }\n"
      "entity B { v: int[0..3] = 0 }\n"
      "constraint C1 roles(L: leader, A: follower) { (L.v >= 2) implies (A.v >= 2) }\n"
      "constraint C2 roles(A: leader, B: follower) { (A.v >= 1) implies (B.v >= 1) }\n";
  ConfigurationModel model = parse_model(text);
  ChangeBundle bundle{{{{"L", "v"}, Value::integer(2)}}};
  AdjustOptions options;
  options.trace = true;
  AdjustOutcome outcome = adjust(model, bundle, Strategy::Overall, options);

  REQUIRE(outcome.verdict == AdjustOutcome::Verdict::Adjusted);
  std::map<AttributeRef, Value> expected = {{{"A", "v"}, Value::integer(2)},
                                            {{"B", "v"}, Value::integer(1)}};
  CHECK(outcome.solution.assignment == expected);
  CHECK(outcome.solution.changed_entities == 2);

  bool inc1_dropped = false, inc2_sat = false;
  for (const std::string& line : outcome.trace) {
    if (line.find("increment 1") != std::string::npos &&
        line.find("relax={C2}") != std::string::npos &&
        line.find("relax dropped") != std::string::npos)
      inc1_dropped = true;
    if (line.find("increment 2") != std::string::npos &&
        line.find("mandatory={C1,C2}") != std::string::npos &&
        line.find("-> sat") != std::string::npos)
      inc2_sat = true;
  }
  CHECK(inc1_dropped);
  CHECK(inc2_sat);
}

TEST_CASE("an or-branch lets path restriction beat whole-group solving") {
  // The violated constraint accepts either raising A alone or raising both
  // B1 and B2. The path through A is tried first and changes one entity; the
  // whole-group solve keeps A at its seed and changes B1 and B2.
  const char* text =
      "entity L { v: int[0..3] = 0 }\n"
      "entity A { v: int[0..3] = 0 }\n"
      "entity B1 { v: int[0..3] = 0 }\n"
      "entity B2 { v: int[0..3] = 0 }\n"
      "constraint C1 roles(L: leader, A: follower, B1: follower, B2: follower) {\n"
      "  (L.v >= 2) implies ((A.v >= 2) or ((B1.v >= 1) and (B2.v >= 1)))\n"
      "}\n";
  ConfigurationModel model = parse_model(text);
  ChangeBundle bundle{{{{"L", "v"}, Value::integer(2)}}};

  AdjustOutcome overall = adjust(model, bundle, Strategy::Overall);
  REQUIRE(overall.verdict == AdjustOutcome::Verdict::Adjusted);
  CHECK(overall.solution.changed_entities == 1);
  std::map<AttributeRef, Value> expected = {{{"A", "v"}, Value::integer(2)}};
  CHECK(overall.solution.assignment == expected);

  AdjustOutcome grouped = adjust(model, bundle, Strategy::GroupBased);
  REQUIRE(grouped.verdict == AdjustOutcome::Verdict::Adjusted);
  CHECK(grouped.solution.changed_entities == 2);

  AdjustOutcome total = adjust(model, bundle, Strategy::TotalChange);
  REQUIRE(total.verdict == AdjustOutcome::Verdict::Adjusted);
  CHECK(total.solution.changed_entities == 2);

  CHECK(overall.solution.changed_entities <= grouped.solution.changed_entities);
  CHECK(grouped.solution.changed_entities <= total.solution.changed_entities);
}

TEST_CASE("bonding solves overlapping scopes together") {
  // Two violated constraints share followers S1 and S2, so their scopes
  // merge into one group and the bonded paths are solved as one problem.
  const char* text =
      "entity I1 { v: int[0..3] = 0 }\n"
      "entity I2 { v: int[0..3] = 0 }\n"
      "entity S1 { v: int[0..3] = 0 }\n"
      "entity S2 { v: int[0..3] = 0 }\n"
      "constraint CA roles(I1: leader, S1: follower, S2: follower) {\n"
      "  (I1.v >= 1) implies ((S1.v >= 1) and (S2.v >= 1))\n"
      "}\n"
      "constraint CB roles(I2: leader, S1: follower, S2: follower) {\n"
      "  (I2.v >= 1) implies ((S1.v + S2.v) >= 2)\n"
      "}\n";
  ConfigurationModel model = parse_model(text);
  ChangeBundle bundle{{{{"I1", "v"}, Value::integer(1)},
                       {{"I2", "v"}, Value::integer(1)}}};
  AdjustOptions options;
  options.trace = true;
  AdjustOutcome outcome = adjust(model, bundle, Strategy::Overall, options);

  REQUIRE(outcome.verdict == AdjustOutcome::Verdict::Adjusted);
  ConfigurationModel adjusted = apply_changes(
      apply_changes(model, bundle.changes), outcome.solution.assignment);
  CHECK(is_consistent(adjusted));

  bool bonded = false;
  for (const std::string& line : outcome.trace)
    if (line.find("path bonding") != std::string::npos) bonded = true;
  CHECK(bonded);
  CHECK(outcome.partial_solutions.size() == 1);  // one merged group
}

TEST_CASE("bonded solve can fail while the widened group succeeds") {
  // Scope of CA: {I1, A, X}; scope of CB: {I2, B, X}. The intersect is {X},
  // so only the paths through X bond. CB needs B raised, but B's path does
  // not touch X; the bonded problem leaves B frozen and fails, the widened
  // whole-group solve frees it.
  const char* text =
      "entity I1 { v: int[0..3] = 0 }\n"
      "entity I2 { v: int[0..3] = 0 }\n"
      "entity A { v: int[0..3] = 0 }\n"
      "entity B { v: int[0..3] = 0 }\n"
      "entity X { v: int[0..3] = 0 }\n"
      "constraint CA roles(I1: leader, A: follower, X: follower) {\n"
      "  (I1.v >= 1) implies ((A.v >= 1) and (X.v >= 1))\n"
      "}\n"
      "constraint CB roles(I2: leader, B: follower, X: follower) {\n"
      "  (I2.v >= 1) implies ((B.v >= 1) and (X.v >= 1))\n"
      "}\n";
  ConfigurationModel model = parse_model(text);
  ChangeBundle bundle{{{{"I1", "v"}, Value::integer(1)},
                       {{"I2", "v"}, Value::integer(1)}}};
  AdjustOptions options;
  options.trace = true;
  AdjustOutcome outcome = adjust(model, bundle, Strategy::Overall, options);

  REQUIRE(outcome.verdict == AdjustOutcome::Verdict::Adjusted);
  std::map<AttributeRef, Value> expected = {{{"A", "v"}, Value::integer(1)},
                                            {{"B", "v"}, Value::integer(1)},
                                            {{"X", "v"}, Value::integer(1)}};
  CHECK(outcome.solution.assignment == expected);
}

TEST_CASE("fail-fast: groups after the first unsolvable one are not attempted") {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    ScenarioSpec spec;
    spec.entity_count = 24;
    spec.bundle_size = 3;
    spec.flavor = ScenarioSpec::Flavor::Unsolvable;
    spec.rng_seed = seed;
    GeneratedScenario scenario = generate(spec);

    AdjustOutcome outcome = adjust(scenario.model, scenario.bundle, Strategy::Overall);
    REQUIRE(outcome.verdict == AdjustOutcome::Verdict::Unadjustable);
    REQUIRE(outcome.unsolvable_group.has_value());
    CHECK(outcome.solution.assignment.empty());
    CHECK(outcome.partial_solutions.empty());

    // The unsolvable group is the last one recorded; nothing follows it.
    REQUIRE(!outcome.stats.group_runs.empty());
    const GroupRun& last = outcome.stats.group_runs.back();
    CHECK(last.group_id == *outcome.unsolvable_group);
    CHECK_FALSE(last.solved);
    for (std::size_t i = 0; i + 1 < outcome.stats.group_runs.size(); ++i)
      CHECK(outcome.stats.group_runs[i].solved);

    std::size_t recorded = 0;
    for (const GroupRun& run : outcome.stats.group_runs)
      recorded += run.solver_calls;
    CHECK(recorded == outcome.stats.solver_calls);
  }
}

TEST_CASE("adjusted fuzz scenarios are sound, confined and bundle-preserving") {
  std::size_t adjusted_count = 0;
  for (std::uint64_t seed = 1; seed <= 120; ++seed) {
    ScenarioSpec spec;
    spec.entity_count = 14;
    spec.bundle_size = 1 + seed % 3;
    spec.peer_ratio = 0.3;
    spec.cycle_ratio = seed % 4 ? 0.0 : 0.2;
    spec.rng_seed = seed;
    GeneratedScenario scenario = generate(spec);

    AdjustOutcome outcome = adjust(scenario.model, scenario.bundle, Strategy::Overall);
    if (outcome.verdict != AdjustOutcome::Verdict::Adjusted) continue;
    ++adjusted_count;

    // Soundness: everything satisfied after bundle plus solution.
    ConfigurationModel adjusted =
        apply_changes(apply_changes(scenario.model, scenario.bundle.changes),
                      outcome.solution.assignment);
    CHECK(is_consistent(adjusted));

    // Bundle preservation: no requested attribute is reassigned.
    for (const auto& [ref, v] : outcome.solution.assignment) {
      (void)v;
      CHECK_FALSE(scenario.bundle.changes.count(ref));
    }

    // No infringing entity is touched.
    for (const auto& [ref, v] : outcome.solution.assignment) {
      (void)v;
      CHECK_FALSE(outcome.report.incomplete_change_set.count(ref.entity));
    }
  }
  CHECK(adjusted_count >= 80);
}

TEST_CASE("overall matches the exhaustive completion oracle") {
  for (std::uint64_t seed = 1; seed <= 60; ++seed) {
    ScenarioSpec spec;
    spec.entity_count = 10;
    spec.domain_size = 4;
    spec.bundle_size = 1 + seed % 2;
    spec.peer_ratio = 0.25;
    spec.rng_seed = seed;
    spec.flavor = seed % 4 == 0 ? ScenarioSpec::Flavor::Unsolvable
                                : ScenarioSpec::Flavor::Solvable;
    GeneratedScenario scenario = generate(spec);

    AdjustOutcome outcome = adjust(scenario.model, scenario.bundle, Strategy::Overall);
    bool oracle_says = oracle::exists_completion(scenario.model, scenario.bundle);
    CHECK((outcome.verdict == AdjustOutcome::Verdict::Adjusted) == oracle_says);
  }
}

TEST_CASE("a constraint coupling two groups without shared entities is refused conservatively") {
  // X and P are followers of independent leaders, and additionally tied by a
  // follower-only sum constraint that neither group may steer alone. Each
  // group's repair is locally fine but the union breaks the tie; the engine
  // must notice and refuse rather than emit an inconsistent model.
  const char* text =
      "entity LA { v: int[0..3] = 0 }\n"
      "entity LB { v: int[0..3] = 0 }\n"
      "entity X { v: int[0..3] = 0 }\n"
      "entity P { v: int[0..3] = 0 }\n"
      "constraint CA roles(LA: leader, X: follower) { (LA.v >= 1) implies (X.v >= 2) }\n"
      "constraint CB roles(LB: leader, P: follower) { (LB.v >= 1) implies (P.v >= 2) }\n"
      "constraint CT roles(X: follower, P: follower) { (X.v + P.v) <= 3 }\n";
  ConfigurationModel model = parse_model(text);
  REQUIRE(is_consistent(model));
  ChangeBundle bundle{{{{"LA", "v"}, Value::integer(1)},
                       {{"LB", "v"}, Value::integer(1)}}};

  AdjustOutcome outcome = adjust(model, bundle, Strategy::Overall);
  CHECK(outcome.verdict == AdjustOutcome::Verdict::Unadjustable);
  CHECK(outcome.solution.assignment.empty());

  // The role-blind baseline solves the coupled problem in one piece and
  // correctly reports it unsolvable too (2+2 > 3).
  AdjustOutcome total = adjust(model, bundle, Strategy::TotalChange);
  CHECK(total.verdict == AdjustOutcome::Verdict::Unadjustable);
}
