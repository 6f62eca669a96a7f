#include "doctest.h"

#include "confmend/bench.hpp"
#include "confmend/parse.hpp"
#include "confmend/validate.hpp"
#include "support/oracle.hpp"

using namespace confmend;

TEST_CASE("categorization follows the changed entity's role") {
  ConfigurationModel model = parse_model(oracle::safehouse_text());

  SUBCASE("leader-only change") {
    ChangeBundle bundle{{{{"Room", "desiredTemp"}, Value::integer(20)}}};
    ConstraintCategories cats = categorize(model, bundle);
    CHECK(cats.lconstraints == std::set<ConstraintId>{"C1"});
    CHECK(cats.fconstraints.empty());
    CHECK(cats.pconstraints.empty());
  }
  SUBCASE("follower and peer roles of one entity") {
    ChangeBundle bundle{{{{"AC", "status"}, Value::label("On")}}};
    ConstraintCategories cats = categorize(model, bundle);
    CHECK(cats.lconstraints.empty());
    CHECK(cats.fconstraints == std::set<ConstraintId>{"C1"});
    CHECK(cats.pconstraints == std::set<ConstraintId>{"C2"});
  }
  SUBCASE("an entity with no constraints lands nowhere") {
    ConfigurationModel loose = parse_model(
        "entity A { x: bool = false }\n"
        "entity B { y: bool = false }\n"
        "constraint C roles(B: peer) { B.y or not B.y }\n");
    ChangeBundle bundle{{{{"A", "x"}, Value::boolean(true)}}};
    ConstraintCategories cats = categorize(loose, bundle);
    CHECK(cats.lconstraints.empty());
    CHECK(cats.fconstraints.empty());
    CHECK(cats.pconstraints.empty());
  }
  SUBCASE("one constraint can sit in several categories") {
    // Room leads C1 while AC follows it; changing both puts C1 in both sets.
    ChangeBundle bundle{{{{"Room", "desiredTemp"}, Value::integer(20)},
                         {{"AC", "status"}, Value::label("On")}}};
    ConstraintCategories cats = categorize(model, bundle);
    CHECK(cats.lconstraints.count("C1"));
    CHECK(cats.fconstraints.count("C1"));
    CHECK(cats.pconstraints.count("C2"));
  }
  SUBCASE("unknown attribute") {
    ChangeBundle bundle{{{{"Nope", "x"}, Value::integer(0)}}};
    CHECK_THROWS_AS(categorize(model, bundle), UnknownAttributeError);
  }
}

TEST_CASE("validation verdicts on the safe-house fixture") {
  ConfigurationModel model = parse_model(oracle::safehouse_text());

  SUBCASE("leader violation needs adjustment") {
    ChangeBundle bundle{{{{"Room", "desiredTemp"}, Value::integer(20)}}};
    ValidationReport report = validate(model, bundle);
    CHECK(report.verdict == ValidationReport::Verdict::NeedsAdjustment);
    CHECK(report.incomplete_change_set == std::set<EntityId>{"Room"});
    CHECK(report.violated_constraint_set == std::set<ConstraintId>{"C1"});
  }
  SUBCASE("peer violation needs adjustment, not rejection") {
    // AC is follower in C1 and peer in C2. C1 holds under the requested
    // values; C2 is violated with the window open, so the verdict is
    // needs-adjustment with AC infringing.
    ChangeBundle bundle{{{{"AC", "status"}, Value::label("On")}}};
    ValidationReport report = validate(model, bundle);
    CHECK(report.verdict == ValidationReport::Verdict::NeedsAdjustment);
    CHECK(report.incomplete_change_set == std::set<EntityId>{"AC"});
    CHECK(report.violated_constraint_set == std::set<ConstraintId>{"C2"});
  }
  SUBCASE("harmless bundle is accepted") {
    ChangeBundle bundle{{{{"Security", "level"}, Value::label("Normal")}}};
    ValidationReport report = validate(model, bundle);
    CHECK(report.verdict == ValidationReport::Verdict::Accepted);
    CHECK(report.incomplete_change_set.empty());
    CHECK(report.violated_constraint_set.empty());
  }
  SUBCASE("follower violation is rejected") {
    // With the desired temperature moved, turning the AC off would violate
    // C1 where AC follows.
    ConfigurationModel hot =
        apply_changes(model, {{{"Room", "desiredTemp"}, Value::integer(20)},
                              {{"AC", "status"}, Value::label("On")},
                              {{"Window", "state"}, Value::label("Closed")}});
    REQUIRE(is_consistent(hot));
    ChangeBundle bundle{{{{"AC", "status"}, Value::label("Off")}}};
    ValidationReport report = validate(hot, bundle);
    CHECK(report.verdict == ValidationReport::Verdict::Rejected);
    CHECK(report.rejected_fconstraints == std::set<ConstraintId>{"C1"});
    CHECK(report.violated_constraint_set.empty());
  }
}

TEST_CASE("a violated constraint with both a changed follower and a changed leader rejects") {
  const char* text =
      "entity A { x: int[0..5] = 0 }\n"
      "entity B { y: int[0..5] = 0 }\n"
      "constraint C roles(A: leader, B: follower) { (A.x <= B.y) }\n";
  ConfigurationModel model = parse_model(text);
  ChangeBundle bundle{{{{"A", "x"}, Value::integer(4)},
                       {{"B", "y"}, Value::integer(2)}}};
  ValidationReport report = validate(model, bundle);
  CHECK(report.verdict == ValidationReport::Verdict::Rejected);
  CHECK(report.rejected_fconstraints == std::set<ConstraintId>{"C"});
}

TEST_CASE("evaluation counting: follower constraints first, nothing else on rejection") {
  ConfigurationModel model = parse_model(oracle::safehouse_text());

  SUBCASE("rejected bundles stop after the follower set") {
    ConfigurationModel hot =
        apply_changes(model, {{{"Room", "desiredTemp"}, Value::integer(20)},
                              {{"AC", "status"}, Value::label("On")},
                              {{"Window", "state"}, Value::label("Closed")}});
    ChangeBundle bundle{{{{"AC", "status"}, Value::label("Off")}}};
    ConstraintCategories cats = categorize(hot, bundle);
    ValidationReport report = validate(hot, bundle);
    REQUIRE(report.verdict == ValidationReport::Verdict::Rejected);
    CHECK(report.constraints_evaluated == cats.fconstraints.size());
  }
  SUBCASE("otherwise exactly F plus the L/P union is evaluated") {
    ChangeBundle bundle{{{{"AC", "status"}, Value::label("On")}}};
    ConstraintCategories cats = categorize(model, bundle);
    std::set<ConstraintId> lp = cats.lconstraints;
    lp.insert(cats.pconstraints.begin(), cats.pconstraints.end());
    ValidationReport report = validate(model, bundle);
    CHECK(report.constraints_evaluated == cats.fconstraints.size() + lp.size());
  }
}

TEST_CASE("validation agrees with an independent recomputation") {
  for (std::uint64_t seed = 1; seed <= 60; ++seed) {
    ScenarioSpec spec;
    spec.entity_count = 14;
    spec.bundle_size = 1 + seed % 3;
    spec.peer_ratio = 0.3;
    spec.cycle_ratio = seed % 4 ? 0.0 : 0.2;
    spec.rng_seed = seed;
    spec.flavor = seed % 5 == 0 ? ScenarioSpec::Flavor::Rejection
                                : ScenarioSpec::Flavor::Solvable;
    GeneratedScenario scenario = generate(spec);
    oracle::ValidationFacts facts =
        oracle::validation_facts(scenario.model, scenario.bundle);
    ValidationReport report = validate(scenario.model, scenario.bundle);

    if (!facts.violated_follower.empty()) {
      CHECK(report.verdict == ValidationReport::Verdict::Rejected);
      CHECK(report.rejected_fconstraints == facts.violated_follower);
    } else if (!facts.violated_leader_peer.empty()) {
      CHECK(report.verdict == ValidationReport::Verdict::NeedsAdjustment);
      CHECK(report.violated_constraint_set == facts.violated_leader_peer);
      CHECK(report.incomplete_change_set == facts.incomplete);
    } else {
      CHECK(report.verdict == ValidationReport::Verdict::Accepted);
    }
  }
}
