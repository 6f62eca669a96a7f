#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "confmend/errors.hpp"
#include "confmend/model.hpp"

namespace confmend {

// A finite-domain constraint problem. Fixed bindings are frozen; free
// variables are searched over their domains, starting from their seed
// (current) value so that untouched variables keep their values.
struct SolveProblem {
  std::vector<Constraint> constraints;
  std::map<AttributeRef, Value> fixed;
  std::set<AttributeRef> free;
  std::map<AttributeRef, Domain> domains;
  std::map<AttributeRef, Value> seed;
};

struct SolverStats {
  std::size_t calls = 0;
  std::size_t nodes_expanded = 0;
};

struct SolveResult {
  bool sat = false;
  std::map<AttributeRef, Value> assignment;  // binds exactly the free vars

  static SolveResult satisfied(std::map<AttributeRef, Value> a) {
    return SolveResult{true, std::move(a)};
  }
  static SolveResult unsat() { return SolveResult{}; }
};

namespace detail {

// Depth-first search with conflict-directed backjumping. Backjumping only
// skips subtrees whose failure provably does not depend on the skipped
// variables, so the first solution found is the same one plain depth-first
// search would find. There is no propagation or arc consistency.
class Backtracker {
 public:
  Backtracker(const SolveProblem& p, SolverStats& stats)
      : problem_(p), stats_(stats) {}

  SolveResult run() {
    ++stats_.calls;
    validate_problem();

    env_ = problem_.fixed;
    std::set<AttributeRef> constrained;
    for (const Constraint& c : problem_.constraints)
      for (const AttributeRef& r : refs(c.expr))
        if (problem_.free.count(r)) constrained.insert(r);

    // Free variables no constraint mentions can only ever keep their seed
    // value in the first solution found, so bind them directly.
    for (const AttributeRef& r : problem_.free)
      if (!constrained.count(r)) env_.emplace(r, problem_.seed.at(r));

    vars_.assign(constrained.begin(), constrained.end());

    watch_.assign(vars_.size(), {});
    for (const Constraint& c : problem_.constraints) {
      Watched wc;
      wc.constraint = &c;
      for (const AttributeRef& r : refs(c.expr)) {
        auto it = std::lower_bound(vars_.begin(), vars_.end(), r);
        if (it != vars_.end() && *it == r)
          wc.levels.push_back(static_cast<std::size_t>(it - vars_.begin()));
      }
      if (wc.levels.empty()) {
        // Decidable up front: every reference is fixed.
        if (!eval_constraint(c)) return SolveResult::unsat();
      } else {
        std::sort(wc.levels.begin(), wc.levels.end());
        wc.levels.erase(std::unique(wc.levels.begin(), wc.levels.end()),
                        wc.levels.end());
        std::size_t last = wc.levels.back();
        watch_[last].push_back(std::move(wc));
      }
    }

    if (search(0)) return SolveResult::unsat();

    std::map<AttributeRef, Value> assignment;
    for (const AttributeRef& r : problem_.free) assignment.emplace(r, env_.at(r));
    return SolveResult::satisfied(std::move(assignment));
  }

 private:
  struct Watched {
    const Constraint* constraint = nullptr;
    std::vector<std::size_t> levels;  // decision levels of its free vars
  };

  void validate_problem() {
    for (const AttributeRef& r : problem_.free) {
      if (problem_.fixed.count(r))
        throw Error("variable " + r.to_string() + " is both fixed and free");
      auto di = problem_.domains.find(r);
      if (di == problem_.domains.end())
        throw Error("free variable " + r.to_string() + " has no domain");
      auto si = problem_.seed.find(r);
      if (si == problem_.seed.end() || !di->second.admits(si->second))
        throw Error("free variable " + r.to_string() + " has no admissible seed");
    }
    for (const Constraint& c : problem_.constraints)
      for (const AttributeRef& r : refs(c.expr))
        if (!problem_.fixed.count(r) && !problem_.free.count(r))
          throw IncompleteCoverageError("constraint '" + c.id + "' references " +
                                        r.to_string() +
                                        " which is neither fixed nor free");
  }

  bool eval_constraint(const Constraint& c) {
    return eval_with(c.expr, [this](const AttributeRef& r) -> std::optional<Value> {
             auto it = env_.find(r);
             if (it == env_.end()) return std::nullopt;
             return it->second;
           })
        .as_bool();
  }

  // Returns nullopt when a solution completes below this level; otherwise
  // the set of earlier decision levels the failure depends on.
  std::optional<std::set<std::size_t>> search(std::size_t i) {
    if (i == vars_.size()) return std::nullopt;
    const AttributeRef& var = vars_[i];
    const Domain& dom = problem_.domains.at(var);
    const Value& seed = problem_.seed.at(var);
    std::set<std::size_t> conflict;

    for (std::size_t k = 0; k <= dom.size(); ++k) {
      Value v = (k == 0) ? seed : dom.value_at(k - 1);
      if (k > 0 && v == seed) continue;
      ++stats_.nodes_expanded;
      env_[var] = v;

      const Watched* failed = nullptr;
      for (const Watched& wc : watch_[i])
        if (!eval_constraint(*wc.constraint)) {
          failed = &wc;
          break;
        }
      if (failed) {
        for (std::size_t lvl : failed->levels)
          if (lvl != i) conflict.insert(lvl);
        continue;
      }

      auto deeper = search(i + 1);
      if (!deeper) return std::nullopt;
      if (!deeper->count(i)) {
        // The failure below does not involve this variable; no other value
        // here can change it.
        env_.erase(var);
        return deeper;
      }
      deeper->erase(i);
      conflict.insert(deeper->begin(), deeper->end());
    }
    env_.erase(var);
    return conflict;
  }

  const SolveProblem& problem_;
  SolverStats& stats_;
  std::map<AttributeRef, Value> env_;
  std::vector<AttributeRef> vars_;
  std::vector<std::vector<Watched>> watch_;
};

}  // namespace detail

// Deterministic backtracking search. Variable order is lexicographic by
// entity then attribute; value order tries the seed first, then the domain's
// canonical order. The first assignment found under that order is returned.
inline SolveResult solve(const SolveProblem& problem, SolverStats& stats) {
  return detail::Backtracker(problem, stats).run();
}

inline SolveResult solve(const SolveProblem& problem) {
  SolverStats stats;
  return solve(problem, stats);
}

// Number of entities with at least one attribute whose solved value differs
// from its seed value.
inline std::size_t count_changes(const SolveResult& result,
                                 const std::map<AttributeRef, Value>& seed) {
  if (!result.sat) throw CalledOnUnsatError("count_changes on an unsat result");
  std::set<EntityId> changed;
  for (const auto& [ref, value] : result.assignment) {
    auto it = seed.find(ref);
    if (it != seed.end() && !(it->second == value)) changed.insert(ref.entity);
  }
  return changed.size();
}

}  // namespace confmend
