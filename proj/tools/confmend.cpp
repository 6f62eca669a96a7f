#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "CLI11.hpp"

#include "confmend/confmend.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitRejected = 2;
constexpr int kExitUnadjustable = 3;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw confmend::Error("cannot open file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const std::string& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw confmend::Error("cannot write file: " + path);
  out << contents;
}

std::size_t path_cap_from_env() {
  const char* cap = std::getenv("CONF_MEND_PATH_CAP");
  if (!cap) return confmend::kDefaultPathCap;
  try {
    long long v = std::stoll(cap);
    if (v < 1) throw confmend::Error("");
    return static_cast<std::size_t>(v);
  } catch (const std::exception&) {
    throw confmend::Error("CONF_MEND_PATH_CAP must be a positive integer");
  }
}

confmend::Strategy parse_strategy(const std::string& name) {
  if (name == "overall") return confmend::Strategy::Overall;
  if (name == "group") return confmend::Strategy::GroupBased;
  if (name == "total") return confmend::Strategy::TotalChange;
  throw confmend::Error("unknown strategy '" + name + "' (overall|group|total)");
}

int run_check(const std::string& model_path) {
  confmend::ConfigurationModel model;
  try {
    model = confmend::parse_model(read_file(model_path));
  } catch (const confmend::WellformednessFailure& e) {
    std::cerr << e.what() << "\n";
    return kExitError;
  }
  std::cout << "ok: " << model.entities.size() << " entities, "
            << model.constraints.size() << " constraints\n";
  std::cout << "consistent: " << (confmend::is_consistent(model) ? "yes" : "no")
            << "\n";
  return kExitOk;
}

int run_validate(const std::string& model_path, const std::string& bundle_path,
                 bool json) {
  confmend::ConfigurationModel model = confmend::parse_model(read_file(model_path));
  confmend::ChangeBundle bundle = confmend::parse_bundle(read_file(bundle_path), model);
  confmend::ValidationReport report = confmend::validate(model, bundle);

  if (json) {
    std::cout << confmend::validation_to_json(report).dump(2) << "\n";
  } else {
    std::cout << "verdict: " << confmend::to_string(report.verdict) << "\n";
    if (!report.rejected_fconstraints.empty()) {
      std::cout << "violated follower constraints:";
      for (const auto& cid : report.rejected_fconstraints) std::cout << " " << cid;
      std::cout << "\n";
    }
    if (!report.violated_constraint_set.empty()) {
      std::cout << "violated constraints:";
      for (const auto& cid : report.violated_constraint_set) std::cout << " " << cid;
      std::cout << "\nincomplete change set:";
      for (const auto& e : report.incomplete_change_set) std::cout << " " << e;
      std::cout << "\n";
    }
  }
  return report.verdict == confmend::ValidationReport::Verdict::Rejected
             ? kExitRejected
             : kExitOk;
}

int run_adjust(const std::string& model_path, const std::string& bundle_path,
               const std::string& strategy_name, bool trace, bool json,
               bool timings, const std::string& out_path) {
  confmend::ConfigurationModel model = confmend::parse_model(read_file(model_path));
  confmend::ChangeBundle bundle = confmend::parse_bundle(read_file(bundle_path), model);

  confmend::AdjustOptions options;
  options.path_cap = path_cap_from_env();
  options.trace = trace;

  confmend::AdjustOutcome outcome =
      confmend::adjust(model, bundle, parse_strategy(strategy_name), options);

  for (const std::string& line : outcome.trace) std::cerr << line << "\n";

  if (json) {
    std::cout << confmend::outcome_to_json(outcome, model, timings).dump(2) << "\n";
  }

  switch (outcome.verdict) {
    case confmend::AdjustOutcome::Verdict::Rejected:
      if (!json) {
        std::cerr << "rejected: bundle violates follower constraints:";
        for (const auto& cid : outcome.report.rejected_fconstraints)
          std::cerr << " " << cid;
        std::cerr << "\n";
      }
      return kExitRejected;
    case confmend::AdjustOutcome::Verdict::Unadjustable:
      if (!json) {
        std::cerr << "unadjustable";
        if (outcome.unsolvable_group)
          std::cerr << ": no solution for group " << *outcome.unsolvable_group;
        std::cerr << "\n";
      }
      return kExitUnadjustable;
    case confmend::AdjustOutcome::Verdict::Adjusted:
      break;
  }

  confmend::ConfigurationModel adjusted = confmend::apply_changes(
      confmend::apply_changes(model, bundle.changes), outcome.solution.assignment);
  std::string document = confmend::serialize(adjusted);
  if (!out_path.empty())
    write_file(out_path, document);
  else if (!json)
    std::cout << document;

  if (!json)
    for (const std::string& line : confmend::change_report(outcome, model))
      std::cerr << line << "\n";
  return kExitOk;
}

int run_inspect(const std::string& model_path, const std::string& bundle_path,
                const std::string& dot_path) {
  confmend::ConfigurationModel model = confmend::parse_model(read_file(model_path));
  confmend::ChangeBundle bundle = confmend::parse_bundle(read_file(bundle_path), model);
  std::size_t cap = path_cap_from_env();

  std::cout << confmend::inspect_dump(model, bundle, cap);

  if (!dot_path.empty()) {
    confmend::ConfigurationModel overlay =
        confmend::apply_changes(model, bundle.changes);
    confmend::CompulsionGraph graph = confmend::compulsion_graph(overlay);
    confmend::ValidationReport report = confmend::validate(model, bundle);
    std::vector<confmend::PropagationScope> scopes;
    for (const auto& violated : report.violated_constraint_set) {
      auto infringing = confmend::detail::pick_infringing(model, bundle, violated);
      scopes.push_back(
          confmend::propagation_scope(overlay, graph, infringing, violated));
    }
    write_file(dot_path, confmend::dot_graph(overlay, graph, scopes));
  }
  return kExitOk;
}

std::vector<confmend::ScenarioSpec> load_specs(const std::string& path) {
  nlohmann::json doc = nlohmann::json::parse(read_file(path));
  if (!doc.is_array()) throw confmend::Error("spec file must be a JSON array");
  std::vector<confmend::ScenarioSpec> specs;
  for (const auto& item : doc) {
    confmend::ScenarioSpec s;
    s.id = item.value("id", "scenario-" + std::to_string(specs.size()));
    s.entity_count = item.value("n", 24);
    s.branching = item.value("branching", 2);
    s.max_depth = item.value("depth", 3);
    s.domain_size = item.value("domain_size", 5);
    s.bundle_size = item.value("bundle_size", 1);
    s.peer_ratio = item.value("peer_ratio", 0.25);
    s.cycle_ratio = item.value("cycle_ratio", 0.0);
    s.rng_seed = item.value("seed", 1);
    std::string flavor = item.value("flavor", "solvable");
    if (flavor == "solvable") s.flavor = confmend::ScenarioSpec::Flavor::Solvable;
    else if (flavor == "rejection") s.flavor = confmend::ScenarioSpec::Flavor::Rejection;
    else if (flavor == "unsolvable") s.flavor = confmend::ScenarioSpec::Flavor::Unsolvable;
    else throw confmend::Error("unknown flavor '" + flavor + "'");
    specs.push_back(std::move(s));
  }
  return specs;
}

struct InlineBench {
  std::size_t cases = 0;  // 0: no inline scenarios requested
  confmend::ScenarioSpec base;
  std::string flavor = "solvable";
};

std::vector<confmend::ScenarioSpec> inline_specs(const InlineBench& inline_bench) {
  std::vector<confmend::ScenarioSpec> specs;
  for (std::size_t i = 0; i < inline_bench.cases; ++i) {
    confmend::ScenarioSpec s = inline_bench.base;
    s.id = "case-" + std::string(i < 9 ? "0" : "") + std::to_string(i + 1);
    s.rng_seed = inline_bench.base.rng_seed + i;
    if (inline_bench.flavor == "solvable")
      s.flavor = confmend::ScenarioSpec::Flavor::Solvable;
    else if (inline_bench.flavor == "rejection")
      s.flavor = confmend::ScenarioSpec::Flavor::Rejection;
    else if (inline_bench.flavor == "unsolvable")
      s.flavor = confmend::ScenarioSpec::Flavor::Unsolvable;
    else
      throw confmend::Error("unknown flavor '" + inline_bench.flavor + "'");
    specs.push_back(std::move(s));
  }
  return specs;
}

int run_bench(const std::string& spec_path, const std::string& csv_path,
              const std::string& dot_dir, bool timings,
              const InlineBench& inline_bench) {
  std::vector<confmend::ScenarioSpec> specs =
      !spec_path.empty()     ? load_specs(spec_path)
      : inline_bench.cases   ? inline_specs(inline_bench)
                             : confmend::default_suite();

  if (!dot_dir.empty()) {
    std::filesystem::create_directories(dot_dir);
    for (const auto& spec : specs) {
      confmend::GeneratedScenario scenario = confmend::generate(spec);
      confmend::CompulsionGraph graph = confmend::compulsion_graph(scenario.model);
      write_file(dot_dir + "/" + spec.id + ".dot",
                 confmend::dot_graph(scenario.model, graph));
    }
  }

  confmend::AdjustOptions options;
  options.path_cap = path_cap_from_env();
  std::vector<confmend::BenchRecord> records = confmend::run_suite(
      specs,
      {confmend::Strategy::Overall, confmend::Strategy::GroupBased,
       confmend::Strategy::TotalChange},
      options);
  std::string csv = confmend::to_csv(records, timings);
  if (!csv_path.empty())
    write_file(csv_path, csv);
  else
    std::cout << csv;
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"confmend: validates configuration change bundles against "
               "role-annotated constraints and computes minimal complementary "
               "changes via scoped change propagation"};
  app.require_subcommand(1);

  std::string model_path, bundle_path, out_path, dot_path, csv_path, dot_dir,
      spec_path;
  std::string strategy = "overall";
  bool trace = false, json = false, timings = false;

  CLI::App* check = app.add_subcommand("check", "Parse a model and report wellformedness");
  check->add_option("model", model_path, "model file")->required();

  CLI::App* validate_cmd =
      app.add_subcommand("validate", "Validate a change bundle against a model");
  validate_cmd->add_option("model", model_path, "model file")->required();
  validate_cmd->add_option("bundle", bundle_path, "change bundle file")->required();
  validate_cmd->add_flag("--json", json, "machine-readable output");

  CLI::App* adjust_cmd = app.add_subcommand(
      "adjust", "Validate and, when needed, compute complementary changes");
  adjust_cmd->add_option("model", model_path, "model file")->required();
  adjust_cmd->add_option("bundle", bundle_path, "change bundle file")->required();
  adjust_cmd->add_option("--strategy", strategy, "overall|group|total")
      ->default_val("overall");
  adjust_cmd->add_flag("--trace", trace, "log per-increment resolution steps");
  adjust_cmd->add_option("--out", out_path, "write the adjusted model here");
  adjust_cmd->add_flag("--json", json, "machine-readable output");
  adjust_cmd->add_flag("--timings", timings, "include wall time in --json output");

  CLI::App* inspect_cmd =
      app.add_subcommand("inspect", "Dump scopes, paths and groups for a bundle");
  inspect_cmd->add_option("model", model_path, "model file")->required();
  inspect_cmd->add_option("bundle", bundle_path, "change bundle file")->required();
  inspect_cmd->add_option("--emit-dot", dot_path, "write a DOT graph here");

  InlineBench inline_bench;
  CLI::App* bench_cmd =
      app.add_subcommand("bench", "Generate scenarios and benchmark the strategies");
  bench_cmd->add_option("specs", spec_path, "JSON scenario spec file (default: stock suite)");
  bench_cmd->add_option("--csv", csv_path, "write records here (default: stdout)");
  bench_cmd->add_option("--emit-dot", dot_dir, "write per-scenario DOT graphs into this directory");
  bench_cmd->add_flag("--timings", timings, "include wall times in the CSV");
  bench_cmd->add_option("--cases", inline_bench.cases, "generate this many inline scenarios");
  bench_cmd->add_option("--n", inline_bench.base.entity_count, "entities per scenario");
  bench_cmd->add_option("--branching", inline_bench.base.branching, "constraint branching factor");
  bench_cmd->add_option("--depth", inline_bench.base.max_depth, "maximum chain depth");
  bench_cmd->add_option("--domain-size", inline_bench.base.domain_size, "attribute domain size");
  bench_cmd->add_option("--bundle-size", inline_bench.base.bundle_size, "changes per bundle");
  bench_cmd->add_option("--peer-ratio", inline_bench.base.peer_ratio, "share of peer constraints");
  bench_cmd->add_option("--cycle-ratio", inline_bench.base.cycle_ratio, "extra peer ties per constraint");
  bench_cmd->add_option("--seed", inline_bench.base.rng_seed, "base RNG seed");
  bench_cmd->add_option("--flavor", inline_bench.flavor, "solvable|rejection|unsolvable");

  CLI11_PARSE(app, argc, argv);

  try {
    if (check->parsed()) return run_check(model_path);
    if (validate_cmd->parsed()) return run_validate(model_path, bundle_path, json);
    if (adjust_cmd->parsed())
      return run_adjust(model_path, bundle_path, strategy, trace, json, timings,
                        out_path);
    if (inspect_cmd->parsed()) return run_inspect(model_path, bundle_path, dot_path);
    if (bench_cmd->parsed())
      return run_bench(spec_path, csv_path, dot_dir, timings, inline_bench);
  } catch (const confmend::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitError;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kExitError;
  }
  return kExitError;
}
