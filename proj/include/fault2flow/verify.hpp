#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "fault2flow/compiler.hpp"
#include "fault2flow/error.hpp"
#include "fault2flow/executor.hpp"
#include "fault2flow/fault_tree.hpp"
#include "fault2flow/metrics.hpp"
#include "fault2flow/regions.hpp"
#include "fault2flow/self_check.hpp"
#include "fault2flow/workflow.hpp"

namespace fault2flow {

enum class TestOrigin { Boundary, Region, Random };

constexpr std::string_view to_string(TestOrigin o) {
  switch (o) {
    case TestOrigin::Boundary: return "boundary";
    case TestOrigin::Region: return "region";
    case TestOrigin::Random: return "random";
  }
  return "?";
}

struct TestCase {
  Assignment input;
  std::set<std::string> expected;
  TestOrigin origin = TestOrigin::Region;
  friend bool operator==(const TestCase&, const TestCase&) = default;
};

struct TestStrategy {
  double boundary_epsilon = 1e-3;
  std::size_t region_cap = 4096;  // 2^12; 0 disables the region strategy
  std::size_t random_count = 16;
  std::uint64_t seed = 0;
  bool boundary = true;
};

namespace verify_detail {

inline Assignment neutral_assignment(const FaultTree& tree) {
  Assignment a;
  for (const auto& spec : tree.schema) {
    if (spec.kind == ParamKind::Measured) a[spec.name] = neutral_value(spec);
  }
  return a;
}

// Uniform double in [0, 1) from the top 53 bits; independent of the
// standard library's distribution implementation.
inline double unit_draw(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

}  // namespace verify_detail

/// Boundary cases first (per distinct parameter/threshold pair), then region
/// cases (low and high witnesses per satisfiable region), then seeded random
/// draws. Expected sets always come from `evaluate`.
inline std::vector<TestCase> generate_tests(const FaultTree& tree, const TestStrategy& strategy = {}) {
  using namespace verify_detail;
  if (!(strategy.boundary_epsilon > 0)) throw Error(ErrorKind::ConfigError, "boundary epsilon must be positive");
  CheckReport report = self_check(tree);
  if (!report.passed) throw Error(ErrorKind::SelfCheckFailed, render_findings(report.findings));

  std::vector<TestCase> tests;
  auto add = [&](Assignment input, TestOrigin origin) {
    for (const auto& t : tests) {
      if (t.origin == origin && t.input == input) return;
    }
    auto expected = evaluate(tree, input);
    tests.push_back(TestCase{std::move(input), std::move(expected), origin});
  };

  auto leaves = leaf_events(tree);
  if (strategy.boundary) {
    std::set<std::pair<std::string, double>> done;
    for (const auto& leaf : leaves) {
      const auto& cond = std::get<BasicEvent>(tree.at(leaf)).condition;
      if (!done.emplace(cond.parameter, cond.threshold).second) continue;
      const ParamSpec& spec = *tree.find_param(cond.parameter);
      for (double v : {cond.threshold - strategy.boundary_epsilon, cond.threshold,
                       cond.threshold + strategy.boundary_epsilon}) {
        Assignment input = neutral_assignment(tree);
        if (spec.kind == ParamKind::Derived) {
          input[spec.denominator] = 1.0;
          input[spec.numerator] = v;
        } else {
          input[spec.name] = v;
        }
        add(std::move(input), TestOrigin::Boundary);
      }
    }
  }

  if (strategy.region_cap > 0) {
    auto regions = enumerate_regions(tree, strategy.region_cap, strategy.boundary_epsilon);
    if (regions.empty()) {
      throw Error(ErrorKind::UnsatisfiableStrategy, "no satisfiable leaf-truth combination in '" + tree.name + "'");
    }
    for (auto& region : regions) {
      for (auto& witness : region.boundaries) add(std::move(witness), TestOrigin::Region);
    }
  }

  if (strategy.random_count > 0) {
    double max_threshold = 0;
    for (const auto& leaf : leaves) {
      max_threshold = std::max(max_threshold, std::abs(std::get<BasicEvent>(tree.at(leaf)).condition.threshold));
    }
    const double default_high = std::max(1.0, 2 * max_threshold);
    std::mt19937_64 rng(strategy.seed);
    for (std::size_t i = 0; i < strategy.random_count; ++i) {
      for (int attempt = 0; attempt < 64; ++attempt) {
        Assignment input;
        for (const auto& spec : tree.schema) {
          if (spec.kind != ParamKind::Measured) continue;
          double lo = spec.range ? spec.range->low : 0.0;
          double hi = spec.range ? spec.range->high : default_high;
          input[spec.name] = lo + (hi - lo) * unit_draw(rng);
        }
        try {
          add(std::move(input), TestOrigin::Random);
          break;
        } catch (const Error& e) {
          if (e.kind() != ErrorKind::DivisionByZero) throw;
        }
      }
    }
  }
  return tests;
}

struct VerifyFailure {
  TestCase test;
  std::set<std::string> actual;
  std::optional<ExecutionTrace> trace;
  std::string error;  // execution error, empty when the run completed
};

struct VerifyReport {
  bool passed = false;
  std::size_t iterations_used = 0;
  std::vector<VerifyFailure> failures;
  double coverage = 0;  // E2ERC of the final run
  CoverageCount paths;
  Workflow workflow;    // the workflow of the final iteration
};

using Regenerator = std::function<Workflow(const FaultTree&, const std::vector<VerifyFailure>&)>;

/// Runs the suite; on failure hands the failures to `regenerator` and runs
/// again with its workflow, at most `max_iterations` runs in total.
inline VerifyReport verify(const FaultTree& tree, const Workflow& w, const std::vector<TestCase>& tests,
                           std::size_t max_iterations, const Regenerator& regenerator = {}, unsigned threads = 1) {
  if (max_iterations < 1) throw Error(ErrorKind::ConfigError, "max_iterations must be at least 1");
  VerifyReport report;
  report.workflow = w;
  std::vector<Assignment> inputs;
  for (const auto& t : tests) inputs.push_back(t.input);

  for (std::size_t iteration = 1; iteration <= max_iterations; ++iteration) {
    report.iterations_used = iteration;
    report.failures.clear();
    std::vector<ExecutionTrace> traces;
    auto results = batch_execute(report.workflow, inputs, threads);
    for (std::size_t i = 0; i < tests.size(); ++i) {
      if (results[i].ok()) {
        traces.push_back(*results[i].trace);
        if (results[i].trace->triggered != tests[i].expected) {
          report.failures.push_back(VerifyFailure{tests[i], results[i].trace->triggered, results[i].trace, {}});
        }
      } else {
        report.failures.push_back(VerifyFailure{tests[i], {}, std::nullopt, results[i].error->what()});
      }
    }
    try {
      report.paths = path_coverage(tree, traces);
      report.coverage = report.paths.ratio();
    } catch (const Error&) {
      report.paths = {};
      report.coverage = 0;
    }
    report.passed = report.failures.empty();
    if (report.passed || !regenerator || iteration == max_iterations) break;
    report.workflow = regenerator(tree, report.failures);
  }
  return report;
}

/// The default regenerator: compile the tree again, ignoring the failures.
inline Regenerator recompile_regenerator(CompileOptions opts = {}) {
  return [opts](const FaultTree& tree, const std::vector<VerifyFailure>&) { return compile(tree, opts); };
}

// ---- suite documents ----

inline nlohmann::ordered_json suite_to_json(const std::string& tree_name, const std::vector<TestCase>& tests) {
  nlohmann::ordered_json doc;
  doc["tree"] = tree_name;
  doc["tests"] = nlohmann::ordered_json::array();
  for (const auto& t : tests) {
    nlohmann::ordered_json item;
    item["input"] = nlohmann::ordered_json::object();
    for (const auto& [k, v] : t.input) item["input"][k] = v;
    item["expected"] = nlohmann::ordered_json::array();
    for (const auto& label : t.expected) item["expected"].push_back(label);
    item["origin"] = std::string(to_string(t.origin));
    doc["tests"].push_back(std::move(item));
  }
  return doc;
}

inline std::string export_suite(const std::string& tree_name, const std::vector<TestCase>& tests) {
  return suite_to_json(tree_name, tests).dump(2) + "\n";
}

inline std::vector<TestCase> import_suite(std::string_view text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::SchemaError, std::string("suite is not valid JSON: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("tests") || !doc["tests"].is_array()) {
    throw Error(ErrorKind::SchemaError, "/tests: missing or not an array");
  }
  std::vector<TestCase> tests;
  for (std::size_t i = 0; i < doc["tests"].size(); ++i) {
    const auto& item = doc["tests"][i];
    std::string at = "/tests/" + std::to_string(i);
    if (!item.is_object() || !item.contains("input") || !item["input"].is_object()) {
      throw Error(ErrorKind::SchemaError, at + "/input: missing or not an object");
    }
    TestCase t;
    for (const auto& [k, v] : item["input"].items()) {
      if (!v.is_number()) throw Error(ErrorKind::SchemaError, at + "/input/" + k + ": not a number");
      t.input[k] = v.get<double>();
    }
    if (!item.contains("expected") || !item["expected"].is_array()) {
      throw Error(ErrorKind::SchemaError, at + "/expected: missing or not an array");
    }
    for (const auto& label : item["expected"]) {
      if (!label.is_string()) throw Error(ErrorKind::SchemaError, at + "/expected: labels must be strings");
      t.expected.insert(label.get<std::string>());
    }
    std::string origin = item.value("origin", std::string("region"));
    if (origin == "boundary") {
      t.origin = TestOrigin::Boundary;
    } else if (origin == "region") {
      t.origin = TestOrigin::Region;
    } else if (origin == "random") {
      t.origin = TestOrigin::Random;
    } else {
      throw Error(ErrorKind::SchemaError, at + "/origin: unknown origin '" + origin + "'");
    }
    tests.push_back(std::move(t));
  }
  return tests;
}

}  // namespace fault2flow
