#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "fault2flow/compiler.hpp"
#include "fault2flow/config.hpp"
#include "fault2flow/fault_tree.hpp"
#include "fault2flow/metrics.hpp"
#include "fault2flow/verify.hpp"
#include "fault2flow/workflow.hpp"

namespace fault2flow {

struct PipelineOptions {
  CompileOptions compile;
  TestStrategy strategy;
  std::size_t max_iterations = 5;
  std::size_t leaf_cap = kDefaultLeafCap;
  unsigned threads = 1;

  /// Reads `seed`, `epsilon`, `region_cap`, `random_count`, `max_iter`,
  /// `leaf_cap`, `no_fault_label` and `threads` when present.
  static PipelineOptions from_config(const Config& cfg) {
    PipelineOptions o;
    o.strategy.seed = cfg.get_count("seed", o.strategy.seed);
    o.strategy.boundary_epsilon = cfg.get_number("epsilon", o.strategy.boundary_epsilon);
    o.strategy.region_cap = cfg.get_count("region_cap", o.strategy.region_cap);
    o.strategy.random_count = cfg.get_count("random_count", o.strategy.random_count);
    o.max_iterations = cfg.get_count("max_iter", o.max_iterations);
    o.leaf_cap = cfg.get_count("leaf_cap", o.leaf_cap);
    o.compile.no_fault_label = cfg.get("no_fault_label", o.compile.no_fault_label);
    o.threads = static_cast<unsigned>(cfg.get_count("threads", o.threads));
    return o;
  }
};

struct PipelineResult {
  Workflow workflow;
  std::vector<TestCase> tests;
  VerifyReport verification;
  MetricReport metrics;
};

/// Fills every metric column that needs only the tree and the workflow;
/// the path column comes from `traces`. sf-exhaustive is skipped above `leaf_cap`.
inline MetricReport measure(const FaultTree& tree, const Workflow& w, const std::vector<ExecutionTrace>& traces,
                            std::size_t leaf_cap = kDefaultLeafCap) {
  MetricReport m;
  m.fixture = tree.name;
  m.edges = edge_coverage(tree, w);
  m.tc = m.edges.ratio();
  m.paths = path_coverage(tree, traces);
  m.e2erc = m.paths.ratio();
  if (leaf_events(tree).size() <= leaf_cap) {
    m.regions = fidelity_count(tree, w, leaf_cap, 1e-3);
    m.sf = m.regions.ratio();
  } else {
    m.sf_measured = false;
  }
  m.readability = readability_score(tree);
  return m;
}

/// compile, generate tests, verify with the recompile regenerator, measure.
inline PipelineResult run_pipeline(const FaultTree& tree, const PipelineOptions& opts = {}) {
  PipelineResult r;
  r.workflow = compile(tree, opts.compile);
  r.tests = generate_tests(tree, opts.strategy);
  r.verification =
      verify(tree, r.workflow, r.tests, opts.max_iterations, recompile_regenerator(opts.compile), opts.threads);
  std::vector<Assignment> inputs;
  for (const auto& t : r.tests) inputs.push_back(t.input);
  std::vector<ExecutionTrace> traces;
  for (auto& item : batch_execute(r.verification.workflow, inputs, opts.threads)) {
    if (item.ok()) traces.push_back(std::move(*item.trace));
  }
  r.metrics = measure(tree, r.verification.workflow, traces, opts.leaf_cap);
  r.metrics.verify_success = r.verification.passed ? 1 : 0;
  r.metrics.verify_failure = r.verification.passed ? 0 : 1;
  return r;
}

inline nlohmann::ordered_json metrics_to_json(const MetricReport& m) {
  nlohmann::ordered_json j;
  j["fixture"] = m.fixture;
  j["readability"] = m.readability;
  if (m.sf_measured) {
    j["sf_exhaustive"] = {{"value", m.sf}, {"agreeing_regions", m.regions.covered}, {"regions", m.regions.total}};
  } else {
    j["sf_exhaustive"] = nullptr;
  }
  j["tc"] = {{"value", m.tc}, {"covered_edges", m.edges.covered}, {"pasta_edges", m.edges.total}};
  j["e2erc"] = {{"value", m.e2erc}, {"covered_paths", m.paths.covered}, {"ref_paths", m.paths.total}};
  j["verify"] = {{"success", m.verify_success}, {"failure", m.verify_failure}};
  return j;
}

}  // namespace fault2flow
