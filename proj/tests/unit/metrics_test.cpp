#include <gtest/gtest.h>

#include <random>

#include "fault2flow/compiler.hpp"
#include "fault2flow/evolve.hpp"
#include "fault2flow/metrics.hpp"
#include "fault2flow/pasta_dsl.hpp"
#include "fault2flow/pipeline.hpp"
#include "fault2flow/regions.hpp"
#include "fault2flow/verify.hpp"
#include "support/expect_error.hpp"
#include "support/fixtures.hpp"
#include "support/oracles.hpp"
#include "support/random_trees.hpp"

namespace f2f = fault2flow;
using f2f::ErrorKind;

namespace {

f2f::Workflow strip_provenance(const f2f::Workflow& w, std::size_t every = 1) {
  auto nodes = w.nodes();
  std::size_t seen = 0;
  for (auto& n : nodes) {
    if (n.provenance && seen++ % every == 0) n.provenance.reset();
  }
  return f2f::Workflow(w.name(), nodes, w.connections());
}

f2f::Workflow with_condition(const f2f::Workflow& w, const std::string& name, f2f::CompareOp op) {
  auto nodes = w.nodes();
  for (auto& n : nodes) {
    if (n.name == name) n.condition.op = op;
  }
  return f2f::Workflow(w.name(), nodes, w.connections());
}

std::vector<f2f::ExecutionTrace> suite_traces(const f2f::FaultTree& tree, const f2f::Workflow& w) {
  std::vector<f2f::ExecutionTrace> traces;
  for (const auto& t : f2f::generate_tests(tree)) traces.push_back(f2f::execute(w, t.input));
  return traces;
}

}  // namespace

TEST(Regions, WitnessesReproduceTheirTruthValues) {
  for (const auto& name : f2f_test::tree_fixtures()) {
    auto tree = f2f_test::load_tree(name);
    auto leaves = f2f::leaf_events(tree);
    if (leaves.size() > 12) continue;
    for (const auto& region : f2f::enumerate_regions(tree, 1u << leaves.size(), 1e-3)) {
      std::uint64_t mask = 0;
      for (std::size_t i = 0; i < leaves.size(); ++i) mask |= std::uint64_t{region.truth[i]} << i;
      ASSERT_EQ(f2f_test::leaf_mask(tree, region.representative), mask) << name;
      for (const auto& b : region.boundaries) ASSERT_EQ(f2f_test::leaf_mask(tree, b), mask) << name;
    }
  }
}

TEST(Regions, MatchBruteForceGrid) {
  for (const auto& name : {"single_condition", "four_path", "seven_edge", "nested_depth", "bushing_kofn"}) {
    auto tree = f2f_test::load_tree(name);
    auto grid = f2f_test::brute_force_grid(tree);
    ASSERT_TRUE(grid.exhaustive) << name;
    std::set<std::uint64_t> expected;
    for (const auto& p : grid.points) expected.insert(f2f_test::leaf_mask(tree, p));
    std::set<std::uint64_t> got;
    auto leaves = f2f::leaf_events(tree);
    for (const auto& region : f2f::enumerate_regions(tree, 1u << leaves.size(), 1e-3)) {
      got.insert(f2f_test::leaf_mask(tree, region.representative));
    }
    EXPECT_EQ(got, expected) << name;
  }
}

TEST(Regions, CapLimitsCount) {
  auto tree = f2f_test::load_tree("seven_edge");
  EXPECT_EQ(f2f::enumerate_regions(tree, 3, 1e-3).size(), 3u);
}

TEST(TopologicalConsistency, CompiledFixturesAreComplete) {
  for (const auto& name : f2f_test::tree_fixtures()) {
    auto tree = f2f_test::load_tree(name);
    EXPECT_EQ(f2f::topological_consistency(tree, f2f::compile(tree)), 1.0) << name;
  }
}

TEST(TopologicalConsistency, StrippedProvenanceIsZero) {
  auto tree = f2f_test::load_tree("four_path");
  EXPECT_EQ(f2f::topological_consistency(tree, strip_provenance(f2f::compile(tree))), 0.0);
  auto baseline = f2f::import_n8n(f2f_test::read_fixture("baselines/four_path_no_provenance.json"));
  EXPECT_EQ(f2f::topological_consistency(tree, baseline), 0.0);
}

TEST(TopologicalConsistency, PartialStripDropsBelowOne) {
  for (const auto& name : f2f_test::tree_fixtures()) {
    auto tree = f2f_test::load_tree(name);
    EXPECT_LT(f2f::topological_consistency(tree, strip_provenance(f2f::compile(tree), 10)), 1.0) << name;
  }
}

TEST(TopologicalConsistency, EmptyTree) {
  EXPECT_F2F_ERROR(f2f::topological_consistency(f2f::FaultTree{}, f2f::Workflow{}), ErrorKind::EmptyTree);
}

TEST(EndToEndReachability, SuiteCoversEveryPath) {
  for (const auto& name : f2f_test::tree_fixtures()) {
    auto tree = f2f_test::load_tree(name);
    auto w = f2f::compile(tree);
    EXPECT_EQ(f2f::e2e_reachability(tree, w, suite_traces(tree, w)), 1.0) << name;
  }
}

TEST(EndToEndReachability, ZeroTracesAndEmptyTree) {
  auto tree = f2f_test::load_tree("four_path");
  EXPECT_EQ(f2f::e2e_reachability(tree, f2f::compile(tree), {}), 0.0);
  EXPECT_F2F_ERROR(f2f::e2e_reachability(f2f::FaultTree{}, f2f::Workflow{}, {}), ErrorKind::EmptyTree);
}

TEST(EndToEndReachability, MonotoneInTraces) {
  auto tree = f2f_test::load_tree("three_ratio");
  auto w = f2f::compile(tree);
  auto traces = suite_traces(tree, w);
  std::mt19937_64 rng(3);
  std::shuffle(traces.begin(), traces.end(), rng);
  std::vector<f2f::ExecutionTrace> prefix;
  std::size_t last = 0;
  for (const auto& t : traces) {
    prefix.push_back(t);
    auto covered = f2f::path_coverage(tree, prefix).covered;
    ASSERT_GE(covered, last);
    last = covered;
  }
  EXPECT_EQ(last, f2f::root_leaf_paths(tree).size());
}

TEST(SemanticFidelity, CompiledFixturesAgreeEverywhere) {
  for (const auto& name : f2f_test::tree_fixtures()) {
    auto tree = f2f_test::load_tree(name);
    if (f2f::leaf_events(tree).size() > f2f::kDefaultLeafCap) continue;
    EXPECT_EQ(f2f::semantic_fidelity(tree, f2f::compile(tree)), 1.0) << name;
  }
}

TEST(SemanticFidelity, NegatedSingleLeaf) {
  auto tree = f2f_test::load_tree("single_condition");
  auto negated = with_condition(f2f::compile(tree), "check_x_low", f2f::CompareOp::GreaterEqual);
  auto count = f2f::fidelity_count(tree, negated);
  EXPECT_EQ(count.total, 2u);
  EXPECT_EQ(count.covered, 0u);
}

TEST(SemanticFidelity, FlippedLeafOfThreeWayAnd) {
  auto tree = f2f::parse_pasta("tree t\nparam x unit \"u\"\nparam y unit \"u\"\nparam z unit \"u\"\n"
                               "basic a : x < 1\nbasic b : y < 1\nbasic c : z < 1\ngate g = and(a, b, c)\ntop f = g\n");
  auto flipped = with_condition(f2f::compile(tree), "check_a", f2f::CompareOp::GreaterEqual);
  ASSERT_NE(flipped.find("check_a"), nullptr);

  // Per leaf-truth mask: does every grid point in it agree?
  std::map<std::uint64_t, bool> agrees;
  for (const auto& p : f2f_test::brute_force_grid(tree).points) {
    auto mask = f2f_test::leaf_mask(tree, p);
    bool same = f2f::execute(flipped, p).triggered == f2f::evaluate(tree, p);
    auto [it, fresh] = agrees.emplace(mask, same);
    if (!fresh) it->second = it->second && same;
  }
  std::size_t expected = 0;
  for (const auto& [mask, ok] : agrees) expected += ok ? 1 : 0;

  auto count = f2f::fidelity_count(tree, flipped);
  EXPECT_EQ(count.total, agrees.size());
  EXPECT_EQ(count.covered, expected);
  EXPECT_EQ(count.total, 8u);
  EXPECT_EQ(count.covered, 6u);  // disagreement only where b and c hold
}

TEST(SemanticFidelity, LeafCap) {
  auto tree = f2f::parse_pasta(f2f_test::read_fixture("translated/three_ratio.pasta"));
  EXPECT_F2F_ERROR(f2f::semantic_fidelity(tree, f2f::compile(tree)), ErrorKind::LeafCapExceeded);
  auto four = f2f_test::load_tree("four_path");
  EXPECT_F2F_ERROR(f2f::fidelity_count(four, f2f::compile(four), 3), ErrorKind::LeafCapExceeded);
}

TEST(Readability, MinimalTreeScoresOne) {
  EXPECT_EQ(f2f::readability_score(f2f_test::load_tree("single_condition")), 1.0);
}

TEST(Readability, DegenerateWrappersLowerTheScore) {
  auto wrapped = f2f::parse_pasta("tree single_condition\nparam x unit \"u\"\nbasic x_low : x < 10\n"
                                  "gate w1 = and(x_low)\ngate w2 = and(w1)\ngate w3 = and(w2)\ntop fault = w3\n");
  EXPECT_LT(f2f::readability_score(wrapped), f2f::readability_score(f2f_test::load_tree("single_condition")));
}

TEST(Readability, DegenerateWrappedFixtureByHand) {
  // Four of six gates have one child: 0.3 * 4/6. Each top sits four edges
  // above its leaves where two leaves need two: 0.25 * (8 - 4) / 8.
  EXPECT_NEAR(f2f::readability_score(f2f_test::load_tree("degenerate_wrapped")), 1 - 0.2 - 0.125, 1e-12);
}

TEST(Readability, NamingAndRedundancy) {
  auto base = f2f::parse_pasta("tree t\nparam x unit \"u\"\nparam y unit \"u\"\nbasic a : x < 1\nbasic b : y < 1\n"
                               "gate g = or(a, b)\ntop f = g\n");
  auto shouty = f2f::parse_pasta("tree t\nparam x unit \"u\"\nparam y unit \"u\"\nbasic _a : x < 1\nbasic b : y < 1\n"
                                 "gate g = or(_a, b)\ntop f = g\n");
  auto duplicated = f2f::parse_pasta("tree t\nparam x unit \"u\"\nparam y unit \"u\"\nbasic a : x < 1\n"
                                     "basic a2 : x < 1\ngate g = or(a, a2)\ntop f = g\n");
  EXPECT_EQ(f2f::readability_score(base), 1.0);
  EXPECT_LT(f2f::readability_score(shouty), 1.0);
  EXPECT_LT(f2f::readability_score(duplicated), 1.0);
}

TEST(Readability, GateFlattenNeverHurts) {
  for (const auto& name : {"three_ratio", "nested_depth", "degenerate_wrapped"}) {
    auto tree = f2f_test::load_tree(name);
    std::mt19937_64 rng(42);
    double before = f2f::readability_score(tree);
    try {
      while (true) {
        tree = f2f::gate_flatten(tree, rng);
        double after = f2f::readability_score(tree);
        EXPECT_GE(after, before) << name;
        before = after;
      }
    } catch (const f2f::Error& e) {
      EXPECT_EQ(e.kind(), ErrorKind::NotApplicable);
    }
  }
}

TEST(Readability, AlwaysWithinUnitInterval) {
  for (std::uint64_t seed = 1; seed <= 200; ++seed) {
    double r = f2f::readability_score(f2f_test::random_tree(seed));
    ASSERT_GE(r, 0.0);
    ASSERT_LE(r, 1.0);
  }
}

TEST(MetricTable, GoldenPipelineReport) {
  std::vector<f2f::MetricReport> rows;
  for (const auto& name : f2f_test::tree_fixtures()) {
    auto result = f2f::run_pipeline(f2f_test::load_tree(name));
    rows.push_back(result.metrics);
  }
  EXPECT_EQ(f2f::render_metrics_table(rows, true), f2f_test::read_fixture("reports/pipeline.txt"));
}

TEST(MetricTable, NotMeasuredAboveLeafCap) {
  auto tree = f2f::parse_pasta(f2f_test::read_fixture("translated/three_ratio.pasta"));
  auto w = f2f::compile(tree);
  auto m = f2f::measure(tree, w, suite_traces(tree, w));
  EXPECT_FALSE(m.sf_measured);
  EXPECT_NE(f2f::render_metrics_table({m}).find("n/a"), std::string::npos);
  EXPECT_TRUE(f2f::metrics_to_json(m)["sf_exhaustive"].is_null());
  EXPECT_EQ(m.tc, 1.0);
  EXPECT_EQ(m.e2erc, 1.0);
}
