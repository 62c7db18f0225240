#include <gtest/gtest.h>

#include <random>

#include "fault2flow/evolve.hpp"
#include "fault2flow/pasta_dsl.hpp"
#include "support/expect_error.hpp"
#include "support/fixtures.hpp"
#include "support/oracles.hpp"

namespace f2f = fault2flow;
using f2f::ErrorKind;

namespace {

f2f::Candidate candidate(bool valid, double readability, std::size_t size, std::string id) {
  f2f::Candidate c;
  c.fitness = {valid, valid, readability, size};
  c.id = std::move(id);
  return c;
}

/// Wraps every top's child in two one-child AND gates.
std::string wrapped_genome(const std::string& fixture) {
  auto tree = f2f_test::load_tree(fixture);
  for (const auto& top : tree.tops) {
    auto& body = std::get<f2f::TopEvent>(tree.nodes.at(top));
    std::string inner = top + "_inner_wrap";
    std::string outer = top + "_outer_wrap";
    tree.nodes.emplace(inner, f2f::Gate{f2f::GateKind::And, 0, {body.child}});
    tree.nodes.emplace(outer, f2f::Gate{f2f::GateKind::And, 0, {inner}});
    body.child = outer;
  }
  return f2f::emit_pasta(tree);
}

std::size_t one_child_gates(const f2f::FaultTree& tree) {
  std::size_t n = 0;
  for (const auto& id : f2f::reachable_nodes(tree)) {
    if (auto* g = std::get_if<f2f::Gate>(&tree.at(id))) n += g->children.size() == 1 ? 1 : 0;
  }
  return n;
}

f2f::EvolveConfig small_config(std::size_t iterations, std::uint64_t seed = 42) {
  f2f::EvolveConfig cfg;
  cfg.islands = 2;
  cfg.population_per_island = 6;
  cfg.iterations = iterations;
  cfg.migration_interval = 5;
  cfg.seed = seed;
  return cfg;
}

}  // namespace

TEST(FitnessOrder, Examples) {
  EXPECT_LT(f2f::fitness_order(candidate(true, 0.1, 50, "z"), candidate(false, 1.0, 1, "a")), 0);
  EXPECT_LT(f2f::fitness_order(candidate(true, 0.8, 20, "z"), candidate(true, 0.6, 1, "a")), 0);
  EXPECT_LT(f2f::fitness_order(candidate(true, 0.8, 9, "z"), candidate(true, 0.8, 11, "a")), 0);
  EXPECT_LT(f2f::fitness_order(candidate(true, 0.8, 9, "a"), candidate(true, 0.8, 9, "b")), 0);
  EXPECT_EQ(f2f::fitness_order(candidate(true, 0.8, 9, "a"), candidate(true, 0.8, 9, "a")), 0);
  auto valid_only = candidate(true, 0.9, 1, "a");
  valid_only.fitness.equivalent = false;
  EXPECT_GT(f2f::fitness_order(valid_only, candidate(true, 0.1, 9, "b")), 0);
}

TEST(Rewrites, GateFlatten) {
  auto tree = f2f::parse_pasta("tree t\nparam x unit \"u\"\nbasic a : x < 1\nbasic b : x < 2\nbasic c : x < 3\n"
                               "gate inner = and(a, b)\ngate outer = and(inner, c)\ntop f = outer\n");
  std::mt19937_64 rng(1);
  auto flat = f2f::gate_flatten(tree, rng);
  EXPECT_EQ(std::get<f2f::Gate>(flat.at("outer")).children, (std::vector<std::string>{"a", "b", "c"}));
  EXPECT_EQ(flat.find("inner"), nullptr);
  EXPECT_F2F_ERROR(f2f::gate_flatten(flat, rng), ErrorKind::NotApplicable);
}

TEST(Rewrites, DedupeSharesIdenticalSubtrees) {
  auto tree = f2f::parse_pasta("tree t\nparam x unit \"u\"\nbasic a : x < 1\nbasic b : x < 1\n"
                               "gate g = or(a, b)\ntop f = g\n");
  std::mt19937_64 rng(1);
  auto shared = f2f::dedupe_subtrees(tree, rng);
  const auto& children = std::get<f2f::Gate>(shared.at("g")).children;
  ASSERT_EQ(children.size(), 2u);
  EXPECT_EQ(children[0], children[1]);
  EXPECT_EQ(f2f::leaf_events(shared).size(), 1u);
  EXPECT_TRUE(f2f_test::grid_equivalent(tree, shared));
}

TEST(Rewrites, StripDegenerate) {
  auto tree = f2f_test::load_tree("degenerate_wrapped");
  std::mt19937_64 rng(1);
  auto stripped = f2f::strip_degenerate(tree, rng);
  EXPECT_LT(one_child_gates(stripped), one_child_gates(tree));
  EXPECT_TRUE(f2f_test::grid_equivalent(tree, stripped));
}

TEST(Rewrites, RenameNormalize) {
  auto tree = f2f::parse_pasta("tree t\nparam x unit \"u\"\nbasic low__x : x < 1\ntop f = low__x\n");
  std::mt19937_64 rng(1);
  auto renamed = f2f::rename_normalize(tree, rng);
  EXPECT_EQ(renamed.find("low__x"), nullptr);
  EXPECT_EQ(f2f::readability_score(renamed), 1.0);
  EXPECT_TRUE(f2f_test::grid_equivalent(tree, renamed));
}

TEST(Rewrites, ReorderCanonicalIsIdempotent) {
  for (const auto& name : f2f_test::tree_fixtures()) {
    auto tree = f2f_test::load_tree(name);
    std::mt19937_64 rng(1);
    f2f::FaultTree once = tree;
    try {
      once = f2f::reorder_canonical(tree, rng);
    } catch (const f2f::Error& e) {
      ASSERT_EQ(e.kind(), ErrorKind::NotApplicable);
    }
    EXPECT_F2F_ERROR(f2f::reorder_canonical(once, rng), ErrorKind::NotApplicable);
    EXPECT_TRUE(f2f_test::grid_equivalent(tree, once)) << name;
  }
}

TEST(Rewrites, EveryRewritePreservesSemantics) {
  for (const auto& name : {"four_path", "nested_depth", "degenerate_wrapped", "bushing_kofn", "seven_edge"}) {
    auto tree = f2f_test::load_tree(name);
    for (const auto& rw : f2f::default_rewrites()) {
      for (std::uint64_t seed = 0; seed < 5; ++seed) {
        std::mt19937_64 rng(seed);
        try {
          auto out = f2f::parse_pasta(f2f::emit_pasta(rw.rewrite(tree, rng)));
          ASSERT_TRUE(f2f::self_check(out).passed) << name << " " << rw.name;
          ASSERT_TRUE(f2f_test::grid_equivalent(tree, out)) << name << " " << rw.name;
        } catch (const f2f::Error& e) {
          ASSERT_EQ(e.kind(), ErrorKind::NotApplicable) << name << " " << rw.name << ": " << e.what();
        }
      }
    }
  }
}

TEST(Evolve, ZeroIterationsReturnsSeed) {
  auto genome = f2f::emit_pasta(f2f_test::load_tree("four_path"));
  auto cfg = small_config(0);
  auto result = f2f::evolve(genome, cfg);
  EXPECT_TRUE(result.history.empty());
  EXPECT_EQ(result.best.genome, genome);
  EXPECT_TRUE(result.best.fitness.valid && result.best.fitness.equivalent);
  EXPECT_EQ(result.best.fitness.readability, f2f::readability_score(f2f_test::load_tree("four_path")));
  for (const auto& island : result.archive) EXPECT_EQ(island.size(), 1u);
}

TEST(Evolve, StripsWrappersWithinFiftyIterations) {
  auto genome = wrapped_genome("four_path");
  auto seed_tree = f2f::parse_pasta(genome);
  ASSERT_GT(one_child_gates(seed_tree), 0u);
  f2f::EvolveConfig cfg;
  cfg.iterations = 50;
  cfg.seed = 42;
  auto result = f2f::evolve(genome, cfg);
  auto best = f2f::parse_pasta(result.best.genome);
  EXPECT_EQ(one_child_gates(best), 0u);
  EXPECT_GT(result.best.fitness.readability, f2f::readability_score(seed_tree));
  EXPECT_TRUE(f2f_test::grid_equivalent(seed_tree, best));
  EXPECT_EQ(result.history.size(), 50u);
}

TEST(Evolve, HistoryNeverRegresses) {
  auto result = f2f::evolve(wrapped_genome("nested_depth"), small_config(40));
  for (std::size_t i = 1; i < result.history.size(); ++i) {
    f2f::Candidate prev{"", result.history[i - 1].best, 0, 0, result.history[i - 1].best_id};
    f2f::Candidate cur{"", result.history[i].best, 0, 0, result.history[i].best_id};
    ASSERT_LE(f2f::fitness_order(cur, prev), 0) << i;
  }
}

TEST(Evolve, ArchiveInvariants) {
  auto cfg = small_config(30);
  auto genome = wrapped_genome("seven_edge");
  auto seed_tree = f2f::parse_pasta(genome);
  auto result = f2f::evolve(genome, cfg);
  ASSERT_EQ(result.archive.size(), cfg.islands);
  for (const auto& island : result.archive) {
    ASSERT_LE(island.size(), cfg.population_per_island);
    std::set<std::string> ids;
    for (std::size_t i = 0; i < island.size(); ++i) {
      EXPECT_TRUE(island[i].fitness.valid && island[i].fitness.equivalent);
      EXPECT_TRUE(ids.insert(island[i].id).second);
      if (i > 0) {
        EXPECT_LT(f2f::fitness_order(island[i - 1], island[i]), 0);
      }
      EXPECT_TRUE(f2f_test::grid_equivalent(seed_tree, f2f::parse_pasta(island[i].genome)));
    }
  }
}

TEST(Evolve, DeterministicAcrossRunsAndThreads) {
  auto genome = wrapped_genome("bushing_kofn");
  auto cfg = small_config(25);
  auto a = f2f::evolve(genome, cfg);
  auto b = f2f::evolve(genome, cfg);
  cfg.threads = 2;
  auto c = f2f::evolve(genome, cfg);
  EXPECT_EQ(a.best, b.best);
  EXPECT_EQ(a.history, b.history);
  EXPECT_EQ(a.best, c.best);
  EXPECT_EQ(a.history, c.history);
  EXPECT_EQ(a.archive, c.archive);
}

TEST(Evolve, CheckpointResumeMatchesStraightRun) {
  auto genome = wrapped_genome("four_path");
  auto cfg = small_config(20, 9);
  auto straight = f2f::evolve(genome, cfg);

  auto state = f2f::evolve_init(genome, cfg);
  f2f::evolve_continue(state, cfg, 8);
  auto text = f2f::save_checkpoint(state);
  auto resumed = f2f::load_checkpoint(text);
  EXPECT_EQ(f2f::save_checkpoint(resumed), text);
  f2f::evolve_continue(resumed, cfg, 20);
  auto result = f2f::evolve_result(resumed);
  EXPECT_EQ(result.best, straight.best);
  EXPECT_EQ(result.history, straight.history);
  EXPECT_EQ(result.archive, straight.archive);
}

TEST(Evolve, MutatorFailuresAreCounted) {
  auto cfg = small_config(5);
  cfg.mutator = [](const std::string&, const std::vector<std::string>&, std::mt19937_64&) -> std::string {
    throw std::runtime_error("no child");
  };
  auto result = f2f::evolve(f2f::emit_pasta(f2f_test::load_tree("four_path")), cfg);
  EXPECT_GT(result.mutator_failures, 0u);
  EXPECT_EQ(result.history.size(), 5u);
}

TEST(Evolve, NonEquivalentChildrenAreRejected) {
  auto cfg = small_config(5);
  cfg.mutator = [](const std::string& parent, const std::vector<std::string>&, std::mt19937_64&) {
    auto tree = f2f::parse_pasta(parent);
    for (auto& [id, body] : tree.nodes) {
      if (auto* basic = std::get_if<f2f::BasicEvent>(&body)) basic->condition.threshold += 1;
    }
    return f2f::emit_pasta(tree);
  };
  auto genome = f2f::emit_pasta(f2f_test::load_tree("four_path"));
  auto result = f2f::evolve(genome, cfg);
  EXPECT_GT(result.rejected, 0u);
  EXPECT_EQ(result.best.genome, genome);
}

TEST(Evolve, InspirationsAreDistinctArchiveMembers) {
  auto cfg = small_config(10);
  cfg.inspiration_count = 2;
  std::size_t calls_with_inspirations = 0;
  auto base = f2f::default_mutator();
  cfg.mutator = [&](const std::string& parent, const std::vector<std::string>& insp, std::mt19937_64& rng) {
    if (!insp.empty()) {
      ++calls_with_inspirations;
      EXPECT_LE(insp.size(), 2u);
      std::set<std::string> distinct(insp.begin(), insp.end());
      EXPECT_EQ(distinct.size(), insp.size());
      EXPECT_FALSE(distinct.contains(parent));
    }
    return base(parent, insp, rng);
  };
  f2f::evolve(wrapped_genome("four_path"), cfg);
  EXPECT_GT(calls_with_inspirations, 0u);
}

TEST(Evolve, ConfigErrors) {
  auto genome = f2f::emit_pasta(f2f_test::load_tree("four_path"));
  auto bad = small_config(1);
  bad.islands = 0;
  EXPECT_F2F_ERROR(f2f::evolve(genome, bad), ErrorKind::ConfigError);
  bad = small_config(1);
  bad.migration_size = bad.population_per_island + 1;
  EXPECT_F2F_ERROR(f2f::evolve(genome, bad), ErrorKind::ConfigError);
  bad = small_config(1);
  bad.inspiration_count = bad.population_per_island;
  EXPECT_F2F_ERROR(f2f::evolve(genome, bad), ErrorKind::ConfigError);
  bad = small_config(1);
  bad.mutator = nullptr;
  EXPECT_F2F_ERROR(f2f::evolve(genome, bad), ErrorKind::ConfigError);
}

TEST(Evolve, SeedInvalid) {
  EXPECT_F2F_ERROR(f2f::evolve("not a tree", small_config(1)), ErrorKind::SeedInvalid);
  EXPECT_F2F_ERROR(f2f::evolve("tree t\nparam x unit \"u\"\nbasic a : x < 1\ngate o = or(a)\ntop f = a\n",
                               small_config(1)),
                   ErrorKind::SeedInvalid);
  EXPECT_F2F_ERROR(f2f::evolve(f2f_test::read_fixture("translated/three_ratio.pasta"), small_config(1)),
                   ErrorKind::SeedInvalid);
}

TEST(Checkpoint, RejectsForeignDocuments) {
  EXPECT_F2F_ERROR(f2f::load_checkpoint(R"({"format": "other"})"), ErrorKind::SchemaError);
  EXPECT_F2F_ERROR(f2f::load_checkpoint("{"), ErrorKind::SchemaError);
}
