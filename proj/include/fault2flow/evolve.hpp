#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "fault2flow/error.hpp"
#include "fault2flow/fault_tree.hpp"
#include "fault2flow/metrics.hpp"
#include "fault2flow/pasta_dsl.hpp"
#include "fault2flow/regions.hpp"
#include "fault2flow/self_check.hpp"
#include "fault2flow/util.hpp"

namespace fault2flow {

struct Fitness {
  bool valid = false;
  bool equivalent = false;
  double readability = 0;
  std::size_t size = 0;  // reachable node count
  friend bool operator==(const Fitness&, const Fitness&) = default;
};

struct Candidate {
  std::string genome;  // PASTA source
  Fitness fitness;
  std::size_t island = 0;
  std::size_t generation = 0;
  std::string id;  // stable hash of the genome
  friend bool operator==(const Candidate&, const Candidate&) = default;
};

/// Negative when `a` ranks ahead of `b`: valid and equivalent first, then
/// higher readability, then smaller size, then the smaller id.
inline int fitness_order(const Candidate& a, const Candidate& b) {
  bool ga = a.fitness.valid && a.fitness.equivalent;
  bool gb = b.fitness.valid && b.fitness.equivalent;
  if (ga != gb) return ga ? -1 : 1;
  if (a.fitness.readability != b.fitness.readability) return a.fitness.readability > b.fitness.readability ? -1 : 1;
  if (a.fitness.size != b.fitness.size) return a.fitness.size < b.fitness.size ? -1 : 1;
  if (a.id != b.id) return a.id < b.id ? -1 : 1;
  return 0;
}

inline bool ranks_ahead(const Candidate& a, const Candidate& b) { return fitness_order(a, b) < 0; }

/// (parent genome, inspiration genomes, rng) -> child genome. Throws
/// NotApplicable (or anything else) to signal that no child was produced.
using Mutator = std::function<std::string(const std::string&, const std::vector<std::string>&, std::mt19937_64&)>;

// ---- semantics-preserving rewrites ----

namespace evolve_detail {

inline void replace_references(FaultTree& tree, const std::string& from, const std::string& to) {
  for (auto& [id, body] : tree.nodes) {
    if (auto* top = std::get_if<TopEvent>(&body)) {
      if (top->child == from) top->child = to;
    } else if (auto* gate = std::get_if<Gate>(&body)) {
      std::replace(gate->children.begin(), gate->children.end(), from, to);
    }
  }
}

// Drops gates and basic events no top reaches.
inline void collect_garbage(FaultTree& tree) {
  auto reachable = reachable_nodes(tree);
  std::set<std::string> keep(reachable.begin(), reachable.end());
  std::erase_if(tree.nodes, [&](const auto& entry) { return !keep.contains(entry.first); });
}

template <class T>
const T& pick_site(const std::vector<T>& sites, std::mt19937_64& rng) {
  if (sites.empty()) throw Error(ErrorKind::NotApplicable, "no rewrite site");
  return sites[rng() % sites.size()];
}

// Structural key that ignores child order, so sorting by it is a fixpoint.
inline std::string canonical_key(const FaultTree& tree, const std::string& id,
                                 std::map<std::string, std::string>& memo) {
  if (auto it = memo.find(id); it != memo.end()) return it->second;
  std::string key;
  const auto& body = tree.at(id);
  if (auto* basic = std::get_if<BasicEvent>(&body)) {
    key = "b(" + basic->condition.to_string() + ")";
  } else if (auto* gate = std::get_if<Gate>(&body)) {
    std::vector<std::string> parts;
    for (const auto& c : gate->children) parts.push_back(canonical_key(tree, c, memo));
    std::sort(parts.begin(), parts.end());
    key = std::string(to_string(gate->kind)) + std::to_string(gate->k) + "(";
    for (const auto& p : parts) key += p + ",";
    key += ")";
  } else {
    key = "t(" + canonical_key(tree, std::get<TopEvent>(body).child, memo) + ")";
  }
  memo.emplace(id, key);
  return key;
}

}  // namespace evolve_detail

/// AND(AND(a, b), c) -> AND(a, b, c), and likewise for OR.
inline FaultTree gate_flatten(FaultTree tree, std::mt19937_64& rng) {
  std::vector<std::pair<std::string, std::string>> sites;
  for (const auto& [id, body] : tree.nodes) {
    auto* gate = std::get_if<Gate>(&body);
    if (gate == nullptr || gate->kind == GateKind::KofN) continue;
    for (const auto& child : gate->children) {
      auto* inner = std::get_if<Gate>(tree.find(child));
      if (inner != nullptr && inner->kind == gate->kind && child != id) sites.emplace_back(id, child);
    }
  }
  auto [outer_id, inner_id] = evolve_detail::pick_site(sites, rng);
  auto inner_children = std::get<Gate>(tree.nodes.at(inner_id)).children;
  auto& outer = std::get<Gate>(tree.nodes.at(outer_id));
  std::vector<std::string> merged;
  for (const auto& child : outer.children) {
    if (child == inner_id) {
      merged.insert(merged.end(), inner_children.begin(), inner_children.end());
    } else {
      merged.push_back(child);
    }
  }
  outer.children = std::move(merged);
  evolve_detail::collect_garbage(tree);
  return tree;
}

/// Removes a one-child gate by pointing its parents at the child.
inline FaultTree strip_degenerate(FaultTree tree, std::mt19937_64& rng) {
  std::vector<std::string> sites;
  for (const auto& [id, body] : tree.nodes) {
    auto* gate = std::get_if<Gate>(&body);
    if (gate != nullptr && gate->children.size() == 1 && (gate->kind != GateKind::KofN || gate->k == 1)) {
      sites.push_back(id);
    }
  }
  std::string id = evolve_detail::pick_site(sites, rng);
  std::string child = std::get<Gate>(tree.nodes.at(id)).children.front();
  evolve_detail::replace_references(tree, id, child);
  evolve_detail::collect_garbage(tree);
  return tree;
}

/// Points every reference to a node at a structurally identical node that
/// comes earlier in visit order, turning duplicated subtrees into sharing.
inline FaultTree dedupe_subtrees(FaultTree tree, std::mt19937_64& rng) {
  std::map<std::string, std::string> memo;
  std::map<std::string, std::string> first_with_key;
  std::vector<std::pair<std::string, std::string>> sites;  // (duplicate, canonical)
  for (const auto& id : reachable_nodes(tree)) {
    if (tree.is_top(id)) continue;
    auto [it, inserted] = first_with_key.emplace(metrics_detail::structure_key(tree, id, memo), id);
    if (!inserted) sites.emplace_back(id, it->second);
  }
  auto [duplicate, canonical] = evolve_detail::pick_site(sites, rng);
  evolve_detail::replace_references(tree, duplicate, canonical);
  evolve_detail::collect_garbage(tree);
  return tree;
}

/// Renames one gate or basic event whose id is not snake_case. Top events
/// (fault class labels) and parameters are never renamed.
inline FaultTree rename_normalize(FaultTree tree, std::mt19937_64& rng) {
  std::vector<std::string> sites;
  for (const auto& [id, body] : tree.nodes) {
    if (!std::holds_alternative<TopEvent>(body) && !util::is_snake_case(id)) sites.push_back(id);
  }
  std::string id = evolve_detail::pick_site(sites, rng);
  std::string base = util::normalize_label(id);
  if (base.empty()) base = "node";
  std::string fresh = base;
  for (int n = 2; tree.nodes.contains(fresh) || tree.find_param(fresh) != nullptr; ++n) {
    fresh = base + "_" + std::to_string(n);
  }
  auto node = tree.nodes.extract(id);
  node.key() = fresh;
  tree.nodes.insert(std::move(node));
  evolve_detail::replace_references(tree, id, fresh);
  return tree;
}

/// Sorts every gate's children by the hash of their order-independent
/// structure, ties by id. Idempotent.
inline FaultTree reorder_canonical(FaultTree tree, std::mt19937_64&) {
  std::map<std::string, std::string> memo;
  std::map<std::string, std::string> hashes;
  for (const auto& [id, body] : tree.nodes) {
    hashes[id] = util::stable_hash(evolve_detail::canonical_key(tree, id, memo));
  }
  bool changed = false;
  for (auto& [id, body] : tree.nodes) {
    auto* gate = std::get_if<Gate>(&body);
    if (gate == nullptr) continue;
    auto sorted = gate->children;
    std::stable_sort(sorted.begin(), sorted.end(), [&](const std::string& a, const std::string& b) {
      const auto& ha = hashes.at(a);
      const auto& hb = hashes.at(b);
      return ha != hb ? ha < hb : a < b;
    });
    if (sorted != gate->children) {
      gate->children = std::move(sorted);
      changed = true;
    }
  }
  if (!changed) throw Error(ErrorKind::NotApplicable, "children already in canonical order");
  return tree;
}

using TreeRewrite = std::function<FaultTree(FaultTree, std::mt19937_64&)>;

struct NamedRewrite {
  std::string name;
  TreeRewrite rewrite;
};

inline std::vector<NamedRewrite> default_rewrites() {
  return {{"gate_flatten", gate_flatten},
          {"dedupe_subtrees", dedupe_subtrees},
          {"strip_degenerate", strip_degenerate},
          {"rename_normalize", rename_normalize},
          {"reorder_canonical", reorder_canonical}};
}

/// Lifts a tree rewrite to a genome mutator. Inspirations are ignored.
inline Mutator rewrite_mutator(TreeRewrite rewrite) {
  return [rewrite](const std::string& parent, const std::vector<std::string>&, std::mt19937_64& rng) {
    return emit_pasta(rewrite(parse_pasta(parent), rng));
  };
}

/// Starts at a random rewrite and moves on to the next one whenever a rewrite
/// has no site; NotApplicable only when none applies.
inline Mutator default_mutator(std::vector<NamedRewrite> rewrites = default_rewrites()) {
  return [rewrites](const std::string& parent, const std::vector<std::string>&, std::mt19937_64& rng) {
    FaultTree tree = parse_pasta(parent);
    std::size_t start = rewrites.empty() ? 0 : rng() % rewrites.size();
    for (std::size_t i = 0; i < rewrites.size(); ++i) {
      try {
        return emit_pasta(rewrites[(start + i) % rewrites.size()].rewrite(tree, rng));
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::NotApplicable) throw;
      }
    }
    throw Error(ErrorKind::NotApplicable, "no rewrite applies");
  };
}

// ---- the island model ----

struct EvolveConfig {
  std::size_t islands = 4;
  std::size_t population_per_island = 16;
  std::size_t iterations = 200;
  std::size_t inspiration_count = 2;
  std::size_t migration_interval = 10;
  std::size_t migration_size = 2;
  std::uint64_t seed = 0;
  Mutator mutator = default_mutator();
  unsigned threads = 1;
};

struct HistoryEntry {
  std::size_t iteration = 0;
  std::string best_id;
  Fitness best;
  friend bool operator==(const HistoryEntry&, const HistoryEntry&) = default;
};

using EliteArchive = std::vector<std::vector<Candidate>>;

/// Everything needed to continue a run; what a checkpoint stores.
struct EvolveState {
  std::string seed_genome;
  std::size_t iteration = 0;
  EliteArchive archive;
  std::vector<std::mt19937_64> rngs;
  std::vector<HistoryEntry> history;
  std::size_t mutator_failures = 0;
  std::size_t rejected = 0;  // children that parsed but were invalid or not equivalent
};

struct EvolveResult {
  Candidate best;
  EliteArchive archive;
  std::vector<HistoryEntry> history;
  std::size_t mutator_failures = 0;
  std::size_t rejected = 0;
};

namespace evolve_detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::set<std::tuple<std::string, CompareOp, double>> condition_set(const FaultTree& tree) {
  std::set<std::tuple<std::string, CompareOp, double>> out;
  for (const auto& leaf : leaf_events(tree)) {
    const auto& c = std::get<BasicEvent>(tree.at(leaf)).condition;
    out.emplace(c.parameter, c.op, c.threshold);
  }
  return out;
}

// The seed's region witnesses decide equivalence for any candidate built from
// the seed's own conditions; a candidate with new conditions adds its own.
class Judge {
 public:
  explicit Judge(const FaultTree& seed) : seed_(seed), conditions_(condition_set(seed)) {
    for (const auto& region : enumerate_regions(seed, std::size_t{1} << leaf_events(seed).size(), 1e-3)) {
      witnesses_.push_back(region.representative);
      for (const auto& b : region.boundaries) witnesses_.push_back(b);
    }
  }

  Candidate judge(std::string genome, std::size_t island, std::size_t generation) const {
    Candidate c;
    c.id = util::stable_hash(genome);
    c.genome = std::move(genome);
    c.island = island;
    c.generation = generation;
    FaultTree tree;
    try {
      tree = parse_pasta(c.genome);
    } catch (const Error&) {
      return c;
    }
    if (!self_check(tree).passed) return c;
    c.fitness.valid = true;
    c.fitness.readability = readability_score(tree);
    c.fitness.size = reachable_nodes(tree).size();
    c.fitness.equivalent = equivalent(tree);
    return c;
  }

 private:
  bool agree_on(const FaultTree& tree, const std::vector<Assignment>& points) const {
    try {
      for (const auto& a : points) {
        if (evaluate(tree, a) != evaluate(seed_, a)) return false;
      }
      return true;
    } catch (const Error&) {
      return false;
    }
  }

  bool equivalent(const FaultTree& tree) const {
    if (tree.tops != seed_.tops) return false;
    if (!agree_on(tree, witnesses_)) return false;
    auto conds = condition_set(tree);
    if (std::includes(conditions_.begin(), conditions_.end(), conds.begin(), conds.end())) return true;
    std::size_t leaves = leaf_events(tree).size();
    if (leaves > kDefaultLeafCap) return false;
    std::vector<Assignment> extra;
    for (const auto& region : enumerate_regions(tree, std::size_t{1} << leaves, 1e-3)) {
      extra.push_back(region.representative);
      for (const auto& b : region.boundaries) extra.push_back(b);
    }
    return agree_on(tree, extra);
  }

  const FaultTree& seed_;
  std::set<std::tuple<std::string, CompareOp, double>> conditions_;
  std::vector<Assignment> witnesses_;
};

// Keeps the island sorted, bounded and free of duplicate ids; only valid,
// equivalent candidates are admitted.
inline bool admit(std::vector<Candidate>& island, Candidate c, std::size_t capacity) {
  if (!c.fitness.valid || !c.fitness.equivalent) return false;
  for (const auto& existing : island) {
    if (existing.id == c.id) return false;
  }
  if (island.size() >= capacity) {
    if (!ranks_ahead(c, island.back())) return false;
    island.pop_back();
  }
  auto pos = std::lower_bound(island.begin(), island.end(), c, ranks_ahead);
  island.insert(pos, std::move(c));
  return true;
}

// Rank-proportional: the best of n members has weight n, the worst weight 1.
inline std::size_t sample_rank(std::size_t n, std::mt19937_64& rng) {
  std::uint64_t total = static_cast<std::uint64_t>(n) * (n + 1) / 2;
  std::uint64_t draw = rng() % total;
  for (std::size_t r = 0; r < n; ++r) {
    std::uint64_t w = n - r;
    if (draw < w) return r;
    draw -= w;
  }
  return n - 1;
}

struct IslandOutcome {
  std::size_t failures = 0;
  std::size_t rejected = 0;
};

inline IslandOutcome step_island(std::vector<Candidate>& island, std::size_t index, std::mt19937_64& rng,
                                 const EvolveConfig& cfg, const Judge& judge) {
  IslandOutcome out;
  if (island.empty()) return out;
  std::size_t parent_rank = sample_rank(island.size(), rng);
  const Candidate parent = island[parent_rank];
  std::vector<std::size_t> pool;
  for (std::size_t i = 0; i < island.size(); ++i) {
    if (i != parent_rank) pool.push_back(i);
  }
  std::vector<std::string> inspirations;
  for (std::size_t n = 0; n < cfg.inspiration_count && !pool.empty(); ++n) {
    std::size_t k = rng() % pool.size();
    inspirations.push_back(island[pool[k]].genome);
    pool.erase(pool.begin() + static_cast<std::ptrdiff_t>(k));
  }
  std::string child;
  try {
    child = cfg.mutator(parent.genome, inspirations, rng);
  } catch (const std::exception&) {
    ++out.failures;
    return out;
  }
  Candidate c = judge.judge(std::move(child), index, parent.generation + 1);
  if (!c.fitness.valid || !c.fitness.equivalent) ++out.rejected;
  admit(island, std::move(c), cfg.population_per_island);
  return out;
}

inline const Candidate& global_best(const EliteArchive& archive) {
  const Candidate* best = nullptr;
  for (const auto& island : archive) {
    if (!island.empty() && (best == nullptr || ranks_ahead(island.front(), *best))) best = &island.front();
  }
  if (best == nullptr) throw Error(ErrorKind::SeedInvalid, "archive is empty");
  return *best;
}

inline void check_config(const EvolveConfig& cfg) {
  if (cfg.islands < 1) throw Error(ErrorKind::ConfigError, "islands must be at least 1");
  if (cfg.population_per_island < 1) throw Error(ErrorKind::ConfigError, "population_per_island must be at least 1");
  if (cfg.migration_size > cfg.population_per_island) {
    throw Error(ErrorKind::ConfigError, "migration_size exceeds population_per_island");
  }
  if (cfg.inspiration_count >= cfg.population_per_island) {
    throw Error(ErrorKind::ConfigError, "inspiration_count must be below population_per_island");
  }
  if (!cfg.mutator) throw Error(ErrorKind::ConfigError, "no mutator");
}

inline FaultTree checked_seed(const std::string& genome) {
  FaultTree tree;
  try {
    tree = parse_pasta(genome);
  } catch (const Error& e) {
    throw Error(ErrorKind::SeedInvalid, e.what());
  }
  CheckReport report = self_check(tree);
  if (!report.passed) throw Error(ErrorKind::SeedInvalid, render_findings(report.findings));
  std::size_t leaves = leaf_events(tree).size();
  if (leaves > kDefaultLeafCap) {
    throw Error(ErrorKind::SeedInvalid, std::to_string(leaves) + " leaves exceed the equivalence cap of " +
                                            std::to_string(kDefaultLeafCap));
  }
  return tree;
}

}  // namespace evolve_detail

/// Seeds every island with the evaluated seed alone. The islands are filled
/// with mutants of it when the first iteration starts, so a run of zero
/// iterations returns the evaluated seed.
inline EvolveState evolve_init(const std::string& seed_genome, const EvolveConfig& cfg) {
  using namespace evolve_detail;
  check_config(cfg);
  FaultTree seed = checked_seed(seed_genome);
  Judge judge(seed);
  EvolveState state;
  state.seed_genome = seed_genome;
  state.archive.resize(cfg.islands);
  for (std::size_t i = 0; i < cfg.islands; ++i) {
    state.rngs.emplace_back(splitmix64(cfg.seed ^ splitmix64(i + 1)));
    admit(state.archive[i], judge.judge(seed_genome, i, 0), cfg.population_per_island);
  }
  return state;
}

namespace evolve_detail {

// Up to population_per_island - 1 admitted mutants of the seed per island.
inline void populate(EvolveState& state, const EvolveConfig& cfg, const Judge& judge) {
  for (std::size_t i = 0; i < cfg.islands; ++i) {
    for (std::size_t n = 1; n < cfg.population_per_island; ++n) {
      std::string child;
      try {
        child = cfg.mutator(state.seed_genome, {}, state.rngs[i]);
      } catch (const std::exception&) {
        ++state.mutator_failures;
        continue;
      }
      Candidate c = judge.judge(std::move(child), i, 1);
      if (!c.fitness.valid || !c.fitness.equivalent) ++state.rejected;
      admit(state.archive[i], std::move(c), cfg.population_per_island);
    }
  }
}

}  // namespace evolve_detail

/// Advances `state` until `until_iteration` iterations have run in total.
inline void evolve_continue(EvolveState& state, const EvolveConfig& cfg, std::size_t until_iteration) {
  using namespace evolve_detail;
  check_config(cfg);
  if (state.archive.size() != cfg.islands || state.rngs.size() != cfg.islands) {
    throw Error(ErrorKind::ConfigError, "state has " + std::to_string(state.archive.size()) +
                                            " islands, config asks for " + std::to_string(cfg.islands));
  }
  FaultTree seed = checked_seed(state.seed_genome);
  Judge judge(seed);
  std::vector<IslandOutcome> outcomes(cfg.islands);
  while (state.iteration < until_iteration) {
    if (state.iteration == 0) populate(state, cfg, judge);
    ++state.iteration;
    auto run = [&](std::size_t i) { outcomes[i] = step_island(state.archive[i], i, state.rngs[i], cfg, judge); };
    if (cfg.threads > 1 && cfg.islands > 1) {
      std::vector<std::thread> pool;
      for (std::size_t i = 0; i < cfg.islands; ++i) pool.emplace_back(run, i);
      for (auto& t : pool) t.join();
    } else {
      for (std::size_t i = 0; i < cfg.islands; ++i) run(i);
    }
    for (const auto& o : outcomes) {
      state.mutator_failures += o.failures;
      state.rejected += o.rejected;
    }

    if (cfg.islands > 1 && cfg.migration_interval > 0 && state.iteration % cfg.migration_interval == 0) {
      std::vector<std::vector<Candidate>> emigrants(cfg.islands);
      for (std::size_t i = 0; i < cfg.islands; ++i) {
        auto& island = state.archive[i];
        emigrants[i].assign(island.begin(),
                            island.begin() + static_cast<std::ptrdiff_t>(std::min(cfg.migration_size, island.size())));
      }
      for (std::size_t i = 0; i < cfg.islands; ++i) {
        std::size_t to = (i + 1) % cfg.islands;
        for (auto c : emigrants[i]) {
          c.island = to;
          admit(state.archive[to], std::move(c), cfg.population_per_island);
        }
      }
    }
    const Candidate& best = global_best(state.archive);
    state.history.push_back(HistoryEntry{state.iteration, best.id, best.fitness});
  }
}

inline EvolveResult evolve_result(const EvolveState& state) {
  return EvolveResult{evolve_detail::global_best(state.archive), state.archive, state.history,
                      state.mutator_failures, state.rejected};
}

inline EvolveResult evolve(const std::string& seed_genome, const EvolveConfig& cfg = {}) {
  EvolveState state = evolve_init(seed_genome, cfg);
  evolve_continue(state, cfg, cfg.iterations);
  return evolve_result(state);
}

// ---- checkpoints ----

inline std::string save_checkpoint(const EvolveState& state) {
  nlohmann::ordered_json doc;
  doc["format"] = "fault2flow-evolve";
  doc["version"] = 1;
  doc["seed_genome"] = state.seed_genome;
  doc["iteration"] = state.iteration;
  doc["mutator_failures"] = state.mutator_failures;
  doc["rejected"] = state.rejected;
  auto fitness_json = [](const Fitness& f) {
    nlohmann::ordered_json j;
    j["valid"] = f.valid;
    j["equivalent"] = f.equivalent;
    j["readability"] = f.readability;
    j["size"] = f.size;
    return j;
  };
  doc["rng_states"] = nlohmann::ordered_json::array();
  for (const auto& rng : state.rngs) {
    std::ostringstream os;
    os << rng;
    doc["rng_states"].push_back(os.str());
  }
  doc["archive"] = nlohmann::ordered_json::array();
  for (const auto& island : state.archive) {
    auto members = nlohmann::ordered_json::array();
    for (const auto& c : island) {
      nlohmann::ordered_json j;
      j["id"] = c.id;
      j["island"] = c.island;
      j["generation"] = c.generation;
      j["fitness"] = fitness_json(c.fitness);
      j["genome"] = c.genome;
      members.push_back(std::move(j));
    }
    doc["archive"].push_back(std::move(members));
  }
  doc["history"] = nlohmann::ordered_json::array();
  for (const auto& h : state.history) {
    nlohmann::ordered_json j;
    j["iteration"] = h.iteration;
    j["best_id"] = h.best_id;
    j["fitness"] = fitness_json(h.best);
    doc["history"].push_back(std::move(j));
  }
  return doc.dump(2) + "\n";
}

inline EvolveState load_checkpoint(std::string_view text) {
  EvolveState state;
  try {
    auto doc = nlohmann::json::parse(text);
    if (doc.value("format", std::string{}) != "fault2flow-evolve") {
      throw Error(ErrorKind::SchemaError, "/format: not an evolve checkpoint");
    }
    auto fitness_of = [](const nlohmann::json& j) {
      return Fitness{j.at("valid").get<bool>(), j.at("equivalent").get<bool>(), j.at("readability").get<double>(),
                     j.at("size").get<std::size_t>()};
    };
    state.seed_genome = doc.at("seed_genome").get<std::string>();
    state.iteration = doc.at("iteration").get<std::size_t>();
    state.mutator_failures = doc.at("mutator_failures").get<std::size_t>();
    state.rejected = doc.at("rejected").get<std::size_t>();
    for (const auto& s : doc.at("rng_states")) {
      std::istringstream is(s.get<std::string>());
      std::mt19937_64 rng;
      is >> rng;
      if (!is) throw Error(ErrorKind::SchemaError, "/rng_states: unreadable generator state");
      state.rngs.push_back(rng);
    }
    for (const auto& island : doc.at("archive")) {
      std::vector<Candidate> members;
      for (const auto& j : island) {
        Candidate c;
        c.id = j.at("id").get<std::string>();
        c.island = j.at("island").get<std::size_t>();
        c.generation = j.at("generation").get<std::size_t>();
        c.fitness = fitness_of(j.at("fitness"));
        c.genome = j.at("genome").get<std::string>();
        if (util::stable_hash(c.genome) != c.id) {
          throw Error(ErrorKind::SchemaError, "/archive: candidate id does not match its genome");
        }
        members.push_back(std::move(c));
      }
      state.archive.push_back(std::move(members));
    }
    for (const auto& j : doc.at("history")) {
      state.history.push_back(
          HistoryEntry{j.at("iteration").get<std::size_t>(), j.at("best_id").get<std::string>(), fitness_of(j.at("fitness"))});
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::SchemaError, std::string("checkpoint: ") + e.what());
  }
  return state;
}

}  // namespace fault2flow
