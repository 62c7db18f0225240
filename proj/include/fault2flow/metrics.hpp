#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <deque>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "fault2flow/error.hpp"
#include "fault2flow/executor.hpp"
#include "fault2flow/fault_tree.hpp"
#include "fault2flow/regions.hpp"
#include "fault2flow/util.hpp"
#include "fault2flow/workflow.hpp"

namespace fault2flow {

struct CoverageCount {
  std::size_t total = 0;
  std::size_t covered = 0;
  double ratio() const { return total == 0 ? 0.0 : static_cast<double>(covered) / static_cast<double>(total); }
};

/// Tree edges (u, v) whose provenance projection appears in the workflow: a
/// path from a u-tagged node to a v-tagged node through untagged nodes only.
inline CoverageCount edge_coverage(const FaultTree& tree, const Workflow& w) {
  auto edges = tree_edges(tree);
  if (edges.empty()) throw Error(ErrorKind::EmptyTree, "tree has no edges");

  std::set<std::pair<std::string, std::string>> projected;
  for (const auto& start : w.nodes()) {
    if (!start.provenance) continue;
    std::set<std::string> seen{start.name};
    std::deque<std::string> queue{start.name};
    while (!queue.empty()) {
      std::string current = queue.front();
      queue.pop_front();
      for (const auto& c : w.connections()) {
        if (c.from != current || seen.contains(c.to)) continue;
        const WfNode* next = w.find(c.to);
        if (next == nullptr) continue;
        seen.insert(c.to);
        if (next->provenance) {
          projected.emplace(*start.provenance, *next->provenance);
        } else {
          queue.push_back(c.to);
        }
      }
    }
  }
  CoverageCount count{edges.size(), 0};
  for (const auto& e : edges) count.covered += projected.contains(e) ? 1 : 0;
  return count;
}

inline double topological_consistency(const FaultTree& tree, const Workflow& w) {
  return edge_coverage(tree, w).ratio();
}

/// Top-to-leaf paths whose node ids occur, in order, within a single trace's
/// provenance sequence.
inline CoverageCount path_coverage(const FaultTree& tree, const std::vector<ExecutionTrace>& traces) {
  auto paths = root_leaf_paths(tree);
  if (paths.empty()) throw Error(ErrorKind::EmptyTree, "tree has no top-to-leaf paths");
  auto is_subsequence = [](const std::vector<std::string>& needle, const std::vector<std::string>& hay) {
    std::size_t i = 0;
    for (const auto& item : hay) {
      if (i < needle.size() && item == needle[i]) ++i;
    }
    return i == needle.size();
  };
  CoverageCount count{paths.size(), 0};
  for (const auto& path : paths) {
    for (const auto& trace : traces) {
      if (is_subsequence(path, trace.provenance_visited)) {
        ++count.covered;
        break;
      }
    }
  }
  return count;
}

inline double e2e_reachability(const FaultTree& tree, const Workflow&, const std::vector<ExecutionTrace>& traces) {
  return path_coverage(tree, traces).ratio();
}

inline constexpr std::size_t kDefaultLeafCap = 12;

/// Agreement between workflow and tree over one representative per
/// satisfiable leaf-truth region. Execution errors count as disagreement.
inline CoverageCount fidelity_count(const FaultTree& tree, const Workflow& w, std::size_t leaf_cap = kDefaultLeafCap,
                                    double eps = 1e-3) {
  std::size_t leaves = leaf_events(tree).size();
  if (leaves > leaf_cap) {
    throw Error(ErrorKind::LeafCapExceeded,
                std::to_string(leaves) + " leaves exceed the cap of " + std::to_string(leaf_cap));
  }
  auto regions = enumerate_regions(tree, std::size_t{1} << leaves, eps);
  if (regions.empty()) throw Error(ErrorKind::UnsatisfiableStrategy, "no satisfiable leaf-truth region");
  CoverageCount count{regions.size(), 0};
  for (const auto& region : regions) {
    try {
      if (execute(w, region.representative).triggered == evaluate(tree, region.representative)) ++count.covered;
    } catch (const Error&) {
    }
  }
  return count;
}

inline double semantic_fidelity(const FaultTree& tree, const Workflow& w, std::size_t leaf_cap = kDefaultLeafCap) {
  return fidelity_count(tree, w, leaf_cap).ratio();
}

struct ReadabilityWeights {
  double depth = 0.25;
  double redundancy = 0.25;
  double degenerate = 0.3;
  double naming = 0.2;
};

namespace metrics_detail {

inline std::string structure_key(const FaultTree& tree, const std::string& id, std::map<std::string, std::string>& memo) {
  if (auto it = memo.find(id); it != memo.end()) return it->second;
  std::string key;
  const auto& body = tree.at(id);
  if (auto* basic = std::get_if<BasicEvent>(&body)) {
    key = "b(" + basic->condition.to_string() + ")";
  } else if (auto* gate = std::get_if<Gate>(&body)) {
    key = std::string(to_string(gate->kind)) + std::to_string(gate->k) + "(";
    for (const auto& c : gate->children) key += structure_key(tree, c, memo) + ",";
    key += ")";
  } else {
    key = "t(" + structure_key(tree, std::get<TopEvent>(body).child, memo) + ")";
  }
  memo.emplace(id, key);
  return key;
}

inline std::size_t height(const FaultTree& tree, const std::string& id, std::map<std::string, std::size_t>& memo) {
  if (auto it = memo.find(id); it != memo.end()) return it->second;
  std::size_t h = 0;
  for (const auto& c : tree.children(id)) h = std::max(h, 1 + height(tree, c, memo));
  memo.emplace(id, h);
  return h;
}

}  // namespace metrics_detail

/// 1 minus weighted penalties: depth beyond 1 + ceil(log2 leaves) per top,
/// fraction of gates/leaves structurally identical to another node, fraction
/// of one-child gates, fraction of identifiers not in snake_case. Clamped to
/// [0, 1].
inline double readability_score(const FaultTree& tree, const ReadabilityWeights& weights = {}) {
  using namespace metrics_detail;
  auto reachable = reachable_nodes(tree);
  std::map<std::string, std::size_t> heights;
  double depth_total = 0;
  double depth_excess = 0;
  for (const auto& top : tree.tops) {
    if (!tree.is_top(top)) continue;
    std::set<std::string> leaves;
    std::vector<std::string> stack{top};
    while (!stack.empty()) {
      std::string id = stack.back();
      stack.pop_back();
      if (tree.is_basic(id)) leaves.insert(id);
      for (const auto& c : tree.children(id)) stack.push_back(c);
    }
    double depth = static_cast<double>(height(tree, top, heights));
    double ideal = 1 + std::ceil(std::log2(static_cast<double>(std::max<std::size_t>(leaves.size(), 1))));
    depth_total += depth;
    depth_excess += std::max(0.0, depth - ideal);
  }

  std::map<std::string, std::string> keys;
  std::map<std::string, std::size_t> key_count;
  std::size_t inner = 0;
  std::size_t gates = 0;
  std::size_t one_child = 0;
  for (const auto& id : reachable) {
    if (tree.is_top(id)) continue;
    ++inner;
    ++key_count[structure_key(tree, id, keys)];
    if (auto* gate = std::get_if<Gate>(&tree.at(id))) {
      ++gates;
      one_child += gate->children.size() == 1 ? 1 : 0;
    }
  }
  std::size_t duplicates = 0;
  for (const auto& [key, n] : key_count) duplicates += n - 1;

  std::size_t names = 0;
  std::size_t snake = 0;
  for (const auto& id : reachable) {
    ++names;
    snake += util::is_snake_case(id) ? 1 : 0;
  }
  for (const auto& p : tree.schema) {
    ++names;
    snake += util::is_snake_case(p.name) ? 1 : 0;
  }

  double penalty = 0;
  if (depth_total > 0) penalty += weights.depth * depth_excess / depth_total;
  if (inner > 0) penalty += weights.redundancy * static_cast<double>(duplicates) / static_cast<double>(inner);
  if (gates > 0) penalty += weights.degenerate * static_cast<double>(one_child) / static_cast<double>(gates);
  if (names > 0) penalty += weights.naming * (1.0 - static_cast<double>(snake) / static_cast<double>(names));
  return std::clamp(1.0 - penalty, 0.0, 1.0);
}

/// One row of the comparison table.
struct MetricReport {
  std::string fixture;
  double tc = 0;
  double e2erc = 0;
  double sf = 0;
  double readability = 0;
  CoverageCount edges;
  CoverageCount paths;
  CoverageCount regions;
  bool sf_measured = true;  // false when the tree exceeds the leaf cap
  std::size_t verify_success = 0;
  std::size_t verify_failure = 0;
};

namespace metrics_detail {

inline std::string fixed3(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  return buf;
}

inline std::string pad(std::string s, std::size_t width) {
  if (s.size() < width) s.append(width - s.size(), ' ');
  return s;
}

}  // namespace metrics_detail

/// Plain-text table with the comparison column names; readability and
/// sf-exhaustive are our deterministic proxies, labelled as such.
inline std::string render_metrics_table(const std::vector<MetricReport>& rows, bool summary = false) {
  using metrics_detail::fixed3;
  using metrics_detail::pad;
  auto frac = [](const CoverageCount& c) {
    return fixed3(c.ratio()) + " (" + std::to_string(c.covered) + "/" + std::to_string(c.total) + ")";
  };
  std::vector<std::vector<std::string>> cells;
  cells.push_back({"fixture", "LRM(readability)", "SF(sf-exhaustive)", "TC", "E2ERC", "Succ./Fail."});
  std::size_t ok = 0;
  std::size_t bad = 0;
  for (const auto& r : rows) {
    cells.push_back({r.fixture, fixed3(r.readability), r.sf_measured ? frac(r.regions) : "n/a", frac(r.edges),
                     frac(r.paths),
                     std::to_string(r.verify_success) + "/" + std::to_string(r.verify_failure)});
    ok += r.verify_success;
    bad += r.verify_failure;
  }
  if (summary) cells.push_back({"total", "", "", "", "", std::to_string(ok) + "/" + std::to_string(bad)});
  std::vector<std::size_t> width(cells.front().size(), 0);
  for (const auto& row : cells) {
    for (std::size_t i = 0; i < row.size(); ++i) width[i] = std::max(width[i], row[i].size());
  }
  std::string out;
  for (const auto& row : cells) {
    std::string line;
    for (std::size_t i = 0; i < row.size(); ++i) line += (i ? "  " : "") + pad(row[i], width[i]);
    while (!line.empty() && line.back() == ' ') line.pop_back();
    out += line + "\n";
  }
  return out;
}

}  // namespace fault2flow
