#pragma once

#include <deque>
#include <map>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "fault2flow/error.hpp"
#include "fault2flow/fault_tree.hpp"
#include "fault2flow/self_check.hpp"
#include "fault2flow/workflow.hpp"

namespace fault2flow {

struct CompileOptions {
  std::string no_fault_label = "no_fault";
  bool share_condition_nodes = false;
};

inline constexpr std::size_t kMaxKofnArity = 8;

/// One numeric form field per measured parameter the leaves read (directly
/// or through a ratio), in first-reference order.
inline std::vector<FormField> leaf_input_params(const FaultTree& tree) {
  std::vector<FormField> fields;
  for (const auto& name : referenced_measured_params(tree)) {
    const ParamSpec* spec = tree.find_param(name);
    fields.push_back(FormField{name, spec != nullptr ? spec->unit : std::string{}});
  }
  return fields;
}

namespace compiler_detail {

inline std::vector<std::vector<std::size_t>> combinations(std::size_t n, std::size_t k) {
  std::vector<std::vector<std::size_t>> out;
  std::vector<std::size_t> current;
  auto rec = [&](auto& self, std::size_t start) -> void {
    if (current.size() == k) {
      out.push_back(current);
      return;
    }
    for (std::size_t i = start; i < n; ++i) {
      current.push_back(i);
      self(self, i + 1);
      current.pop_back();
    }
  };
  rec(rec, 0);
  return out;
}

// Nodes are built continuation-first (targets before the nodes that branch
// to them) and renamed once the final breadth-first order is known.
class Lowering {
 public:
  Lowering(const FaultTree& tree, const CompileOptions& opts) : tree_(tree), opts_(opts) {}

  Workflow run() {
    std::size_t trigger = add(WfKind::Trigger, "trigger", std::nullopt);
    nodes_[trigger].fields = leaf_input_params(tree_);

    std::size_t no_fault = add(WfKind::Output, opts_.no_fault_label, std::nullopt);
    nodes_[no_fault].label = opts_.no_fault_label;
    nodes_[no_fault].is_fault = false;

    // Every top event is evaluated in turn; a fired top passes through its
    // Output before the next top's entry. The last top's miss ends at no_fault.
    std::optional<std::size_t> next_entry;
    for (auto it = tree_.tops.rbegin(); it != tree_.tops.rend(); ++it) {
      const std::string& top = *it;
      std::size_t out = add(WfKind::Output, "fault_" + top, top);
      nodes_[out].label = top;
      std::size_t on_false = no_fault;
      if (next_entry) {
        connect(out, 0, *next_entry);
        on_false = *next_entry;
      }
      std::size_t child = lower(std::get<TopEvent>(tree_.at(top)).child, out, on_false);
      std::size_t entry = add(WfKind::Join, "diagnose_" + top, top);
      connect(entry, 0, child);
      next_entry = entry;
    }
    connect(trigger, 0, next_entry ? *next_entry : no_fault);
    return finish(trigger);
  }

 private:
  std::size_t add(WfKind kind, std::string base, std::optional<std::string> provenance) {
    WfNode node;
    node.kind = kind;
    node.name = std::move(base);
    node.provenance = std::move(provenance);
    nodes_.push_back(std::move(node));
    return nodes_.size() - 1;
  }

  void connect(std::size_t from, std::size_t port, std::size_t to) { edges_.push_back({from, port, to}); }

  std::size_t entry_join(const std::string& parent, std::size_t target) {
    std::size_t j = add(WfKind::Join, "enter_" + parent, parent);
    connect(j, 0, target);
    return j;
  }

  std::size_t lower(const std::string& id, std::size_t on_true, std::size_t on_false) {
    auto key = std::make_tuple(id, on_true, on_false);
    if (opts_.share_condition_nodes) {
      if (auto it = memo_.find(key); it != memo_.end()) return it->second;
    }
    std::size_t entry = 0;
    const NodeBody& body = tree_.at(id);
    if (auto* basic = std::get_if<BasicEvent>(&body)) {
      entry = add(WfKind::Condition, "check_" + id, id);
      nodes_[entry].condition = to_workflow_condition(basic->condition);
      connect(entry, 0, on_true);
      connect(entry, 1, on_false);
    } else {
      const auto& gate = std::get<Gate>(body);
      const auto& kids = gate.children;
      switch (gate.kind) {
        case GateKind::And: {
          std::size_t next = on_true;
          for (auto c = kids.rbegin(); c != kids.rend(); ++c) next = entry_join(id, lower(*c, next, on_false));
          entry = next;
          break;
        }
        case GateKind::Or: {
          std::size_t next = on_false;
          for (auto c = kids.rbegin(); c != kids.rend(); ++c) next = entry_join(id, lower(*c, on_true, next));
          entry = next;
          break;
        }
        case GateKind::KofN: {
          // OR over every size-k AND combination, in lexicographic order.
          auto combos = combinations(kids.size(), gate.k);
          std::size_t next_combo = on_false;
          for (auto combo = combos.rbegin(); combo != combos.rend(); ++combo) {
            std::size_t next = on_true;
            for (auto m = combo->rbegin(); m != combo->rend(); ++m) {
              next = entry_join(id, lower(kids[*m], next, next_combo));
            }
            next_combo = next;
          }
          entry = next_combo;
          break;
        }
      }
    }
    if (opts_.share_condition_nodes) memo_.emplace(key, entry);
    return entry;
  }

  WfCondition to_workflow_condition(const Condition& cond) const {
    WfCondition out;
    const ParamSpec* spec = tree_.find_param(cond.parameter);
    if (spec != nullptr && spec->kind == ParamKind::Derived) {
      out.field = spec->numerator;
      out.divisor = spec->denominator;
    } else {
      out.field = cond.parameter;
    }
    out.op = cond.op;
    out.threshold = cond.threshold;
    return out;
  }

  Workflow finish(std::size_t trigger) {
    std::map<std::size_t, std::vector<std::size_t>> succ;
    std::vector<std::tuple<std::size_t, std::size_t, std::size_t>> sorted = edges_;
    std::stable_sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) {
      return std::tie(std::get<0>(a), std::get<1>(a)) < std::tie(std::get<0>(b), std::get<1>(b));
    });
    for (const auto& [from, port, to] : sorted) succ[from].push_back(to);

    // Breadth-first order from the trigger fixes node order and names.
    std::vector<std::size_t> order;
    std::vector<bool> seen(nodes_.size(), false);
    std::deque<std::size_t> queue{trigger};
    seen[trigger] = true;
    while (!queue.empty()) {
      std::size_t n = queue.front();
      queue.pop_front();
      order.push_back(n);
      for (std::size_t next : succ[n]) {
        if (!seen[next]) {
          seen[next] = true;
          queue.push_back(next);
        }
      }
    }

    // Longest-path layering for canvas positions.
    std::vector<int> layer(nodes_.size(), 0);
    std::vector<std::size_t> indegree(nodes_.size(), 0);
    for (const auto& [from, port, to] : sorted) {
      if (seen[from] && seen[to]) ++indegree[to];
    }
    std::deque<std::size_t> ready{trigger};
    while (!ready.empty()) {
      std::size_t n = ready.front();
      ready.pop_front();
      for (std::size_t next : succ[n]) {
        layer[next] = std::max(layer[next], layer[n] + 1);
        if (--indegree[next] == 0) ready.push_back(next);
      }
    }

    std::map<std::string, std::size_t> base_count;
    for (std::size_t n : order) ++base_count[nodes_[n].name];
    std::map<std::string, std::size_t> base_seen;
    std::map<int, int> layer_fill;
    std::vector<std::string> final_name(nodes_.size());
    std::vector<WfNode> out_nodes;
    for (std::size_t n : order) {
      WfNode node = nodes_[n];
      if (base_count[node.name] > 1) node.name += "#" + std::to_string(++base_seen[node.name]);
      node.position = {layer[n] * 240, layer_fill[layer[n]]++ * 160};
      final_name[n] = node.name;
      out_nodes.push_back(std::move(node));
    }
    std::vector<Connection> out_edges;
    for (const auto& [from, port, to] : sorted) {
      if (seen[from]) out_edges.push_back(Connection{final_name[from], port, final_name[to]});
    }
    return Workflow(tree_.name, std::move(out_nodes), std::move(out_edges));
  }

  const FaultTree& tree_;
  const CompileOptions& opts_;
  std::vector<WfNode> nodes_;
  std::vector<std::tuple<std::size_t, std::size_t, std::size_t>> edges_;
  std::map<std::tuple<std::string, std::size_t, std::size_t>, std::size_t> memo_;
};

}  // namespace compiler_detail

/// Lowers a checked fault tree to a workflow by post-order construction:
/// children are built before the nodes that branch into them. Each basic
/// event becomes an IF node, each gate child is preceded by a Join tagged
/// with the gate, each top event gets an entry Join and an Output.
inline Workflow compile(const FaultTree& tree, const CompileOptions& opts = {}) {
  CheckReport report = self_check(tree);
  if (!report.passed) throw Error(ErrorKind::SelfCheckFailed, render_findings(report.findings));
  for (const auto& top : tree.tops) {
    if (top == opts.no_fault_label) {
      throw Error(ErrorKind::ConfigError, "no-fault label '" + top + "' collides with a fault class");
    }
  }
  for (const auto& [id, body] : tree.nodes) {
    if (auto* gate = std::get_if<Gate>(&body); gate != nullptr && gate->kind == GateKind::KofN &&
                                                gate->children.size() > kMaxKofnArity) {
      throw Error(ErrorKind::KofnTooWide, "gate '" + id + "' has " + std::to_string(gate->children.size()) +
                                              " children; at most " + std::to_string(kMaxKofnArity) + " supported");
    }
  }
  return compiler_detail::Lowering(tree, opts).run();
}

}  // namespace fault2flow
