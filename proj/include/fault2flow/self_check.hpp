#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "fault2flow/fault_tree.hpp"

namespace fault2flow {

enum class Severity { Error, Warning };

constexpr std::string_view to_string(Severity s) { return s == Severity::Error ? "error" : "warning"; }

struct Finding {
  Severity severity = Severity::Error;
  std::string node;
  std::string message;
  friend bool operator==(const Finding&, const Finding&) = default;
};

struct CheckReport {
  bool passed = true;
  std::vector<Finding> findings;

  void add(Severity severity, std::string node, std::string message) {
    if (severity == Severity::Error) passed = false;
    findings.push_back(Finding{severity, std::move(node), std::move(message)});
  }
  std::size_t count(Severity severity) const {
    std::size_t n = 0;
    for (const auto& f : findings) n += f.severity == severity ? 1 : 0;
    return n;
  }
};

/// One finding per line as `severity node message`; a dash stands in for an
/// empty node id.
inline std::string render_findings(const std::vector<Finding>& findings) {
  std::string out;
  for (const auto& f : findings) {
    out += std::string(to_string(f.severity)) + " " + (f.node.empty() ? "-" : f.node) + " " + f.message + "\n";
  }
  return out;
}

inline CheckReport self_check(const FaultTree& tree) {
  CheckReport report;

  if (tree.tops.empty()) report.add(Severity::Error, "", "no top event declared");
  std::set<std::string> labels;
  for (const auto& top : tree.tops) {
    if (!labels.insert(top).second) report.add(Severity::Error, top, "duplicate fault class");
    if (!tree.is_top(top)) report.add(Severity::Error, top, "listed top event is not declared as a top event");
  }
  for (const auto& [id, body] : tree.nodes) {
    if (std::holds_alternative<TopEvent>(body) &&
        std::find(tree.tops.begin(), tree.tops.end(), id) == tree.tops.end()) {
      report.add(Severity::Error, id, "top event missing from top list");
    }
  }

  // Reference integrity and acyclicity matter for trees built in code.
  bool structurally_sound = true;
  for (const auto& [id, body] : tree.nodes) {
    if (auto* basic = std::get_if<BasicEvent>(&body)) {
      if (tree.find_param(basic->condition.parameter) == nullptr) {
        report.add(Severity::Error, id, "unresolved parameter '" + basic->condition.parameter + "'");
      }
      if (!std::isfinite(basic->condition.threshold)) report.add(Severity::Error, id, "non-finite threshold");
      continue;
    }
    for (const auto& child : tree.children(id)) {
      const NodeBody* target = tree.find(child);
      if (target == nullptr || std::holds_alternative<TopEvent>(*target)) {
        report.add(Severity::Error, id, "unresolved reference '" + child + "'");
        structurally_sound = false;
      }
    }
  }
  if (structurally_sound) {
    std::map<std::string, int> state;
    std::function<bool(const std::string&)> cyclic = [&](const std::string& id) {
      int& s = state[id];
      if (s == 1) return true;
      if (s == 2) return false;
      s = 1;
      for (const auto& child : tree.children(id)) {
        if (cyclic(child)) return true;
      }
      state[id] = 2;
      return false;
    };
    for (const auto& [id, body] : tree.nodes) {
      if (cyclic(id)) {
        report.add(Severity::Error, id, "cycle detected");
        return report;
      }
    }
  }
  if (!structurally_sound) return report;

  auto reachable = reachable_nodes(tree);
  std::set<std::string> reached(reachable.begin(), reachable.end());
  for (const auto& [id, body] : tree.nodes) {
    if (!reached.contains(id)) report.add(Severity::Error, id, "unreachable from every top event");
  }

  for (const auto& [id, body] : tree.nodes) {
    auto* gate = std::get_if<Gate>(&body);
    if (gate == nullptr) continue;
    if (gate->children.empty()) report.add(Severity::Error, id, "gate arity violation: no children");
    if (gate->kind == GateKind::KofN && (gate->k < 1 || gate->k > gate->children.size())) {
      report.add(Severity::Error, id,
                 "kofn bound violation: k=" + std::to_string(gate->k) + " with " +
                     std::to_string(gate->children.size()) + " children");
    }
    if (gate->kind == GateKind::And) {
      std::map<std::string, Interval> by_param;
      for (const auto& child : gate->children) {
        if (auto* basic = std::get_if<BasicEvent>(&tree.at(child))) {
          by_param[basic->condition.parameter].restrict(basic->condition.op, basic->condition.threshold);
        }
      }
      for (const auto& [param, interval] : by_param) {
        if (interval.empty()) report.add(Severity::Warning, id, "unsatisfiable conjunction on '" + param + "'");
      }
    }
  }

  std::set<std::string> used;
  for (const auto& [id, body] : tree.nodes) {
    if (auto* basic = std::get_if<BasicEvent>(&body)) {
      used.insert(basic->condition.parameter);
      if (const ParamSpec* spec = tree.find_param(basic->condition.parameter)) {
        if (spec->kind == ParamKind::Derived) {
          used.insert(spec->numerator);
          used.insert(spec->denominator);
        }
        if (spec->range && (basic->condition.threshold < spec->range->low ||
                            basic->condition.threshold > spec->range->high)) {
          report.add(Severity::Warning, id,
                     "threshold " + util::format_number(basic->condition.threshold) +
                         " outside plausible range of '" + spec->name + "'");
        }
      }
    }
  }
  for (const auto& spec : tree.schema) {
    if (!used.contains(spec.name)) report.add(Severity::Warning, spec.name, "parameter never referenced");
  }
  return report;
}

}  // namespace fault2flow
