#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "fault2flow/error.hpp"
#include "fault2flow/util.hpp"

namespace fault2flow {

enum class CompareOp { Less, LessEqual, Greater, GreaterEqual };

constexpr std::string_view to_symbol(CompareOp op) {
  switch (op) {
    case CompareOp::Less: return "<";
    case CompareOp::LessEqual: return "<=";
    case CompareOp::Greater: return ">";
    case CompareOp::GreaterEqual: return ">=";
  }
  return "?";
}

inline std::optional<CompareOp> parse_compare_op(std::string_view text) {
  if (text == "<") return CompareOp::Less;
  if (text == "<=") return CompareOp::LessEqual;
  if (text == ">") return CompareOp::Greater;
  if (text == ">=") return CompareOp::GreaterEqual;
  return std::nullopt;
}

/// The operator whose truth is the complement on every real input.
constexpr CompareOp negate(CompareOp op) {
  switch (op) {
    case CompareOp::Less: return CompareOp::GreaterEqual;
    case CompareOp::LessEqual: return CompareOp::Greater;
    case CompareOp::Greater: return CompareOp::LessEqual;
    case CompareOp::GreaterEqual: return CompareOp::Less;
  }
  return op;
}

// Plain IEEE comparisons; no epsilon.
constexpr bool compare(double value, CompareOp op, double threshold) {
  switch (op) {
    case CompareOp::Less: return value < threshold;
    case CompareOp::LessEqual: return value <= threshold;
    case CompareOp::Greater: return value > threshold;
    case CompareOp::GreaterEqual: return value >= threshold;
  }
  return false;
}

struct Condition {
  std::string parameter;
  CompareOp op = CompareOp::Less;
  double threshold = 0.0;

  bool holds(double value) const { return compare(value, op, threshold); }
  std::string to_string() const {
    return parameter + " " + std::string(to_symbol(op)) + " " + util::format_number(threshold);
  }
  friend bool operator==(const Condition&, const Condition&) = default;
};

/// A possibly half-open, possibly unbounded interval of the real line.
struct Interval {
  double low = -std::numeric_limits<double>::infinity();
  bool low_closed = false;
  double high = std::numeric_limits<double>::infinity();
  bool high_closed = false;

  void restrict(CompareOp op, double t) {
    switch (op) {
      case CompareOp::Less:
        if (t < high || (t == high && high_closed)) { high = t; high_closed = false; }
        break;
      case CompareOp::LessEqual:
        if (t < high) { high = t; high_closed = true; }
        break;
      case CompareOp::Greater:
        if (t > low || (t == low && low_closed)) { low = t; low_closed = false; }
        break;
      case CompareOp::GreaterEqual:
        if (t > low) { low = t; low_closed = true; }
        break;
    }
  }

  bool empty() const {
    if (low > high) return true;
    if (low == high) return !(low_closed && high_closed);
    return false;
  }

  bool contains(double x) const {
    bool above = low_closed ? x >= low : x > low;
    bool below = high_closed ? x <= high : x < high;
    return above && below;
  }

  bool bounded_below() const { return std::isfinite(low); }
  bool bounded_above() const { return std::isfinite(high); }
};

enum class ParamKind { Measured, Derived };

struct Range {
  double low = 0.0;
  double high = 0.0;
  friend bool operator==(const Range&, const Range&) = default;
};

struct ParamSpec {
  std::string name;
  std::string unit;
  ParamKind kind = ParamKind::Measured;
  std::string numerator;    // derived only
  std::string denominator;  // derived only
  std::optional<Range> range;

  static ParamSpec measured(std::string name, std::string unit = {}) {
    return ParamSpec{std::move(name), std::move(unit), ParamKind::Measured, {}, {}, std::nullopt};
  }
  static ParamSpec ratio(std::string name, std::string numerator, std::string denominator) {
    return ParamSpec{std::move(name), {}, ParamKind::Derived, std::move(numerator),
                     std::move(denominator), std::nullopt};
  }
  friend bool operator==(const ParamSpec&, const ParamSpec&) = default;
};

enum class GateKind { And, Or, KofN };

constexpr std::string_view to_string(GateKind kind) {
  switch (kind) {
    case GateKind::And: return "and";
    case GateKind::Or: return "or";
    case GateKind::KofN: return "kofn";
  }
  return "?";
}

struct TopEvent {
  std::string child;
  friend bool operator==(const TopEvent&, const TopEvent&) = default;
};

struct Gate {
  GateKind kind = GateKind::And;
  std::size_t k = 0;  // KofN only
  std::vector<std::string> children;
  friend bool operator==(const Gate&, const Gate&) = default;
};

struct BasicEvent {
  Condition condition;
  friend bool operator==(const BasicEvent&, const BasicEvent&) = default;
};

using NodeBody = std::variant<TopEvent, Gate, BasicEvent>;

/// Measured parameter name -> value. Derived values are computed on demand.
using Assignment = std::map<std::string, double>;

/// A fault tree over a parameter schema. A node's id doubles as the fault
/// class label for top events. Children may be shared (the graph is a DAG).
struct FaultTree {
  std::string name;
  std::vector<ParamSpec> schema;
  std::map<std::string, NodeBody> nodes;
  std::vector<std::string> tops;  // declaration order

  friend bool operator==(const FaultTree&, const FaultTree&) = default;

  const ParamSpec* find_param(std::string_view param) const {
    for (const auto& p : schema) {
      if (p.name == param) return &p;
    }
    return nullptr;
  }

  const NodeBody* find(std::string_view id) const {
    auto it = nodes.find(std::string(id));
    return it == nodes.end() ? nullptr : &it->second;
  }

  const NodeBody& at(const std::string& id) const {
    auto it = nodes.find(id);
    if (it == nodes.end()) throw Error(ErrorKind::UnresolvedReference, "unknown node '" + id + "'");
    return it->second;
  }

  bool is_top(std::string_view id) const {
    auto* n = find(id);
    return n != nullptr && std::holds_alternative<TopEvent>(*n);
  }
  bool is_gate(std::string_view id) const {
    auto* n = find(id);
    return n != nullptr && std::holds_alternative<Gate>(*n);
  }
  bool is_basic(std::string_view id) const {
    auto* n = find(id);
    return n != nullptr && std::holds_alternative<BasicEvent>(*n);
  }

  std::vector<std::string> children(const std::string& id) const {
    const auto& body = at(id);
    if (auto* top = std::get_if<TopEvent>(&body)) return {top->child};
    if (auto* gate = std::get_if<Gate>(&body)) return gate->children;
    return {};
  }
};

/// Distinct parent->child edges, parents in id order, children in stored order.
inline std::vector<std::pair<std::string, std::string>> tree_edges(const FaultTree& tree) {
  std::vector<std::pair<std::string, std::string>> edges;
  std::set<std::pair<std::string, std::string>> seen;
  for (const auto& [id, body] : tree.nodes) {
    for (const auto& child : tree.children(id)) {
      if (seen.emplace(id, child).second) edges.emplace_back(id, child);
    }
  }
  return edges;
}

/// Depth-first pre-order visit of every node reachable from the top events,
/// each node once, in top declaration order then child order.
inline std::vector<std::string> reachable_nodes(const FaultTree& tree) {
  std::vector<std::string> order;
  std::set<std::string> seen;
  std::function<void(const std::string&)> visit = [&](const std::string& id) {
    if (!seen.insert(id).second || tree.find(id) == nullptr) return;
    order.push_back(id);
    for (const auto& child : tree.children(id)) visit(child);
  };
  for (const auto& top : tree.tops) visit(top);
  return order;
}

/// Distinct basic events reachable from the tops, in first-visit order.
inline std::vector<std::string> leaf_events(const FaultTree& tree) {
  std::vector<std::string> leaves;
  for (const auto& id : reachable_nodes(tree)) {
    if (tree.is_basic(id)) leaves.push_back(id);
  }
  return leaves;
}

/// Every top-event to basic-event path (node ids, top first).
inline std::vector<std::vector<std::string>> root_leaf_paths(const FaultTree& tree) {
  std::vector<std::vector<std::string>> paths;
  std::vector<std::string> stack;
  std::function<void(const std::string&)> walk = [&](const std::string& id) {
    if (tree.find(id) == nullptr) return;
    stack.push_back(id);
    if (tree.is_basic(id)) {
      paths.push_back(stack);
    } else {
      for (const auto& child : tree.children(id)) walk(child);
    }
    stack.pop_back();
  };
  for (const auto& top : tree.tops) walk(top);
  return paths;
}

/// Measured parameters referenced by reachable basic events, directly or as
/// ratio operands, in first-reference order.
inline std::vector<std::string> referenced_measured_params(const FaultTree& tree) {
  std::vector<std::string> out;
  auto add = [&](const std::string& p) {
    for (const auto& existing : out) {
      if (existing == p) return;
    }
    out.push_back(p);
  };
  for (const auto& leaf : leaf_events(tree)) {
    const auto& cond = std::get<BasicEvent>(tree.at(leaf)).condition;
    const ParamSpec* spec = tree.find_param(cond.parameter);
    if (spec == nullptr) continue;
    if (spec->kind == ParamKind::Measured) {
      add(spec->name);
    } else {
      add(spec->numerator);
      add(spec->denominator);
    }
  }
  return out;
}

/// Value of a measured or derived parameter under `input`.
inline double parameter_value(const FaultTree& tree, const Assignment& input, const std::string& param) {
  const ParamSpec* spec = tree.find_param(param);
  if (spec == nullptr) throw Error(ErrorKind::MissingParameter, "unknown parameter '" + param + "'");
  auto lookup = [&](const std::string& name) {
    auto it = input.find(name);
    if (it == input.end()) throw Error(ErrorKind::MissingParameter, "no value for '" + name + "'");
    return it->second;
  };
  if (spec->kind == ParamKind::Measured) return lookup(spec->name);
  double num = lookup(spec->numerator);
  double den = lookup(spec->denominator);
  if (den == 0.0) {
    throw Error(ErrorKind::DivisionByZero,
                "derived parameter '" + spec->name + "' has zero denominator '" + spec->denominator + "'");
  }
  return num / den;
}

/// Oracle semantics: the set of fault class labels whose top event holds.
inline std::set<std::string> evaluate(const FaultTree& tree, const Assignment& input) {
  for (const auto& p : tree.schema) {
    if (p.kind == ParamKind::Measured && !input.contains(p.name)) {
      throw Error(ErrorKind::MissingParameter, "no value for '" + p.name + "'");
    }
  }
  std::map<std::string, bool> memo;
  std::function<bool(const std::string&)> eval = [&](const std::string& id) -> bool {
    if (auto it = memo.find(id); it != memo.end()) return it->second;
    const auto& body = tree.at(id);
    bool value = false;
    if (auto* top = std::get_if<TopEvent>(&body)) {
      value = eval(top->child);
    } else if (auto* gate = std::get_if<Gate>(&body)) {
      std::size_t count = 0;
      for (const auto& child : gate->children) count += eval(child) ? 1 : 0;
      switch (gate->kind) {
        case GateKind::And: value = count == gate->children.size(); break;
        case GateKind::Or: value = count > 0; break;
        case GateKind::KofN: value = count >= gate->k; break;
      }
    } else {
      const auto& cond = std::get<BasicEvent>(body).condition;
      value = cond.holds(parameter_value(tree, input, cond.parameter));
    }
    memo.emplace(id, value);
    return value;
  };
  std::set<std::string> fired;
  for (const auto& top : tree.tops) {
    if (eval(top)) fired.insert(top);
  }
  return fired;
}

}  // namespace fault2flow
