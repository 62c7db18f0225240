#pragma once

#include <functional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "fault2flow/error.hpp"
#include "fault2flow/fault_tree.hpp"
#include "fault2flow/mindmap.hpp"
#include "fault2flow/pasta_dsl.hpp"
#include "fault2flow/self_check.hpp"
#include "fault2flow/util.hpp"

namespace fault2flow {

struct TranslateOptions {
  GateKind default_gate = GateKind::And;  // for unannotated internal nodes
};

namespace translate_detail {

inline std::string op_word(CompareOp op) {
  switch (op) {
    case CompareOp::Less: return "lt";
    case CompareOp::LessEqual: return "le";
    case CompareOp::Greater: return "gt";
    case CompareOp::GreaterEqual: return "ge";
  }
  return "op";
}

inline std::string number_word(double v) {
  std::string out;
  for (char c : util::format_number(v)) {
    if (c == '-') {
      out += "neg";
    } else if (c == '.' || c == '+') {
      out += '_';
    } else {
      out += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    }
  }
  return out;
}

class Builder {
 public:
  Builder(std::vector<ParamSpec> schema, TranslateOptions opts) : opts_(opts) { tree_.schema = std::move(schema); }

  FaultTree build(const MindMap& map) {
    tree_.name = util::normalize_label(map.root.text);
    if (tree_.name.empty()) tree_.name = "fault_tree";
    if (map.root.children.empty()) throw Error(ErrorKind::EmptyFaultClass, "mind map root has no fault classes");

    std::size_t index = 0;
    for (const auto& fault : map.root.children) {
      ++index;
      std::string label = util::normalize_label(fault.text);
      if (label.empty()) label = "fault_" + std::to_string(index);
      std::string path = map.root.text + "/" + fault.text;
      if (used_.contains(label)) throw Error(ErrorKind::DuplicateId, "fault class '" + label + "' at " + path);
      if (count_condition_annotations(fault) == 0) {
        throw Error(ErrorKind::EmptyFaultClass, "fault class '" + label + "' has no condition at " + path);
      }
      used_.insert(label);

      std::string child;
      if (fault.children.empty()) {
        child = make_basic(fault, label + "_condition");
      } else {
        if (fault.has_condition()) {
          throw Error(ErrorKind::InvalidAnnotation, "condition on internal node at " + path);
        }
        auto* gate_ann = std::get_if<GateAnnotation>(&fault.annotation);
        if (fault.children.size() == 1 && gate_ann == nullptr) {
          child = lower(fault.children.front(), path);
        } else {
          child = make_gate(fault, label + "_logic", path, label + "_logic");
        }
      }
      tree_.nodes.emplace(label, TopEvent{child});
      tree_.tops.push_back(label);
    }
    return std::move(tree_);
  }

 private:
  std::string unique(std::string base, std::string_view fallback) {
    if (base.empty()) base = std::string(fallback);
    std::string id = base;
    for (int n = 2; used_.contains(id); ++n) id = base + "_" + std::to_string(n);
    used_.insert(id);
    return id;
  }

  std::string resolve_parameter(const std::string& text) {
    auto slash = text.find('/');
    if (slash == std::string::npos) {
      std::string name = util::normalize_label(text);
      if (tree_.find_param(name) == nullptr) throw Error(ErrorKind::UnknownParameter, "'" + text + "'");
      return name;
    }
    std::string num = util::normalize_label(text.substr(0, slash));
    std::string den = util::normalize_label(text.substr(slash + 1));
    for (const auto& operand : {num, den}) {
      const ParamSpec* spec = tree_.find_param(operand);
      if (spec == nullptr || spec->kind != ParamKind::Measured) {
        throw Error(ErrorKind::UnknownParameter, "'" + operand + "' in ratio '" + text + "'");
      }
    }
    for (const auto& spec : tree_.schema) {
      if (spec.kind == ParamKind::Derived && spec.numerator == num && spec.denominator == den) return spec.name;
    }
    std::string name = num + "_" + den;
    for (int n = 2; tree_.find_param(name) != nullptr; ++n) name = num + "_" + den + "_" + std::to_string(n);
    tree_.schema.push_back(ParamSpec::ratio(name, num, den));
    return name;
  }

  std::string make_basic(const MapNode& node, const std::string& fallback) {
    const auto& ann = std::get<ConditionAnnotation>(node.annotation);
    Condition cond{resolve_parameter(ann.parameter), ann.op, ann.threshold};
    std::string base = util::normalize_label(node.text);
    if (base.empty()) base = cond.parameter + "_" + op_word(cond.op) + "_" + number_word(cond.threshold);
    std::string id = unique(base, fallback);
    tree_.nodes.emplace(id, BasicEvent{std::move(cond)});
    return id;
  }

  std::string make_gate(const MapNode& node, const std::string& fallback, const std::string& path,
                        std::string base = {}) {
    Gate gate;
    auto* ann = std::get_if<GateAnnotation>(&node.annotation);
    gate.kind = ann != nullptr ? ann->kind : opts_.default_gate;
    if (base.empty()) base = util::normalize_label(node.text);
    std::string id = unique(base, fallback);
    for (const auto& child : node.children) gate.children.push_back(lower(child, path + "/" + child.text));
    tree_.nodes.emplace(id, std::move(gate));
    return id;
  }

  std::string lower(const MapNode& node, const std::string& path) {
    if (node.children.empty()) {
      if (!node.has_condition()) throw Error(ErrorKind::UnannotatedLeaf, path);
      return make_basic(node, "condition");
    }
    if (node.has_condition()) throw Error(ErrorKind::InvalidAnnotation, "condition on internal node at " + path);
    return make_gate(node, "gate", path);
  }

  TranslateOptions opts_;
  FaultTree tree_;
  std::set<std::string> used_;
};

}  // namespace translate_detail

/// Root children become top events; annotated internal nodes become gates
/// (unannotated ones get `opts.default_gate`); condition leaves become basic
/// events. Quotient parameters `a/b` are declared as ratios on first use.
inline FaultTree mindmap_to_faulttree(const MindMap& map, std::vector<ParamSpec> schema,
                                      TranslateOptions opts = {}) {
  return translate_detail::Builder(std::move(schema), opts).build(map);
}

/// Measured parameters named by the map's condition annotations, unitless,
/// in first-use order. Used when no schema file is supplied.
inline std::vector<ParamSpec> infer_schema(const MindMap& map) {
  std::vector<ParamSpec> schema;
  auto add = [&](std::string_view raw) {
    std::string name = util::normalize_label(raw);
    for (const auto& p : schema) {
      if (p.name == name) return;
    }
    schema.push_back(ParamSpec::measured(name));
  };
  auto walk = [&](auto& self, const MapNode& node) -> void {
    if (auto* cond = std::get_if<ConditionAnnotation>(&node.annotation)) {
      auto slash = cond->parameter.find('/');
      if (slash == std::string::npos) {
        add(cond->parameter);
      } else {
        add(std::string_view(cond->parameter).substr(0, slash));
        add(std::string_view(cond->parameter).substr(slash + 1));
      }
    }
    for (const auto& child : node.children) self(self, child);
  };
  walk(walk, map.root);
  return schema;
}

/// (source text, feedback) -> candidate PASTA text. Stands where a language
/// model would sit; may block.
using TranslatorHook = std::function<std::string(std::string_view source, std::string_view feedback)>;

struct HookOutcome {
  FaultTree tree;
  std::size_t attempts = 0;
  std::vector<std::vector<Finding>> rejected;  // findings of each failed attempt
};

class HookExhausted : public Error {
 public:
  explicit HookExhausted(std::vector<std::vector<Finding>> attempts)
      : Error(ErrorKind::HookExhausted,
              "no acceptable candidate after " + std::to_string(attempts.size()) + " attempt(s)"),
        attempts_(std::move(attempts)) {}

  const std::vector<std::vector<Finding>>& attempts() const noexcept { return attempts_; }

 private:
  std::vector<std::vector<Finding>> attempts_;
};

/// Calls `hook` until it yields text that parses and self-checks clean. Each
/// retry receives the previous failure's findings rendered as feedback.
inline HookOutcome translate_with_hook(std::string_view source, const TranslatorHook& hook, std::size_t retries) {
  if (retries < 1) throw Error(ErrorKind::ConfigError, "retries must be at least 1");
  HookOutcome outcome;
  std::string feedback;
  for (std::size_t attempt = 1; attempt <= retries; ++attempt) {
    outcome.attempts = attempt;
    std::vector<Finding> findings;
    try {
      FaultTree tree = parse_pasta(hook(source, feedback));
      CheckReport report = self_check(tree);
      if (report.passed) {
        outcome.tree = std::move(tree);
        return outcome;
      }
      findings = report.findings;
    } catch (const std::exception& e) {
      findings.push_back(Finding{Severity::Error, "", e.what()});
    }
    feedback = render_findings(findings);
    outcome.rejected.push_back(std::move(findings));
  }
  throw HookExhausted(std::move(outcome.rejected));
}

}  // namespace fault2flow
