#pragma once

#include <algorithm>
#include <cstddef>
#include <deque>
#include <functional>
#include <map>
#include <optional>
#include <regex>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "fault2flow/error.hpp"
#include "fault2flow/fault_tree.hpp"
#include "fault2flow/self_check.hpp"
#include "fault2flow/util.hpp"

namespace fault2flow {

enum class WfKind { Trigger, Condition, Output, Join, Unsupported };

struct FormField {
  std::string name;
  std::string unit;
  friend bool operator==(const FormField&, const FormField&) = default;
};

/// `field <op> threshold`, or `field / divisor <op> threshold` for ratios.
struct WfCondition {
  std::string field;
  std::optional<std::string> divisor;
  CompareOp op = CompareOp::Less;
  double threshold = 0.0;
  friend bool operator==(const WfCondition&, const WfCondition&) = default;
};

struct WfNode {
  std::string name;
  WfKind kind = WfKind::Join;
  std::vector<FormField> fields;  // Trigger
  WfCondition condition;          // Condition
  std::string label;              // Output
  bool is_fault = true;           // Output; false for the no-fault sink
  std::string type_name;          // Unsupported: the foreign node type
  std::optional<std::string> provenance;
  std::pair<int, int> position{0, 0};
  friend bool operator==(const WfNode&, const WfNode&) = default;
};

struct Connection {
  std::string from;
  std::size_t port = 0;
  std::string to;
  friend bool operator==(const Connection&, const Connection&) = default;
};

/// Workflow graph. Construction rejects cycles among resolvable connections
/// and orders connections by (source node position, port), keeping the
/// relative order of connections that share a source port.
class Workflow {
 public:
  Workflow() = default;

  Workflow(std::string name, std::vector<WfNode> nodes, std::vector<Connection> connections)
      : name_(std::move(name)), nodes_(std::move(nodes)), connections_(std::move(connections)) {
    for (std::size_t i = 0; i < nodes_.size(); ++i) index_.emplace(nodes_[i].name, i);
    std::stable_sort(connections_.begin(), connections_.end(), [&](const Connection& a, const Connection& b) {
      auto ia = position_of(a.from);
      auto ib = position_of(b.from);
      if (ia != ib) return ia < ib;
      return a.port < b.port;
    });
    reject_cycles();
  }

  const std::string& name() const { return name_; }
  const std::vector<WfNode>& nodes() const { return nodes_; }
  const std::vector<Connection>& connections() const { return connections_; }

  const WfNode* find(const std::string& node_name) const {
    auto it = index_.find(node_name);
    return it == index_.end() ? nullptr : &nodes_[it->second];
  }

  std::vector<std::string> targets(const std::string& from, std::size_t port) const {
    std::vector<std::string> out;
    for (const auto& c : connections_) {
      if (c.from == from && c.port == port) out.push_back(c.to);
    }
    return out;
  }

  friend bool operator==(const Workflow& a, const Workflow& b) {
    return a.name_ == b.name_ && a.nodes_ == b.nodes_ && a.connections_ == b.connections_;
  }

 private:
  std::size_t position_of(const std::string& node_name) const {
    auto it = index_.find(node_name);
    return it == index_.end() ? nodes_.size() : it->second;
  }

  void reject_cycles() const {
    std::map<std::string, std::vector<std::string>> adjacency;
    for (const auto& c : connections_) {
      if (index_.contains(c.from) && index_.contains(c.to)) adjacency[c.from].push_back(c.to);
    }
    std::map<std::string, int> state;
    std::function<void(const std::string&)> dfs = [&](const std::string& n) {
      int& s = state[n];
      if (s == 2) return;
      if (s == 1) throw Error(ErrorKind::CycleDetected, "workflow cycle through node '" + n + "'");
      s = 1;
      for (const auto& next : adjacency[n]) dfs(next);
      state[n] = 2;
    };
    for (const auto& node : nodes_) dfs(node.name);
  }

  std::string name_;
  std::vector<WfNode> nodes_;
  std::vector<Connection> connections_;
  std::map<std::string, std::size_t> index_;
};

namespace workflow_detail {

inline std::size_t port_count(WfKind kind) { return kind == WfKind::Condition ? 2 : 1; }

}  // namespace workflow_detail

/// Structural checks. Error messages start with a stable code word
/// (DuplicateName, UnknownNode, BadPort, TriggerCount, Unreachable,
/// MissingBranch, UnknownField, EmptyLabel, UnsupportedType, TriggerInput).
inline CheckReport validate_workflow(const Workflow& w) {
  CheckReport report;
  std::set<std::string> names;
  for (const auto& node : w.nodes()) {
    if (!names.insert(node.name).second) {
      report.add(Severity::Error, node.name, "DuplicateName: more than one node named '" + node.name + "'");
    }
    if (node.kind == WfKind::Unsupported) {
      report.add(Severity::Error, node.name, "UnsupportedType: node type '" + node.type_name + "' is not interpretable");
    }
  }

  std::vector<const WfNode*> triggers;
  std::set<std::string> fields;
  for (const auto& node : w.nodes()) {
    if (node.kind == WfKind::Trigger) {
      triggers.push_back(&node);
      for (const auto& f : node.fields) fields.insert(f.name);
    }
  }
  if (triggers.size() != 1) {
    report.add(Severity::Error, "",
               "TriggerCount: expected exactly one trigger, found " + std::to_string(triggers.size()));
  }

  for (const auto& c : w.connections()) {
    const WfNode* from = w.find(c.from);
    const WfNode* to = w.find(c.to);
    if (from == nullptr) report.add(Severity::Error, c.from, "UnknownNode: connection from missing node");
    if (to == nullptr) report.add(Severity::Error, c.to, "UnknownNode: connection to missing node");
    if (from != nullptr && c.port >= workflow_detail::port_count(from->kind)) {
      report.add(Severity::Error, c.from, "BadPort: port " + std::to_string(c.port) + " does not exist");
    }
    if (to != nullptr && to->kind == WfKind::Trigger) {
      report.add(Severity::Error, c.to, "TriggerInput: trigger has an incoming connection");
    }
  }

  for (const auto& node : w.nodes()) {
    switch (node.kind) {
      case WfKind::Condition:
        for (std::size_t port = 0; port < 2; ++port) {
          if (w.targets(node.name, port).empty()) {
            report.add(Severity::Error, node.name,
                       std::string("MissingBranch: ") + (port == 0 ? "true" : "false") + " port is not wired");
          }
        }
        if (!fields.contains(node.condition.field) ||
            (node.condition.divisor && !fields.contains(*node.condition.divisor))) {
          report.add(Severity::Error, node.name, "UnknownField: condition reads a field the trigger does not declare");
        }
        break;
      case WfKind::Join:
      case WfKind::Trigger:
        if (w.targets(node.name, 0).empty()) {
          report.add(Severity::Error, node.name, "MissingBranch: output port is not wired");
        }
        break;
      case WfKind::Output:
        if (node.label.empty()) report.add(Severity::Error, node.name, "EmptyLabel: output without a label");
        break;
      case WfKind::Unsupported:
        break;
    }
  }

  if (triggers.size() == 1) {
    std::set<std::string> seen{triggers.front()->name};
    std::deque<std::string> queue{triggers.front()->name};
    while (!queue.empty()) {
      auto current = queue.front();
      queue.pop_front();
      for (const auto& c : w.connections()) {
        if (c.from == current && seen.insert(c.to).second) queue.push_back(c.to);
      }
    }
    for (const auto& node : w.nodes()) {
      if (seen.contains(node.name)) continue;
      if (node.kind == WfKind::Output) {
        report.add(Severity::Warning, node.name, "Unreachable: output label '" + node.label + "' can never be produced");
      } else {
        report.add(Severity::Error, node.name, "Unreachable: node is not reachable from the trigger");
      }
    }
  }
  return report;
}

// ---------------------------------------------------------------------------
// n8n document

inline constexpr const char* kTriggerType = "n8n-nodes-base.formTrigger";
inline constexpr const char* kIfType = "n8n-nodes-base.if";
inline constexpr const char* kSetType = "n8n-nodes-base.set";
inline constexpr const char* kNoOpType = "n8n-nodes-base.noOp";

namespace workflow_detail {

inline std::string operation_name(CompareOp op) {
  switch (op) {
    case CompareOp::Less: return "smaller";
    case CompareOp::LessEqual: return "smallerEqual";
    case CompareOp::Greater: return "larger";
    case CompareOp::GreaterEqual: return "largerEqual";
  }
  return "smaller";
}

inline std::optional<CompareOp> parse_operation(const std::string& name) {
  if (name == "smaller") return CompareOp::Less;
  if (name == "smallerEqual") return CompareOp::LessEqual;
  if (name == "larger") return CompareOp::Greater;
  if (name == "largerEqual") return CompareOp::GreaterEqual;
  return std::nullopt;
}

inline std::string field_expression(const WfCondition& c) {
  std::string expr = "={{ $json[\"" + c.field + "\"]";
  if (c.divisor) expr += " / $json[\"" + *c.divisor + "\"]";
  return expr + " }}";
}

inline std::optional<std::pair<std::string, std::optional<std::string>>> parse_field_expression(const std::string& e) {
  static const std::regex pattern(
      R"re(^=\{\{\s*\$json(?:\["([^"]+)"\]|\.([A-Za-z_][A-Za-z0-9_]*))\s*(?:/\s*\$json(?:\["([^"]+)"\]|\.([A-Za-z_][A-Za-z0-9_]*))\s*)?\}\}$)re");
  std::smatch m;
  if (!std::regex_match(e, m, pattern)) return std::nullopt;
  std::string field = m[1].matched ? m[1].str() : m[2].str();
  std::optional<std::string> divisor;
  if (m[3].matched) divisor = m[3].str();
  if (m[4].matched) divisor = m[4].str();
  return std::make_pair(field, divisor);
}

/// Deterministic UUID-shaped id from the workflow and node names.
inline std::string node_id(const std::string& workflow, const std::string& node) {
  std::string key = workflow + "/" + node;
  std::string hex = util::hex64(util::fnv1a(key)) + util::hex64(util::fnv1a(key, 0x9e3779b97f4a7c15ULL));
  return hex.substr(0, 8) + "-" + hex.substr(8, 4) + "-" + hex.substr(12, 4) + "-" + hex.substr(16, 4) + "-" +
         hex.substr(20, 12);
}

[[noreturn]] inline void schema_error(const std::string& path, const std::string& message) {
  throw Error(ErrorKind::SchemaError, path + ": " + message);
}

using ojson = nlohmann::ordered_json;

inline const ojson& require(const ojson& obj, const std::string& key, const std::string& path) {
  if (!obj.is_object() || !obj.contains(key)) schema_error(path + "/" + key, "missing");
  return obj.at(key);
}

inline std::string require_string(const ojson& obj, const std::string& key, const std::string& path) {
  const auto& v = require(obj, key, path);
  if (!v.is_string()) schema_error(path + "/" + key, "expected a string");
  return v.get<std::string>();
}

}  // namespace workflow_detail

using ojson = nlohmann::ordered_json;

/// Document form of a workflow; keys in host order, provenance under
/// `meta.fault2flow.provenance`.
inline ojson workflow_to_json(const Workflow& w) {
  using namespace workflow_detail;
  ojson doc = ojson::object();
  doc["name"] = w.name();
  ojson nodes = ojson::array();
  for (const auto& node : w.nodes()) {
    ojson n = ojson::object();
    n["id"] = node_id(w.name(), node.name);
    n["name"] = node.name;
    ojson params = ojson::object();
    switch (node.kind) {
      case WfKind::Trigger: {
        n["type"] = kTriggerType;
        n["typeVersion"] = 2;
        params["formTitle"] = w.name();
        ojson values = ojson::array();
        for (const auto& f : node.fields) {
          ojson field = ojson::object();
          field["fieldLabel"] = f.name;
          field["fieldType"] = "number";
          field["requiredField"] = true;
          field["placeholder"] = f.unit;
          values.push_back(field);
        }
        params["formFields"] = ojson{{"values", values}};
        break;
      }
      case WfKind::Condition: {
        n["type"] = kIfType;
        n["typeVersion"] = 1;
        ojson cond = ojson::object();
        cond["value1"] = field_expression(node.condition);
        cond["operation"] = operation_name(node.condition.op);
        cond["value2"] = node.condition.threshold;
        params["conditions"] = ojson{{"number", ojson::array({cond})}};
        break;
      }
      case WfKind::Output: {
        n["type"] = kSetType;
        n["typeVersion"] = 2;
        params["keepOnlySet"] = false;
        ojson values = ojson::object();
        values["string"] = ojson::array({ojson{{"name", "fault_class"}, {"value", node.label}}});
        values["boolean"] = ojson::array({ojson{{"name", "fault_detected"}, {"value", node.is_fault}}});
        params["values"] = values;
        break;
      }
      case WfKind::Join:
        n["type"] = kNoOpType;
        n["typeVersion"] = 1;
        break;
      case WfKind::Unsupported:
        n["type"] = node.type_name;
        n["typeVersion"] = 1;
        break;
    }
    n["position"] = ojson::array({node.position.first, node.position.second});
    n["parameters"] = params;
    if (node.provenance) n["meta"] = ojson{{"fault2flow", ojson{{"provenance", *node.provenance}}}};
    nodes.push_back(n);
  }
  doc["nodes"] = nodes;

  ojson connections = ojson::object();
  for (const auto& node : w.nodes()) {
    std::size_t ports = port_count(node.kind);
    std::vector<ojson> per_port(ports, ojson::array());
    bool any = false;
    for (const auto& c : w.connections()) {
      if (c.from != node.name || c.port >= ports) continue;
      per_port[c.port].push_back(ojson{{"node", c.to}, {"type", "main"}, {"index", 0}});
      any = true;
    }
    if (!any) continue;
    ojson main = ojson::array();
    for (auto& p : per_port) main.push_back(p);
    connections[node.name] = ojson{{"main", main}};
  }
  doc["connections"] = connections;
  return doc;
}

/// Serialized n8n document: two-space indent, LF endings, trailing newline.
inline std::string export_n8n(const Workflow& w) {
  CheckReport report = validate_workflow(w);
  if (!report.passed) throw Error(ErrorKind::ValidationFailed, render_findings(report.findings));
  return workflow_to_json(w).dump(2) + "\n";
}

inline Workflow workflow_from_json(const ojson& doc) {
  using namespace workflow_detail;
  if (!doc.is_object()) schema_error("", "document is not an object");
  std::string name = require_string(doc, "name", "");
  const auto& nodes_json = require(doc, "nodes", "");
  if (!nodes_json.is_array()) schema_error("/nodes", "expected an array");

  std::vector<WfNode> nodes;
  for (std::size_t i = 0; i < nodes_json.size(); ++i) {
    const std::string path = "/nodes/" + std::to_string(i);
    const auto& n = nodes_json[i];
    if (!n.is_object()) schema_error(path, "expected an object");
    WfNode node;
    node.name = require_string(n, "name", path);
    std::string type = require_string(n, "type", path);
    const auto& pos = require(n, "position", path);
    if (!pos.is_array() || pos.size() != 2 || !pos[0].is_number() || !pos[1].is_number()) {
      schema_error(path + "/position", "expected [x, y]");
    }
    node.position = {pos[0].get<int>(), pos[1].get<int>()};
    const ojson empty = ojson::object();
    const ojson& params = n.contains("parameters") ? n.at("parameters") : empty;
    if (!params.is_object()) schema_error(path + "/parameters", "expected an object");

    if (type == kTriggerType) {
      node.kind = WfKind::Trigger;
      if (params.contains("formFields")) {
        const auto& values = require(params.at("formFields"), "values", path + "/parameters/formFields");
        if (!values.is_array()) schema_error(path + "/parameters/formFields/values", "expected an array");
        for (std::size_t f = 0; f < values.size(); ++f) {
          const std::string fpath = path + "/parameters/formFields/values/" + std::to_string(f);
          FormField field;
          field.name = require_string(values[f], "fieldLabel", fpath);
          if (values[f].contains("placeholder") && values[f].at("placeholder").is_string()) {
            field.unit = values[f].at("placeholder").get<std::string>();
          }
          node.fields.push_back(std::move(field));
        }
      }
    } else if (type == kIfType) {
      node.kind = WfKind::Condition;
      const std::string cpath = path + "/parameters/conditions";
      const auto& number = require(require(params, "conditions", path + "/parameters"), "number", cpath);
      if (!number.is_array() || number.size() != 1) schema_error(cpath + "/number", "expected exactly one condition");
      const auto& c = number[0];
      auto expr = parse_field_expression(require_string(c, "value1", cpath + "/number/0"));
      if (!expr) schema_error(cpath + "/number/0/value1", "unsupported expression");
      node.condition.field = expr->first;
      node.condition.divisor = expr->second;
      auto op = parse_operation(require_string(c, "operation", cpath + "/number/0"));
      if (!op) schema_error(cpath + "/number/0/operation", "unsupported operation");
      node.condition.op = *op;
      const auto& v2 = require(c, "value2", cpath + "/number/0");
      if (!v2.is_number()) schema_error(cpath + "/number/0/value2", "expected a number");
      node.condition.threshold = v2.get<double>();
    } else if (type == kSetType) {
      node.kind = WfKind::Output;
      const std::string vpath = path + "/parameters/values";
      const auto& values = require(params, "values", path + "/parameters");
      bool have_label = false;
      if (values.contains("string") && values.at("string").is_array()) {
        for (const auto& entry : values.at("string")) {
          if (entry.is_object() && entry.value("name", "") == "fault_class" && entry.contains("value") &&
              entry.at("value").is_string()) {
            node.label = entry.at("value").get<std::string>();
            have_label = true;
          }
        }
      }
      if (!have_label) schema_error(vpath + "/string", "no 'fault_class' value");
      if (values.contains("boolean") && values.at("boolean").is_array()) {
        for (const auto& entry : values.at("boolean")) {
          if (entry.is_object() && entry.value("name", "") == "fault_detected" && entry.contains("value") &&
              entry.at("value").is_boolean()) {
            node.is_fault = entry.at("value").get<bool>();
          }
        }
      }
    } else if (type == kNoOpType) {
      node.kind = WfKind::Join;
    } else {
      node.kind = WfKind::Unsupported;
      node.type_name = type;
    }

    if (n.contains("meta")) {
      const auto& meta = n.at("meta");
      if (meta.is_object() && meta.contains("fault2flow")) {
        const auto& ours = meta.at("fault2flow");
        if (!ours.is_object()) schema_error(path + "/meta/fault2flow", "expected an object");
        if (ours.contains("provenance")) {
          if (!ours.at("provenance").is_string()) schema_error(path + "/meta/fault2flow/provenance", "expected a string");
          node.provenance = ours.at("provenance").get<std::string>();
        }
      }
    }
    nodes.push_back(std::move(node));
  }

  if (!doc.contains("connections")) schema_error("/connections", "missing");
  const auto& conns_json = doc.at("connections");
  if (!conns_json.is_object()) schema_error("/connections", "expected an object");
  std::vector<Connection> connections;
  for (const auto& [from, group] : conns_json.items()) {
    const std::string path = "/connections/" + from;
    const auto& main = require(group, "main", path);
    if (!main.is_array()) schema_error(path + "/main", "expected an array");
    for (std::size_t port = 0; port < main.size(); ++port) {
      const std::string ppath = path + "/main/" + std::to_string(port);
      if (main[port].is_null()) continue;
      if (!main[port].is_array()) schema_error(ppath, "expected an array");
      for (std::size_t k = 0; k < main[port].size(); ++k) {
        connections.push_back(Connection{from, port, require_string(main[port][k], "node", ppath + "/" + std::to_string(k))});
      }
    }
  }
  return Workflow(std::move(name), std::move(nodes), std::move(connections));
}

inline Workflow import_n8n(std::string_view document) {
  ojson doc;
  try {
    doc = ojson::parse(document);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorKind::SchemaError, std::string("/: not valid JSON (") + e.what() + ")");
  }
  return workflow_from_json(doc);
}

}  // namespace fault2flow
