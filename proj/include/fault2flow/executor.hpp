#pragma once

#include <algorithm>
#include <optional>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include "fault2flow/error.hpp"
#include "fault2flow/fault_tree.hpp"
#include "fault2flow/workflow.hpp"

namespace fault2flow {

struct ExecutionTrace {
  Assignment input;
  std::vector<std::string> visited;
  std::set<std::string> triggered;
  std::vector<std::string> provenance_visited;
  friend bool operator==(const ExecutionTrace&, const ExecutionTrace&) = default;
};

/// Interprets the workflow on one input. Fan-out on a port is followed
/// depth-first in connection order.
inline ExecutionTrace execute(const Workflow& w, const Assignment& input) {
  const WfNode* trigger = nullptr;
  for (const auto& node : w.nodes()) {
    if (node.kind == WfKind::Trigger) {
      if (trigger != nullptr) throw Error(ErrorKind::ValidationFailed, "workflow has more than one trigger");
      trigger = &node;
    }
  }
  if (trigger == nullptr) throw Error(ErrorKind::ValidationFailed, "workflow has no trigger");
  for (const auto& field : trigger->fields) {
    if (!input.contains(field.name)) throw Error(ErrorKind::MissingField, "input field '" + field.name + "'");
  }
  auto read = [&](const std::string& field) {
    auto it = input.find(field);
    if (it == input.end()) throw Error(ErrorKind::MissingField, "input field '" + field + "'");
    return it->second;
  };

  ExecutionTrace trace;
  trace.input = input;
  std::vector<std::string> stack{trigger->name};
  const std::size_t step_limit = 16 * (w.nodes().size() + w.connections().size() + 1);
  while (!stack.empty()) {
    std::string current = std::move(stack.back());
    stack.pop_back();
    const WfNode* node = w.find(current);
    if (node == nullptr) throw Error(ErrorKind::DanglingBranch, "connection to missing node '" + current + "'");
    if (trace.visited.size() >= step_limit) throw Error(ErrorKind::ValidationFailed, "execution did not terminate");
    trace.visited.push_back(node->name);
    if (node->provenance) trace.provenance_visited.push_back(*node->provenance);

    std::vector<std::string> next;
    switch (node->kind) {
      case WfKind::Trigger:
        next = w.targets(node->name, 0);
        break;
      case WfKind::Join:
        next = w.targets(node->name, 0);
        if (next.empty()) throw Error(ErrorKind::DanglingBranch, "join '" + node->name + "' has no successor");
        break;
      case WfKind::Condition: {
        const auto& c = node->condition;
        double value = read(c.field);
        if (c.divisor) {
          double den = read(*c.divisor);
          if (den == 0.0) {
            throw Error(ErrorKind::DivisionByZero,
                        "node '" + node->name + "' divides by zero field '" + *c.divisor + "'");
          }
          value /= den;
        }
        std::size_t port = compare(value, c.op, c.threshold) ? 0 : 1;
        next = w.targets(node->name, port);
        if (next.empty()) {
          throw Error(ErrorKind::DanglingBranch,
                      "node '" + node->name + "' took " + (port == 0 ? "true" : "false") + " branch with no connection");
        }
        break;
      }
      case WfKind::Output:
        if (node->is_fault) trace.triggered.insert(node->label);
        next = w.targets(node->name, 0);
        break;
      case WfKind::Unsupported:
        throw Error(ErrorKind::ValidationFailed, "cannot interpret node type '" + node->type_name + "'");
    }
    for (auto it = next.rbegin(); it != next.rend(); ++it) stack.push_back(*it);
  }
  return trace;
}

/// `name [provenance]` per visited node, then `TRIGGERED: a,b` or `TRIGGERED: none`.
inline std::string dump_trace(const Workflow& w, const ExecutionTrace& trace) {
  std::string out;
  for (const auto& name : trace.visited) {
    const WfNode* node = w.find(name);
    out += name + " [" + (node != nullptr && node->provenance ? *node->provenance : std::string("-")) + "]\n";
  }
  out += "TRIGGERED: ";
  if (trace.triggered.empty()) {
    out += "none";
  } else {
    bool first = true;
    for (const auto& label : trace.triggered) {
      if (!first) out += ",";
      out += label;
      first = false;
    }
  }
  return out + "\n";
}

struct BatchItem {
  std::optional<ExecutionTrace> trace;
  std::optional<Error> error;
  bool ok() const { return trace.has_value(); }
};

/// Executes every input; failures are collected per item. Results keep
/// input order regardless of `threads`.
inline std::vector<BatchItem> batch_execute(const Workflow& w, const std::vector<Assignment>& inputs,
                                            unsigned threads = 1) {
  std::vector<BatchItem> results(inputs.size());
  auto run_range = [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      try {
        results[i].trace = execute(w, inputs[i]);
      } catch (const Error& e) {
        results[i].error = e;
      }
    }
  };
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(inputs.size(), 1))));
  if (threads == 1) {
    run_range(0, inputs.size());
    return results;
  }
  std::vector<std::thread> pool;
  std::size_t chunk = (inputs.size() + threads - 1) / threads;
  for (unsigned t = 0; t < threads; ++t) {
    std::size_t begin = t * chunk;
    std::size_t end = std::min(inputs.size(), begin + chunk);
    if (begin >= end) break;
    pool.emplace_back(run_range, begin, end);
  }
  for (auto& th : pool) th.join();
  return results;
}

}  // namespace fault2flow
