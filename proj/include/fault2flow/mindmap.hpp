#pragma once

#include <algorithm>
#include <cctype>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "fault2flow/error.hpp"
#include "fault2flow/fault_tree.hpp"
#include "fault2flow/util.hpp"

namespace fault2flow {

/// `[AND]` / `[OR]` on an internal node.
struct GateAnnotation {
  GateKind kind = GateKind::And;
  friend bool operator==(const GateAnnotation&, const GateAnnotation&) = default;
};

/// `[<param> <op> <number>]`, where param may be a quotient `A/B`.
struct ConditionAnnotation {
  std::string parameter;
  CompareOp op = CompareOp::Less;
  double threshold = 0.0;

  std::string to_string() const {
    return parameter + " " + std::string(to_symbol(op)) + " " + util::format_number(threshold);
  }
  friend bool operator==(const ConditionAnnotation&, const ConditionAnnotation&) = default;
};

using Annotation = std::variant<std::monostate, GateAnnotation, ConditionAnnotation>;

struct MapNode {
  std::string text;
  Annotation annotation;
  std::vector<MapNode> children;

  bool has_condition() const { return std::holds_alternative<ConditionAnnotation>(annotation); }
  friend bool operator==(const MapNode&, const MapNode&) = default;
};

struct MindMap {
  MapNode root;
  friend bool operator==(const MindMap&, const MindMap&) = default;
};

namespace mindmap_detail {

inline bool is_param_char(char c) {
  auto uc = static_cast<unsigned char>(c);
  return std::isalnum(uc) || c == '_' || c == '/';
}

/// Parses the inside of a trailing bracket; nullopt if it is not an annotation.
inline std::optional<Annotation> parse_annotation(std::string_view body) {
  body = util::trim(body);
  if (body == "AND" || body == "and") return GateAnnotation{GateKind::And};
  if (body == "OR" || body == "or") return GateAnnotation{GateKind::Or};
  std::size_t i = 0;
  while (i < body.size() && is_param_char(body[i])) ++i;
  if (i == 0) return std::nullopt;
  ConditionAnnotation cond;
  cond.parameter = std::string(body.substr(0, i));
  if (cond.parameter.front() == '/' || cond.parameter.back() == '/' ||
      std::count(cond.parameter.begin(), cond.parameter.end(), '/') > 1) {
    return std::nullopt;
  }
  auto rest = util::trim(body.substr(i));
  std::size_t op_len = (rest.size() >= 2 && rest[1] == '=') ? 2 : 1;
  if (rest.empty()) return std::nullopt;
  auto op = parse_compare_op(rest.substr(0, op_len));
  if (!op) return std::nullopt;
  cond.op = *op;
  auto number = util::parse_number(util::trim(rest.substr(op_len)));
  if (!number) return std::nullopt;
  cond.threshold = *number;
  return cond;
}

inline bool is_style_line(std::string_view line) {
  auto starts = [&](std::string_view p) { return line.substr(0, p.size()) == p; };
  return starts("skinparam") || starts("title") || starts("caption") || starts("header") ||
         starts("footer") || starts("legend") || starts("endlegend") || starts("left side") ||
         starts("right side") || starts("top to bottom direction") || starts("'") || starts("!");
}

}  // namespace mindmap_detail

/// Parses a PlantUML `@startmindmap` document. `+`/`-` side markers count as
/// `*`; `_` (boxless) and `[#color]` suffixes on markers and styling
/// directives are dropped.
inline MindMap parse_plantuml(std::string_view text) {
  using namespace mindmap_detail;
  auto lines = util::split_lines(text);
  std::size_t i = 0;
  while (i < lines.size() && util::trim(lines[i]).empty()) ++i;
  if (i >= lines.size() || util::trim(lines[i]).substr(0, 13) != "@startmindmap") {
    throw SyntaxError(i + 1, 1, "expected '@startmindmap'");
  }
  ++i;

  std::optional<MapNode> root;
  std::vector<MapNode*> path;  // path[d-1] is the current node at depth d
  bool ended = false;
  bool in_style = false;

  for (; i < lines.size(); ++i) {
    const std::size_t line_no = i + 1;
    auto line = util::trim(lines[i]);
    if (line.empty()) continue;
    if (ended) throw SyntaxError(line_no, 1, "content after '@endmindmap'");
    if (line.substr(0, 11) == "@endmindmap") {
      ended = true;
      continue;
    }
    if (in_style) {
      if (line.substr(0, 8) == "</style>") in_style = false;
      continue;
    }
    if (line.substr(0, 7) == "<style>") {
      in_style = line.find("</style>") == std::string_view::npos;
      continue;
    }
    if (is_style_line(line)) continue;

    char marker = line.front();
    if (marker != '*' && marker != '+' && marker != '-') {
      throw SyntaxError(line_no, 1, "expected a '*', '+' or '-' depth marker");
    }
    std::size_t depth = 0;
    while (depth < line.size() && line[depth] == marker) ++depth;
    std::size_t pos = depth;
    if (pos < line.size() && line[pos] == '_') ++pos;
    if (pos < line.size() && line[pos] == '[' && pos + 1 < line.size() && line[pos + 1] == '#') {
      auto close = line.find(']', pos);
      if (close == std::string_view::npos) throw SyntaxError(line_no, pos + 1, "unterminated color");
      pos = close + 1;
    }
    if (pos < line.size() && line[pos] == ':') {
      throw SyntaxError(line_no, pos + 1, "multiline node bodies are not supported");
    }
    auto label = util::trim(line.substr(pos));

    MapNode node;
    if (!label.empty() && label.back() == ']') {
      auto open = label.rfind('[');
      if (open == std::string_view::npos) throw SyntaxError(line_no, pos + 1, "unbalanced ']' in label");
      auto parsed = parse_annotation(label.substr(open + 1, label.size() - open - 2));
      if (!parsed) {
        throw SyntaxError(line_no, pos + 1 + open,
                          "malformed annotation '" + std::string(label.substr(open)) + "'");
      }
      node.annotation = *parsed;
      label = util::trim(label.substr(0, open));
    }
    node.text = std::string(label);

    if (depth == 1) {
      if (root) throw Error(ErrorKind::MultipleRoots, "second depth-1 node on line " + std::to_string(line_no));
      root = std::move(node);
      path.assign(1, &*root);
      continue;
    }
    if (!root || depth > path.size() + 1) {
      throw Error(ErrorKind::DepthJump, "line " + std::to_string(line_no) + ": depth " + std::to_string(depth) +
                                            " under depth " + std::to_string(root ? path.size() : 0));
    }
    path.resize(depth - 1);
    MapNode* parent = path.back();
    parent->children.push_back(std::move(node));
    path.push_back(&parent->children.back());
  }
  if (!ended) throw SyntaxError(lines.size() + 1, 1, "missing '@endmindmap'");
  if (!root) throw SyntaxError(lines.size(), 1, "mind map has no nodes");
  return MindMap{std::move(*root)};
}

inline std::string emit_plantuml(const MindMap& map) {
  std::string out = "@startmindmap\n";
  auto emit = [&](auto& self, const MapNode& node, std::size_t depth) -> void {
    std::string line(depth, '*');
    if (!node.text.empty()) line += " " + node.text;
    if (auto* gate = std::get_if<GateAnnotation>(&node.annotation)) {
      line += gate->kind == GateKind::Or ? " [OR]" : " [AND]";
    } else if (auto* cond = std::get_if<ConditionAnnotation>(&node.annotation)) {
      line += " [" + cond->to_string() + "]";
    }
    out += line + "\n";
    for (const auto& child : node.children) self(self, child, depth + 1);
  };
  emit(emit, map.root, 1);
  out += "@endmindmap\n";
  return out;
}

inline std::size_t count_condition_annotations(const MapNode& node) {
  std::size_t n = node.has_condition() ? 1 : 0;
  for (const auto& child : node.children) n += count_condition_annotations(child);
  return n;
}

/// (regulation markdown) -> PlantUML mind map text. Stands where a language
/// model would sit.
using GeneratorHook = std::function<std::string(std::string_view regulation)>;

/// Deterministic generator: the first `#` heading becomes the root, `##`
/// headings become fault classes, and `-`/`*` bullets nest below the current
/// heading by indentation (two spaces per level). Bracketed annotations are
/// carried over verbatim; all other lines are ignored.
inline std::string outline_to_plantuml(std::string_view markdown) {
  std::string out = "@startmindmap\n";
  bool have_root = false;
  bool have_class = false;
  std::size_t line_no = 0;
  for (auto raw : util::split_lines(markdown)) {
    ++line_no;
    auto line = util::trim(raw);
    if (line.substr(0, 3) == "## ") {
      if (!have_root) throw SyntaxError(line_no, 1, "fault class heading before the '# ' title");
      out += "** " + std::string(util::trim(line.substr(3))) + "\n";
      have_class = true;
    } else if (line.substr(0, 2) == "# ") {
      if (have_root) throw Error(ErrorKind::MultipleRoots, "second '# ' title on line " + std::to_string(line_no));
      out += "* " + std::string(util::trim(line.substr(2))) + "\n";
      have_root = true;
    } else if (line.size() > 2 && (line[0] == '-' || line[0] == '*') && line[1] == ' ') {
      if (!have_class) throw SyntaxError(line_no, 1, "bullet outside a fault class section");
      std::size_t indent = raw.find_first_not_of(' ');
      out += std::string(3 + indent / 2, '*') + " " + std::string(util::trim(line.substr(2))) + "\n";
    }
  }
  if (!have_root) throw SyntaxError(line_no, 1, "no '# ' title");
  return out + "@endmindmap\n";
}

/// Runs the hook and parses what it returns.
inline MindMap generate_mindmap(std::string_view regulation, const GeneratorHook& hook = outline_to_plantuml) {
  return parse_plantuml(hook(regulation));
}

}  // namespace fault2flow
