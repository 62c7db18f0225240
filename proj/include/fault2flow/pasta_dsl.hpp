#pragma once

#include <algorithm>
#include <cctype>
#include <functional>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "fault2flow/error.hpp"
#include "fault2flow/fault_tree.hpp"
#include "fault2flow/util.hpp"

// Line-oriented PASTA fault-tree DSL:
//
//   tree <id>
//   param <id> unit "<text>" [range <lo> <hi>]
//   ratio <id> = <id> / <id> [range <lo> <hi>]
//   basic <id> : <param-id> <op> <number>
//   gate <id> = and(<id-list>) | or(<id-list>) | kofn(<k>; <id-list>)
//   top <fault_class_id> = <id>
//
// `#` starts a comment outside string literals. Lines may appear in any
// order after the header; references are resolved once the file is read.

namespace fault2flow {

namespace pasta_detail {

enum class Tok { Ident, Number, String, Punct, Op, End };

struct Token {
  Tok kind = Tok::End;
  std::string text;
  std::size_t column = 0;
};

class LineLexer {
 public:
  LineLexer(std::string_view line, std::size_t line_no) : line_(line), line_no_(line_no) { advance(); }

  const Token& peek() const { return current_; }

  Token next() {
    Token t = current_;
    advance();
    return t;
  }

  [[noreturn]] void fail(const Token& at, const std::string& message) const {
    throw SyntaxError(line_no_, at.column, message);
  }

  Token expect(Tok kind, std::string_view what) {
    if (current_.kind != kind) fail(current_, "expected " + std::string(what) + describe());
    return next();
  }

  void expect_punct(char c) {
    if (current_.kind != Tok::Punct || current_.text[0] != c) {
      fail(current_, std::string("expected '") + c + "'" + describe());
    }
    next();
  }

  bool accept_punct(char c) {
    if (current_.kind == Tok::Punct && current_.text[0] == c) {
      next();
      return true;
    }
    return false;
  }

  std::string expect_ident(std::string_view what) { return expect(Tok::Ident, what).text; }

  double expect_number(std::string_view what) {
    Token t = expect(Tok::Number, what);
    auto v = util::parse_number(t.text);
    if (!v) fail(t, "number out of range");
    return *v;
  }

  void expect_end() {
    if (current_.kind != Tok::End) fail(current_, "unexpected trailing input" + describe());
  }

 private:
  std::string describe() const {
    if (current_.kind == Tok::End) return ", found end of line";
    return ", found '" + current_.text + "'";
  }

  void advance() {
    while (pos_ < line_.size() && (line_[pos_] == ' ' || line_[pos_] == '\t')) ++pos_;
    current_ = Token{};
    current_.column = pos_ + 1;
    if (pos_ >= line_.size() || line_[pos_] == '#') {
      current_.kind = Tok::End;
      return;
    }
    char c = line_[pos_];
    auto uc = static_cast<unsigned char>(c);
    if (std::islower(uc) || c == '_') {
      std::size_t start = pos_;
      while (pos_ < line_.size()) {
        auto ch = static_cast<unsigned char>(line_[pos_]);
        if (std::islower(ch) || std::isdigit(ch) || ch == '_') {
          ++pos_;
        } else if (std::isupper(ch)) {
          throw SyntaxError(line_no_, pos_ + 1, "identifiers must be lowercase");
        } else {
          break;
        }
      }
      current_.kind = Tok::Ident;
      current_.text = std::string(line_.substr(start, pos_ - start));
      return;
    }
    if (std::isupper(uc)) throw SyntaxError(line_no_, pos_ + 1, "identifiers must be lowercase");
    if (std::isdigit(uc) || c == '-' || c == '.') {
      lex_number();
      return;
    }
    if (c == '"') {
      lex_string();
      return;
    }
    if (c == '<' || c == '>') {
      std::size_t start = pos_++;
      if (pos_ < line_.size() && line_[pos_] == '=') ++pos_;
      current_.kind = Tok::Op;
      current_.text = std::string(line_.substr(start, pos_ - start));
      return;
    }
    if (std::string_view("=/();,:").find(c) != std::string_view::npos) {
      current_.kind = Tok::Punct;
      current_.text = std::string(1, c);
      ++pos_;
      return;
    }
    throw SyntaxError(line_no_, pos_ + 1, std::string("unexpected character '") + c + "'");
  }

  void lex_number() {
    std::size_t start = pos_;
    auto digit = [&](std::size_t i) {
      return i < line_.size() && std::isdigit(static_cast<unsigned char>(line_[i]));
    };
    if (line_[pos_] == '-') ++pos_;
    if (!digit(pos_)) throw SyntaxError(line_no_, start + 1, "malformed number");
    while (digit(pos_)) ++pos_;
    if (pos_ < line_.size() && line_[pos_] == '.') {
      ++pos_;
      if (!digit(pos_)) throw SyntaxError(line_no_, start + 1, "malformed number");
      while (digit(pos_)) ++pos_;
    }
    if (pos_ < line_.size() && (line_[pos_] == 'e' || line_[pos_] == 'E')) {
      ++pos_;
      if (pos_ < line_.size() && (line_[pos_] == '+' || line_[pos_] == '-')) ++pos_;
      if (!digit(pos_)) throw SyntaxError(line_no_, start + 1, "malformed number");
      while (digit(pos_)) ++pos_;
    }
    current_.kind = Tok::Number;
    current_.text = std::string(line_.substr(start, pos_ - start));
  }

  void lex_string() {
    std::size_t start = pos_++;
    std::string value;
    while (pos_ < line_.size() && line_[pos_] != '"') {
      if (line_[pos_] == '\\' && pos_ + 1 < line_.size()) ++pos_;
      value.push_back(line_[pos_++]);
    }
    if (pos_ >= line_.size()) throw SyntaxError(line_no_, start + 1, "unterminated string");
    ++pos_;
    current_.kind = Tok::String;
    current_.text = std::move(value);
  }

  std::string_view line_;
  std::size_t line_no_;
  std::size_t pos_ = 0;
  Token current_;
};

inline std::string quote(std::string_view text) {
  std::string out = "\"";
  for (char c : text) {
    if (c == '"' || c == '\\') out.push_back('\\');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

}  // namespace pasta_detail

/// Parses PASTA source. Rejects syntax errors, duplicate ids, unresolved
/// references and cycles; semantic checks are left to self_check().
inline FaultTree parse_pasta(std::string_view text) {
  using namespace pasta_detail;
  FaultTree tree;
  bool have_header = false;
  std::map<std::string, std::size_t> node_line;
  std::map<std::string, std::size_t> param_line;

  auto lines = util::split_lines(text);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const std::size_t line_no = i + 1;
    LineLexer lex(lines[i], line_no);
    if (lex.peek().kind == Tok::End) continue;
    Token keyword = lex.expect(Tok::Ident, "a declaration keyword");

    if (!have_header) {
      if (keyword.text != "tree") lex.fail(keyword, "source must start with 'tree <id>'");
      tree.name = lex.expect_ident("tree name");
      lex.expect_end();
      have_header = true;
      continue;
    }

    auto declare_node = [&](const std::string& id, NodeBody body) {
      if (tree.nodes.contains(id)) {
        throw Error(ErrorKind::DuplicateId, "node '" + id + "' declared on line " +
                                                std::to_string(node_line[id]) + " and line " +
                                                std::to_string(line_no));
      }
      node_line[id] = line_no;
      tree.nodes.emplace(id, std::move(body));
    };
    auto declare_param = [&](ParamSpec spec) {
      if (param_line.contains(spec.name)) {
        throw Error(ErrorKind::DuplicateId, "parameter '" + spec.name + "' declared on line " +
                                                std::to_string(param_line[spec.name]) + " and line " +
                                                std::to_string(line_no));
      }
      param_line[spec.name] = line_no;
      tree.schema.push_back(std::move(spec));
    };
    auto optional_range = [&](ParamSpec& spec) {
      if (lex.peek().kind == Tok::Ident && lex.peek().text == "range") {
        Token at = lex.next();
        double lo = lex.expect_number("range lower bound");
        double hi = lex.expect_number("range upper bound");
        if (lo > hi) lex.fail(at, "range lower bound exceeds upper bound");
        spec.range = Range{lo, hi};
      }
    };

    if (keyword.text == "tree") {
      lex.fail(keyword, "duplicate 'tree' header");
    } else if (keyword.text == "param") {
      ParamSpec spec;
      spec.name = lex.expect_ident("parameter name");
      Token unit_kw = lex.expect(Tok::Ident, "'unit'");
      if (unit_kw.text != "unit") lex.fail(unit_kw, "expected 'unit'");
      spec.unit = lex.expect(Tok::String, "quoted unit text").text;
      optional_range(spec);
      lex.expect_end();
      declare_param(std::move(spec));
    } else if (keyword.text == "ratio") {
      ParamSpec spec;
      spec.kind = ParamKind::Derived;
      spec.name = lex.expect_ident("ratio name");
      lex.expect_punct('=');
      Token num = lex.expect(Tok::Ident, "numerator parameter");
      lex.expect_punct('/');
      Token den = lex.expect(Tok::Ident, "denominator parameter");
      if (num.text == den.text) lex.fail(den, "ratio operands must differ");
      spec.numerator = num.text;
      spec.denominator = den.text;
      optional_range(spec);
      lex.expect_end();
      declare_param(std::move(spec));
    } else if (keyword.text == "basic") {
      std::string id = lex.expect_ident("basic event id");
      lex.expect_punct(':');
      Condition cond;
      cond.parameter = lex.expect_ident("parameter name");
      Token op = lex.expect(Tok::Op, "comparison operator");
      cond.op = *parse_compare_op(op.text);
      cond.threshold = lex.expect_number("threshold");
      lex.expect_end();
      declare_node(id, BasicEvent{std::move(cond)});
    } else if (keyword.text == "gate") {
      std::string id = lex.expect_ident("gate id");
      lex.expect_punct('=');
      Token kind = lex.expect(Tok::Ident, "gate kind");
      Gate gate;
      if (kind.text == "and") {
        gate.kind = GateKind::And;
      } else if (kind.text == "or") {
        gate.kind = GateKind::Or;
      } else if (kind.text == "kofn") {
        gate.kind = GateKind::KofN;
      } else {
        lex.fail(kind, "unknown gate kind '" + kind.text + "'");
      }
      lex.expect_punct('(');
      if (gate.kind == GateKind::KofN) {
        Token k = lex.expect(Tok::Number, "k");
        auto kv = util::parse_number(k.text);
        if (!kv || *kv < 0 || *kv != static_cast<double>(static_cast<std::size_t>(*kv))) {
          lex.fail(k, "k must be a non-negative integer");
        }
        gate.k = static_cast<std::size_t>(*kv);
        lex.expect_punct(';');
      }
      if (!lex.accept_punct(')')) {
        do {
          gate.children.push_back(lex.expect_ident("child id"));
        } while (lex.accept_punct(','));
        lex.expect_punct(')');
      }
      lex.expect_end();
      declare_node(id, std::move(gate));
    } else if (keyword.text == "top") {
      std::string id = lex.expect_ident("fault class id");
      lex.expect_punct('=');
      std::string child = lex.expect_ident("child id");
      lex.expect_end();
      declare_node(id, TopEvent{child});
      tree.tops.push_back(id);
    } else {
      lex.fail(keyword, "unknown declaration '" + keyword.text + "'");
    }
  }
  if (!have_header) throw SyntaxError(1, 1, "missing 'tree <id>' header");

  for (const auto& spec : tree.schema) {
    if (spec.kind != ParamKind::Derived) continue;
    for (const auto& operand : {spec.numerator, spec.denominator}) {
      const ParamSpec* target = tree.find_param(operand);
      if (target == nullptr) {
        throw Error(ErrorKind::UnresolvedReference,
                    "ratio '" + spec.name + "' references unknown parameter '" + operand + "'");
      }
      if (target->kind != ParamKind::Measured) {
        throw Error(ErrorKind::UnresolvedReference,
                    "ratio '" + spec.name + "' references derived parameter '" + operand +
                        "'; operands must be measured");
      }
    }
  }
  for (const auto& [id, body] : tree.nodes) {
    if (auto* basic = std::get_if<BasicEvent>(&body)) {
      if (tree.find_param(basic->condition.parameter) == nullptr) {
        throw Error(ErrorKind::UnresolvedReference,
                    "basic event '" + id + "' references unknown parameter '" + basic->condition.parameter + "'");
      }
      continue;
    }
    for (const auto& child : tree.children(id)) {
      if (child == id) throw Error(ErrorKind::CycleDetected, "node '" + id + "' references itself");
      const NodeBody* target = tree.find(child);
      if (target == nullptr) {
        throw Error(ErrorKind::UnresolvedReference, "node '" + id + "' references unknown node '" + child + "'");
      }
      if (std::holds_alternative<TopEvent>(*target)) {
        throw Error(ErrorKind::UnresolvedReference,
                    "node '" + id + "' references top event '" + child + "' as a child");
      }
    }
  }

  enum class Mark { Fresh, Active, Done };
  std::map<std::string, Mark> marks;
  std::vector<std::string> stack;
  std::function<void(const std::string&)> dfs = [&](const std::string& id) {
    auto& mark = marks[id];
    if (mark == Mark::Done) return;
    if (mark == Mark::Active) {
      auto it = std::find(stack.begin(), stack.end(), id);
      std::string cycle;
      for (; it != stack.end(); ++it) cycle += *it + " -> ";
      throw Error(ErrorKind::CycleDetected, "cycle through '" + id + "': " + cycle + id);
    }
    mark = Mark::Active;
    stack.push_back(id);
    for (const auto& child : tree.children(id)) dfs(child);
    stack.pop_back();
    marks[id] = Mark::Done;
  };
  for (const auto& [id, body] : tree.nodes) dfs(id);
  return tree;
}

/// Canonical source: header, schema in stored order, then for each top in
/// declaration order its not-yet-emitted descendants in post-order followed
/// by the top itself. Nodes unreachable from any top come last.
inline std::string emit_pasta(const FaultTree& tree) {
  using pasta_detail::quote;
  std::string out = "tree " + tree.name + "\n";
  auto range_suffix = [](const ParamSpec& spec) -> std::string {
    if (!spec.range) return "";
    return " range " + util::format_number(spec.range->low) + " " + util::format_number(spec.range->high);
  };
  for (const auto& spec : tree.schema) {
    if (spec.kind == ParamKind::Measured) {
      out += "param " + spec.name + " unit " + quote(spec.unit) + range_suffix(spec) + "\n";
    } else {
      out += "ratio " + spec.name + " = " + spec.numerator + " / " + spec.denominator + range_suffix(spec) + "\n";
    }
  }

  std::set<std::string> emitted;
  std::function<void(const std::string&)> emit_node = [&](const std::string& id) {
    if (emitted.contains(id)) return;
    const NodeBody* body = tree.find(id);
    if (body == nullptr) return;
    emitted.insert(id);
    if (auto* basic = std::get_if<BasicEvent>(body)) {
      out += "basic " + id + " : " + basic->condition.to_string() + "\n";
    } else if (auto* gate = std::get_if<Gate>(body)) {
      for (const auto& child : gate->children) emit_node(child);
      out += "gate " + id + " = " + std::string(to_string(gate->kind)) + "(";
      if (gate->kind == GateKind::KofN) out += std::to_string(gate->k) + "; ";
      for (std::size_t i = 0; i < gate->children.size(); ++i) {
        if (i > 0) out += ", ";
        out += gate->children[i];
      }
      out += ")\n";
    } else {
      const auto& top = std::get<TopEvent>(*body);
      emit_node(top.child);
      out += "top " + id + " = " + top.child + "\n";
    }
  };
  for (const auto& top : tree.tops) emit_node(top);
  for (const auto& [id, body] : tree.nodes) emit_node(id);
  return out;
}

}  // namespace fault2flow
