#include <gtest/gtest.h>

#include <json.hpp>

#include "fault2flow/compiler.hpp"
#include "fault2flow/workflow.hpp"
#include "support/expect_error.hpp"
#include "support/fixtures.hpp"

namespace f2f = fault2flow;
using f2f::ErrorKind;
using f2f::WfKind;

namespace {

f2f::WfNode node(std::string name, WfKind kind) {
  f2f::WfNode n;
  n.name = std::move(name);
  n.kind = kind;
  return n;
}

f2f::Workflow minimal_workflow() {
  auto trigger = node("trigger", WfKind::Trigger);
  trigger.fields = {{"x", "u"}};
  auto out = node("out", WfKind::Output);
  out.label = "f";
  return f2f::Workflow("minimal", {trigger, out}, {{"trigger", 0, "out"}});
}

f2f::Workflow one_condition(bool wire_false) {
  auto trigger = node("trigger", WfKind::Trigger);
  trigger.fields = {{"x", "u"}};
  auto check = node("check_1", WfKind::Condition);
  check.condition = {"x", std::nullopt, f2f::CompareOp::Less, 10};
  auto yes = node("yes", WfKind::Output);
  yes.label = "fault";
  auto no = node("no", WfKind::Output);
  no.label = "no_fault";
  no.is_fault = false;
  std::vector<f2f::Connection> c{{"trigger", 0, "check_1"}, {"check_1", 0, "yes"}};
  if (wire_false) c.push_back({"check_1", 1, "no"});
  return f2f::Workflow("one", {trigger, check, yes, no}, c);
}

bool has_code(const f2f::CheckReport& r, const std::string& code) {
  for (const auto& f : r.findings) {
    if (f.message.rfind(code, 0) == 0) return true;
  }
  return false;
}

}  // namespace

TEST(WorkflowValidate, CompiledFixturesPass) {
  for (const auto& name : f2f_test::tree_fixtures()) {
    auto report = f2f::validate_workflow(f2f::compile(f2f_test::load_tree(name)));
    EXPECT_TRUE(report.passed) << name << "\n" << f2f::render_findings(report.findings);
  }
}

TEST(WorkflowValidate, DuplicateName) {
  auto trigger = node("trigger", WfKind::Trigger);
  auto a = node("check_1", WfKind::Output);
  a.label = "a";
  auto b = node("check_1", WfKind::Output);
  b.label = "b";
  auto r = f2f::validate_workflow(f2f::Workflow("dup", {trigger, a, b}, {{"trigger", 0, "check_1"}}));
  EXPECT_FALSE(r.passed);
  EXPECT_TRUE(has_code(r, "DuplicateName"));
}

TEST(WorkflowValidate, MissingBranch) {
  auto r = f2f::validate_workflow(one_condition(false));
  EXPECT_FALSE(r.passed);
  EXPECT_TRUE(has_code(r, "MissingBranch"));
  EXPECT_TRUE(f2f::validate_workflow(one_condition(true)).passed);
}

TEST(WorkflowValidate, StructuralErrors) {
  auto w = one_condition(true);
  auto nodes = w.nodes();
  auto connections = w.connections();
  connections.push_back({"check_1", 2, "yes"});
  connections.push_back({"ghost", 0, "yes"});
  nodes[1].condition.field = "y";
  nodes.push_back(node("stray", WfKind::Join));
  auto r = f2f::validate_workflow(f2f::Workflow("bad", nodes, connections));
  for (const auto* code : {"BadPort", "UnknownNode", "UnknownField", "Unreachable"}) {
    EXPECT_TRUE(has_code(r, code)) << code;
  }
}

TEST(WorkflowValidate, TriggerCount) {
  auto w = minimal_workflow();
  auto nodes = w.nodes();
  nodes.push_back(node("second_trigger", WfKind::Trigger));
  EXPECT_TRUE(has_code(f2f::validate_workflow(f2f::Workflow("two", nodes, w.connections())), "TriggerCount"));
  EXPECT_TRUE(has_code(f2f::validate_workflow(f2f::Workflow("none", {}, {})), "TriggerCount"));
}

TEST(WorkflowValidate, UnreachableOutputIsAWarning) {
  auto w = minimal_workflow();
  auto nodes = w.nodes();
  auto lost = node("lost", WfKind::Output);
  lost.label = "never";
  nodes.push_back(lost);
  auto r = f2f::validate_workflow(f2f::Workflow("w", nodes, w.connections()));
  EXPECT_TRUE(r.passed);
  EXPECT_EQ(r.count(f2f::Severity::Warning), 1u);
}

TEST(WorkflowValidate, UnsupportedNodeTypeRejected) {
  auto w = minimal_workflow();
  auto nodes = w.nodes();
  auto http = node("http", WfKind::Unsupported);
  http.type_name = "n8n-nodes-base.httpRequest";
  nodes.push_back(http);
  auto r = f2f::validate_workflow(f2f::Workflow("w", nodes, {{"trigger", 0, "out"}, {"trigger", 0, "http"}}));
  EXPECT_TRUE(has_code(r, "UnsupportedType"));
}

TEST(WorkflowConstruct, CyclesAreRejected) {
  auto a = node("a", WfKind::Join);
  auto b = node("b", WfKind::Join);
  EXPECT_F2F_ERROR(f2f::Workflow("cyc", {a, b}, {{"a", 0, "b"}, {"b", 0, "a"}}), ErrorKind::CycleDetected);
}

TEST(WorkflowExport, MinimalDocumentShape) {
  auto doc = nlohmann::ordered_json::parse(f2f::export_n8n(minimal_workflow()));
  std::vector<std::string> keys;
  for (const auto& [k, v] : doc.items()) keys.push_back(k);
  EXPECT_EQ(keys, (std::vector<std::string>{"name", "nodes", "connections"}));
  ASSERT_EQ(doc["nodes"].size(), 2u);
  EXPECT_EQ(doc["connections"].size(), 1u);
  EXPECT_EQ(doc["nodes"][0]["type"], "n8n-nodes-base.formTrigger");
  EXPECT_EQ(doc["nodes"][1]["type"], "n8n-nodes-base.set");
  std::vector<std::string> node_keys;
  for (const auto& [k, v] : doc["nodes"][0].items()) node_keys.push_back(k);
  EXPECT_EQ(node_keys, (std::vector<std::string>{"id", "name", "type", "typeVersion", "position", "parameters"}));
  EXPECT_EQ(doc["connections"]["trigger"]["main"][0][0]["node"], "out");
  EXPECT_EQ(doc["connections"]["trigger"]["main"][0][0]["type"], "main");
  EXPECT_EQ(doc["connections"]["trigger"]["main"][0][0]["index"], 0);
}

TEST(WorkflowExport, ConditionPortsAreOuterArray) {
  auto doc = nlohmann::ordered_json::parse(f2f::export_n8n(one_condition(true)));
  const auto& main = doc["connections"]["check_1"]["main"];
  ASSERT_EQ(main.size(), 2u);
  EXPECT_EQ(main[0][0]["node"], "yes");
  EXPECT_EQ(main[1][0]["node"], "no");
  EXPECT_EQ(doc["nodes"][1]["type"], "n8n-nodes-base.if");
}

TEST(WorkflowExport, DeterministicAndTwoSpaceIndented) {
  auto w = f2f::compile(f2f_test::load_tree("three_ratio"));
  auto a = f2f::export_n8n(w);
  EXPECT_EQ(a, f2f::export_n8n(w));
  EXPECT_EQ(a.substr(0, 12), "{\n  \"name\": ");
  EXPECT_EQ(a.back(), '\n');
}

TEST(WorkflowExport, ProvenanceUnderNamespacedMeta) {
  auto doc = nlohmann::ordered_json::parse(f2f::export_n8n(f2f::compile(f2f_test::load_tree("single_condition"))));
  bool found = false;
  for (const auto& n : doc["nodes"]) {
    if (n["name"] == "check_x_low") {
      EXPECT_EQ(n["meta"]["fault2flow"]["provenance"], "x_low");
      found = true;
    }
  }
  EXPECT_TRUE(found);
}

TEST(WorkflowExport, InvalidWorkflowIsRejected) {
  EXPECT_F2F_ERROR(f2f::export_n8n(one_condition(false)), ErrorKind::ValidationFailed);
}

TEST(WorkflowImport, GoldenFilesRoundTrip) {
  for (const auto& name : f2f_test::tree_fixtures()) {
    auto golden = f2f_test::read_fixture("workflows/" + name + ".json");
    auto w = f2f::import_n8n(golden);
    EXPECT_EQ(f2f::export_n8n(w), golden) << name;
    EXPECT_EQ(w, f2f::compile(f2f_test::load_tree(name))) << name;
  }
}

TEST(WorkflowImport, MissingConnections) {
  try {
    f2f::import_n8n(R"({"name": "x", "nodes": []})");
    FAIL();
  } catch (const f2f::Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::SchemaError);
    EXPECT_NE(std::string(e.what()).find("/connections"), std::string::npos) << e.what();
  }
}

TEST(WorkflowImport, SchemaErrorsCarryPaths) {
  auto expect_path = [](const std::string& doc, const std::string& path) {
    try {
      f2f::import_n8n(doc);
      ADD_FAILURE() << "accepted " << doc;
    } catch (const f2f::Error& e) {
      EXPECT_EQ(e.kind(), ErrorKind::SchemaError);
      EXPECT_NE(std::string(e.what()).find(path), std::string::npos) << e.what();
    }
  };
  expect_path("not json", "/");
  expect_path(R"({"nodes": [], "connections": {}})", "/name");
  expect_path(R"({"name": "x", "nodes": [{"name": "a", "type": "t"}], "connections": {}})", "/nodes/0");
  expect_path(R"({"name": "x", "nodes": [{"name": "a", "type": "n8n-nodes-base.if", "position": [0, 0],
      "parameters": {"conditions": {"number": [{"value1": "={{ $json[\"x\"] }}", "operation": "equal",
      "value2": 1}]}}}], "connections": {}})",
              "/nodes/0/parameters/conditions/number/0/operation");
  expect_path(R"({"name": "x", "nodes": [], "connections": {"a": {"main": [[{"type": "main"}]]}}})",
              "/connections/a/main/0");
}

TEST(WorkflowImport, BaselineWithoutProvenance) {
  auto w = f2f::import_n8n(f2f_test::read_fixture("baselines/four_path_no_provenance.json"));
  EXPECT_FALSE(w.nodes().empty());
  for (const auto& n : w.nodes()) EXPECT_FALSE(n.provenance.has_value()) << n.name;
  EXPECT_TRUE(f2f::validate_workflow(w).passed);
}

TEST(WorkflowImport, RatioConditionExpression) {
  auto w = f2f::import_n8n(f2f::export_n8n(f2f::compile(f2f_test::load_tree("three_ratio"))));
  const auto* check = w.find("check_c2h2_c2h4_below_0_1#1");
  ASSERT_NE(check, nullptr);
  EXPECT_EQ(check->condition.field, "c2h2");
  EXPECT_EQ(check->condition.divisor, std::optional<std::string>("c2h4"));
}
