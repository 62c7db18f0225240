#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "fault2flow/fault2flow.hpp"
#include "fault2flow/n8n_client.hpp"

namespace f2f = fault2flow;

namespace {

// Exit codes: 0 ok, 1 check or verification failed, 2 bad input, 3 evaluation
// or execution error, 4 remote host error, 5 file system error.
int exit_code_for(f2f::ErrorKind kind) {
  using K = f2f::ErrorKind;
  switch (kind) {
    case K::DivisionByZero:
    case K::MissingParameter:
    case K::MissingField:
    case K::DanglingBranch:
      return 3;
    case K::NetworkError:
    case K::AuthError:
    case K::SchemaRejected:
      return 4;
    case K::IoError:
      return 5;
    default:
      return 2;
  }
}

void emit(const std::string& text, const std::string& out_path) {
  if (out_path.empty() || out_path == "-") {
    std::cout << text;
  } else {
    f2f::util::write_file(out_path, text);
  }
}

f2f::FaultTree load_tree(const std::string& path) { return f2f::parse_pasta(f2f::util::read_file(path)); }

f2f::Workflow load_workflow(const std::string& path) { return f2f::import_n8n(f2f::util::read_file(path)); }

f2f::Assignment parse_inputs(const std::vector<std::string>& pairs) {
  f2f::Assignment input;
  for (const auto& pair : pairs) {
    auto eq = pair.find('=');
    if (eq == std::string::npos) throw f2f::Error(f2f::ErrorKind::ConfigError, "input '" + pair + "' is not k=v");
    auto value = f2f::util::parse_number(pair.substr(eq + 1));
    if (!value) throw f2f::Error(f2f::ErrorKind::ConfigError, "input '" + pair + "' has no numeric value");
    input[pair.substr(0, eq)] = *value;
  }
  return input;
}

std::string render_verify(const f2f::Workflow& original, const f2f::VerifyReport& r) {
  std::string out = std::string("verify: ") + (r.passed ? "passed" : "failed") +
                    "\niterations: " + std::to_string(r.iterations_used) +
                    "\ncoverage (E2ERC): " + std::to_string(r.paths.covered) + "/" + std::to_string(r.paths.total) +
                    "\nfailures: " + std::to_string(r.failures.size()) + "\n";
  std::size_t shown = 0;
  for (const auto& f : r.failures) {
    if (++shown > 5) {
      out += "... " + std::to_string(r.failures.size() - 5) + " more\n";
      break;
    }
    out += "\ncounterexample:";
    for (const auto& [k, v] : f.test.input) out += " " + k + "=" + f2f::util::format_number(v);
    auto join = [](const std::set<std::string>& s) {
      std::string j;
      for (const auto& x : s) j += (j.empty() ? "" : ",") + x;
      return j.empty() ? std::string("none") : j;
    };
    out += "\nexpected: " + join(f.test.expected) + "\nactual: " + (f.error.empty() ? join(f.actual) : f.error) + "\n";
    if (f.trace) out += f2f::dump_trace(original, *f.trace);
  }
  return out;
}

struct Options {
  std::string config_path;
  f2f::Config config;
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"fault2flow: fault trees to verified workflows"};
  app.require_subcommand(1);
  Options opt;
  app.add_option("--config", opt.config_path, "key = value settings file (default: ./fault2flow.config if present)");

  std::string tree_path, wf_path, map_path, out_path, suite_path, schema_path, doc_path;
  std::vector<std::string> inputs, tree_paths;
  std::optional<std::uint64_t> seed, iters, max_iter, islands, population, region_cap, random_count;
  std::optional<double> epsilon;
  std::string endpoint, default_gate = "and", checkpoint_path, resume_path;
  int timeout = 0;
  bool share = false, json = false, no_regenerate = false, no_activate = false;

  auto* lint = app.add_subcommand("lint", "parse and self-check a tree; exit 0 iff passed");
  lint->add_option("tree", tree_path)->required();

  auto* fmt = app.add_subcommand("fmt", "print the canonical form of a tree");
  fmt->add_option("tree", tree_path)->required();
  fmt->add_option("-o,--output", out_path);

  auto* mindmap = app.add_subcommand("mindmap", "outline a regulation document as a mind map");
  mindmap->add_option("regulation", doc_path)->required();
  mindmap->add_option("-o,--output", out_path);

  auto* translate = app.add_subcommand("translate", "mind map to fault tree");
  translate->add_option("map", map_path)->required();
  translate->add_option("--schema", schema_path, "a .pasta file whose param/ratio lines declare the schema");
  translate->add_option("--default-gate", default_gate, "gate for unannotated internal nodes")
      ->check(CLI::IsMember({"and", "or"}));
  translate->add_option("-o,--output", out_path);

  auto* compile = app.add_subcommand("compile", "fault tree to workflow document");
  compile->add_option("tree", tree_path)->required();
  compile->add_option("-o,--output", out_path);
  compile->add_flag("--share", share, "share identical condition nodes");

  auto* exec = app.add_subcommand("exec", "run a workflow on one input and print the trace");
  exec->add_option("workflow", wf_path)->required();
  exec->add_option("--input", inputs, "field=value")->expected(1, -1);

  auto* gen = app.add_subcommand("gen-tests", "synthesize a test suite from a tree");
  gen->add_option("tree", tree_path)->required();
  gen->add_option("-o,--output", out_path);
  gen->add_option("--seed", seed);
  gen->add_option("--epsilon", epsilon);
  gen->add_option("--region-cap", region_cap);
  gen->add_option("--random", random_count);

  auto* ver = app.add_subcommand("verify", "run the suite against a workflow; exit 0 iff passed");
  ver->add_option("tree", tree_path)->required();
  ver->add_option("workflow", wf_path)->required();
  ver->add_option("--max-iter", max_iter, "iterations including the first run (default 5)");
  ver->add_option("--suite", suite_path, "use a saved suite instead of generating one");
  ver->add_flag("--no-regenerate", no_regenerate, "report the first run only; never recompile");
  ver->add_option("-o,--output", out_path, "write the final workflow here");

  auto* met = app.add_subcommand("metrics", "TC, E2ERC, sf-exhaustive and readability");
  met->add_option("tree", tree_path)->required();
  met->add_option("workflow", wf_path)->required();
  met->add_option("--suite", suite_path);
  met->add_flag("--json", json);

  auto* evo = app.add_subcommand("evolve", "optimize a tree for readability under exact equivalence");
  evo->add_option("tree", tree_path)->required();
  evo->add_option("-o,--output", out_path);
  evo->add_option("--iters", iters);
  evo->add_option("--seed", seed);
  evo->add_option("--islands", islands);
  evo->add_option("--population", population);
  evo->add_option("--checkpoint", checkpoint_path, "write an .evo.json checkpoint when done");
  evo->add_option("--resume", resume_path, "continue from an .evo.json checkpoint");

  auto* push = app.add_subcommand("push", "create and activate the workflow on an n8n host");
  push->add_option("workflow", wf_path)->required();
  push->add_option("--endpoint", endpoint, "http://host:port (default: n8n.endpoint from config)");
  push->add_option("--timeout", timeout, "seconds (default 10)");
  push->add_flag("--no-activate", no_activate);

  auto* pipe = app.add_subcommand("pipeline", "compile, gen-tests, verify and metrics in one report");
  pipe->add_option("trees", tree_paths)->required()->expected(1, -1);
  pipe->add_option("-o,--output", out_path);
  pipe->add_flag("--json", json);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (!opt.config_path.empty()) {
      opt.config = f2f::Config::load(opt.config_path);
    } else if (std::filesystem::exists("fault2flow.config")) {
      opt.config = f2f::Config::load("fault2flow.config");
    }
    auto popts = f2f::PipelineOptions::from_config(opt.config);
    if (seed) popts.strategy.seed = *seed;
    if (epsilon) popts.strategy.boundary_epsilon = *epsilon;
    if (region_cap) popts.strategy.region_cap = *region_cap;
    if (random_count) popts.strategy.random_count = *random_count;
    if (max_iter) popts.max_iterations = *max_iter;

    if (lint->parsed()) {
      auto tree = load_tree(tree_path);
      auto report = f2f::self_check(tree);
      std::cout << f2f::render_findings(report.findings) << (report.passed ? "passed\n" : "failed\n");
      return report.passed ? 0 : 1;
    }
    if (fmt->parsed()) {
      emit(f2f::emit_pasta(load_tree(tree_path)), out_path);
      return 0;
    }
    if (mindmap->parsed()) {
      auto map = f2f::generate_mindmap(f2f::util::read_file(doc_path));
      emit(f2f::emit_plantuml(map), out_path);
      return 0;
    }
    if (translate->parsed()) {
      auto map = f2f::parse_plantuml(f2f::util::read_file(map_path));
      auto schema = schema_path.empty() ? f2f::infer_schema(map) : load_tree(schema_path).schema;
      f2f::TranslateOptions topts;
      topts.default_gate = default_gate == "or" ? f2f::GateKind::Or : f2f::GateKind::And;
      auto tree = f2f::mindmap_to_faulttree(map, schema, topts);
      auto report = f2f::self_check(tree);
      if (!report.passed) throw f2f::Error(f2f::ErrorKind::SelfCheckFailed, f2f::render_findings(report.findings));
      emit(f2f::emit_pasta(tree), out_path);
      return 0;
    }
    if (compile->parsed()) {
      popts.compile.share_condition_nodes = share;
      emit(f2f::export_n8n(f2f::compile(load_tree(tree_path), popts.compile)), out_path);
      return 0;
    }
    if (exec->parsed()) {
      auto w = load_workflow(wf_path);
      auto report = f2f::validate_workflow(w);
      if (!report.passed) throw f2f::Error(f2f::ErrorKind::ValidationFailed, f2f::render_findings(report.findings));
      std::cout << f2f::dump_trace(w, f2f::execute(w, parse_inputs(inputs)));
      return 0;
    }
    if (gen->parsed()) {
      auto tree = load_tree(tree_path);
      emit(f2f::export_suite(tree.name, f2f::generate_tests(tree, popts.strategy)), out_path);
      return 0;
    }
    if (ver->parsed()) {
      auto tree = load_tree(tree_path);
      auto w = load_workflow(wf_path);
      auto tests = suite_path.empty() ? f2f::generate_tests(tree, popts.strategy)
                                      : f2f::import_suite(f2f::util::read_file(suite_path));
      f2f::Regenerator regen;
      if (!no_regenerate) regen = f2f::recompile_regenerator(popts.compile);
      auto report = f2f::verify(tree, w, tests, popts.max_iterations, regen, popts.threads);
      std::cout << render_verify(w, report);
      if (!out_path.empty()) f2f::util::write_file(out_path, f2f::export_n8n(report.workflow));
      return report.passed ? 0 : 1;
    }
    if (met->parsed()) {
      auto tree = load_tree(tree_path);
      auto w = load_workflow(wf_path);
      auto tests = suite_path.empty() ? f2f::generate_tests(tree, popts.strategy)
                                      : f2f::import_suite(f2f::util::read_file(suite_path));
      std::vector<f2f::Assignment> points;
      for (const auto& t : tests) points.push_back(t.input);
      std::vector<f2f::ExecutionTrace> traces;
      std::size_t bad = 0;
      auto results = f2f::batch_execute(w, points, popts.threads);
      for (std::size_t i = 0; i < results.size(); ++i) {
        if (!results[i].ok() || results[i].trace->triggered != tests[i].expected) ++bad;
        if (results[i].ok()) traces.push_back(*results[i].trace);
      }
      auto m = f2f::measure(tree, w, traces, popts.leaf_cap);
      m.verify_success = bad == 0 ? 1 : 0;
      m.verify_failure = bad == 0 ? 0 : 1;
      std::cout << (json ? f2f::metrics_to_json(m).dump(2) + "\n" : f2f::render_metrics_table({m}));
      return 0;
    }
    if (evo->parsed()) {
      f2f::EvolveConfig cfg;
      cfg.islands = opt.config.get_count("evolve.islands", cfg.islands);
      cfg.population_per_island = opt.config.get_count("evolve.population", cfg.population_per_island);
      cfg.iterations = opt.config.get_count("evolve.iterations", cfg.iterations);
      cfg.inspiration_count = opt.config.get_count("evolve.inspirations", cfg.inspiration_count);
      cfg.migration_interval = opt.config.get_count("evolve.migration_interval", cfg.migration_interval);
      cfg.migration_size = opt.config.get_count("evolve.migration_size", cfg.migration_size);
      cfg.seed = opt.config.get_count("evolve.seed", cfg.seed);
      cfg.threads = static_cast<unsigned>(opt.config.get_count("threads", cfg.threads));
      if (iters) cfg.iterations = *iters;
      if (seed) cfg.seed = *seed;
      if (islands) cfg.islands = *islands;
      if (population) cfg.population_per_island = *population;
      f2f::EvolveState state;
      if (!resume_path.empty()) {
        state = f2f::load_checkpoint(f2f::util::read_file(resume_path));
        f2f::evolve_continue(state, cfg, state.iteration + cfg.iterations);
      } else {
        state = f2f::evolve_init(f2f::emit_pasta(load_tree(tree_path)), cfg);
        f2f::evolve_continue(state, cfg, cfg.iterations);
      }
      auto result = f2f::evolve_result(state);
      if (!checkpoint_path.empty()) f2f::util::write_file(checkpoint_path, f2f::save_checkpoint(state));
      auto seed_tree = f2f::parse_pasta(state.seed_genome);
      std::cerr << "readability " << f2f::metrics_detail::fixed3(f2f::readability_score(seed_tree)) << " -> "
                << f2f::metrics_detail::fixed3(result.best.fitness.readability) << ", size "
                << f2f::reachable_nodes(seed_tree).size() << " -> " << result.best.fitness.size << ", "
                << state.iteration << " iterations\n";
      emit(result.best.genome, out_path);
      return 0;
    }
    if (push->parsed()) {
      if (endpoint.empty()) endpoint = opt.config.get("n8n.endpoint", "");
      if (endpoint.empty()) throw f2f::Error(f2f::ErrorKind::ConfigError, "no --endpoint and no n8n.endpoint in config");
      std::string env = opt.config.get("n8n.api_key_env", "FAULT2FLOW_N8N_KEY");
      const char* key = std::getenv(env.c_str());
      if (key == nullptr || *key == '\0') {
        throw f2f::Error(f2f::ErrorKind::ConfigError, "environment variable " + env + " holds no API key");
      }
      f2f::PushOptions po;
      po.timeout_seconds = timeout > 0 ? timeout : static_cast<int>(opt.config.get_count("n8n.timeout_seconds", 10));
      po.activate = !no_activate;
      auto document = f2f::export_n8n(load_workflow(wf_path));
      std::cout << f2f::push_workflow(document, endpoint, key, po) << "\n";
      return 0;
    }
    if (pipe->parsed()) {
      std::vector<f2f::MetricReport> rows;
      bool all_passed = true;
      for (const auto& path : tree_paths) {
        auto tree = load_tree(path);
        auto result = f2f::run_pipeline(tree, popts);
        result.metrics.fixture = std::filesystem::path(path).stem().string();
        all_passed = all_passed && result.verification.passed && result.verification.iterations_used == 1;
        rows.push_back(result.metrics);
      }
      std::string text;
      if (json) {
        nlohmann::ordered_json doc = nlohmann::ordered_json::array();
        for (const auto& r : rows) doc.push_back(f2f::metrics_to_json(r));
        text = doc.dump(2) + "\n";
      } else {
        text = f2f::render_metrics_table(rows, rows.size() > 1);
      }
      emit(text, out_path);
      return all_passed ? 0 : 1;
    }
  } catch (const f2f::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code_for(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
