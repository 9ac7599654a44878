// geoprove: check, lint and trace proof scripts; serve the session protocol.

#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "geoprove/builtins.hpp"
#include "geoprove/session_service.hpp"

using namespace geoprove;

namespace {

constexpr int kOk = 0;
constexpr int kProofFailed = 1;
constexpr int kInputError = 2;

std::optional<std::string> read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string refs_text(const std::vector<Ref>& refs, const Session& s) {
  std::string out;
  for (Ref r : refs) out += (out.empty() ? "" : " ") + s.display(r);
  return out;
}

/// Loads builtins plus the tool file; prints the error and returns null on
/// failure.
std::shared_ptr<const Registry> registry_or_report(const std::string& tools) {
  std::string path = default_tools_path(tools);
  auto text = read_file(path);
  if (!text) {
    std::cerr << fmt::format("error: cannot read tool file '{}'\n", path);
    return nullptr;
  }
  try {
    return load_tools(*text, builtin_registry());
  } catch (const DslError& e) {
    std::cerr << fmt::format("{}:{}\n", path, e.what());
    return nullptr;
  }
}

std::optional<Script> script_or_report(const std::string& path) {
  auto text = read_file(path);
  if (!text) {
    std::cerr << fmt::format("error: cannot read script '{}'\n", path);
    return std::nullopt;
  }
  try {
    return parse_script(*text);
  } catch (const DslError& e) {
    std::cerr << fmt::format("{}:{}\n", path, e.what());
    return std::nullopt;
  }
}

int cmd_check(const std::string& script_path, const std::string& tools, const std::string& report) {
  auto registry = registry_or_report(tools);
  auto script = script_or_report(script_path);
  if (!registry || !script) return kInputError;

  ScriptResult r = execute_script(*script, registry);
  if (report == "json") {
    json goals = json::array();
    for (const GoalResult& g : r.goals)
      goals.push_back({{"goal", serialize_step(g.goal)}, {"line", g.goal.line}, {"passed", g.passed},
                       {"failure", g.failure ? to_json(*g.failure) : json(nullptr)}});
    json out = {{"ok", r.ok()},
                {"steps_run", r.steps_run},
                {"failure", r.failure ? to_json(*r.failure) : json(nullptr)},
                {"goals", goals}};
    std::cout << out.dump(2) << "\n";
  }
  if (r.failure) std::cerr << fmt::format("{}:{}\n", script_path, r.failure->describe());
  for (const GoalResult& g : r.goals)
    if (!g.passed) std::cerr << fmt::format("{}:{}\n", script_path, g.failure->describe());
  if (report != "json" && r.ok())
    std::cout << fmt::format("{}: ok ({} steps, {} goal{})\n", script_path, r.steps_run,
                             r.goals.size(), r.goals.size() == 1 ? "" : "s");
  return r.ok() ? kOk : kProofFailed;
}

int cmd_lint(const std::string& path, const std::string& base, bool no_base) {
  auto text = read_file(path);
  if (!text) {
    std::cerr << fmt::format("error: cannot read tool file '{}'\n", path);
    return kInputError;
  }
  std::shared_ptr<const Registry> parent = builtin_registry();
  if (!no_base) {
    parent = registry_or_report(base);
    if (!parent) return kInputError;
  }
  std::vector<DslError> errors;
  std::size_t count = 0;
  try {
    ToolFileAst ast = parse_toolfile(*text);
    count = ast.tools.size();
    Registry layer(parent);
    errors = lint_toolfile(ast, layer);
  } catch (const DslError& e) {
    errors.push_back(e);
  }
  for (const DslError& e : errors) std::cerr << fmt::format("{}:{}\n", path, e.what());
  if (!errors.empty()) return kProofFailed;
  std::cout << fmt::format("{}: ok ({} tools)\n", path, count);
  return kOk;
}

int cmd_trace(const std::string& script_path, const std::string& tools) {
  auto registry = registry_or_report(tools);
  auto script = script_or_report(script_path);
  if (!registry || !script) return kInputError;

  ExecOptions opts;
  opts.track_facts = true;
  int index = 0;
  opts.on_step = [&](const StepAst& step, const StepOutcome& out, const Session& s) {
    std::cout << fmt::format("[{}] line {}: {}\n", index, step.line, serialize_step(step));
    if (!out.new_objects.empty())
      std::cout << fmt::format("    new: {}\n", refs_text(out.new_objects, s));
    for (const MergeEvent& m : out.merges)
      std::cout << fmt::format("    merge: {} = {} ({})\n", s.display(m.kept), s.display(m.absorbed),
                               to_string(m.reason));
    for (const FactRecord& f : s.facts())
      if (f.step == index) std::cout << fmt::format("    + {} {}\n", f.kind, refs_text(f.refs, s));
    ++index;
  };
  opts.on_goal = [&](const GoalResult& g) {
    std::cout << fmt::format("goal line {}: {} {}\n", g.goal.line, serialize_step(g.goal),
                             g.passed ? "passed" : "FAILED");
    if (g.failure) std::cout << fmt::format("    {}\n", g.failure->describe());
  };
  ScriptResult r = execute_script(*script, registry, opts);
  if (r.failure) std::cout << fmt::format("failed: {}\n", r.failure->describe());
  return r.ok() ? kOk : kProofFailed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Proof checker for synthetic Euclidean geometry"};
  app.require_subcommand(1);

  std::string script, tools, report = "text", lint_path, base;
  bool no_base = false, stdio = false;
  int port = 7411;

  auto* check = app.add_subcommand("check", "Run a script in check mode and evaluate its goals");
  check->add_option("script", script, "Script file (.gls)")->required();
  check->add_option("--tools", tools, "Tool file (.glt)");
  check->add_option("--report", report, "Report format")->check(CLI::IsMember({"text", "json"}));

  auto* lint = app.add_subcommand("lint", "Parse, resolve and proof-check a tool file");
  lint->add_option("tools", lint_path, "Tool file (.glt)")->required();
  lint->add_option("--base", base, "Tool file the linted file is layered on");
  lint->add_flag("--no-base", no_base, "Layer directly on the primitive tools");

  auto* trace = app.add_subcommand("trace", "Print each step's new objects, merges and facts");
  trace->add_option("script", script, "Script file (.gls)")->required();
  trace->add_option("--tools", tools, "Tool file (.glt)");

  auto* serve = app.add_subcommand("serve", "Serve the NDJSON session protocol");
  serve->add_option("--port", port, "TCP port on 127.0.0.1");
  serve->add_option("--tools", tools, "Tool file (.glt)");
  serve->add_flag("--stdio", stdio, "Serve one session over stdin/stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : kInputError;
  }

  if (*check) return cmd_check(script, tools, report);
  if (*lint) return cmd_lint(lint_path, base, no_base);
  if (*trace) return cmd_trace(script, tools);
  auto registry = registry_or_report(tools);
  if (!registry) return kInputError;
  return stdio ? serve_stdio(registry) : serve_tcp(registry, port);
}
