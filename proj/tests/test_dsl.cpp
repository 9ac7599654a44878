#include <doctest.h>

#include "scenarios.hpp"

using namespace geoprove;
using namespace testsupport;

namespace {

ErrorCode code_of(const std::string& text) {
  try {
    load_tools(text, base_registry());
  } catch (const DslError& e) {
    return e.code();
  }
  FAIL("expected an error for:\n" << text);
  return ErrorCode::SyntaxError;
}

DslError error_of(const std::string& text) {
  try {
    parse_toolfile(text);
  } catch (const DslError& e) {
    return e;
  }
  FAIL("expected a parse error for:\n" << text);
  return DslError(ErrorCode::SyntaxError, "");
}

std::string emptied_proof() {
  std::string text = slurp("tests/corpus/composite_tools.glt");
  std::string step = "  <- sim_aa_r C A B B A C\n";
  auto pos = text.find(step);
  REQUIRE(pos != std::string::npos);
  return text.erase(pos, step.size());
}

}  // namespace

TEST_CASE("step syntax") {
  StepAst s = parse_step("X <- m_point_on 0.6169557687823527 o", 3, 0, false);
  CHECK(s.outputs == std::vector<std::string>{"X"});
  CHECK(s.tool == "m_point_on");
  REQUIRE(s.args.size() == 2);
  CHECK_FALSE(s.args[0].is_label());
  CHECK(s.args[0].hyper().type == Hyper::Type::Float);
  CHECK(s.args[1].label() == "o");
  CHECK(s.args[1].column == 36);

  StepAst g = parse_step("?<- lies_on Fb d", 9, 0, true);
  CHECK(g.goal);
  CHECK(g.outputs.empty());
  CHECK_THROWS_AS(parse_step("?<- lies_on Fb d", 9, 0, false), DslError);

  StepAst anon = parse_step("_ b' <- foo A", 1, 2, false);
  CHECK(anon.outputs == std::vector<std::string>{"_", "b'"});
  CHECK(anon.column == 3);

  CHECK(parse_hyper("-3")->type == Hyper::Type::Int);
  CHECK(parse_hyper("1/2")->type == Hyper::Type::Fraction);
  CHECK(parse_hyper("2e3")->type == Hyper::Type::Float);
  CHECK_FALSE(parse_hyper("x").has_value());
  CHECK_FALSE(parse_hyper("1/0").has_value());
}

TEST_CASE("listings parse verbatim") {
  ToolFileAst ast = parse_toolfile(slurp("tests/corpus/composite_tools.glt"));
  REQUIRE(ast.tools.size() == 5);
  CHECK(ast.tools[0].name == "angle");
  CHECK(ast.tools[0].kind() == CompositeKind::Macro);
  CHECK(ast.tools[1].kind() == CompositeKind::Axiom);
  CHECK(ast.tools[1].assumptions.empty());
  CHECK(ast.tools[2].assumptions.size() == 1);
  CHECK(ast.tools[2].implications.size() == 3);
  CHECK(ast.tools[3].outputs.empty());
  CHECK(ast.tools[4].kind() == CompositeKind::Lemma);
  CHECK(ast.tools[4].proof.size() == 1);
  CHECK(ast.tools[0].assumptions[2].args[0].hyper() == Hyper::integer(0));
  CHECK(ast.tools[0].assumptions[2].args[2].hyper() == Hyper::integer(-1));
}

TEST_CASE("listings lint on top of the base tools") {
  auto layer = std::make_shared<Registry>(base_registry());
  auto errors = lint_toolfile(parse_toolfile(slurp("tests/corpus/composite_tools.glt")), *layer);
  for (const auto& e : errors) INFO(e.what());
  CHECK(errors.empty());
  CHECK(layer->local().size() == 5);
}

TEST_CASE("an empty PROOF section fails at the implications") {
  auto layer = std::make_shared<Registry>(base_registry());
  auto errors = lint_toolfile(parse_toolfile(emptied_proof()), *layer);
  REQUIRE(errors.size() == 1);
  CHECK(errors[0].code() == ErrorCode::LemmaProofFailed);
  CHECK(errors[0].subject() == "isosceles_aa");
  CHECK(std::string(errors[0].what()).find("stage 5 (implications)") != std::string::npos);
}

TEST_CASE("parse errors carry positions") {
  DslError e = error_of("foo A:P B:Q ->\n  <- not_eq A B\n");
  CHECK(e.code() == ErrorCode::UnknownType);
  CHECK(e.line() == 1);
  CHECK(e.column() == 11);  // the type token

  e = error_of("foo A:P A:P ->\n");
  CHECK(e.code() == ErrorCode::DuplicateLabel);

  e = error_of("foo A:P ->\n  THEN\n  THEN\n");
  CHECK(e.code() == ErrorCode::SyntaxError);
  CHECK(e.line() == 3);

  e = error_of("foo A:P ->\n  PROOF\n");
  CHECK(e.code() == ErrorCode::SyntaxError);

  e = error_of("  <- not_eq A B\n");
  CHECK(e.code() == ErrorCode::SyntaxError);
  CHECK(e.line() == 1);
}

TEST_CASE("resolution errors") {
  CHECK(code_of("foo A:P ->\n  <- not_eq A B\n") == ErrorCode::UnresolvedLabel);
  CHECK(code_of("foo A:P ->\n  <- no_such_tool A\n") == ErrorCode::UnresolvedToolName);
  CHECK(code_of("foo A:P ->\n  <- not_eq A\n") == ErrorCode::ArityMismatch);
  CHECK(code_of("foo A:P B:P -> l:C\n  l <- line A B\n") == ErrorCode::OutputKindMismatch);
  CHECK(code_of("foo A:P B:P -> l:L\n  <- not_eq A B\n") == ErrorCode::UnresolvedLabel);
  // Implications cannot see labels bound in the proof.
  CHECK(code_of("foo A:P B:P ->\n  <- not_eq A B\n  THEN\n  <- lies_on A l\n  PROOF\n"
                "  l <- line A B\n") == ErrorCode::UnresolvedLabel);
  CHECK(code_of("foo A:P ->\n  <- not_eq A A\nfoo A:P ->\n  <- not_eq A A\n") ==
        ErrorCode::DuplicateSignature);
}

TEST_CASE("overloads by input kinds") {
  auto reg = load_tools(
      "pick A:P B:P -> l:L\n  l <- line A B\n"
      "pick l:L -> a:A\n  a <- direction_of l\n",
      base_registry());
  CHECK(reg->overloads("pick").size() == 2);
  ToolPtr pl = reg->resolve("pick", std::vector<Kind>{Kind::Point, Kind::Point});
  ToolPtr ll = reg->resolve("pick", std::vector<Kind>{Kind::Line});
  REQUIRE(pl);
  REQUIRE(ll);
  CHECK(pl->signature().outputs == std::vector<Kind>{Kind::Line});
  CHECK(ll->signature().outputs == std::vector<Kind>{Kind::Angle});
}

TEST_CASE("round trips") {
  for (const char* file : {"tools/base.glt", "tests/corpus/composite_tools.glt"}) {
    INFO(file);
    ToolFileAst once = parse_toolfile(slurp(file));
    std::string text = serialize_toolfile(once);
    ToolFileAst twice = parse_toolfile(text);
    CHECK(once == twice);
    CHECK(serialize_toolfile(twice) == text);
  }
  Script s = simson_script();
  CHECK(parse_script(serialize_script(s)).steps == s.steps);
}

TEST_CASE("CRLF and comments") {
  std::string text = slurp("tests/corpus/composite_tools.glt");
  std::string crlf;
  for (char c : text) crlf += c == '\n' ? std::string("\r\n") : std::string(1, c);
  CHECK(parse_toolfile(crlf) == parse_toolfile(text));
  CHECK(parse_toolfile("# header\n" + text + "# trailer\n") == parse_toolfile(text));
}

TEST_CASE("inlining a macro") {
  ToolFileAst base = parse_toolfile(slurp("tools/base.glt"));
  const ToolDefAst& angle = angle_macro(base);
  std::map<std::string, Kind> kinds{{"a", Kind::Line}, {"d0", Kind::Line}};
  std::vector<StepAst> steps{parse_step("t <- angle a d0", 1, 0, false)};
  std::vector<StepAst> out = inline_macro(steps, angle, kinds, *base_registry());
  REQUIRE(out.size() == 3);
  CHECK(out[2].tool == "angle_compute");
  CHECK(out[2].outputs == std::vector<std::string>{"t"});
  // The macro's local d0 is renamed apart from the caller's d0.
  CHECK(out[0].outputs[0] != "d0");
  CHECK(kinds.at("t") == Kind::Angle);

  ToolFileAst inlined = inline_macro(base, angle, *base_registry());
  for (const auto& def : inlined.tools)
    if (&def != &inlined.tools.front() && !(def.name == "angle" && def.inputs[0].kind == Kind::Line))
      for (const auto& st : def.assumptions)
        CHECK_FALSE((st.tool == "angle" && st.args.size() == 2));
  CHECK_NOTHROW(load_toolfile(inlined, *std::make_shared<Registry>(builtin_registry())));
}
