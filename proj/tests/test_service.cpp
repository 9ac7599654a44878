#include <doctest.h>

#include "geoprove/session_service.hpp"
#include "scenarios.hpp"

using namespace geoprove;
using namespace testsupport;

namespace {

json call(SessionService& s, json req) {
  static int id = 0;
  req["id"] = ++id;
  json resp = json::parse(s.handle_line(req.dump()));
  CHECK(resp.at("id") == id);
  return resp;
}

}  // namespace

TEST_CASE("protocol replay reaches the Simson goal") {
  SessionService svc(base_registry());
  Script script = simson_script();
  for (const StepAst& step : script.steps) {
    if (step.goal) {
      json g = call(svc, {{"op", "query_goal"}, {"goal", serialize_step(step)}});
      CHECK(g["ok"] == true);
      CHECK(g["passed"] == true);
      continue;
    }
    json r = call(svc, {{"op", "apply_step"}, {"step", serialize_step(step)}});
    INFO(r.dump());
    REQUIRE(r["ok"] == true);
  }

  json facts = call(svc, {{"op", "get_facts"}});
  bool collinear = false;
  for (const json& f : facts["facts"])
    if (f["kind"] == "lies_on" && f["refs"][0]["label"] == "Fb" &&
        (f["refs"][1]["label"] == "d" || f["refs"][1]["label"] == "e"))
      collinear = true;
  CHECK(collinear);

  json scene = call(svc, {{"op", "get_scene"}});
  int free = 0;
  for (const json& o : scene["objects"]) free += o["free"].get<bool>();
  CHECK(free == 3);

  json exported = call(svc, {{"op", "export"}});
  REQUIRE(exported["type"] == "script");
  CHECK(execute_script(parse_script(exported["text"].get<std::string>()), base_registry()).ok());
}

TEST_CASE("a goal fails before the reasoning steps") {
  SessionService svc(base_registry());
  for (const StepAst& step : simson_script().steps) {
    if (step.outputs.empty()) break;
    call(svc, {{"op", "apply_step"}, {"step", serialize_step(step)}});
  }
  json g = call(svc, {{"op", "query_goal"}, {"goal", "?<- lies_on Fb d"}});
  CHECK(g["passed"] == false);
  CHECK(g["failure"]["reason"] == "UnknownFact");
}

TEST_CASE("failures are structured and leave the session alone") {
  SessionService svc(base_registry());
  call(svc, {{"op", "apply_step"}, {"step", "A <- free_point 0 0"}});
  json r = call(svc, {{"op", "apply_step"}, {"step", "l <- line A A"}});
  CHECK(r["ok"] == false);
  CHECK(r["failure"]["reason"] == "NumericMisfit");
  CHECK(r["failure"]["tool"] == "line");
  CHECK(r["failure"]["trace"].size() >= 1);
  CHECK(svc.session().journal().size() == 1);

  // load_script is all or nothing.
  json bad = call(svc, {{"op", "load_script"}, {"text", "B <- free_point 1 1\nm <- line B B\n"}});
  CHECK(bad["ok"] == false);
  CHECK(svc.session().journal().size() == 1);
  CHECK(svc.session().binding("A").has_value());

  json undo = call(svc, {{"op", "undo"}, {"k", 5}});
  CHECK(undo["ok"] == false);
  call(svc, {{"op", "undo"}});
  CHECK(svc.session().journal().empty());
}

TEST_CASE("malformed requests") {
  SessionService svc(base_registry());
  json r = json::parse(svc.handle_line("{not json"));
  CHECK(r["ok"] == false);
  CHECK(r["failure"]["reason"] == "MalformedRequest");
  r = call(svc, {{"op", "fly"}});
  CHECK(r["failure"]["reason"] == "MalformedRequest");
  r = call(svc, {{"op", "apply_step"}});
  CHECK(r["failure"]["reason"] == "MalformedRequest");
  r = call(svc, {{"op", "apply_step"}, {"step", "x <- nothing"}});
  CHECK(r["failure"]["reason"] == "UnresolvedToolName");
}

TEST_CASE("load_script, move_point and load_tools") {
  SessionService svc(base_registry());
  json r = call(svc, {{"op", "load_script"}, {"text", slurp("tests/corpus/simson.gls")}});
  REQUIRE(r["ok"] == true);
  CHECK(r["steps"] == 18);
  CHECK(r["goals"][0]["passed"] == true);

  r = call(svc, {{"op", "move_point"}, {"label", "A"}, {"x", kAx + 1}, {"y", kAy + 1}});
  CHECK(r["ok"] == true);
  CHECK(call(svc, {{"op", "query_goal"}, {"goal", "<- lies_on Fb d"}})["passed"] == true);
  r = call(svc, {{"op", "move_point"}, {"label", "X"}, {"x", 0}, {"y", 0}});
  CHECK(r["failure"]["reason"] == "UnknownLabelKind");

  r = call(svc, {{"op", "load_tools"}, {"path", source_path("tools/base.glt")}});
  CHECK(r["ok"] == true);
  CHECK(svc.session().journal().empty());
  r = call(svc, {{"op", "load_tools"}, {"text", "broken A:Z ->\n"}});
  CHECK(r["failure"]["reason"] == "UnknownType");
}
