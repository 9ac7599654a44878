#include "geoprove/session_service.hpp"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include <fmt/format.h>

#include "geoprove/builtins.hpp"

#ifndef GEOPROVE_SOURCE_DIR
#define GEOPROVE_SOURCE_DIR "."
#endif

namespace geoprove {

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error(fmt::format("cannot read '{}'", path));
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json refs_json(const std::vector<Ref>& refs, const Session& s) {
  json out = json::array();
  for (Ref r : refs) out.push_back({{"id", r.id}, {"kind", std::string(1, kind_letter(r.kind))},
                                    {"label", s.display(r)}});
  return out;
}

json failure_response(const std::string& reason, const std::string& message) {
  StepFailure f;
  f.reason = reason;
  f.message = message;
  return {{"ok", false}, {"type", "failure"}, {"failure", to_json(f)}};
}

}  // namespace

json to_json(const NumValue& v) {
  return std::visit(
      [](const auto& x) -> json {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, PointVal>) return {{"x", x.x}, {"y", x.y}};
        else if constexpr (std::is_same_v<T, LineVal>) return {{"nx", x.nx}, {"ny", x.ny}, {"c", x.c}};
        else if constexpr (std::is_same_v<T, CircleVal>) return {{"cx", x.cx}, {"cy", x.cy}, {"r", x.r}};
        else return {{"value", x.value}};
      },
      v);
}

json to_json(const StepFailure& f) {
  json trace = json::array();
  for (const Frame& fr : f.trace)
    trace.push_back({{"tool", fr.tool}, {"section", fr.section}, {"step", fr.step}, {"line", fr.line}});
  return {{"step", f.step},       {"line", f.line},         {"goal", f.goal},
          {"tool", f.tool},       {"reason", f.reason},     {"labels", f.labels},
          {"message", f.message}, {"trace", std::move(trace)}};
}

json to_json(const FactRecord& f, const Session& session) {
  return {{"kind", f.kind}, {"refs", refs_json(f.refs, session)}, {"step", f.step}};
}

json to_json(const SceneObject& o) {
  return {{"id", o.ref.id},
          {"kind", std::string(1, kind_letter(o.ref.kind))},
          {"labels", o.labels},
          {"free", o.free},
          {"value", to_json(o.value)}};
}

std::string default_tools_path(const std::string& explicit_path) {
  if (!explicit_path.empty()) return explicit_path;
  if (const char* env = std::getenv("GEOPROVE_TOOLS"); env && *env) return env;
  if (std::filesystem::exists("tools/base.glt")) return "tools/base.glt";
  return std::string(GEOPROVE_SOURCE_DIR) + "/tools/base.glt";
}

std::shared_ptr<const Registry> load_registry(const std::string& path) {
  return load_tools(read_file(path), builtin_registry());
}

// ---------------------------------------------------------------------------

SessionService::SessionService(std::shared_ptr<const Registry> registry)
    : registry_(std::move(registry)), session_(std::make_unique<Session>(registry_, std::nullopt, true)) {}

std::string SessionService::handle_line(const std::string& line) {
  json request;
  try {
    request = json::parse(line);
  } catch (const json::parse_error& e) {
    return failure_response("MalformedRequest", e.what()).dump();
  }
  return handle(request).dump();
}

json SessionService::handle(const json& request) {
  json response;
  if (!request.is_object() || !request.contains("op") || !request["op"].is_string()) {
    response = failure_response("MalformedRequest", "request needs a string field 'op'");
  } else {
    try {
      response = dispatch(request["op"].get<std::string>(), request);
    } catch (const StepError& e) {
      response = {{"ok", false}, {"type", "failure"}, {"failure", to_json(e.failure())}};
    } catch (const DslError& e) {
      StepFailure f;
      f.line = e.line();
      f.reason = to_string(e.code());
      f.message = e.what();
      response = {{"ok", false}, {"type", "failure"}, {"failure", to_json(f)}};
    } catch (const json::exception& e) {
      response = failure_response("MalformedRequest", e.what());
    } catch (const std::exception& e) {
      response = failure_response("Error", e.what());
    }
  }
  if (request.is_object() && request.contains("id")) response["id"] = request["id"];
  return response;
}

json SessionService::dispatch(const std::string& op, const json& req) {
  Session& s = *session_;
  if (op == "load_tools") {
    std::string text = req.contains("text") ? req.at("text").get<std::string>()
                                            : read_file(req.at("path").get<std::string>());
    registry_ = load_tools(text, builtin_registry());
    session_ = std::make_unique<Session>(registry_, std::nullopt, true);
    return {{"ok", true}, {"type", "ok"}, {"tools", registry_->visible().size()}};
  }
  if (op == "load_script") {
    Script script = parse_script(req.at("text").get<std::string>());
    auto fresh = std::make_unique<Session>(registry_, std::nullopt, true);
    json goals = json::array();
    for (const StepAst& step : script.steps) {
      if (step.goal) {
        GoalResult g = fresh->check_goal(step);
        goals.push_back({{"goal", serialize_step(step)}, {"passed", g.passed},
                         {"failure", g.failure ? to_json(*g.failure) : json(nullptr)}});
      } else {
        fresh->apply(step);  // StepError leaves the current session in place
      }
    }
    session_ = std::move(fresh);
    return {{"ok", true}, {"type", "ok"}, {"steps", session_->journal().size()}, {"goals", goals}};
  }
  if (op == "apply_step") {
    StepAst step = parse_step(req.at("step").get<std::string>(), 1, 0, false);
    StepOutcome out = s.apply(step);
    json merges = json::array();
    for (const MergeEvent& m : out.merges)
      merges.push_back({{"kept", m.kept.id}, {"absorbed", m.absorbed.id},
                        {"reason", to_string(m.reason)}});
    return {{"ok", true},
            {"type", "ok"},
            {"outputs", refs_json(out.outputs, s)},
            {"new_objects", refs_json(out.new_objects, s)},
            {"merges", merges}};
  }
  if (op == "undo") {
    s.undo(req.value("k", std::size_t{1}));
    return {{"ok", true}, {"type", "ok"}, {"steps", s.journal().size()}};
  }
  if (op == "move_point") {
    s.move_point(req.at("label").get<std::string>(), req.at("x").get<double>(),
                 req.at("y").get<double>());
    return {{"ok", true}, {"type", "ok"}};
  }
  if (op == "query_goal") {
    std::string text = req.at("goal").get<std::string>();
    std::string_view trimmed = text;
    trimmed.remove_prefix(std::min(trimmed.find_first_not_of(" \t"), trimmed.size()));
    StepAst step = parse_step(text, 1, 0, trimmed.rfind("?<-", 0) == 0);
    GoalResult g = s.check_goal(step);
    return {{"ok", true}, {"type", "goal"}, {"passed", g.passed},
            {"failure", g.failure ? to_json(*g.failure) : json(nullptr)}};
  }
  if (op == "get_scene") {
    json objects = json::array();
    for (const SceneObject& o : s.scene()) objects.push_back(to_json(o));
    return {{"ok", true}, {"type", "scene"}, {"objects", objects}};
  }
  if (op == "get_facts") {
    json facts = json::array();
    for (const FactRecord& f : s.facts()) facts.push_back(to_json(f, s));
    return {{"ok", true}, {"type", "facts"}, {"facts", facts}};
  }
  if (op == "export") return {{"ok", true}, {"type", "script"}, {"text", s.export_script()}};
  return failure_response("MalformedRequest", fmt::format("unknown op '{}'", op));
}

// ---------------------------------------------------------------------------

namespace {

void serve_connection(std::shared_ptr<const Registry> registry, int fd) {
  SessionService service(std::move(registry));
  std::string buffer;
  char chunk[4096];
  for (;;) {
    ssize_t n = ::recv(fd, chunk, sizeof chunk, 0);
    if (n <= 0) break;
    buffer.append(chunk, static_cast<std::size_t>(n));
    std::size_t nl;
    while ((nl = buffer.find('\n')) != std::string::npos) {
      std::string line = buffer.substr(0, nl);
      buffer.erase(0, nl + 1);
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      std::string reply = service.handle_line(line) + "\n";
      for (std::size_t off = 0; off < reply.size();) {
        ssize_t w = ::send(fd, reply.data() + off, reply.size() - off, MSG_NOSIGNAL);
        if (w <= 0) {
          ::close(fd);
          return;
        }
        off += static_cast<std::size_t>(w);
      }
    }
  }
  ::close(fd);
}

}  // namespace

int serve_tcp(std::shared_ptr<const Registry> registry, int port) {
  int server = ::socket(AF_INET, SOCK_STREAM, 0);
  if (server < 0) return 1;
  int yes = 1;
  ::setsockopt(server, SOL_SOCKET, SO_REUSEADDR, &yes, sizeof yes);
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(static_cast<std::uint16_t>(port));
  addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
  if (::bind(server, reinterpret_cast<sockaddr*>(&addr), sizeof addr) < 0 ||
      ::listen(server, 16) < 0) {
    ::close(server);
    return 1;
  }
  std::cerr << fmt::format("geoprove: serving on 127.0.0.1:{}\n", port);
  for (;;) {
    int fd = ::accept(server, nullptr, nullptr);
    if (fd < 0) continue;
    std::thread(serve_connection, registry, fd).detach();
  }
}

int serve_stdio(std::shared_ptr<const Registry> registry) {
  SessionService service(std::move(registry));
  std::string line;
  while (std::getline(std::cin, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::cout << service.handle_line(line) << std::endl;
  }
  return 0;
}

}  // namespace geoprove
