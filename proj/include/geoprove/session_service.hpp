#pragma once

// NDJSON session protocol. One request object per line, one response per
// request:
//
//   {"id": 1, "op": "apply_step", "step": "d <- line Fc Fa"}
//   {"id": 1, "ok": true, "type": "ok", "outputs": [...], ...}
//
// ops: load_tools, load_script, apply_step, undo, move_point, query_goal,
// get_scene, get_facts, export.

#include <memory>
#include <string>

#include <json.hpp>

#include "geoprove/proof_script.hpp"

namespace geoprove {

using json = nlohmann::json;

json to_json(const NumValue& v);
json to_json(const StepFailure& f);
json to_json(const FactRecord& f, const Session& session);
json to_json(const SceneObject& o);

/// Default tool file: --tools, then $GEOPROVE_TOOLS, then ./tools/base.glt,
/// then the copy in the source tree.
std::string default_tools_path(const std::string& explicit_path = {});

/// Builtins plus the tool file at `path`.
std::shared_ptr<const Registry> load_registry(const std::string& path);

class SessionService {
 public:
  explicit SessionService(std::shared_ptr<const Registry> registry);

  json handle(const json& request);
  /// Parses one NDJSON line; malformed input yields a failure response.
  std::string handle_line(const std::string& line);

  const Session& session() const { return *session_; }

 private:
  json dispatch(const std::string& op, const json& request);

  std::shared_ptr<const Registry> registry_;
  std::unique_ptr<Session> session_;
};

/// Serves the protocol on 127.0.0.1:port, one session per connection.
/// Blocks; returns nonzero if the socket cannot be opened.
int serve_tcp(std::shared_ptr<const Registry> registry, int port);

/// Serves a single session over stdin/stdout.
int serve_stdio(std::shared_ptr<const Registry> registry);

}  // namespace geoprove
