#pragma once

// Proof scripts (.gls): flat step sequences over one core, run in check
// mode, with `?<-` goal lines. Session is the incremental form used by the
// CLI tracer and the session service.

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "geoprove/tool_dsl.hpp"

namespace geoprove {

struct Script {
  std::vector<StepAst> steps;  // goals included, in file order
};

Script parse_script(std::string_view text);
std::string serialize_script(const Script& script);

/// Scale of the free points declared in `steps`.
Tolerances script_tolerances(const std::vector<StepAst>& steps);

struct StepFailure {
  int step = 0;   // 0-based among non-goal steps; for goals, the steps run before it
  int line = 0;
  bool goal = false;
  std::string tool;
  std::string reason;  // FailureReason or ErrorCode name
  std::vector<std::string> labels;
  std::string message;
  std::vector<Frame> trace;

  std::string describe() const;
};

class StepError : public std::runtime_error {
 public:
  explicit StepError(StepFailure f) : std::runtime_error(f.describe()), failure_(std::move(f)) {}
  const StepFailure& failure() const { return failure_; }

 private:
  StepFailure failure_;
};

struct GoalResult {
  StepAst goal;
  bool passed = false;
  std::optional<StepFailure> failure;
};

struct StepOutcome {
  std::vector<Ref> outputs;
  std::vector<Ref> new_objects;
  std::vector<MergeEvent> merges;
};

struct FactRecord {
  std::string kind;  // lies_on, eq_angle, eq_dist, eq_ratio, point_eq, line_eq, ...
  std::vector<Ref> refs;
  int step = -1;  // first step after which the fact was checkable

  std::string key() const;
};

struct SceneObject {
  Ref ref;
  NumValue value;
  std::vector<std::string> labels;
  bool free = false;
};

class Session {
 public:
  /// A fixed scale keeps tolerances constant; otherwise the scale follows
  /// the free points and the journal is replayed whenever it changes.
  explicit Session(std::shared_ptr<const Registry> registry,
                   std::optional<double> fixed_scale = std::nullopt, bool track_facts = false);

  /// Runs one non-goal step in check mode. Throws StepError and leaves the
  /// session unchanged on failure.
  StepOutcome apply(const StepAst& step);
  /// Evaluates a goal on a copy of the current state.
  GoalResult check_goal(const StepAst& goal) const;
  /// Drops the last k steps.
  void undo(std::size_t k);
  /// Moves a free point and replays the journal.
  void move_point(const std::string& label, double x, double y);

  const Registry& registry() const { return *registry_; }
  std::shared_ptr<const Registry> registry_ptr() const { return registry_; }
  const CoreState& core() const { return state_.core; }
  const std::vector<StepAst>& journal() const { return journal_; }
  const std::map<std::string, Ref>& bindings() const { return state_.bindings; }
  std::optional<Ref> binding(const std::string& label) const;
  /// Labels bound to the class of r, in definition order.
  std::vector<std::string> labels_of(Ref r) const;
  /// Label bound to exactly r, else one bound to its class, else "#id".
  std::string display(Ref r) const;

  std::vector<SceneObject> scene() const;
  std::vector<FactRecord> facts() const;
  std::string export_script() const;

 private:
  struct State {
    CoreState core;
    std::map<std::string, Ref> bindings;
    std::vector<std::string> binding_order;
    std::map<std::string, int> provenance;
  };

  StepOutcome apply_to(State& state, const StepAst& step, int index) const;
  State replay(const std::vector<StepAst>& journal, const Tolerances& tol) const;
  Tolerances tolerances_for_journal(const std::vector<StepAst>& journal) const;
  void record_facts(State& state, int index) const;
  std::vector<FactRecord> current_facts(const State& state) const;

  std::shared_ptr<const Registry> registry_;
  std::optional<double> fixed_scale_;
  bool track_facts_;
  State state_;
  std::vector<StepAst> journal_;
};

struct ScriptResult {
  std::optional<StepFailure> failure;
  std::vector<GoalResult> goals;
  std::size_t steps_run = 0;
  std::shared_ptr<Session> session;  // state after the last successful step

  bool ok() const;
};

struct ExecOptions {
  bool track_facts = false;
  /// Called after every successful step (trace output).
  std::function<void(const StepAst&, const StepOutcome&, const Session&)> on_step;
  std::function<void(const GoalResult&)> on_goal;
};

ScriptResult execute_script(const Script& script, std::shared_ptr<const Registry> registry,
                            const ExecOptions& opts = {});

}  // namespace geoprove
