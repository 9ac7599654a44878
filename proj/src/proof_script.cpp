#include "geoprove/proof_script.hpp"

#include <algorithm>
#include <set>

#include <fmt/format.h>

namespace geoprove {

namespace {

std::vector<std::string_view> lines_of(std::string_view text) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view l = text.substr(start, end - start);
    if (!l.empty() && l.back() == '\r') l.remove_suffix(1);
    out.push_back(l);
    if (end == text.size()) break;
    start = end + 1;
  }
  return out;
}

bool blank_or_comment(std::string_view l) {
  auto p = l.find_first_not_of(" \t");
  return p == std::string_view::npos || l[p] == '#';
}

std::optional<PointVal> free_point_of(const StepAst& s) {
  if (s.tool != "free_point" || s.args.size() != 2) return std::nullopt;
  if (s.args[0].is_label() || s.args[1].is_label()) return std::nullopt;
  return PointVal{s.args[0].hyper().as_double(), s.args[1].hyper().as_double()};
}

StepFailure failure_from(const StepAst& step, int index, const std::string& reason,
                         const std::string& message) {
  StepFailure f;
  f.step = index;
  f.line = step.line;
  f.goal = step.goal;
  f.tool = step.tool;
  f.reason = reason;
  f.labels = step.labels();
  f.message = message;
  return f;
}

StepFailure failure_from(const StepAst& step, int index, const ToolFailure& e) {
  StepFailure f = failure_from(step, index, to_string(e.failure().reason), e.failure().describe());
  f.trace = e.failure().trace;
  return f;
}

const char* class_fact(Kind k) {
  switch (k) {
    case Kind::Point: return "point_eq";
    case Kind::Line: return "line_eq";
    case Kind::Circle: return "circle_eq";
    case Kind::Angle: return "angle_eq";
    case Kind::Ratio: return "ratio_eq";
  }
  return "?";
}

}  // namespace

Script parse_script(std::string_view text) {
  Script script;
  std::set<std::string> defined;
  auto lines = lines_of(text);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (blank_or_comment(lines[i])) continue;
    const int lineno = static_cast<int>(i) + 1;
    StepAst step = parse_step(lines[i], lineno, 0, true);
    for (const ArgAst& a : step.args)
      if (a.is_label() && !defined.count(a.label()))
        throw DslError(ErrorCode::UnresolvedLabel, fmt::format("unknown label '{}'", a.label()),
                       lineno, a.column, a.label());
    for (const std::string& o : step.outputs)
      if (o != "_" && !defined.insert(o).second)
        throw DslError(ErrorCode::DuplicateLabel, fmt::format("label '{}' defined twice", o),
                       lineno, step.column, o);
    script.steps.push_back(std::move(step));
  }
  return script;
}

std::string serialize_script(const Script& script) {
  std::string out;
  for (const StepAst& s : script.steps) out += serialize_step(s) + "\n";
  return out;
}

Tolerances script_tolerances(const std::vector<StepAst>& steps) {
  std::vector<PointVal> pts;
  for (const StepAst& s : steps)
    if (auto p = free_point_of(s)) pts.push_back(*p);
  return tolerances_for(pts);
}

std::string StepFailure::describe() const {
  std::string where = goal ? fmt::format("goal after step {}", step) : fmt::format("step {}", step);
  std::string out = fmt::format("line {}: {} ({}) failed: ", line, where, tool);
  if (message.rfind(reason, 0) == 0) return out + message;
  return out + reason + (message.empty() ? "" : ": " + message);
}

std::string FactRecord::key() const {
  std::string out = kind;
  for (Ref r : refs) out += fmt::format(" {}#{}", kind_letter(r.kind), r.id);
  return out;
}

bool ScriptResult::ok() const {
  return !failure && std::all_of(goals.begin(), goals.end(),
                                 [](const GoalResult& g) { return g.passed; });
}

// ---------------------------------------------------------------------------
// Session

Session::Session(std::shared_ptr<const Registry> registry, std::optional<double> fixed_scale,
                 bool track_facts)
    : registry_(std::move(registry)), fixed_scale_(fixed_scale), track_facts_(track_facts) {
  state_.core.set_tolerances(tolerances_for_journal({}));
}

Tolerances Session::tolerances_for_journal(const std::vector<StepAst>& journal) const {
  Tolerances tol = script_tolerances(journal);
  if (fixed_scale_) tol.scale = *fixed_scale_;
  return tol;
}

StepOutcome Session::apply_to(State& state, const StepAst& step, int index) const {
  if (step.goal)
    throw StepError(failure_from(step, index, "SyntaxError", "goals cannot be applied as steps"));
  StepBinding b;
  std::vector<Ref> inputs;
  try {
    b = bind_step(step, *registry_, [&](const std::string& l) -> std::optional<Kind> {
      auto it = state.bindings.find(l);
      if (it == state.bindings.end()) return std::nullopt;
      return it->second.kind;
    });
    for (const std::string& o : step.outputs)
      if (o != "_" && state.bindings.count(o))
        throw DslError(ErrorCode::DuplicateLabel, fmt::format("label '{}' defined twice", o),
                       step.line, step.column, o);
  } catch (const DslError& e) {
    throw StepError(failure_from(step, index, to_string(e.code()), e.message()));
  }
  for (const ArgAst& a : step.args)
    if (a.is_label()) inputs.push_back(state.bindings.at(a.label()));

  CoreState& core = state.core;
  const std::size_t objects_before = core.object_count();
  const std::size_t events_before = core.events().size();
  StepOutcome outcome;
  try {
    outcome.outputs = run_tool(core, *registry_, *b.tool, inputs, b.hyper, Mode::Check);
  } catch (const ToolFailure& e) {
    throw StepError(failure_from(step, index, e));
  }
  for (std::size_t k = 0; k < step.outputs.size(); ++k) {
    if (step.outputs[k] == "_") continue;
    state.bindings[step.outputs[k]] = outcome.outputs[k];
    state.binding_order.push_back(step.outputs[k]);
  }
  for (std::size_t id = objects_before; id < core.object_count(); ++id)
    outcome.new_objects.push_back(core.ref(static_cast<std::uint32_t>(id)));
  outcome.merges.assign(core.events().begin() + static_cast<std::ptrdiff_t>(events_before),
                        core.events().end());
  if (track_facts_) record_facts(state, index);
  return outcome;
}

Session::State Session::replay(const std::vector<StepAst>& journal, const Tolerances& tol) const {
  State state;
  state.core.set_tolerances(tol);
  for (std::size_t i = 0; i < journal.size(); ++i) apply_to(state, journal[i], static_cast<int>(i));
  return state;
}

StepOutcome Session::apply(const StepAst& step) {
  const int index = static_cast<int>(journal_.size());
  std::vector<StepAst> next = journal_;
  next.push_back(step);
  Tolerances tol = tolerances_for_journal(next);
  if (tol.scale != state_.core.tolerances().scale) {
    // The scale moved: earlier margins change, so rebuild from scratch.
    State rebuilt = replay(journal_, tol);
    StepOutcome out = apply_to(rebuilt, step, index);
    state_ = std::move(rebuilt);
    journal_ = std::move(next);
    return out;
  }
  State work = state_;
  StepOutcome out = apply_to(work, step, index);
  state_ = std::move(work);
  journal_ = std::move(next);
  return out;
}

GoalResult Session::check_goal(const StepAst& goal) const {
  GoalResult result{goal, false, std::nullopt};
  const int index = static_cast<int>(journal_.size());
  State work = state_;
  StepAst step = goal;
  step.goal = false;
  try {
    apply_to(work, step, index);
    result.passed = true;
  } catch (const StepError& e) {
    StepFailure f = e.failure();
    f.goal = true;
    result.failure = std::move(f);
  }
  return result;
}

void Session::undo(std::size_t k) {
  if (k > journal_.size())
    throw std::out_of_range(fmt::format("cannot undo {} of {} steps", k, journal_.size()));
  if (k == 0) return;
  std::vector<StepAst> kept(journal_.begin(), journal_.end() - static_cast<std::ptrdiff_t>(k));
  state_ = replay(kept, tolerances_for_journal(kept));
  journal_ = std::move(kept);
}

void Session::move_point(const std::string& label, double x, double y) {
  auto it = std::find_if(journal_.begin(), journal_.end(), [&](const StepAst& s) {
    return std::find(s.outputs.begin(), s.outputs.end(), label) != s.outputs.end();
  });
  if (it == journal_.end())
    throw StepError(StepFailure{0, 0, false, "", "UnresolvedLabel", {label},
                                fmt::format("unknown label '{}'", label), {}});
  if (!free_point_of(*it))
    throw StepError(StepFailure{static_cast<int>(it - journal_.begin()), it->line, false, it->tool,
                                "UnknownLabelKind", {label},
                                fmt::format("'{}' is not a free point", label), {}});
  std::vector<StepAst> moved = journal_;
  StepAst& s = moved[static_cast<std::size_t>(it - journal_.begin())];
  s.args[0].value = Hyper::floating(x);
  s.args[1].value = Hyper::floating(y);
  state_ = replay(moved, tolerances_for_journal(moved));
  journal_ = std::move(moved);
}

std::optional<Ref> Session::binding(const std::string& label) const {
  auto it = state_.bindings.find(label);
  if (it == state_.bindings.end()) return std::nullopt;
  return state_.core.find(it->second);
}

std::vector<std::string> Session::labels_of(Ref r) const {
  std::vector<std::string> out;
  for (const std::string& l : state_.binding_order)
    if (state_.core.same(state_.bindings.at(l), r)) out.push_back(l);
  return out;
}

std::string Session::display(Ref r) const {
  for (const std::string& l : state_.binding_order)
    if (state_.bindings.at(l).id == r.id) return l;
  auto labels = labels_of(r);
  return labels.empty() ? fmt::format("#{}", r.id) : labels.front();
}

std::vector<SceneObject> Session::scene() const {
  std::set<std::uint32_t> free;
  for (const StepAst& s : journal_)
    if (free_point_of(s) && !s.outputs.empty() && s.outputs[0] != "_")
      free.insert(state_.core.find(state_.bindings.at(s.outputs[0])).id);
  std::vector<SceneObject> out;
  for (Ref r : state_.core.canonical_objects())
    out.push_back({r, state_.core.value(r), labels_of(r), free.count(r.id) > 0});
  return out;
}

std::vector<FactRecord> Session::current_facts(const State& state) const {
  const CoreState& core = state.core;
  std::vector<FactRecord> out;
  std::set<std::string> seen;
  auto add = [&](FactRecord f) {
    if (seen.insert(f.key()).second) out.push_back(std::move(f));
  };
  for (const auto& [key, outs] : core.table()) {
    std::string kind;
    if (key.tool == kLiesOnLineKey || key.tool == kLiesOnCircleKey) kind = "lies_on";
    for (const char* p : {"eq_angle(", "eq_dist(", "eq_ratio("})
      if (key.tool.rfind(p, 0) == 0) kind = std::string(p, std::string_view(p).size() - 1);
    if (kind.empty()) continue;
    FactRecord f{kind, {}, -1};
    for (std::uint32_t id : key.inputs) f.refs.push_back(core.ref(id));
    add(std::move(f));
  }
  for (Ref r : core.canonical_objects()) {
    auto members = core.class_members(r);
    if (members.size() > 1) add({class_fact(r.kind), members, -1});
  }
  // Equalities the equation systems prove between distinct quantities.
  std::vector<Ref> angles, ratios;
  for (Ref r : core.canonical_objects()) {
    if (r.kind == Kind::Angle && core.angles().contains_var(r.id)) angles.push_back(r);
    if (r.kind == Kind::Ratio && core.ratios().contains_var(r.id)) ratios.push_back(r);
  }
  for (std::size_t i = 0; i < angles.size(); ++i)
    for (std::size_t j = i + 1; j < angles.size(); ++j) {
      std::vector<Term> t{{Rational(1), angles[i]}, {Rational(-1), angles[j]}};
      if (core.angle_query(t, 0)) add({"eq_angle", {angles[i], angles[j]}, -1});
    }
  for (std::size_t i = 0; i < ratios.size(); ++i)
    for (std::size_t j = i + 1; j < ratios.size(); ++j) {
      std::vector<Term> t{{Rational(1), ratios[i]}, {Rational(-1), ratios[j]}};
      if (core.ratio_query(t, 1)) add({"eq_dist", {ratios[i], ratios[j]}, -1});
    }
  for (FactRecord& f : out) {
    auto it = state.provenance.find(f.key());
    if (it != state.provenance.end()) f.step = it->second;
  }
  return out;
}

void Session::record_facts(State& state, int index) const {
  for (const FactRecord& f : current_facts(state)) state.provenance.emplace(f.key(), index);
}

std::vector<FactRecord> Session::facts() const { return current_facts(state_); }

std::string Session::export_script() const { return serialize_script(Script{journal_}); }

// ---------------------------------------------------------------------------

ScriptResult execute_script(const Script& script, std::shared_ptr<const Registry> registry,
                            const ExecOptions& opts) {
  ScriptResult result;
  const double scale = script_tolerances(script.steps).scale;
  result.session = std::make_shared<Session>(std::move(registry), scale, opts.track_facts);
  Session& session = *result.session;
  for (const StepAst& step : script.steps) {
    if (step.goal) {
      result.goals.push_back(session.check_goal(step));
      if (opts.on_goal) opts.on_goal(result.goals.back());
      continue;
    }
    try {
      StepOutcome out = session.apply(step);
      ++result.steps_run;
      if (opts.on_step) opts.on_step(step, out, session);
    } catch (const StepError& e) {
      result.failure = e.failure();
      break;
    }
  }
  return result;
}

}  // namespace geoprove
