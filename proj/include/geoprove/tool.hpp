#pragma once

// Tools: primitive constructions, predicates and inference rules, plus
// composite tools (macro, axiom, lemma) built from steps. Tools run against
// a CoreState in check or postulate mode.

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "geoprove/core.hpp"

namespace geoprove {

enum class Mode { Check, Postulate };
std::string to_string(Mode m);

enum class FailureReason { NumericMisfit, UnknownFact, Degenerate, Inconsistent };
std::string to_string(FailureReason r);

/// Location of a failing step inside a composite tool.
struct Frame {
  std::string tool;
  std::string section;  // "assumptions", "implications" or "proof"
  int step = 0;         // 0-based within the section
  int line = 0;         // source line of the step, 0 if unknown
};

struct Failure {
  FailureReason reason = FailureReason::NumericMisfit;
  std::string tool;     // innermost tool that failed
  std::string message;
  std::vector<Frame> trace;  // outermost first

  std::string describe() const;
};

class ToolFailure : public std::exception {
 public:
  explicit ToolFailure(Failure f) : failure_(std::move(f)) {}
  ToolFailure(FailureReason r, std::string tool, std::string message)
      : failure_{r, std::move(tool), std::move(message), {}} {}
  const char* what() const noexcept override { return failure_.message.c_str(); }
  Failure& failure() { return failure_; }
  const Failure& failure() const { return failure_; }

 private:
  Failure failure_;
};

enum class HyperSlot { Int, Float, Fraction };

struct ToolSignature {
  std::string name;
  std::vector<Kind> inputs;
  std::vector<Kind> outputs;
  std::vector<HyperSlot> hyper;
  /// Variadic tools accept one or more inputs of kind inputs[0]; their
  /// hyperparameters are hyper[0] followed by one hyper[1] per input.
  bool variadic = false;

  bool accepts(std::span<const Kind> kinds) const;
  std::size_t hyper_count(std::size_t n_inputs) const;
  HyperSlot hyper_slot(std::size_t i) const;
  /// Lookup-table id: name plus input kinds, e.g. "line(P,P)".
  std::string key() const;
  std::string display() const;
};

class Tool;
using ToolPtr = std::shared_ptr<const Tool>;

enum class CompositeKind { Macro, Axiom, Lemma };
std::string to_string(CompositeKind k);

struct ResolvedStep {
  ToolPtr tool;
  std::vector<int> inputs;    // environment slots
  std::vector<Hyper> hyper;
  std::vector<int> outputs;   // environment slots, -1 for anonymous outputs
  int line = 0;
};

struct CompositeBody {
  CompositeKind kind = CompositeKind::Macro;
  std::vector<ResolvedStep> assumptions;
  std::vector<ResolvedStep> implications;
  std::vector<ResolvedStep> proof;
  std::vector<std::string> slot_labels;  // inputs occupy the first slots
  std::vector<Kind> slot_kinds;
  std::vector<int> output_slots;
};

class Executor;
using BuiltinFn = std::function<std::vector<Ref>(Executor&, std::span<const Ref>,
                                                 std::span<const Hyper>, Mode)>;

class Tool {
 public:
  Tool(ToolSignature sig, bool memoized, BuiltinFn fn)
      : sig_(std::move(sig)), memoized_(memoized), body_(std::move(fn)) {}
  Tool(ToolSignature sig, CompositeBody body)
      : sig_(std::move(sig)), memoized_(true), body_(std::move(body)) {}

  const ToolSignature& signature() const { return sig_; }
  const std::string& name() const { return sig_.name; }
  bool memoized() const { return memoized_; }
  bool is_builtin() const { return std::holds_alternative<BuiltinFn>(body_); }
  const BuiltinFn& builtin() const { return std::get<BuiltinFn>(body_); }
  const CompositeBody& composite() const { return std::get<CompositeBody>(body_); }

 private:
  ToolSignature sig_;
  bool memoized_;
  std::variant<BuiltinFn, CompositeBody> body_;
};

/// Tool registry. Registries are layered: a child layer sees its parent's
/// tools, and a definition in the child shadows a parent tool with the same
/// signature. Two definitions with the same signature in one layer are a
/// DuplicateSignature error.
class Registry {
 public:
  Registry() = default;
  explicit Registry(std::shared_ptr<const Registry> parent) : parent_(std::move(parent)) {}

  void add(ToolPtr tool);
  /// Overload resolution by input kinds; nullptr when nothing matches.
  /// Throws DslError(OverloadAmbiguity) when several overloads of one layer
  /// match.
  ToolPtr resolve(const std::string& name, std::span<const Kind> kinds) const;
  bool has_name(const std::string& name) const;
  std::vector<ToolPtr> overloads(const std::string& name) const;
  /// Every visible tool (shadowed parents omitted), sorted by key.
  std::vector<ToolPtr> visible() const;
  std::vector<ToolPtr> local() const;
  const std::shared_ptr<const Registry>& parent() const { return parent_; }

 private:
  std::shared_ptr<const Registry> parent_;
  std::map<std::string, std::vector<ToolPtr>> by_name_;
};

/// Collects signed deviations of exact predicates while a witness
/// configuration is being searched for.
struct ResidualSink {
  std::vector<double> residuals;
};

class Executor {
 public:
  Executor(CoreState& core, const Registry& registry) : core_(core), registry_(registry) {}

  std::vector<Ref> run(const Tool& tool, std::span<const Ref> inputs, std::span<const Hyper> hyper,
                       Mode mode);

  CoreState& core() { return core_; }
  const Registry& registry() const { return registry_; }

  void set_residual_sink(ResidualSink* sink) { sink_ = sink; }
  ResidualSink* residual_sink() const { return sink_; }
  bool witness_mode() const { return sink_ != nullptr; }

  /// Runs one section of a composite tool over a slot environment.
  void run_section(const Tool& tool, const char* section, const std::vector<ResolvedStep>& steps,
                   std::vector<std::optional<Ref>>& env, Mode mode);

 private:
  std::vector<Ref> run_composite(const Tool& tool, std::span<const Ref> inputs, Mode mode);

  CoreState& core_;
  const Registry& registry_;
  ResidualSink* sink_ = nullptr;
};

/// Executes a step with all its arguments already bound.
std::vector<Ref> run_tool(CoreState& core, const Registry& registry, const Tool& tool,
                          std::span<const Ref> inputs, std::span<const Hyper> hyper, Mode mode);

struct ProofCheckResult {
  bool passed = false;
  /// 1..5 for the five stages; the stage that failed when !passed.
  int stage = 0;
  std::optional<Failure> failure;
  std::string describe() const;
};

/// Five-stage lemma proof check: a fresh core, the witness values as its
/// initial objects, assumptions in postulate mode, the proof in check mode,
/// and the implications in check mode.
ProofCheckResult proof_check(const Registry& registry, const Tool& lemma,
                             std::span<const NumValue> witness);

struct WitnessSearch {
  int seeds = 20;
  unsigned base_seed = 0x9e0;
};

/// Searches for numeric input values satisfying the lemma's assumptions.
std::optional<std::vector<NumValue>> synthesize_witness(const Registry& registry,
                                                        const Tool& lemma,
                                                        const WitnessSearch& opts = {});

/// Registers a composite or builtin tool. Lemmas are proof-checked on a
/// synthesized witness; a failing proof raises DslError(LemmaProofFailed).
void register_tool(Registry& registry, ToolPtr tool, const WitnessSearch& opts = {});

/// Tolerances with the session scale derived from the given points.
Tolerances tolerances_for(std::span<const PointVal> free_points);

}  // namespace geoprove
