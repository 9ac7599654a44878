#pragma once

// Reader, writer and resolver for composite tool files (.glt).
//
//   line A:P B:P -> p:L
//     <- not_eq A B
//     THEN
//     p <- prim__line A B
//     <- lies_on A p
//     <- lies_on B p

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "geoprove/diagnostics.hpp"
#include "geoprove/tool.hpp"

namespace geoprove {

struct ArgAst {
  std::variant<std::string, Hyper> value;
  int column = 0;

  bool is_label() const { return std::holds_alternative<std::string>(value); }
  const std::string& label() const { return std::get<std::string>(value); }
  const Hyper& hyper() const { return std::get<Hyper>(value); }

  bool operator==(const ArgAst& o) const { return value == o.value; }
};

struct StepAst {
  std::vector<std::string> outputs;  // "_" for anonymous; may be empty
  std::string tool;
  std::vector<ArgAst> args;
  bool goal = false;  // `?<-` lines (scripts only)
  int line = 0;
  int column = 0;

  std::vector<std::string> labels() const;
  bool operator==(const StepAst& o) const {
    return outputs == o.outputs && tool == o.tool && args == o.args && goal == o.goal;
  }
};

struct TypedLabel {
  std::string label;
  Kind kind;
  bool operator==(const TypedLabel&) const = default;
};

struct ToolDefAst {
  std::string name;
  std::vector<TypedLabel> inputs;
  std::vector<TypedLabel> outputs;
  std::vector<StepAst> assumptions;  // all steps of a macro
  std::vector<StepAst> implications;
  std::vector<StepAst> proof;
  bool has_then = false;
  bool has_proof = false;
  int line = 0;

  CompositeKind kind() const {
    return has_proof ? CompositeKind::Lemma : has_then ? CompositeKind::Axiom : CompositeKind::Macro;
  }
  bool operator==(const ToolDefAst& o) const {
    return name == o.name && inputs == o.inputs && outputs == o.outputs &&
           assumptions == o.assumptions && implications == o.implications && proof == o.proof &&
           has_then == o.has_then && has_proof == o.has_proof;
  }
};

struct ToolFileAst {
  std::vector<ToolDefAst> tools;
  bool operator==(const ToolFileAst&) const = default;
};

/// Parses one step line (`outs <- tool args`, or `?<- tool args` when
/// goals are allowed). `column_offset` is the 0-based column of `text`.
StepAst parse_step(std::string_view text, int line, int column_offset, bool allow_goal);

/// Parses a hyperparameter literal: `-3`, `2.5`, `1/2`.
std::optional<Hyper> parse_hyper(std::string_view token);

ToolFileAst parse_toolfile(std::string_view text);
std::string serialize_step(const StepAst& step);
std::string serialize_toolfile(const ToolFileAst& ast);

/// Resolves one definition against `registry` (which must already contain
/// any earlier definitions it uses).
ToolPtr resolve_definition(const ToolDefAst& def, const Registry& registry);

/// Resolves and registers every definition in file order. Lemmas are
/// proof-checked on registration.
std::vector<ToolPtr> load_toolfile(const ToolFileAst& ast, Registry& registry,
                                   const WitnessSearch& opts = {});

/// Parses and loads `text` as a layer on top of `parent`.
std::shared_ptr<Registry> load_tools(std::string_view text, std::shared_ptr<const Registry> parent);

/// Binding of a call site to an overload for step resolution.
struct StepBinding {
  ToolPtr tool;
  std::vector<Kind> input_kinds;
  std::vector<Hyper> hyper;  // promoted to the slot types
};

/// Shared overload resolution for tool files and scripts.
/// `kind_of` yields the kind of a label, or nullopt if unbound.
StepBinding bind_step(const StepAst& step, const Registry& registry,
                      const std::function<std::optional<Kind>(const std::string&)>& kind_of);

/// Resolves and registers definitions one by one, collecting a diagnostic
/// for each one that fails instead of stopping at the first.
std::vector<DslError> lint_toolfile(const ToolFileAst& ast, Registry& registry,
                                    const WitnessSearch& opts = {});

/// Replaces every call of `macro` (matched by name and input kinds) in
/// `steps` by the macro's body, renaming its local labels apart. `kinds`
/// holds the labels bound before `steps` and receives every label they bind.
std::vector<StepAst> inline_macro(const std::vector<StepAst>& steps, const ToolDefAst& macro,
                                  std::map<std::string, Kind>& kinds, const Registry& registry);

/// Inlines `macro` into every other definition of `ast`.
ToolFileAst inline_macro(const ToolFileAst& ast, const ToolDefAst& macro, const Registry& registry);

}  // namespace geoprove
