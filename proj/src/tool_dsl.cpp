#include "geoprove/tool_dsl.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <set>

#include <fmt/format.h>

namespace geoprove {

namespace {

struct Token {
  std::string_view text;
  int column;  // 1-based
};

std::vector<Token> split_tokens(std::string_view s, int column_offset) {
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    if (i >= s.size()) break;
    std::size_t j = i;
    while (j < s.size() && !std::isspace(static_cast<unsigned char>(s[j]))) ++j;
    out.push_back({s.substr(i, j - i), column_offset + static_cast<int>(i) + 1});
    i = j;
  }
  return out;
}

bool is_label(std::string_view t) {
  if (t.empty() || !std::isalpha(static_cast<unsigned char>(t[0]))) return false;
  return std::all_of(t.begin(), t.end(), [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '\'';
  });
}

bool is_tool_name(std::string_view t) {
  if (t.empty() || std::isdigit(static_cast<unsigned char>(t[0]))) return false;
  return std::all_of(t.begin(), t.end(), [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
  });
}

[[noreturn]] void syntax(int line, int column, const std::string& msg) {
  throw DslError(ErrorCode::SyntaxError, msg, line, column);
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

template <class Int>
bool parse_int(std::string_view s, Int& out) {
  if (s.empty()) return false;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && p == s.data() + s.size();
}

std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view l = text.substr(start, end - start);
    if (!l.empty() && l.back() == '\r') l.remove_suffix(1);
    lines.push_back(l);
    if (end == text.size()) break;
    start = end + 1;
  }
  return lines;
}

void check_unique(std::set<std::string>& seen, const std::string& label, int line, int column) {
  if (label == "_") return;
  if (!seen.insert(label).second)
    throw DslError(ErrorCode::DuplicateLabel, fmt::format("label '{}' defined twice", label), line,
                   column, label);
}

ToolDefAst parse_header(std::string_view text, int line) {
  auto tokens = split_tokens(text, 0);
  ToolDefAst def;
  def.line = line;
  if (!is_tool_name(tokens.at(0).text)) syntax(line, 1, "expected a tool name");
  def.name = std::string(tokens[0].text);
  bool arrow = false;
  std::set<std::string> seen;
  for (std::size_t i = 1; i < tokens.size(); ++i) {
    const Token& t = tokens[i];
    if (t.text == "->") {
      if (arrow) syntax(line, t.column, "second '->' in header");
      arrow = true;
      continue;
    }
    auto colon = t.text.find(':');
    if (colon == std::string_view::npos) syntax(line, t.column, "expected 'label:Type' or '->'");
    std::string_view label = t.text.substr(0, colon), type = t.text.substr(colon + 1);
    if (!is_label(label)) syntax(line, t.column, fmt::format("bad label '{}'", label));
    auto kind = type.size() == 1 ? kind_from_letter(type[0]) : std::nullopt;
    if (!kind)
      throw DslError(ErrorCode::UnknownType, fmt::format("unknown type '{}'", type), line,
                     t.column + static_cast<int>(colon) + 1, std::string(type));
    check_unique(seen, std::string(label), line, t.column);
    (arrow ? def.outputs : def.inputs).push_back({std::string(label), *kind});
  }
  if (!arrow) syntax(line, static_cast<int>(text.size()) + 1, "expected '->' in header");
  return def;
}

void check_step_labels(const ToolDefAst& def) {
  std::set<std::string> seen;
  for (const auto& in : def.inputs) seen.insert(in.label);
  for (const auto* section : {&def.assumptions, &def.implications, &def.proof})
    for (const StepAst& s : *section)
      for (const std::string& o : s.outputs) {
        if (std::any_of(def.outputs.begin(), def.outputs.end(),
                        [&](const TypedLabel& t) { return t.label == o; }) &&
            !seen.count(o)) {
          seen.insert(o);
          continue;
        }
        check_unique(seen, o, s.line, s.column);
      }
}

std::string join_kinds(std::span<const Kind> kinds) {
  std::string out;
  for (Kind k : kinds) out += fmt::format("{}{}", out.empty() ? "" : ",", kind_letter(k));
  return "(" + out + ")";
}

}  // namespace

std::vector<std::string> StepAst::labels() const {
  std::vector<std::string> out;
  for (const ArgAst& a : args)
    if (a.is_label()) out.push_back(a.label());
  return out;
}

std::optional<Hyper> parse_hyper(std::string_view t) {
  if (t.empty()) return std::nullopt;
  std::string_view body = t.front() == '-' ? t.substr(1) : t;
  if (body.empty() || !std::isdigit(static_cast<unsigned char>(body.front()))) return std::nullopt;
  if (auto slash = t.find('/'); slash != std::string_view::npos) {
    std::int64_t n = 0, d = 0;
    if (!parse_int(t.substr(0, slash), n) || !parse_int(t.substr(slash + 1), d) || d <= 0)
      return std::nullopt;
    return Hyper::fraction(n, d);
  }
  if (t.find_first_of(".eE") != std::string_view::npos) {
    double v = 0;
    auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc() || p != t.data() + t.size()) return std::nullopt;
    return Hyper::floating(v);
  }
  std::int64_t n = 0;
  if (!parse_int(t, n)) return std::nullopt;
  return Hyper::integer(n);
}

StepAst parse_step(std::string_view text, int line, int column_offset, bool allow_goal) {
  auto tokens = split_tokens(text, column_offset);
  StepAst step;
  step.line = line;
  step.column = tokens.empty() ? column_offset + 1 : tokens.front().column;
  auto arrow = std::find_if(tokens.begin(), tokens.end(),
                            [](const Token& t) { return t.text == "<-" || t.text == "?<-"; });
  if (arrow == tokens.end()) syntax(line, step.column, "expected '<-'");
  if (arrow->text == "?<-") {
    if (!allow_goal) syntax(line, arrow->column, "goals are only allowed in scripts");
    if (arrow != tokens.begin()) syntax(line, arrow->column, "a goal has no outputs");
    step.goal = true;
  }
  for (auto it = tokens.begin(); it != arrow; ++it) {
    if (it->text != "_" && !is_label(it->text))
      syntax(line, it->column, fmt::format("bad output label '{}'", it->text));
    step.outputs.emplace_back(it->text);
  }
  auto it = std::next(arrow);
  if (it == tokens.end()) syntax(line, arrow->column + static_cast<int>(arrow->text.size()) + 1,
                                 "expected a tool name");
  if (!is_tool_name(it->text)) syntax(line, it->column, fmt::format("bad tool name '{}'", it->text));
  step.tool = std::string(it->text);
  for (++it; it != tokens.end(); ++it) {
    if (is_label(it->text)) {
      step.args.push_back({std::string(it->text), it->column});
    } else if (auto h = parse_hyper(it->text)) {
      step.args.push_back({*h, it->column});
    } else {
      syntax(line, it->column, fmt::format("expected a label or a number, got '{}'", it->text));
    }
  }
  return step;
}

ToolFileAst parse_toolfile(std::string_view text) {
  ToolFileAst ast;
  ToolDefAst* cur = nullptr;
  enum class Section { Assumptions, Implications, Proof } section = Section::Assumptions;
  auto lines = split_lines(text);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const int lineno = static_cast<int>(i) + 1;
    std::string_view raw = lines[i];
    std::string_view content = trim(raw);
    if (content.empty() || content.front() == '#') continue;
    const bool indented = std::isspace(static_cast<unsigned char>(raw.front()));
    if (!indented) {
      if (cur) check_step_labels(*cur);
      ast.tools.push_back(parse_header(raw, lineno));
      cur = &ast.tools.back();
      section = Section::Assumptions;
      continue;
    }
    const int indent = static_cast<int>(raw.find_first_not_of(" \t"));
    if (!cur) syntax(lineno, indent + 1, "step outside of a tool definition");
    if (content == "THEN") {
      if (cur->has_then) syntax(lineno, indent + 1, "second THEN");
      cur->has_then = true;
      section = Section::Implications;
      continue;
    }
    if (content == "PROOF") {
      if (!cur->has_then) syntax(lineno, indent + 1, "PROOF without THEN");
      if (cur->has_proof) syntax(lineno, indent + 1, "second PROOF");
      cur->has_proof = true;
      section = Section::Proof;
      continue;
    }
    StepAst step = parse_step(raw, lineno, 0, false);
    switch (section) {
      case Section::Assumptions: cur->assumptions.push_back(std::move(step)); break;
      case Section::Implications: cur->implications.push_back(std::move(step)); break;
      case Section::Proof: cur->proof.push_back(std::move(step)); break;
    }
  }
  if (cur) check_step_labels(*cur);
  return ast;
}

std::string serialize_step(const StepAst& step) {
  std::string out;
  for (const std::string& o : step.outputs) out += o + " ";
  out += step.goal ? "?<- " : "<- ";
  out += step.tool;
  for (const ArgAst& a : step.args) out += " " + (a.is_label() ? a.label() : to_string(a.hyper()));
  return out;
}

std::string serialize_toolfile(const ToolFileAst& ast) {
  std::string out;
  for (const ToolDefAst& def : ast.tools) {
    if (!out.empty()) out += "\n";
    out += def.name;
    for (const auto& in : def.inputs) out += fmt::format(" {}:{}", in.label, kind_letter(in.kind));
    out += " ->";
    for (const auto& o : def.outputs) out += fmt::format(" {}:{}", o.label, kind_letter(o.kind));
    out += "\n";
    for (const StepAst& s : def.assumptions) out += "  " + serialize_step(s) + "\n";
    if (def.has_then) out += "  THEN\n";
    for (const StepAst& s : def.implications) out += "  " + serialize_step(s) + "\n";
    if (def.has_proof) out += "  PROOF\n";
    for (const StepAst& s : def.proof) out += "  " + serialize_step(s) + "\n";
  }
  return out;
}

// ---------------------------------------------------------------------------
// Resolution

StepBinding bind_step(const StepAst& step, const Registry& registry,
                      const std::function<std::optional<Kind>(const std::string&)>& kind_of) {
  StepBinding b;
  std::vector<Hyper> raw;
  for (const ArgAst& a : step.args) {
    if (!a.is_label()) {
      raw.push_back(a.hyper());
      continue;
    }
    auto k = kind_of(a.label());
    if (!k)
      throw DslError(ErrorCode::UnresolvedLabel, fmt::format("unknown label '{}'", a.label()),
                     step.line, a.column, a.label());
    b.input_kinds.push_back(*k);
  }
  if (!registry.has_name(step.tool))
    throw DslError(ErrorCode::UnresolvedToolName, fmt::format("unknown tool '{}'", step.tool),
                   step.line, step.column, step.tool);
  b.tool = registry.resolve(step.tool, b.input_kinds);
  if (!b.tool) {
    std::string known;
    for (const ToolPtr& t : registry.overloads(step.tool)) known += " " + t->signature().key();
    throw DslError(ErrorCode::ArityMismatch,
                   fmt::format("no overload of '{}' accepts {}; candidates:{}", step.tool,
                               join_kinds(b.input_kinds), known),
                   step.line, step.column, step.tool);
  }
  const ToolSignature& sig = b.tool->signature();
  if (raw.size() != sig.hyper_count(b.input_kinds.size()))
    throw DslError(ErrorCode::ArityMismatch,
                   fmt::format("'{}' takes {} numeric parameters, got {}", sig.key(),
                               sig.hyper_count(b.input_kinds.size()), raw.size()),
                   step.line, step.column, step.tool);
  for (std::size_t i = 0; i < raw.size(); ++i) {
    const Hyper& h = raw[i];
    switch (sig.hyper_slot(i)) {
      case HyperSlot::Float: b.hyper.push_back(Hyper::floating(h.as_double())); break;
      case HyperSlot::Int:
        if (h.type != Hyper::Type::Int)
          throw DslError(ErrorCode::ArityMismatch,
                         fmt::format("parameter {} of '{}' must be an integer", i + 1, step.tool),
                         step.line, step.column, step.tool);
        b.hyper.push_back(h);
        break;
      case HyperSlot::Fraction:
        if (h.type == Hyper::Type::Float)
          throw DslError(ErrorCode::ArityMismatch,
                         fmt::format("parameter {} of '{}' must be a fraction", i + 1, step.tool),
                         step.line, step.column, step.tool);
        b.hyper.push_back(Hyper::fraction(h.num, h.den));
        break;
    }
  }
  if (!step.outputs.empty() && step.outputs.size() != sig.outputs.size())
    throw DslError(ErrorCode::ArityMismatch,
                   fmt::format("'{}' has {} outputs, step names {}", sig.key(), sig.outputs.size(),
                               step.outputs.size()),
                   step.line, step.column, step.tool);
  return b;
}

ToolPtr resolve_definition(const ToolDefAst& def, const Registry& registry) {
  CompositeBody body;
  body.kind = def.kind();
  using Env = std::map<std::string, int>;
  Env base;
  auto new_slot = [&](const std::string& label, Kind k) {
    body.slot_labels.push_back(label);
    body.slot_kinds.push_back(k);
    return static_cast<int>(body.slot_labels.size()) - 1;
  };
  for (const auto& in : def.inputs) base[in.label] = new_slot(in.label, in.kind);

  auto declared = [&](const std::string& label) -> const TypedLabel* {
    for (const auto& o : def.outputs)
      if (o.label == label) return &o;
    return nullptr;
  };

  auto resolve_section = [&](const std::vector<StepAst>& steps, Env env) {
    std::vector<ResolvedStep> out;
    for (const StepAst& s : steps) {
      auto kind_of = [&](const std::string& l) -> std::optional<Kind> {
        auto it = env.find(l);
        if (it == env.end()) return std::nullopt;
        return body.slot_kinds[it->second];
      };
      StepBinding b = bind_step(s, registry, kind_of);
      ResolvedStep r{b.tool, {}, b.hyper, {}, s.line};
      for (const ArgAst& a : s.args)
        if (a.is_label()) r.inputs.push_back(env.at(a.label()));
      const auto& kinds = b.tool->signature().outputs;
      for (std::size_t k = 0; k < s.outputs.size(); ++k) {
        const std::string& o = s.outputs[k];
        if (o == "_") {
          r.outputs.push_back(-1);
          continue;
        }
        if (const TypedLabel* d = declared(o); d && d->kind != kinds[k])
          throw DslError(ErrorCode::OutputKindMismatch,
                         fmt::format("'{}' is declared {} but '{}' yields {}", o,
                                     kind_letter(d->kind), s.tool, kind_letter(kinds[k])),
                         s.line, s.column, o);
        int slot = new_slot(o, kinds[k]);
        env[o] = slot;
        r.outputs.push_back(slot);
      }
      out.push_back(std::move(r));
    }
    return std::pair{std::move(out), std::move(env)};
  };

  auto [assumptions, after_assumptions] = resolve_section(def.assumptions, base);
  body.assumptions = std::move(assumptions);
  Env final_env = after_assumptions;
  if (def.has_then) {
    auto [impl, after_impl] = resolve_section(def.implications, after_assumptions);
    body.implications = std::move(impl);
    final_env = std::move(after_impl);
  }
  if (def.has_proof) body.proof = resolve_section(def.proof, after_assumptions).first;

  ToolSignature sig{def.name, {}, {}, {}, false};
  for (const auto& in : def.inputs) sig.inputs.push_back(in.kind);
  for (const auto& o : def.outputs) {
    auto it = final_env.find(o.label);
    if (it == final_env.end())
      throw DslError(ErrorCode::UnresolvedLabel,
                     fmt::format("output '{}' is never constructed", o.label), def.line, 1,
                     o.label);
    sig.outputs.push_back(o.kind);
    body.output_slots.push_back(it->second);
  }
  return std::make_shared<Tool>(std::move(sig), std::move(body));
}

namespace {

void register_definition(const ToolDefAst& def, Registry& registry, const WitnessSearch& opts) {
  try {
    register_tool(registry, resolve_definition(def, registry), opts);
  } catch (const DslError& e) {
    if (e.line() > 0) throw;
    throw DslError(e.code(), e.message(), def.line, 1, e.subject().empty() ? def.name : e.subject());
  }
}

}  // namespace

std::vector<ToolPtr> load_toolfile(const ToolFileAst& ast, Registry& registry,
                                   const WitnessSearch& opts) {
  std::vector<ToolPtr> out;
  for (const ToolDefAst& def : ast.tools) {
    register_definition(def, registry, opts);
    std::vector<Kind> kinds;
    for (const auto& in : def.inputs) kinds.push_back(in.kind);
    out.push_back(registry.resolve(def.name, kinds));
  }
  return out;
}

std::vector<DslError> lint_toolfile(const ToolFileAst& ast, Registry& registry,
                                    const WitnessSearch& opts) {
  std::vector<DslError> errors;
  for (const ToolDefAst& def : ast.tools) {
    try {
      register_definition(def, registry, opts);
    } catch (const DslError& e) {
      errors.push_back(e);
    }
  }
  return errors;
}

std::shared_ptr<Registry> load_tools(std::string_view text,
                                     std::shared_ptr<const Registry> parent) {
  auto registry = std::make_shared<Registry>(std::move(parent));
  load_toolfile(parse_toolfile(text), *registry);
  return registry;
}

// ---------------------------------------------------------------------------
// Macro inlining

std::vector<StepAst> inline_macro(const std::vector<StepAst>& steps, const ToolDefAst& macro,
                                  std::map<std::string, Kind>& kinds, const Registry& registry) {
  std::set<std::string> used;
  for (const auto& [l, k] : kinds) used.insert(l);
  for (const StepAst& s : steps) {
    for (const auto& o : s.outputs) used.insert(o);
    for (const auto& l : s.labels()) used.insert(l);
  }
  auto fresh = [&](const std::string& base) {
    for (int n = 1;; ++n) {
      std::string c = fmt::format("{}_{}", base, n);
      if (used.insert(c).second) return c;
    }
  };
  auto kind_of = [&](const std::string& l) -> std::optional<Kind> {
    auto it = kinds.find(l);
    if (it == kinds.end()) return std::nullopt;
    return it->second;
  };
  std::vector<StepAst> out;
  auto emit = [&](StepAst s) {
    StepBinding b = bind_step(s, registry, kind_of);
    for (std::size_t k = 0; k < s.outputs.size(); ++k)
      if (s.outputs[k] != "_") kinds[s.outputs[k]] = b.tool->signature().outputs[k];
    out.push_back(std::move(s));
  };

  for (const StepAst& s : steps) {
    bool call = s.tool == macro.name && s.args.size() == macro.inputs.size() && !s.goal;
    for (std::size_t i = 0; call && i < s.args.size(); ++i)
      call = s.args[i].is_label() && kind_of(s.args[i].label()) == macro.inputs[i].kind;
    if (!call) {
      emit(s);
      continue;
    }
    std::map<std::string, std::string> rename;
    for (std::size_t i = 0; i < s.args.size(); ++i) rename[macro.inputs[i].label] = s.args[i].label();
    for (std::size_t k = 0; k < macro.outputs.size(); ++k) {
      bool named = k < s.outputs.size() && s.outputs[k] != "_";
      rename[macro.outputs[k].label] = named ? s.outputs[k] : fresh(macro.outputs[k].label);
    }
    for (const StepAst& body : macro.assumptions) {
      StepAst copy = body;
      copy.line = s.line;
      copy.column = s.column;
      for (ArgAst& a : copy.args)
        if (a.is_label()) a.value = rename.at(a.label());
      for (std::string& o : copy.outputs) {
        if (o == "_") continue;
        auto it = rename.find(o);
        o = it != rename.end() ? it->second : (rename[o] = fresh(o));
      }
      emit(std::move(copy));
    }
  }
  return out;
}

ToolFileAst inline_macro(const ToolFileAst& ast, const ToolDefAst& macro, const Registry& registry) {
  ToolFileAst out = ast;
  for (ToolDefAst& def : out.tools) {
    if (def.name == macro.name && def.inputs == macro.inputs) continue;
    std::map<std::string, Kind> kinds;
    for (const auto& in : def.inputs) kinds[in.label] = in.kind;
    def.assumptions = inline_macro(def.assumptions, macro, kinds, registry);
    auto after_assumptions = kinds;
    def.implications = inline_macro(def.implications, macro, kinds, registry);
    def.proof = inline_macro(def.proof, macro, after_assumptions, registry);
  }
  return out;
}

}  // namespace geoprove
