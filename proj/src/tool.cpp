#include "geoprove/tool.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include <Eigen/Dense>
#include <fmt/format.h>

#include "geoprove/diagnostics.hpp"

namespace geoprove {

std::string to_string(Mode m) { return m == Mode::Check ? "check" : "postulate"; }

std::string to_string(FailureReason r) {
  switch (r) {
    case FailureReason::NumericMisfit: return "NumericMisfit";
    case FailureReason::UnknownFact: return "UnknownFact";
    case FailureReason::Degenerate: return "Degenerate";
    case FailureReason::Inconsistent: return "Inconsistent";
  }
  return "?";
}

std::string to_string(CompositeKind k) {
  switch (k) {
    case CompositeKind::Macro: return "macro";
    case CompositeKind::Axiom: return "axiom";
    case CompositeKind::Lemma: return "lemma";
  }
  return "?";
}

std::string Failure::describe() const {
  std::string out = fmt::format("{} in {}: {}", to_string(reason), tool, message);
  for (const Frame& f : trace)
    out += fmt::format("\n  at {} {} step {}{}", f.tool, f.section, f.step,
                       f.line > 0 ? fmt::format(" (line {})", f.line) : std::string{});
  return out;
}

// ---------------------------------------------------------------------------
// ToolSignature

bool ToolSignature::accepts(std::span<const Kind> kinds) const {
  if (variadic)
    return !kinds.empty() &&
           std::all_of(kinds.begin(), kinds.end(), [&](Kind k) { return k == inputs.front(); });
  return std::equal(kinds.begin(), kinds.end(), inputs.begin(), inputs.end());
}

std::size_t ToolSignature::hyper_count(std::size_t n_inputs) const {
  return variadic ? 1 + n_inputs : hyper.size();
}

HyperSlot ToolSignature::hyper_slot(std::size_t i) const {
  if (variadic) return i == 0 ? hyper.at(0) : hyper.at(1);
  return hyper.at(i);
}

std::string ToolSignature::key() const {
  std::string out = name + "(";
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    if (i) out += ",";
    out += kind_letter(inputs[i]);
  }
  if (variadic) out += "*";
  return out + ")";
}

std::string ToolSignature::display() const {
  std::string out = key() + " ->";
  for (Kind k : outputs) out += fmt::format(" {}", kind_letter(k));
  return out;
}

// ---------------------------------------------------------------------------
// Registry

void Registry::add(ToolPtr tool) {
  auto& list = by_name_[tool->name()];
  for (const ToolPtr& t : list) {
    const auto& a = t->signature();
    const auto& b = tool->signature();
    if (a.inputs == b.inputs && a.variadic == b.variadic)
      throw DslError(ErrorCode::DuplicateSignature,
                     fmt::format("tool {} is already defined", b.key()), 0, 0, b.name);
  }
  list.push_back(std::move(tool));
}

ToolPtr Registry::resolve(const std::string& name, std::span<const Kind> kinds) const {
  auto it = by_name_.find(name);
  if (it != by_name_.end()) {
    ToolPtr found;
    for (const ToolPtr& t : it->second) {
      if (!t->signature().accepts(kinds)) continue;
      if (found)
        throw DslError(ErrorCode::OverloadAmbiguity,
                       fmt::format("{} and {} both accept the arguments",
                                   found->signature().key(), t->signature().key()),
                       0, 0, name);
      found = t;
    }
    if (found) return found;
  }
  return parent_ ? parent_->resolve(name, kinds) : nullptr;
}

bool Registry::has_name(const std::string& name) const {
  return by_name_.count(name) > 0 || (parent_ && parent_->has_name(name));
}

std::vector<ToolPtr> Registry::overloads(const std::string& name) const {
  std::vector<ToolPtr> out;
  for (const ToolPtr& t : visible())
    if (t->name() == name) out.push_back(t);
  return out;
}

std::vector<ToolPtr> Registry::visible() const {
  std::map<std::string, ToolPtr> by_key;
  if (parent_)
    for (ToolPtr& t : parent_->visible()) by_key[t->signature().key()] = t;
  for (const auto& [name, list] : by_name_)
    for (const ToolPtr& t : list) by_key[t->signature().key()] = t;
  std::vector<ToolPtr> out;
  for (auto& [k, t] : by_key) out.push_back(t);
  return out;
}

std::vector<ToolPtr> Registry::local() const {
  std::vector<ToolPtr> out;
  for (const auto& [name, list] : by_name_) out.insert(out.end(), list.begin(), list.end());
  return out;
}

// ---------------------------------------------------------------------------
// Executor

std::vector<Ref> Executor::run(const Tool& tool, std::span<const Ref> inputs,
                               std::span<const Hyper> hyper, Mode mode) {
  const ToolSignature& sig = tool.signature();
  std::vector<Kind> kinds;
  for (Ref r : inputs) kinds.push_back(r.kind);
  if (!sig.accepts(kinds))
    throw std::logic_error(fmt::format("{} called with wrong argument kinds", sig.key()));
  if (hyper.size() != sig.hyper_count(inputs.size()))
    throw std::logic_error(fmt::format("{} called with {} hyperparameters", sig.key(), hyper.size()));

  const bool memo = tool.memoized() && !witness_mode();
  const std::string key = sig.key();
  if (memo)
    if (auto hit = core_.lookup_get(key, inputs, hyper)) return *hit;

  try {
    std::vector<Ref> out = tool.is_builtin() ? tool.builtin()(*this, inputs, hyper, mode)
                                             : run_composite(tool, inputs, mode);
    if (memo) core_.lookup_store(key, inputs, hyper, out);
    return out;
  } catch (const ToolFailure&) {
    throw;
  } catch (const DegenerateInput& e) {
    throw ToolFailure(FailureReason::Degenerate, tool.name(), e.what());
  } catch (const NumericMismatch& e) {
    throw ToolFailure(FailureReason::NumericMisfit, tool.name(), e.what());
  } catch (const InconsistencyDetected& e) {
    throw ToolFailure(FailureReason::Inconsistent, tool.name(), e.what());
  }
}

std::vector<Ref> Executor::run_composite(const Tool& tool, std::span<const Ref> inputs,
                                         Mode mode) {
  const CompositeBody& body = tool.composite();
  std::vector<std::optional<Ref>> env(body.slot_labels.size());
  for (std::size_t i = 0; i < inputs.size(); ++i) env[i] = inputs[i];
  run_section(tool, "assumptions", body.assumptions, env, mode);
  if (body.kind != CompositeKind::Macro)
    run_section(tool, "implications", body.implications, env, Mode::Postulate);
  std::vector<Ref> out;
  for (int slot : body.output_slots) out.push_back(core_.find(*env.at(slot)));
  return out;
}

void Executor::run_section(const Tool& tool, const char* section,
                           const std::vector<ResolvedStep>& steps,
                           std::vector<std::optional<Ref>>& env, Mode mode) {
  for (std::size_t i = 0; i < steps.size(); ++i) {
    const ResolvedStep& step = steps[i];
    std::vector<Ref> in;
    for (int slot : step.inputs) in.push_back(*env.at(slot));
    try {
      std::vector<Ref> out = run(*step.tool, in, step.hyper, mode);
      for (std::size_t k = 0; k < step.outputs.size() && k < out.size(); ++k)
        if (step.outputs[k] >= 0) env[step.outputs[k]] = out[k];
    } catch (ToolFailure& f) {
      f.failure().trace.insert(f.failure().trace.begin(),
                               Frame{tool.name(), section, static_cast<int>(i), step.line});
      throw;
    }
  }
}

std::vector<Ref> run_tool(CoreState& core, const Registry& registry, const Tool& tool,
                          std::span<const Ref> inputs, std::span<const Hyper> hyper, Mode mode) {
  Executor ex(core, registry);
  return ex.run(tool, inputs, hyper, mode);
}

// ---------------------------------------------------------------------------
// Lemma proof check

Tolerances tolerances_for(std::span<const PointVal> free_points) {
  Tolerances tol;
  if (free_points.empty()) return tol;
  double lo_x = free_points[0].x, hi_x = lo_x, lo_y = free_points[0].y, hi_y = lo_y;
  for (const PointVal& p : free_points) {
    lo_x = std::min(lo_x, p.x);
    hi_x = std::max(hi_x, p.x);
    lo_y = std::min(lo_y, p.y);
    hi_y = std::max(hi_y, p.y);
  }
  tol.scale = std::max(1.0, std::hypot(hi_x - lo_x, hi_y - lo_y));
  return tol;
}

namespace {

std::vector<PointVal> witness_points(std::span<const NumValue> values) {
  std::vector<PointVal> pts;
  for (const NumValue& v : values)
    if (auto* p = std::get_if<PointVal>(&v)) pts.push_back(*p);
  return pts;
}

struct SectionRun {
  const char* name;
  const std::vector<ResolvedStep>* steps;
  Mode mode;
};

}  // namespace

std::string ProofCheckResult::describe() const {
  if (passed) return "proof check passed";
  static const char* names[] = {"", "fresh core", "witness objects", "assumptions", "proof",
                                "implications"};
  std::string out = fmt::format("proof check failed at stage {} ({})", stage,
                                stage >= 1 && stage <= 5 ? names[stage] : "?");
  if (failure) out += ": " + failure->describe();
  return out;
}

ProofCheckResult proof_check(const Registry& registry, const Tool& lemma,
                             std::span<const NumValue> witness) {
  ProofCheckResult result;
  const CompositeBody& body = lemma.composite();
  const ToolSignature& sig = lemma.signature();

  result.stage = 1;
  auto points = witness_points(witness);
  CoreState core(tolerances_for(points));
  Executor ex(core, registry);

  result.stage = 2;
  if (witness.size() != sig.inputs.size()) {
    result.failure = Failure{FailureReason::Degenerate, lemma.name(), "witness arity mismatch", {}};
    return result;
  }
  std::vector<std::optional<Ref>> env(body.slot_labels.size());
  try {
    for (std::size_t i = 0; i < witness.size(); ++i) env[i] = core.add_object(witness[i], sig.inputs[i]);
  } catch (const CoreError& e) {
    result.failure = Failure{FailureReason::Degenerate, lemma.name(), e.what(), {}};
    return result;
  }

  const SectionRun stages[] = {{"assumptions", &body.assumptions, Mode::Postulate},
                               {"proof", &body.proof, Mode::Check},
                               {"implications", &body.implications, Mode::Check}};
  for (int s = 0; s < 3; ++s) {
    result.stage = 3 + s;
    try {
      ex.run_section(lemma, stages[s].name, *stages[s].steps, env, stages[s].mode);
    } catch (const ToolFailure& f) {
      result.failure = f.failure();
      return result;
    }
  }
  result.passed = true;
  return result;
}

// ---------------------------------------------------------------------------
// Witness synthesis

namespace {

std::size_t param_width(Kind k) {
  switch (k) {
    case Kind::Point: return 2;
    case Kind::Line: return 2;
    case Kind::Circle: return 3;
    case Kind::Angle: return 1;
    case Kind::Ratio: return 1;
  }
  return 0;
}

std::vector<NumValue> decode(std::span<const Kind> kinds, const Eigen::VectorXd& x) {
  std::vector<NumValue> out;
  Eigen::Index i = 0;
  for (Kind k : kinds) {
    switch (k) {
      case Kind::Point: out.emplace_back(PointVal{x[i], x[i + 1]}); break;
      case Kind::Line:
        out.emplace_back(make_line(std::cos(x[i]), std::sin(x[i]), x[i + 1]));
        break;
      case Kind::Circle: out.emplace_back(CircleVal{x[i], x[i + 1], std::exp(x[i + 2])}); break;
      case Kind::Angle: out.emplace_back(AngleNum{reduce_angle(x[i])}); break;
      case Kind::Ratio: out.emplace_back(RatioNum{std::exp(x[i])}); break;
    }
    i += static_cast<Eigen::Index>(param_width(k));
  }
  return out;
}

std::optional<Eigen::VectorXd> assumption_residuals(const Registry& registry, const Tool& lemma,
                                                    std::span<const NumValue> values) {
  const CompositeBody& body = lemma.composite();
  auto points = witness_points(values);
  CoreState core(tolerances_for(points));
  Executor ex(core, registry);
  ResidualSink sink;
  ex.set_residual_sink(&sink);
  std::vector<std::optional<Ref>> env(body.slot_labels.size());
  try {
    for (std::size_t i = 0; i < values.size(); ++i)
      env[i] = core.add_object(values[i], lemma.signature().inputs[i]);
    ex.run_section(lemma, "assumptions", body.assumptions, env, Mode::Postulate);
  } catch (const ToolFailure&) {
    return std::nullopt;
  } catch (const CoreError&) {
    return std::nullopt;
  }
  Eigen::VectorXd r(static_cast<Eigen::Index>(sink.residuals.size()));
  for (std::size_t i = 0; i < sink.residuals.size(); ++i)
    r[static_cast<Eigen::Index>(i)] = sink.residuals[i];
  return r;
}

// Damped Gauss-Newton (Levenberg-Marquardt) with a forward-difference
// Jacobian. Returns the parameters once every residual is below `target`.
std::optional<Eigen::VectorXd> levenberg_marquardt(
    const std::function<std::optional<Eigen::VectorXd>(const Eigen::VectorXd&)>& f,
    Eigen::VectorXd x, double target) {
  auto r = f(x);
  if (!r) return std::nullopt;
  double lambda = 1e-3;
  for (int iter = 0; iter < 300; ++iter) {
    if (r->size() == 0 || r->cwiseAbs().maxCoeff() < target) return x;
    Eigen::MatrixXd jac(r->size(), x.size());
    for (Eigen::Index j = 0; j < x.size(); ++j) {
      double h = 1e-7 * std::max(1.0, std::abs(x[j]));
      Eigen::VectorXd xp = x;
      xp[j] += h;
      auto rp = f(xp);
      if (!rp || rp->size() != r->size()) {
        xp[j] = x[j] - h;
        rp = f(xp);
        if (!rp || rp->size() != r->size()) return std::nullopt;
        h = -h;
      }
      jac.col(j) = (*rp - *r) / h;
    }
    Eigen::MatrixXd normal = jac.transpose() * jac;
    Eigen::VectorXd grad = jac.transpose() * *r;
    bool improved = false;
    while (lambda < 1e12) {
      Eigen::MatrixXd damped = normal;
      damped.diagonal().array() += lambda * (1.0 + normal.diagonal().array());
      Eigen::VectorXd step = damped.ldlt().solve(-grad);
      Eigen::VectorXd xn = x + step;
      auto rn = f(xn);
      if (rn && rn->size() == r->size() && rn->squaredNorm() < r->squaredNorm()) {
        x = xn;
        r = rn;
        lambda = std::max(lambda / 3.0, 1e-12);
        improved = true;
        break;
      }
      lambda *= 4.0;
    }
    if (!improved) break;
  }
  if (r->size() == 0 || r->cwiseAbs().maxCoeff() < target) return x;
  return std::nullopt;
}

}  // namespace

std::optional<std::vector<NumValue>> synthesize_witness(const Registry& registry, const Tool& lemma,
                                                        const WitnessSearch& opts) {
  std::span<const Kind> kinds = lemma.signature().inputs;
  Eigen::Index width = 0;
  for (Kind k : kinds) width += static_cast<Eigen::Index>(param_width(k));

  auto residual = [&](const Eigen::VectorXd& x) {
    auto values = decode(kinds, x);
    return assumption_residuals(registry, lemma, values);
  };

  for (int seed = 0; seed < opts.seeds; ++seed) {
    std::mt19937_64 rng(opts.base_seed + static_cast<unsigned>(seed));
    std::uniform_real_distribution<double> coord(-5.0, 5.0);
    Eigen::VectorXd x0(width);
    for (Eigen::Index i = 0; i < width; ++i) x0[i] = coord(rng);
    auto x = levenberg_marquardt(residual, x0, 1e-12);
    if (x) return decode(kinds, *x);
  }
  return std::nullopt;
}

void register_tool(Registry& registry, ToolPtr tool, const WitnessSearch& opts) {
  if (!tool->is_builtin() && tool->composite().kind == CompositeKind::Lemma) {
    const std::string& name = tool->name();
    bool passed = false;
    std::string reason = "no numeric configuration satisfies the assumptions";
    for (int seed = 0; seed < opts.seeds && !passed; ++seed) {
      WitnessSearch one{1, opts.base_seed + static_cast<unsigned>(seed) * 7919u};
      auto witness = synthesize_witness(registry, *tool, one);
      if (!witness) continue;
      ProofCheckResult res = proof_check(registry, *tool, *witness);
      passed = res.passed;
      if (passed) break;
      reason = res.describe();
      bool retry = res.stage <= 3 ||
                   (res.failure && res.failure->reason == FailureReason::Degenerate);
      if (!retry) break;
    }
    if (!passed)
      throw DslError(ErrorCode::LemmaProofFailed, fmt::format("lemma {}: {}", name, reason), 0, 0,
                     name);
  }
  registry.add(std::move(tool));
}

}  // namespace geoprove
