#pragma once

#include "kbviz/kb_model.hpp"

#include <algorithm>
#include <climits>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

namespace kbviz {

// ---- ground values ------------------------------------------------------------

/// Total order on ground terms: integers (numerically) before constants
/// (lexicographically) before function terms (by arity, name, then args).
inline int compare_ground(const Term& a, const Term& b) {
  auto rank = [](const Term& t) {
    switch (t.kind) {
    case Term::Kind::Integer: return 0;
    case Term::Kind::Constant: return 1;
    default: return 2;
    }
  };
  int ra = rank(a), rb = rank(b);
  if (ra != rb) return ra < rb ? -1 : 1;
  if (ra == 0) return a.value < b.value ? -1 : (a.value > b.value ? 1 : 0);
  if (ra == 1) return a.name.compare(b.name) < 0 ? -1 : (a.name == b.name ? 0 : 1);
  if (a.args.size() != b.args.size()) return a.args.size() < b.args.size() ? -1 : 1;
  if (int c = a.name.compare(b.name); c != 0) return c < 0 ? -1 : 1;
  for (std::size_t i = 0; i < a.args.size(); ++i)
    if (int c = compare_ground(a.args[i], b.args[i]); c != 0) return c;
  return 0;
}

struct GroundLess {
  bool operator()(const Term& a, const Term& b) const { return compare_ground(a, b) < 0; }
};

using Substitution = std::map<std::string, Term>;

// ---- fact sets ----------------------------------------------------------------

class FactSetError : public std::runtime_error {
public:
  FactSetError(const std::string& message, std::vector<Diagnostic> diagnostics)
      : std::runtime_error(message), diagnostics_(std::move(diagnostics)) {}
  const std::vector<Diagnostic>& diagnostics() const { return diagnostics_; }

private:
  std::vector<Diagnostic> diagnostics_;
};

/// Ground atoms describing one candidate visualization.
class FactSet {
public:
  FactSet() = default;

  /// Throws std::invalid_argument if an atom is not ground.
  FactSet(std::string name, const std::vector<Atom>& atoms) : name_(std::move(name)) {
    std::map<std::string, Atom> unique;
    for (const auto& a : atoms) {
      if (!a.is_ground()) throw std::invalid_argument("fact '" + to_string(a) + "' is not ground");
      unique.emplace(to_string(a), a);
    }
    std::set<Term, GroundLess> domain;
    auto collect = [&](auto&& self, const Term& t) -> void {
      domain.insert(t);
      for (const auto& x : t.args) self(self, x);
    };
    for (auto& [key, atom] : unique) {
      keys_.insert(key);
      index_[{atom.predicate, atom.arity()}].push_back(atoms_.size());
      for (const auto& t : atom.args) collect(collect, t);
      atoms_.push_back(atom);
    }
    domain_.assign(domain.begin(), domain.end());
  }

  const std::string& name() const { return name_; }
  const std::vector<Atom>& atoms() const { return atoms_; }
  std::size_t size() const { return atoms_.size(); }
  bool empty() const { return atoms_.empty(); }

  /// Every ground term occurring in a fact argument, subterms included.
  const std::vector<Term>& domain() const { return domain_; }

  bool contains(const Atom& ground) const { return keys_.count(to_string(ground)) > 0; }

  const std::vector<std::size_t>& candidates(const std::string& predicate, std::size_t arity) const {
    static const std::vector<std::size_t> none;
    auto it = index_.find({predicate, arity});
    return it == index_.end() ? none : it->second;
  }

private:
  std::string name_;
  std::vector<Atom> atoms_; // sorted by printed form
  std::unordered_set<std::string> keys_;
  std::map<std::pair<std::string, std::size_t>, std::vector<std::size_t>> index_;
  std::vector<Term> domain_;
};

/// Reads a fact file: ground facts and comments only. Anything else (parse
/// errors, rules, non-ground facts, unsupported constructs) is reported in a
/// FactSetError.
inline FactSet load_fact_set(std::string name, std::string_view text) {
  auto parsed = parse_program(text, name);
  std::vector<Diagnostic> problems;
  for (const auto& d : parsed.diagnostics) {
    Diagnostic e = d;
    e.severity = Severity::Error;
    problems.push_back(std::move(e));
  }
  std::vector<Atom> atoms;
  for (const auto& s : parsed.program.statements) {
    if (s.is<Comment>()) continue;
    Diagnostic d;
    d.severity = Severity::Error;
    d.code = "not-a-fact";
    d.span = s.span;
    if (const auto* f = s.as<Fact>()) {
      if (f->head.is_ground()) {
        atoms.push_back(f->head);
        continue;
      }
      d.message = "fact '" + to_string(f->head) + "' is not ground";
    } else {
      d.message = "only ground facts are allowed in a specification";
    }
    problems.push_back(std::move(d));
  }
  if (!problems.empty()) throw FactSetError("'" + name + "' is not a valid fact file", std::move(problems));
  return FactSet(std::move(name), atoms);
}

// ---- arithmetic -----------------------------------------------------------------

namespace detail {

/// Evaluates a term whose variables are all bound. Returns nullopt for
/// undefined arithmetic (non-integer operands, division by zero, overflow)
/// or unbound variables.
template <typename Lookup> std::optional<Term> eval_term(const Term& t, const Lookup& lookup) {
  switch (t.kind) {
  case Term::Kind::Integer:
  case Term::Kind::Constant: return t;
  case Term::Kind::Anonymous: return std::nullopt;
  case Term::Kind::Variable: return lookup(t.name);
  case Term::Kind::Function: {
    std::vector<Term> args;
    for (const auto& a : t.args) {
      auto v = eval_term(a, lookup);
      if (!v) return std::nullopt;
      args.push_back(std::move(*v));
    }
    return Term::function(t.name, std::move(args));
  }
  case Term::Kind::Negate: {
    auto v = eval_term(t.args[0], lookup);
    if (!v || v->kind != Term::Kind::Integer || v->value == INT64_MIN) return std::nullopt;
    return Term::integer(-v->value);
  }
  case Term::Kind::Arith: {
    auto l = eval_term(t.args[0], lookup), r = eval_term(t.args[1], lookup);
    if (!l || !r || l->kind != Term::Kind::Integer || r->kind != Term::Kind::Integer) return std::nullopt;
    std::int64_t x = l->value, y = r->value, z = 0;
    switch (t.op) {
    case ArithOp::Add:
      if (__builtin_add_overflow(x, y, &z)) return std::nullopt;
      break;
    case ArithOp::Sub:
      if (__builtin_sub_overflow(x, y, &z)) return std::nullopt;
      break;
    case ArithOp::Mul:
      if (__builtin_mul_overflow(x, y, &z)) return std::nullopt;
      break;
    case ArithOp::Div:
      if (y == 0 || (x == INT64_MIN && y == -1)) return std::nullopt;
      z = x / y;
      break;
    }
    return Term::integer(z);
  }
  }
  return std::nullopt;
}

inline bool compare_holds(CompareOp op, int c) {
  switch (op) {
  case CompareOp::Eq: return c == 0;
  case CompareOp::Ne: return c != 0;
  case CompareOp::Lt: return c < 0;
  case CompareOp::Le: return c <= 0;
  case CompareOp::Gt: return c > 0;
  case CompareOp::Ge: return c >= 0;
  }
  return false;
}

inline bool has_arith(const Term& t) {
  if (t.kind == Term::Kind::Arith || t.kind == Term::Kind::Negate) return true;
  for (const auto& a : t.args)
    if (has_arith(a)) return true;
  return false;
}

/// Backtracking join over the fact index with early pruning.
class BodyEvaluator {
public:
  BodyEvaluator(const std::vector<BodyLiteral>& body, const FactSet& facts, std::size_t witness_cap)
      : facts_(facts), witness_cap_(witness_cap) {
    auto names = body_variables(body);
    vars_.assign(names.begin(), names.end());
    for (std::size_t i = 0; i < vars_.size(); ++i) slot_[vars_[i]] = i;
    binding_.resize(vars_.size());
    domain_.assign(facts.domain().begin(), facts.domain().end());
    std::set<Term, GroundLess> dom(domain_.begin(), domain_.end());
    auto add_ints = [&](auto&& self, const Term& t) -> void {
      if (t.kind == Term::Kind::Integer) dom.insert(t);
      for (const auto& a : t.args) self(self, a);
    };
    for (const auto& lit : body)
      std::visit(
          [&](const auto& l) {
            using L = std::decay_t<decltype(l)>;
            if constexpr (std::is_same_v<L, ComparisonLiteral>) {
              add_ints(add_ints, l.left);
              add_ints(add_ints, l.right);
            } else {
              for (const auto& t : l.atom.args) add_ints(add_ints, t);
            }
          },
          lit);
    domain_.assign(dom.begin(), dom.end());

    std::vector<const PositiveLiteral*> joinable;
    for (const auto& lit : body) {
      if (const auto* p = std::get_if<PositiveLiteral>(&lit)) {
        bool plain = std::none_of(p->atom.args.begin(), p->atom.args.end(), has_arith);
        if (plain) {
          joinable.push_back(p);
          continue;
        }
      }
      checks_.push_back(Check{&lit, vars_of(lit)});
    }
    // greedy join order: most already-bound variables first
    std::vector<bool> bound(vars_.size(), false);
    while (!joinable.empty()) {
      std::size_t best = 0;
      long best_score = -1;
      for (std::size_t i = 0; i < joinable.size(); ++i) {
        long score = 0;
        for (auto v : vars_of(PositiveLiteral{joinable[i]->atom}))
          if (bound[v]) ++score;
        if (score > best_score) {
          best_score = score;
          best = i;
        }
      }
      for (auto v : vars_of(PositiveLiteral{joinable[best]->atom})) bound[v] = true;
      joins_.push_back(joinable[best]);
      joinable.erase(joinable.begin() + static_cast<std::ptrdiff_t>(best));
    }
  }

  void run() { join(0); }

  std::size_t count() const { return results_.size(); }

  std::vector<Substitution> witnesses() const {
    std::vector<Substitution> out;
    for (const auto& [key, values] : results_) {
      if (out.size() >= witness_cap_) break;
      Substitution s;
      for (std::size_t i = 0; i < vars_.size(); ++i) s.emplace(vars_[i], values[i]);
      out.push_back(std::move(s));
    }
    return out;
  }

private:
  struct Check {
    const BodyLiteral* literal;
    std::vector<std::size_t> vars;
  };

  std::vector<std::size_t> vars_of(const BodyLiteral& lit) const {
    std::vector<std::string> names;
    collect_variables(lit, names);
    std::set<std::size_t> ids;
    for (const auto& n : names) ids.insert(slot_.at(n));
    return {ids.begin(), ids.end()};
  }

  std::optional<Term> lookup(const std::string& name) const {
    auto it = slot_.find(name);
    if (it == slot_.end()) return std::nullopt;
    return binding_[it->second];
  }

  bool match(const Term& pattern, const Term& ground, std::vector<std::size_t>& trail) {
    switch (pattern.kind) {
    case Term::Kind::Anonymous: return true;
    case Term::Kind::Variable: {
      std::size_t v = slot_.at(pattern.name);
      if (binding_[v]) return *binding_[v] == ground;
      binding_[v] = ground;
      trail.push_back(v);
      return true;
    }
    case Term::Kind::Function:
      if (ground.kind != Term::Kind::Function || ground.name != pattern.name ||
          ground.args.size() != pattern.args.size())
        return false;
      for (std::size_t i = 0; i < pattern.args.size(); ++i)
        if (!match(pattern.args[i], ground.args[i], trail)) return false;
      return true;
    case Term::Kind::Arith:
    case Term::Kind::Negate: {
      auto v = eval_term(pattern, [&](const std::string& n) { return lookup(n); });
      return v && *v == ground;
    }
    default: return pattern == ground;
    }
  }

  bool atom_present(const Atom& atom) {
    for (auto idx : facts_.candidates(atom.predicate, atom.arity())) {
      const Atom& fact = facts_.atoms()[idx];
      std::vector<std::size_t> trail;
      bool ok = true;
      for (std::size_t i = 0; ok && i < atom.args.size(); ++i) ok = match(atom.args[i], fact.args[i], trail);
      for (auto v : trail) binding_[v].reset();
      if (ok) return true;
    }
    return false;
  }

  bool holds(const BodyLiteral& lit) {
    if (const auto* p = std::get_if<PositiveLiteral>(&lit)) return atom_present(p->atom);
    if (const auto* n = std::get_if<NegatedLiteral>(&lit)) return !atom_present(n->atom);
    const auto& c = std::get<ComparisonLiteral>(lit);
    auto lk = [&](const std::string& n) { return lookup(n); };
    auto l = eval_term(c.left, lk), r = eval_term(c.right, lk);
    if (!l || !r) return false;
    return compare_holds(c.op, compare_ground(*l, *r));
  }

  bool consistent() {
    for (const auto& ch : checks_) {
      bool ready = std::all_of(ch.vars.begin(), ch.vars.end(), [&](std::size_t v) { return binding_[v].has_value(); });
      if (ready && !holds(*ch.literal)) return false;
    }
    return true;
  }

  void join(std::size_t step) {
    if (step == joins_.size()) {
      enumerate();
      return;
    }
    const Atom& atom = joins_[step]->atom;
    for (auto idx : facts_.candidates(atom.predicate, atom.arity())) {
      const Atom& fact = facts_.atoms()[idx];
      std::vector<std::size_t> trail;
      bool ok = true;
      for (std::size_t i = 0; ok && i < atom.args.size(); ++i) ok = match(atom.args[i], fact.args[i], trail);
      if (ok && consistent()) join(step + 1);
      for (auto v : trail) binding_[v].reset();
    }
  }

  bool in_domain(const Term& t) const {
    return std::binary_search(domain_.begin(), domain_.end(), t, GroundLess{});
  }

  /// Binds variables not fixed by any positive literal.
  void enumerate() {
    std::size_t free = vars_.size();
    for (std::size_t v = 0; v < vars_.size(); ++v)
      if (!binding_[v]) {
        free = v;
        break;
      }
    if (free == vars_.size()) {
      for (const auto& ch : checks_)
        if (!holds(*ch.literal)) return;
      std::vector<std::string> key;
      for (const auto& b : binding_) key.push_back(to_string(*b));
      results_.try_emplace(std::move(key), bindings());
      return;
    }
    // `X = expr` with expr already evaluable fixes X directly
    auto lk = [&](const std::string& n) { return lookup(n); };
    for (const auto& ch : checks_) {
      const auto* c = std::get_if<ComparisonLiteral>(ch.literal);
      if (!c || c->op != CompareOp::Eq) continue;
      for (int side = 0; side < 2; ++side) {
        const Term& var = side == 0 ? c->left : c->right;
        const Term& other = side == 0 ? c->right : c->left;
        if (var.kind != Term::Kind::Variable || binding_[slot_.at(var.name)]) continue;
        auto value = eval_term(other, lk);
        if (!value) continue;
        if (!in_domain(*value)) return;
        std::size_t v = slot_.at(var.name);
        binding_[v] = std::move(*value);
        if (consistent()) enumerate();
        binding_[v].reset();
        return;
      }
    }
    for (const auto& d : domain_) {
      binding_[free] = d;
      if (consistent()) enumerate();
    }
    binding_[free].reset();
  }

  std::vector<Term> bindings() const {
    std::vector<Term> out;
    for (const auto& b : binding_) out.push_back(*b);
    return out;
  }

  const FactSet& facts_;
  std::size_t witness_cap_;
  std::vector<std::string> vars_;
  std::map<std::string, std::size_t> slot_;
  std::vector<std::optional<Term>> binding_;
  std::vector<Term> domain_;
  std::vector<const PositiveLiteral*> joins_;
  std::vector<Check> checks_;
  std::map<std::vector<std::string>, std::vector<Term>> results_;
};

} // namespace detail

// ---- evaluation -----------------------------------------------------------------

struct EvalOptions {
  std::size_t witness_cap = 32;
};

struct BodyEvaluation {
  std::size_t count = 0;
  std::vector<Substitution> witnesses; // at most witness_cap, ordered by printed values
};

/// Number of distinct substitutions of the body's named variables that
/// satisfy every literal. Variables range over the fact set's terms plus the
/// integers written in the body; negation is checked against the facts only.
inline BodyEvaluation evaluate_body(const std::vector<BodyLiteral>& body, const FactSet& facts,
                                    EvalOptions options = {}) {
  detail::BodyEvaluator ev(body, facts, options.witness_cap);
  ev.run();
  return BodyEvaluation{ev.count(), ev.witnesses()};
}

struct ConstraintEvaluation {
  std::size_t count = 0;
  std::vector<Substitution> witnesses;
  std::optional<Diagnostic> diagnostic; // set when the body could not be evaluated
};

inline ConstraintEvaluation evaluate_constraint(const Constraint& c, const FactSet& facts, EvalOptions options = {}) {
  if (c.unsupported) {
    Diagnostic d;
    d.severity = Severity::Warning;
    d.code = "unsupported-body";
    d.span = c.span;
    d.construct = *c.unsupported;
    d.message = c.ref().str() + " uses an unsupported construct (" + *c.unsupported + ") and was counted as 0";
    return ConstraintEvaluation{0, {}, std::move(d)};
  }
  auto r = evaluate_body(c.body, facts, options);
  return ConstraintEvaluation{r.count, std::move(r.witnesses), std::nullopt};
}

struct Violation {
  ConstraintRef ref;
  std::size_t count = 0;
  std::optional<std::int64_t> weight;
  std::vector<Substitution> witnesses;
};

struct ViolationReport {
  std::string spec_name;
  std::vector<Violation> violations;      // soft, count > 0, source order
  std::vector<Violation> hard_violations; // hard, count > 0, source order
  std::int64_t cost = 0;
  std::vector<Diagnostic> diagnostics;

  bool ill_formed() const { return !hard_violations.empty(); }

  std::size_t count_of(const ConstraintRef& ref) const {
    for (const auto* list : {&violations, &hard_violations})
      for (const auto& v : *list)
        if (v.ref == ref) return v.count;
    return 0;
  }
};

/// Evaluates every constraint. cost = Σ weight × count over soft
/// constraints; a violated soft constraint without weight adds 0 and is
/// flagged.
inline ViolationReport evaluate_spec(const ConstraintSet& set, const FactSet& facts, EvalOptions options = {}) {
  ViolationReport report;
  report.spec_name = facts.name();
  for (const auto& c : set.constraints) {
    auto e = evaluate_constraint(c, facts, options);
    if (e.diagnostic) report.diagnostics.push_back(std::move(*e.diagnostic));
    if (e.count == 0) continue;
    Violation v{c.ref(), e.count, c.weight, std::move(e.witnesses)};
    if (c.kind == ConstraintKind::Hard) {
      v.weight.reset();
      report.hard_violations.push_back(std::move(v));
      continue;
    }
    if (!c.weight) {
      Diagnostic d;
      d.severity = Severity::Warning;
      d.code = "missing-weight";
      d.span = c.span;
      d.message = c.ref().str() + " is violated but has no weight; it adds 0 to the cost";
      report.diagnostics.push_back(std::move(d));
    } else {
      std::int64_t add = 0;
      if (__builtin_mul_overflow(*c.weight, static_cast<std::int64_t>(v.count), &add) ||
          __builtin_add_overflow(report.cost, add, &report.cost))
        report.cost = INT64_MAX;
    }
    report.violations.push_back(std::move(v));
  }
  return report;
}

/// Clean specs by ascending cost, then specs with hard violations; ties by
/// name.
inline std::vector<ViolationReport> rank_specs(std::vector<ViolationReport> reports) {
  std::sort(reports.begin(), reports.end(), [](const ViolationReport& a, const ViolationReport& b) {
    return std::make_tuple(a.ill_formed(), a.cost, a.spec_name) <
           std::make_tuple(b.ill_formed(), b.cost, b.spec_name);
  });
  return reports;
}

class UnknownConstraint : public std::runtime_error {
public:
  explicit UnknownConstraint(const std::string& ref) : std::runtime_error("unknown constraint '" + ref + "'") {}
};

class UnknownSpec : public std::runtime_error {
public:
  explicit UnknownSpec(const std::string& name) : std::runtime_error("unknown spec '" + name + "'") {}
};

/// Specs violating `ref`, most violations first (ties by name).
inline std::vector<std::pair<std::string, std::size_t>>
violations_of_constraint(const std::vector<ViolationReport>& reports, const ConstraintSet& set,
                         const ConstraintRef& ref) {
  if (!set.find(ref)) throw UnknownConstraint(ref.str());
  std::vector<std::pair<std::string, std::size_t>> out;
  for (const auto& r : reports)
    if (auto n = r.count_of(ref); n > 0) out.emplace_back(r.spec_name, n);
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    return a.second != b.second ? a.second > b.second : a.first < b.first;
  });
  return out;
}

struct SharedViolations {
  std::vector<ConstraintRef> common;
  std::map<std::string, std::vector<ConstraintRef>> exclusive; // violated by that spec only, among the selection
};

inline SharedViolations shared_violations(const std::vector<ViolationReport>& reports,
                                          const std::vector<std::string>& names) {
  std::set<std::string> selected(names.begin(), names.end());
  if (selected.size() < 2) throw std::invalid_argument("shared_violations needs at least two distinct specs");
  std::map<std::string, std::set<ConstraintRef>> violated;
  for (const auto& name : selected) {
    auto it = std::find_if(reports.begin(), reports.end(), [&](const ViolationReport& r) { return r.spec_name == name; });
    if (it == reports.end()) throw UnknownSpec(name);
    auto& s = violated[name];
    for (const auto* list : {&it->violations, &it->hard_violations})
      for (const auto& v : *list) s.insert(v.ref);
  }
  SharedViolations out;
  std::set<ConstraintRef> common = violated.begin()->second;
  for (const auto& [name, s] : violated) {
    std::set<ConstraintRef> keep;
    std::set_intersection(common.begin(), common.end(), s.begin(), s.end(), std::inserter(keep, keep.end()));
    common = std::move(keep);
  }
  out.common.assign(common.begin(), common.end());
  for (const auto& [name, s] : violated) {
    std::set<ConstraintRef> others;
    for (const auto& [other, os] : violated)
      if (other != name) others.insert(os.begin(), os.end());
    auto& ex = out.exclusive[name];
    std::set_difference(s.begin(), s.end(), others.begin(), others.end(), std::back_inserter(ex));
  }
  return out;
}

// ---- JSON -----------------------------------------------------------------------

inline json substitution_to_json(const Substitution& s) {
  json j = json::object();
  for (const auto& [name, value] : s) j[name] = to_string(value);
  return j;
}

inline json violation_to_json(const Violation& v) {
  json witnesses = json::array();
  for (const auto& w : v.witnesses) witnesses.push_back(substitution_to_json(w));
  return json{{"ref", v.ref.str()},
              {"count", v.count},
              {"weight", v.weight ? json(*v.weight) : json(nullptr)},
              {"witnesses", std::move(witnesses)}};
}

inline json report_to_json(const ViolationReport& r) {
  json soft = json::array(), hard = json::array(), diags = json::array();
  for (const auto& v : r.violations) soft.push_back(violation_to_json(v));
  for (const auto& v : r.hard_violations) hard.push_back(violation_to_json(v));
  for (const auto& d : r.diagnostics) diags.push_back(diagnostic_to_json(d));
  return json{{"spec", r.spec_name},
              {"cost", r.cost},
              {"ill_formed", r.ill_formed()},
              {"violations", std::move(soft)},
              {"hard_violations", std::move(hard)},
              {"diagnostics", std::move(diags)}};
}

inline json reports_to_json(const std::vector<ViolationReport>& reports) {
  json arr = json::array();
  for (const auto& r : reports) arr.push_back(report_to_json(r));
  return json{{"schema_version", kSchemaVersion}, {"reports", std::move(arr)}};
}

} // namespace kbviz
