#pragma once

// Reference implementations used only by tests. None of them call into the
// library's evaluator, feature extractor or model code; they work from raw
// text or from the AST types alone.

#include "kbviz/ast.hpp"

#include <algorithm>
#include <climits>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace oracle {

using kbviz::Atom;
using kbviz::BodyLiteral;
using kbviz::Term;

// ---- grep oracle --------------------------------------------------------------

/// Counts lines whose first non-blank characters are `<head>(`, i.e. rule
/// heads at statement starts. Comment lines are skipped naturally.
inline std::size_t grep_heads(const std::string& text, const std::string& head) {
  std::size_t count = 0, pos = 0;
  const std::string needle = head + "(";
  while (pos <= text.size()) {
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string::npos) eol = text.size();
    std::size_t first = text.find_first_not_of(" \t\r", pos);
    if (first != std::string::npos && first < eol && text.compare(first, needle.size(), needle) == 0) ++count;
    pos = eol + 1;
  }
  return count;
}

// ---- token-scan oracle ----------------------------------------------------------

/// Named-variable occurrences after `:-` in a rule's source text. A variable
/// token is a maximal word starting with an uppercase letter, possibly after
/// leading underscores.
inline std::size_t scan_body_variables(const std::string& rule_text) {
  auto neck = rule_text.find(":-");
  if (neck == std::string::npos) return 0;
  std::size_t n = 0;
  auto word = [](char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '\''; };
  for (std::size_t i = neck + 2; i < rule_text.size();) {
    char c = rule_text[i];
    if (c == '%') {
      while (i < rule_text.size() && rule_text[i] != '\n') ++i;
      continue;
    }
    if (!word(c)) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < rule_text.size() && rule_text[j] == '_') ++j;
    if (j < rule_text.size() && std::isupper(static_cast<unsigned char>(rule_text[j]))) ++n;
    while (i < rule_text.size() && word(rule_text[i])) ++i;
  }
  return n;
}

// ---- pairwise oracle ------------------------------------------------------------

/// Feature keys of a body, collected directly from the AST: "p:name/arity" and
/// "v:Name".
inline std::set<std::string> feature_keys(const std::vector<BodyLiteral>& body, bool predicates, bool variables) {
  std::set<std::string> keys;
  auto vars = [&](auto&& self, const Term& t) -> void {
    if (t.kind == Term::Kind::Variable) keys.insert("v:" + t.name);
    for (const auto& a : t.args) self(self, a);
  };
  for (const auto& lit : body) {
    if (const auto* c = std::get_if<kbviz::ComparisonLiteral>(&lit)) {
      if (variables) {
        vars(vars, c->left);
        vars(vars, c->right);
      }
      continue;
    }
    const Atom& a = std::holds_alternative<kbviz::PositiveLiteral>(lit) ? std::get<kbviz::PositiveLiteral>(lit).atom
                                                                       : std::get<kbviz::NegatedLiteral>(lit).atom;
    if (predicates) keys.insert("p:" + a.predicate + "/" + std::to_string(a.args.size()));
    if (variables)
      for (const auto& t : a.args) vars(vars, t);
  }
  return keys;
}

/// Index pairs (i<j) of bodies sharing at least one feature key.
inline std::set<std::pair<std::size_t, std::size_t>>
pairs_sharing_feature(const std::vector<std::vector<BodyLiteral>>& bodies, bool predicates, bool variables) {
  std::vector<std::set<std::string>> keys;
  for (const auto& b : bodies) keys.push_back(feature_keys(b, predicates, variables));
  std::set<std::pair<std::size_t, std::size_t>> out;
  for (std::size_t i = 0; i < keys.size(); ++i)
    for (std::size_t j = i + 1; j < keys.size(); ++j)
      for (const auto& k : keys[i])
        if (keys[j].count(k)) {
          out.insert({i, j});
          break;
        }
  return out;
}

// ---- brute-force evaluator ------------------------------------------------------

/// Ground values ordered integers < constants < functions.
struct Value {
  int tag = 0; // 0 integer, 1 constant, 2 function
  long long i = 0;
  std::string s;
  std::vector<Value> args;
};

inline int cmp(const Value& a, const Value& b) {
  if (a.tag != b.tag) return a.tag < b.tag ? -1 : 1;
  if (a.tag == 0) return (a.i > b.i) - (a.i < b.i);
  if (a.tag == 1) return a.s < b.s ? -1 : (a.s > b.s ? 1 : 0);
  if (a.args.size() != b.args.size()) return a.args.size() < b.args.size() ? -1 : 1;
  if (a.s != b.s) return a.s < b.s ? -1 : 1;
  for (std::size_t k = 0; k < a.args.size(); ++k)
    if (int c = cmp(a.args[k], b.args[k])) return c;
  return 0;
}

inline bool operator<(const Value& a, const Value& b) { return cmp(a, b) < 0; }
inline bool operator==(const Value& a, const Value& b) { return cmp(a, b) == 0; }

inline Value from_ground(const Term& t) {
  Value v;
  if (t.kind == Term::Kind::Integer) {
    v.tag = 0;
    v.i = t.value;
  } else if (t.kind == Term::Kind::Constant) {
    v.tag = 1;
    v.s = t.name;
  } else {
    v.tag = 2;
    v.s = t.name;
    for (const auto& a : t.args) v.args.push_back(from_ground(a));
  }
  return v;
}

using Env = std::map<std::string, Value>;

/// Arithmetic with 128-bit intermediates; results outside 64 bits are
/// undefined.
inline std::optional<Value> eval(const Term& t, const Env& env) {
  auto fits = [](__int128 x) { return x >= LLONG_MIN && x <= LLONG_MAX; };
  switch (t.kind) {
  case Term::Kind::Variable: {
    auto it = env.find(t.name);
    if (it == env.end()) return std::nullopt;
    return it->second;
  }
  case Term::Kind::Anonymous: return std::nullopt;
  case Term::Kind::Integer:
  case Term::Kind::Constant: return from_ground(t);
  case Term::Kind::Function: {
    Value v;
    v.tag = 2;
    v.s = t.name;
    for (const auto& a : t.args) {
      auto x = eval(a, env);
      if (!x) return std::nullopt;
      v.args.push_back(*x);
    }
    return v;
  }
  case Term::Kind::Negate: {
    auto x = eval(t.args[0], env);
    if (!x || x->tag != 0 || !fits(-static_cast<__int128>(x->i))) return std::nullopt;
    Value v;
    v.i = -x->i;
    return v;
  }
  case Term::Kind::Arith: {
    auto l = eval(t.args[0], env), r = eval(t.args[1], env);
    if (!l || !r || l->tag != 0 || r->tag != 0) return std::nullopt;
    __int128 a = l->i, b = r->i, z = 0;
    switch (t.op) {
    case kbviz::ArithOp::Add: z = a + b; break;
    case kbviz::ArithOp::Sub: z = a - b; break;
    case kbviz::ArithOp::Mul: z = a * b; break;
    case kbviz::ArithOp::Div:
      if (b == 0) return std::nullopt;
      z = a / b;
      break;
    }
    if (!fits(z)) return std::nullopt;
    Value v;
    v.i = static_cast<long long>(z);
    return v;
  }
  }
  return std::nullopt;
}

/// Does `pattern` (bound variables substituted, `_` matching anything)
/// describe the ground value `v`?
inline bool matches(const Term& pattern, const Value& v, const Env& env) {
  if (pattern.kind == Term::Kind::Anonymous) return true;
  if (pattern.kind == Term::Kind::Function) {
    if (v.tag != 2 || v.s != pattern.name || v.args.size() != pattern.args.size()) return false;
    for (std::size_t k = 0; k < pattern.args.size(); ++k)
      if (!matches(pattern.args[k], v.args[k], env)) return false;
    return true;
  }
  auto x = eval(pattern, env);
  return x && *x == v;
}

struct Fact {
  std::string predicate;
  std::vector<Value> args;
};

inline bool exists(const Atom& a, const std::vector<Fact>& facts, const Env& env) {
  for (const auto& f : facts) {
    if (f.predicate != a.predicate || f.args.size() != a.args.size()) continue;
    bool ok = true;
    for (std::size_t k = 0; ok && k < a.args.size(); ++k) ok = matches(a.args[k], f.args[k], env);
    if (ok) return true;
  }
  return false;
}

/// Counts satisfying substitutions by trying every assignment of the body's
/// variables over facts' terms (and subterms) plus the body's integers.
inline std::size_t brute_force_count(const std::vector<BodyLiteral>& body, const std::vector<Atom>& fact_atoms) {
  std::vector<Fact> facts;
  std::set<Value> domain;
  auto add_subterms = [&](auto&& self, const Value& v) -> void {
    domain.insert(v);
    for (const auto& a : v.args) self(self, a);
  };
  for (const auto& a : fact_atoms) {
    Fact f{a.predicate, {}};
    for (const auto& t : a.args) {
      f.args.push_back(from_ground(t));
      add_subterms(add_subterms, f.args.back());
    }
    facts.push_back(std::move(f));
  }
  std::set<std::string> names;
  auto scan = [&](auto&& self, const Term& t) -> void {
    if (t.kind == Term::Kind::Variable) names.insert(t.name);
    if (t.kind == Term::Kind::Integer) {
      Value v;
      v.i = t.value;
      domain.insert(v);
    }
    for (const auto& a : t.args) self(self, a);
  };
  for (const auto& lit : body) {
    if (const auto* c = std::get_if<kbviz::ComparisonLiteral>(&lit)) {
      scan(scan, c->left);
      scan(scan, c->right);
    } else {
      const Atom& a = std::holds_alternative<kbviz::PositiveLiteral>(lit)
                          ? std::get<kbviz::PositiveLiteral>(lit).atom
                          : std::get<kbviz::NegatedLiteral>(lit).atom;
      for (const auto& t : a.args) scan(scan, t);
    }
  }
  std::vector<std::string> vars(names.begin(), names.end());
  std::vector<Value> dom(domain.begin(), domain.end());

  auto satisfied = [&](const Env& env) {
    for (const auto& lit : body) {
      if (const auto* p = std::get_if<kbviz::PositiveLiteral>(&lit)) {
        if (!exists(p->atom, facts, env)) return false;
      } else if (const auto* n = std::get_if<kbviz::NegatedLiteral>(&lit)) {
        if (exists(n->atom, facts, env)) return false;
      } else {
        const auto& c = std::get<kbviz::ComparisonLiteral>(lit);
        auto l = eval(c.left, env), r = eval(c.right, env);
        if (!l || !r) return false;
        int k = cmp(*l, *r);
        bool ok = false;
        switch (c.op) {
        case kbviz::CompareOp::Eq: ok = k == 0; break;
        case kbviz::CompareOp::Ne: ok = k != 0; break;
        case kbviz::CompareOp::Lt: ok = k < 0; break;
        case kbviz::CompareOp::Le: ok = k <= 0; break;
        case kbviz::CompareOp::Gt: ok = k > 0; break;
        case kbviz::CompareOp::Ge: ok = k >= 0; break;
        }
        if (!ok) return false;
      }
    }
    return true;
  };

  if (vars.empty()) return satisfied(Env{}) ? 1 : 0;
  if (dom.empty()) return 0;
  std::size_t count = 0;
  std::vector<std::size_t> odometer(vars.size(), 0);
  for (;;) {
    Env env;
    for (std::size_t k = 0; k < vars.size(); ++k) env[vars[k]] = dom[odometer[k]];
    if (satisfied(env)) ++count;
    std::size_t k = 0;
    while (k < vars.size() && ++odometer[k] == dom.size()) odometer[k++] = 0;
    if (k == vars.size()) break;
  }
  return count;
}

} // namespace oracle
