#pragma once

#include "kbviz/kb_model.hpp"

#include <compare>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace kbviz {

enum class FeatureKind { Predicate, Variable };

inline const char* to_string(FeatureKind k) { return k == FeatureKind::Predicate ? "predicate" : "variable"; }

/// A syntax element shared between constraint bodies. Identity is the
/// (kind, name, arity) triple; variables carry no arity.
struct Feature {
  FeatureKind kind = FeatureKind::Variable;
  std::string name;
  std::optional<std::size_t> arity;

  auto operator<=>(const Feature&) const = default;
  bool operator==(const Feature&) const = default;

  /// "predicate:bin/2" or "variable:E".
  std::string ref() const {
    std::string s = std::string(to_string(kind)) + ":" + name;
    if (arity) s += "/" + std::to_string(*arity);
    return s;
  }
};

inline std::optional<Feature> parse_feature_ref(std::string_view text) {
  auto colon = text.find(':');
  if (colon == std::string_view::npos) return std::nullopt;
  std::string_view kind = text.substr(0, colon), rest = text.substr(colon + 1);
  if (kind == "variable") {
    if (rest.empty()) return std::nullopt;
    return Feature{FeatureKind::Variable, std::string(rest), std::nullopt};
  }
  if (kind != "predicate") return std::nullopt;
  auto slash = rest.rfind('/');
  if (slash == std::string_view::npos || slash == 0 || slash + 1 == rest.size()) return std::nullopt;
  std::string_view num = rest.substr(slash + 1);
  if (num.size() > 6) return std::nullopt;
  for (char c : num)
    if (c < '0' || c > '9') return std::nullopt;
  return Feature{FeatureKind::Predicate, std::string(rest.substr(0, slash)), std::stoul(std::string(num))};
}

/// Which feature classes to extract.
struct FeatureKinds {
  bool predicates = true;
  bool variables = true;

  bool empty() const { return !predicates && !variables; }
  bool includes(FeatureKind k) const { return k == FeatureKind::Predicate ? predicates : variables; }
  bool operator==(const FeatureKinds&) const = default;

  /// Comma-separated list, e.g. "predicates,variables". Singular spellings
  /// are accepted. Throws std::invalid_argument on unknown names.
  static FeatureKinds parse(std::string_view text) {
    FeatureKinds k{false, false};
    std::size_t start = 0;
    while (start <= text.size()) {
      auto comma = text.find(',', start);
      std::string_view item = text.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start);
      if (item == "predicates" || item == "predicate") k.predicates = true;
      else if (item == "variables" || item == "variable") k.variables = true;
      else throw std::invalid_argument("unknown feature kind '" + std::string(item) + "'");
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    return k;
  }

  std::string str() const {
    if (predicates && variables) return "predicates,variables";
    if (predicates) return "predicates";
    if (variables) return "variables";
    return "";
  }
};

struct FeatureIncidence {
  Feature feature;
  ConstraintRef constraint;
  std::size_t occurrence_count = 0;

  bool operator==(const FeatureIncidence&) const = default;
};

struct SharedFeature {
  Feature feature;
  std::vector<ConstraintRef> constraints;

  std::size_t degree() const { return constraints.size(); }
};

namespace detail {

inline void count_variables(const Term& t, std::map<Feature, std::size_t>& counts) {
  if (t.kind == Term::Kind::Variable) ++counts[Feature{FeatureKind::Variable, t.name, std::nullopt}];
  for (const auto& a : t.args) count_variables(a, counts);
}

} // namespace detail

/// Body-only incidences, one per (feature, constraint), in constraint order
/// and then feature order. Heads are not inspected.
inline std::vector<FeatureIncidence> extract_features(const ConstraintSet& set, FeatureKinds kinds = {}) {
  if (kinds.empty()) throw std::invalid_argument("extract_features needs at least one feature kind");
  std::vector<FeatureIncidence> out;
  for (const auto& c : set.constraints) {
    std::map<Feature, std::size_t> counts;
    for (const auto& lit : c.body) {
      std::visit(
          [&](const auto& l) {
            using L = std::decay_t<decltype(l)>;
            if constexpr (std::is_same_v<L, ComparisonLiteral>) {
              if (kinds.variables) {
                detail::count_variables(l.left, counts);
                detail::count_variables(l.right, counts);
              }
            } else {
              if (kinds.predicates)
                ++counts[Feature{FeatureKind::Predicate, l.atom.predicate, l.atom.arity()}];
              if (kinds.variables)
                for (const auto& t : l.atom.args) detail::count_variables(t, counts);
            }
          },
          lit);
    }
    for (const auto& [f, n] : counts) out.push_back(FeatureIncidence{f, c.ref(), n});
  }
  return out;
}

/// Groups incidences by feature and keeps those present in at least
/// `min_degree` distinct constraints. Sorted by feature, then constraint.
inline std::vector<SharedFeature> shared_features(const std::vector<FeatureIncidence>& incidences,
                                                  std::size_t min_degree = 2) {
  if (min_degree < 1) throw std::invalid_argument("min_degree must be at least 1");
  std::map<Feature, std::set<ConstraintRef>> groups;
  for (const auto& inc : incidences) groups[inc.feature].insert(inc.constraint);
  std::vector<SharedFeature> out;
  for (auto& [f, refs] : groups)
    if (refs.size() >= min_degree) out.push_back(SharedFeature{f, {refs.begin(), refs.end()}});
  return out;
}

} // namespace kbviz
