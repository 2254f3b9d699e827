#pragma once

#include "kbviz/features.hpp"

#include <algorithm>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace kbviz {

class UnknownNode : public std::runtime_error {
public:
  explicit UnknownNode(const std::string& ref) : std::runtime_error("unknown node '" + ref + "'") {}
};

struct ConstraintNode {
  ConstraintRef ref;
  std::optional<std::int64_t> weight;
  std::vector<std::string> hierarchy_path;
};

struct FeatureNode {
  Feature feature;
  std::size_t degree = 0;
};

struct HyperEdge {
  std::size_t feature = 0;    // index into Hypergraph::features
  std::size_t constraint = 0; // index into Hypergraph::constraints
  std::size_t count = 0;      // occurrences of the feature in that body

  bool operator==(const HyperEdge&) const = default;
};

/// Bipartite expansion of the shared-feature hypergraph: one node per
/// constraint of a single kind, one node per shared feature, and one edge per
/// (feature, constraint) incidence.
struct Hypergraph {
  ConstraintKind kind = ConstraintKind::Soft;
  FeatureKinds feature_kinds;
  std::size_t min_degree = 2;
  std::vector<ConstraintNode> constraints;
  std::vector<FeatureNode> features;
  std::vector<HyperEdge> edges; // sorted by (feature, constraint)

  std::optional<std::size_t> constraint_index(const ConstraintRef& ref) const {
    for (std::size_t i = 0; i < constraints.size(); ++i)
      if (constraints[i].ref == ref) return i;
    return std::nullopt;
  }

  std::optional<std::size_t> feature_index(const Feature& f) const {
    auto it = std::lower_bound(features.begin(), features.end(), f,
                               [](const FeatureNode& n, const Feature& x) { return n.feature < x; });
    if (it == features.end() || !(it->feature == f)) return std::nullopt;
    return static_cast<std::size_t>(it - features.begin());
  }

  bool empty() const { return constraints.empty(); }
};

/// Constraint nodes are all constraints of `kind` in source order, including
/// ones with no shared feature. Feature degrees are counted within `kind`.
inline Hypergraph build_hypergraph(const ConstraintSet& set, const std::vector<FeatureIncidence>& incidences,
                                   ConstraintKind kind, FeatureKinds feature_kinds = {},
                                   std::size_t min_degree = 2) {
  Hypergraph g;
  g.kind = kind;
  g.feature_kinds = feature_kinds;
  g.min_degree = min_degree;
  std::map<ConstraintRef, std::size_t> index;
  for (const auto& c : set.constraints) {
    if (c.kind != kind) continue;
    index[c.ref()] = g.constraints.size();
    g.constraints.push_back(ConstraintNode{c.ref(), c.weight, c.hierarchy_path});
  }

  std::vector<FeatureIncidence> filtered;
  for (const auto& inc : incidences)
    if (index.count(inc.constraint) && feature_kinds.includes(inc.feature.kind)) filtered.push_back(inc);

  std::map<std::pair<Feature, ConstraintRef>, std::size_t> counts;
  for (const auto& inc : filtered) counts[{inc.feature, inc.constraint}] += inc.occurrence_count;

  for (const auto& sf : shared_features(filtered, min_degree)) {
    std::size_t fi = g.features.size();
    g.features.push_back(FeatureNode{sf.feature, sf.degree()});
    std::vector<HyperEdge> edges;
    for (const auto& ref : sf.constraints)
      edges.push_back(HyperEdge{fi, index.at(ref), counts.at({sf.feature, ref})});
    std::sort(edges.begin(), edges.end(),
              [](const HyperEdge& a, const HyperEdge& b) { return a.constraint < b.constraint; });
    g.edges.insert(g.edges.end(), edges.begin(), edges.end());
  }
  return g;
}

inline Hypergraph build_hypergraph(const ConstraintSet& set, ConstraintKind kind, FeatureKinds feature_kinds = {},
                                   std::size_t min_degree = 2) {
  return build_hypergraph(set, extract_features(set, feature_kinds), kind, feature_kinds, min_degree);
}

/// Adjacent node refs, sorted. Constraint refs look like "soft/bin_high",
/// feature refs like "variable:E".
inline std::vector<std::string> neighborhood(const Hypergraph& g, const std::string& node_ref) {
  std::vector<std::string> out;
  if (auto cref = parse_constraint_ref(node_ref)) {
    auto ci = g.constraint_index(*cref);
    if (!ci) throw UnknownNode(node_ref);
    for (const auto& e : g.edges)
      if (e.constraint == *ci) out.push_back(g.features[e.feature].feature.ref());
  } else if (auto fref = parse_feature_ref(node_ref)) {
    auto fi = g.feature_index(*fref);
    if (!fi) throw UnknownNode(node_ref);
    for (const auto& e : g.edges)
      if (e.feature == *fi) out.push_back(g.constraints[e.constraint].ref.str());
  } else {
    throw UnknownNode(node_ref);
  }
  std::sort(out.begin(), out.end());
  return out;
}

inline json feature_to_json(const Feature& f) {
  json j{{"ref", f.ref()}, {"kind", to_string(f.kind)}, {"name", f.name}};
  j["arity"] = f.arity ? json(*f.arity) : json(nullptr);
  return j;
}

inline json hypergraph_to_json(const Hypergraph& g) {
  json constraints = json::array();
  for (const auto& c : g.constraints)
    constraints.push_back(json{{"ref", c.ref.str()},
                               {"kind", to_string(c.ref.kind)},
                               {"id", c.ref.id},
                               {"weight", c.weight ? json(*c.weight) : json(nullptr)},
                               {"hierarchy_path", c.hierarchy_path}});
  json features = json::array();
  for (const auto& f : g.features) {
    json j = feature_to_json(f.feature);
    j["degree"] = f.degree;
    features.push_back(std::move(j));
  }
  json edges = json::array();
  for (const auto& e : g.edges) edges.push_back(json::array({e.feature, e.constraint, e.count}));
  return json{{"schema_version", kSchemaVersion},
              {"kind", to_string(g.kind)},
              {"feature_kinds", g.feature_kinds.str()},
              {"min_degree", g.min_degree},
              {"constraints", std::move(constraints)},
              {"features", std::move(features)},
              {"edges", std::move(edges)}};
}

} // namespace kbviz
