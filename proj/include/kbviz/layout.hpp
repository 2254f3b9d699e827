#pragma once

#include "kbviz/color.hpp"
#include "kbviz/hypergraph.hpp"

#include <cmath>
#include <map>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace kbviz {

class EmptyGraph : public std::runtime_error {
public:
  EmptyGraph() : std::runtime_error("cannot lay out a hypergraph without constraint nodes") {}
};

class InvalidLayoutConfig : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTau = 2 * std::numbers::pi;

struct LayoutConfig {
  double R = 500;                       // constraint ring radius
  double R_max = 0.72 * 500;            // feature nodes stay within this radius
  double arc_inner = 0.78 * 500;        // hierarchy annulus
  double arc_outer = 0.97 * 500;
  double arc_gap = 0.01;                // radians between sibling arcs
  double weight_min = 0, weight_max = 50;
  Rgb low_color{0x21, 0x66, 0xac};      // weight_min
  Rgb mid_color{0xff, 0xff, 0xff};      // midpoint of the weight domain
  Rgb high_color{0xb2, 0x18, 0x2b};     // weight_max
  Rgb hard_color{0x9e, 0x9e, 0x9e};
  double start_angle = -kPi / 2;        // first constraint at the top
  bool weighted_centroid = false;       // weight feature centroids by occurrence count
  std::size_t label_min_degree = 0;     // hide feature labels below this degree
  double node_radius = 9;
  double label_offset = 6;
  double font_size = 11;
  double char_width = 6.6;              // estimated advance per character

  /// Defaults scaled to ring radius `r`.
  static LayoutConfig for_radius(double r) {
    LayoutConfig c;
    c.R = r;
    c.R_max = 0.72 * r;
    c.arc_inner = 0.78 * r;
    c.arc_outer = 0.97 * r;
    return c;
  }

  void validate() const {
    if (!(0 < R_max && R_max < arc_inner && arc_inner < arc_outer && arc_outer <= R))
      throw InvalidLayoutConfig("layout radii must satisfy 0 < R_max < arc_inner < arc_outer <= R");
    if (!(weight_min < weight_max)) throw InvalidLayoutConfig("weight domain is empty");
    if (!(arc_gap >= 0)) throw InvalidLayoutConfig("arc_gap must be non-negative");
  }
};

struct Point {
  double x = 0, y = 0;
  double norm() const { return std::hypot(x, y); }
  bool operator==(const Point&) const = default;
};

inline Point polar(double radius, double theta) { return Point{radius * std::cos(theta), radius * std::sin(theta)}; }

/// Angle in [0, 2π).
inline double normalize_angle(double theta) {
  double t = std::fmod(theta, kTau);
  if (t < 0) t += kTau;
  if (t >= kTau) t = 0;
  return t;
}

// ---- colour -------------------------------------------------------------------

/// Diverging blue-white-red map over the weight domain, interpolated in Lab on
/// each half. Out-of-domain weights are clamped; `clamped` reports it.
inline Rgb weight_color(double weight, const LayoutConfig& config, bool* clamped = nullptr) {
  double w = weight;
  bool out = !(w >= config.weight_min && w <= config.weight_max);
  if (out) w = std::isnan(w) ? config.weight_min : std::clamp(w, config.weight_min, config.weight_max);
  if (clamped) *clamped = out;
  double mid = (config.weight_min + config.weight_max) / 2;
  if (w <= mid) return lerp_lab(config.low_color, config.mid_color, (w - config.weight_min) / (mid - config.weight_min));
  return lerp_lab(config.mid_color, config.high_color, (w - mid) / (config.weight_max - mid));
}

/// Absent weight means a hard constraint.
inline Rgb weight_color(std::optional<std::int64_t> weight, const LayoutConfig& config, bool* clamped = nullptr) {
  if (clamped) *clamped = false;
  if (!weight) return config.hard_color;
  return weight_color(static_cast<double>(*weight), config, clamped);
}

// ---- labels -------------------------------------------------------------------

struct LabelTransform {
  double rotation = 0; // radians, in [0, 2π)
  bool mirrored = false;
};

/// Radial label orientation. Labels on the left half of the ring, the open
/// interval (π/2, 3π/2), are turned by π so they read left to right.
inline LabelTransform label_transform(double theta) {
  double t = normalize_angle(theta);
  bool mirrored = t > kPi / 2 && t < 3 * kPi / 2;
  return LabelTransform{mirrored ? normalize_angle(t + kPi) : t, mirrored};
}

// ---- model --------------------------------------------------------------------

struct ConstraintPlacement {
  ConstraintRef ref;
  std::size_t node = 0; // index into Hypergraph::constraints
  std::optional<std::int64_t> weight;
  double angle = 0;     // start_angle + 2πi/N, not normalized
  Point position;
  Rgb color;
  double label_angle = 0;
  bool label_mirrored = false;
  Point label_anchor;
};

struct ArcPlacement {
  std::vector<std::string> path; // hierarchy segments from the root
  int depth = 0;
  double start_angle = 0, end_angle = 0;
  double inner_radius = 0, outer_radius = 0;
  std::optional<double> average_weight;
  Rgb color;
  std::string label;
  double label_rotation = 0;
  Point label_position;
  std::size_t constraint_count = 0;

  std::string ref() const {
    std::string s;
    for (const auto& p : path) {
      if (!s.empty()) s += '/';
      s += p;
    }
    return s;
  }
};

struct FeaturePlacement {
  Feature feature;
  std::size_t node = 0; // index into Hypergraph::features
  std::size_t degree = 0;
  Point position;
  bool clamped = false;
  bool show_label = true;
};

struct EdgePath {
  std::size_t feature = 0;    // index into LayoutModel::features
  std::size_t constraint = 0; // index into LayoutModel::constraints
  std::size_t count = 0;
  Point from, to;
};

struct LayoutModel {
  ConstraintKind kind = ConstraintKind::Soft;
  LayoutConfig config;
  std::vector<ConstraintPlacement> constraints; // ring order
  std::vector<ArcPlacement> arcs;               // depth-first, parents first
  std::vector<FeaturePlacement> features;
  std::vector<EdgePath> edges;
  std::vector<std::string> warnings;

  double step() const { return constraints.empty() ? 0 : kTau / static_cast<double>(constraints.size()); }
};

namespace detail {

inline void dfs_order(const HierarchyNode& n, std::vector<ConstraintRef>& out) {
  for (const auto& r : n.constraint_ids) out.push_back(r);
  for (const auto& c : n.children) dfs_order(c, out);
}

/// Largest prefix of `text` (plus an ellipsis when cut) that fits `width`.
inline std::string fit_label(const std::string& text, double width, double char_width) {
  if (static_cast<double>(text.size()) * char_width <= width) return text;
  double room = width / char_width - 1;
  if (room < 1) return "";
  return text.substr(0, static_cast<std::size_t>(room)) + "…";
}

} // namespace detail

/// Ring placement in depth-first hierarchy order, so each subtree occupies a
/// contiguous run of angles. Graph nodes missing from the hierarchy follow in
/// graph order.
inline std::vector<ConstraintPlacement> place_constraints(const Hypergraph& graph, const HierarchyNode& hierarchy,
                                                          const LayoutConfig& config,
                                                          std::vector<std::string>* warnings = nullptr) {
  if (graph.empty()) throw EmptyGraph();
  std::vector<ConstraintRef> order;
  detail::dfs_order(hierarchy, order);
  std::vector<std::size_t> nodes;
  std::vector<bool> used(graph.constraints.size(), false);
  for (const auto& r : order)
    if (auto i = graph.constraint_index(r); i && !used[*i]) {
      used[*i] = true;
      nodes.push_back(*i);
    }
  for (std::size_t i = 0; i < used.size(); ++i)
    if (!used[i]) nodes.push_back(i);

  const double n = static_cast<double>(nodes.size());
  std::vector<ConstraintPlacement> out;
  out.reserve(nodes.size());
  for (std::size_t k = 0; k < nodes.size(); ++k) {
    const auto& node = graph.constraints[nodes[k]];
    ConstraintPlacement p;
    p.ref = node.ref;
    p.node = nodes[k];
    p.weight = node.weight;
    p.angle = config.start_angle + kTau * static_cast<double>(k) / n;
    p.position = polar(config.R, p.angle);
    bool clamped = false;
    p.color = weight_color(node.weight, config, &clamped);
    if (clamped && warnings)
      warnings->push_back("weight of " + node.ref.str() + " lies outside the colour domain and was clamped");
    auto lt = label_transform(p.angle);
    p.label_angle = lt.rotation;
    p.label_mirrored = lt.mirrored;
    p.label_anchor = polar(config.R + config.node_radius + config.label_offset, p.angle);
    out.push_back(std::move(p));
  }
  return out;
}

/// Inside-out hierarchy arcs: depth 0 on the innermost ring of the annulus.
/// Each arc covers its descendants' angles widened by half a step on each
/// side, then shrunk by half the gap on each side.
inline std::vector<ArcPlacement> place_arcs(const HierarchyNode& hierarchy,
                                            const std::vector<ConstraintPlacement>& placements,
                                            const LayoutConfig& config, ConstraintKind kind) {
  std::vector<ArcPlacement> arcs;
  if (placements.empty()) return arcs;
  std::map<ConstraintRef, std::size_t> slot;
  for (std::size_t i = 0; i < placements.size(); ++i) slot[placements[i].ref] = i;
  const double step = kTau / static_cast<double>(placements.size());
  const double gap = std::min(config.arc_gap, step / 2);

  struct Extent {
    std::size_t lo = SIZE_MAX, hi = 0, count = 0;
    double weight_sum = 0;
    std::size_t weighted = 0;
  };
  std::vector<std::string> path;
  int max_depth = -1;

  auto visit = [&](auto&& self, const HierarchyNode& n) -> Extent {
    Extent s;
    auto absorb = [&](const Extent& o) {
      s.lo = std::min(s.lo, o.lo);
      s.hi = std::max(s.hi, o.hi);
      s.count += o.count;
      s.weight_sum += o.weight_sum;
      s.weighted += o.weighted;
    };
    std::size_t index = arcs.size();
    if (n.depth >= 0) arcs.emplace_back();
    for (const auto& r : n.constraint_ids) {
      auto it = slot.find(r);
      if (it == slot.end()) continue;
      Extent one{it->second, it->second, 1, 0, 0};
      if (const auto& w = placements[it->second].weight) {
        one.weight_sum = static_cast<double>(*w);
        one.weighted = 1;
      }
      absorb(one);
    }
    for (const auto& c : n.children) {
      path.push_back(c.segment);
      absorb(self(self, c));
      path.pop_back();
    }
    if (n.depth < 0) return s;
    if (s.count == 0) {
      arcs.erase(arcs.begin() + static_cast<std::ptrdiff_t>(index));
      return s;
    }
    ArcPlacement& a = arcs[index];
    a.path = path;
    a.depth = n.depth;
    a.constraint_count = s.count;
    a.start_angle = placements[s.lo].angle - step / 2 + gap / 2;
    a.end_angle = placements[s.hi].angle + step / 2 - gap / 2;
    if (kind == ConstraintKind::Soft && s.weighted > 0) {
      a.average_weight = s.weight_sum / static_cast<double>(s.weighted);
      a.color = weight_color(*a.average_weight, config);
    } else {
      a.color = config.hard_color;
    }
    a.label = n.segment;
    max_depth = std::max(max_depth, n.depth);
    return s;
  };
  visit(visit, hierarchy);

  const double levels = static_cast<double>(max_depth + 1);
  const double thickness = (config.arc_outer - config.arc_inner) / levels;
  for (auto& a : arcs) {
    a.inner_radius = config.arc_inner + thickness * a.depth;
    a.outer_radius = a.inner_radius + thickness;
    double mid_radius = (a.inner_radius + a.outer_radius) / 2;
    a.label = detail::fit_label(a.label, (a.end_angle - a.start_angle) * mid_radius, config.char_width);
    double mid = normalize_angle((a.start_angle + a.end_angle) / 2);
    a.label_position = polar(mid_radius, mid);
    // tangent text, flipped on the lower half so it is never upside down
    a.label_rotation = normalize_angle(mid > 0 && mid < kPi ? mid - kPi / 2 : mid + kPi / 2);
  }
  return arcs;
}

/// Moves `p` onto the disc of radius `limit` along its ray. Guarantees
/// `p.norm() <= limit` exactly.
inline Point clamp_to_radius(Point p, double limit, bool* clamped = nullptr) {
  double norm = p.norm();
  bool over = norm > limit;
  if (over) {
    double scale = limit / norm;
    p.x *= scale;
    p.y *= scale;
    while (p.norm() > limit) {
      p.x = std::nextafter(p.x, 0.0);
      p.y = std::nextafter(p.y, 0.0);
    }
  }
  if (clamped) *clamped = over;
  return p;
}

/// Feature nodes at the centroid of their adjacent constraint nodes,
/// pulled in to R_max when the centroid lies further out.
inline std::vector<FeaturePlacement> place_features(const Hypergraph& graph,
                                                    const std::vector<ConstraintPlacement>& placements,
                                                    const LayoutConfig& config) {
  std::vector<std::size_t> slot_of_node(graph.constraints.size(), SIZE_MAX);
  for (std::size_t i = 0; i < placements.size(); ++i) slot_of_node.at(placements[i].node) = i;
  std::vector<Point> sum(graph.features.size());
  std::vector<double> mass(graph.features.size(), 0);
  for (const auto& e : graph.edges) {
    std::size_t slot = slot_of_node.at(e.constraint);
    if (slot == SIZE_MAX) continue;
    double w = config.weighted_centroid ? static_cast<double>(e.count) : 1.0;
    sum[e.feature].x += w * placements[slot].position.x;
    sum[e.feature].y += w * placements[slot].position.y;
    mass[e.feature] += w;
  }
  std::vector<FeaturePlacement> out;
  for (std::size_t f = 0; f < graph.features.size(); ++f) {
    FeaturePlacement p;
    p.feature = graph.features[f].feature;
    p.node = f;
    p.degree = graph.features[f].degree;
    Point centroid = mass[f] > 0 ? Point{sum[f].x / mass[f], sum[f].y / mass[f]} : Point{};
    p.position = clamp_to_radius(centroid, config.R_max, &p.clamped);
    p.show_label = p.degree >= config.label_min_degree;
    out.push_back(std::move(p));
  }
  return out;
}

/// Full radial layout of one hypergraph.
inline LayoutModel compute_layout(const Hypergraph& graph, const HierarchyNode& hierarchy,
                                  const LayoutConfig& config = {}) {
  config.validate();
  LayoutModel m;
  m.kind = graph.kind;
  m.config = config;
  m.constraints = place_constraints(graph, hierarchy, config, &m.warnings);
  m.arcs = place_arcs(hierarchy, m.constraints, config, graph.kind);
  m.features = place_features(graph, m.constraints, config);
  std::vector<std::size_t> slot_of_node(graph.constraints.size());
  for (std::size_t i = 0; i < m.constraints.size(); ++i) slot_of_node[m.constraints[i].node] = i;
  for (const auto& e : graph.edges) {
    std::size_t slot = slot_of_node[e.constraint];
    m.edges.push_back(EdgePath{e.feature, slot, e.count, m.features[e.feature].position,
                               m.constraints[slot].position});
  }
  return m;
}

// ---- JSON ---------------------------------------------------------------------

namespace detail {
/// Fixed precision keeps the export stable across platforms' last-bit noise.
inline json num(double v) {
  double r = std::round(v * 1e6) / 1e6;
  return json(r == 0 ? 0.0 : r);
}
inline json point_json(const Point& p) { return json::array({num(p.x), num(p.y)}); }
} // namespace detail

inline json layout_config_to_json(const LayoutConfig& c) {
  return json{{"R", c.R},
              {"R_max", c.R_max},
              {"arc_band", json::array({c.arc_inner, c.arc_outer})},
              {"arc_gap", c.arc_gap},
              {"weight_domain", json::array({c.weight_min, c.weight_max})},
              {"colors", json{{"low", c.low_color.hex()},
                              {"mid", c.mid_color.hex()},
                              {"high", c.high_color.hex()},
                              {"hard", c.hard_color.hex()}}},
              {"start_angle", detail::num(c.start_angle)},
              {"weighted_centroid", c.weighted_centroid},
              {"label_min_degree", c.label_min_degree}};
}

inline json layout_to_json(const LayoutModel& m) {
  using detail::num;
  using detail::point_json;
  json constraints = json::array();
  for (const auto& p : m.constraints)
    constraints.push_back(json{{"ref", p.ref.str()},
                               {"weight", p.weight ? json(*p.weight) : json(nullptr)},
                               {"angle", num(p.angle)},
                               {"position", point_json(p.position)},
                               {"color", p.color.hex()},
                               {"label_angle", num(p.label_angle)},
                               {"label_mirrored", p.label_mirrored},
                               {"label_anchor", point_json(p.label_anchor)}});
  json arcs = json::array();
  for (const auto& a : m.arcs)
    arcs.push_back(json{{"ref", a.ref()},
                        {"depth", a.depth},
                        {"start_angle", num(a.start_angle)},
                        {"end_angle", num(a.end_angle)},
                        {"radii", json::array({num(a.inner_radius), num(a.outer_radius)})},
                        {"average_weight", a.average_weight ? num(*a.average_weight) : json(nullptr)},
                        {"color", a.color.hex()},
                        {"label", a.label},
                        {"label_rotation", num(a.label_rotation)},
                        {"label_position", point_json(a.label_position)},
                        {"constraint_count", a.constraint_count}});
  json features = json::array();
  for (const auto& f : m.features)
    features.push_back(json{{"ref", f.feature.ref()},
                            {"degree", f.degree},
                            {"position", point_json(f.position)},
                            {"clamped", f.clamped},
                            {"show_label", f.show_label}});
  json edges = json::array();
  for (const auto& e : m.edges)
    edges.push_back(json{{"feature", e.feature},
                         {"constraint", e.constraint},
                         {"count", e.count},
                         {"from", point_json(e.from)},
                         {"to", point_json(e.to)}});
  return json{{"schema_version", kSchemaVersion},
              {"kind", to_string(m.kind)},
              {"config", layout_config_to_json(m.config)},
              {"constraints", std::move(constraints)},
              {"arcs", std::move(arcs)},
              {"features", std::move(features)},
              {"edges", std::move(edges)},
              {"warnings", m.warnings}};
}

} // namespace kbviz
