#pragma once

// Geometric invariants of a computed layout, shared by the unit tests and
// the acceptance binary. Each check returns the list of violations found.

#include "kbviz/layout.hpp"

#include <cmath>
#include <string>
#include <vector>

namespace checks {

using kbviz::ArcPlacement;
using kbviz::LayoutModel;

inline std::vector<std::string> containment(const LayoutModel& m) {
  std::vector<std::string> bad;
  for (const auto& f : m.features)
    if (!(std::hypot(f.position.x, f.position.y) <= m.config.R_max)) bad.push_back("feature " + f.feature.ref());
  return bad;
}

inline std::vector<std::string> uniform_angles(const LayoutModel& m, double tolerance = 1e-9) {
  std::vector<std::string> bad;
  const double n = static_cast<double>(m.constraints.size());
  for (std::size_t k = 0; k + 1 < m.constraints.size(); ++k) {
    double d = m.constraints[k + 1].angle - m.constraints[k].angle;
    if (std::abs(d - 2 * std::numbers::pi / n) > tolerance) bad.push_back("step after " + m.constraints[k].ref.str());
  }
  if (!m.constraints.empty()) {
    double wrap = m.constraints.front().angle + 2 * std::numbers::pi - m.constraints.back().angle;
    if (std::abs(wrap - 2 * std::numbers::pi / n) > tolerance) bad.push_back("wrap-around step");
  }
  return bad;
}

inline bool is_prefix(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  return a.size() < b.size() && std::equal(a.begin(), a.end(), b.begin());
}

/// Child arcs lie within their parents, same-depth arcs do not overlap, and
/// every constraint sits inside each arc on its hierarchy path.
inline std::vector<std::string> arc_nesting(const LayoutModel& m,
                                            const std::vector<std::vector<std::string>>& constraint_paths) {
  std::vector<std::string> bad;
  for (const auto& a : m.arcs) {
    if (!(a.start_angle < a.end_angle)) bad.push_back("empty arc " + a.ref());
    for (const auto& b : m.arcs) {
      if (&a == &b) continue;
      if (is_prefix(b.path, a.path) && (a.start_angle < b.start_angle || a.end_angle > b.end_angle))
        bad.push_back("arc " + a.ref() + " escapes " + b.ref());
      if (a.depth == b.depth && a.start_angle < b.start_angle && a.end_angle > b.start_angle)
        bad.push_back("arcs " + a.ref() + " and " + b.ref() + " overlap");
    }
  }
  for (std::size_t i = 0; i < m.constraints.size(); ++i) {
    const auto& c = m.constraints[i];
    const auto& path = constraint_paths.at(i);
    for (const auto& a : m.arcs) {
      if (!(a.path.size() <= path.size() && std::equal(a.path.begin(), a.path.end(), path.begin()))) continue;
      if (c.angle < a.start_angle || c.angle > a.end_angle)
        bad.push_back(c.ref.str() + " outside arc " + a.ref());
    }
  }
  return bad;
}

/// Mirroring flag agrees with the open interval (π/2, 3π/2) of the
/// normalized angle.
inline std::vector<std::string> mirroring(const LayoutModel& m) {
  std::vector<std::string> bad;
  for (const auto& c : m.constraints) {
    double t = std::fmod(c.angle, 2 * std::numbers::pi);
    if (t < 0) t += 2 * std::numbers::pi;
    bool expect = t > std::numbers::pi / 2 && t < 3 * std::numbers::pi / 2;
    if (c.label_mirrored != expect) bad.push_back("label of " + c.ref.str());
  }
  return bad;
}

} // namespace checks
