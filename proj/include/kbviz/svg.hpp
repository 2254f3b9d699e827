#pragma once

#include "kbviz/layout.hpp"

#include <cstdio>
#include <string>
#include <string_view>

namespace kbviz {

struct SvgOptions {
  double margin = 170; // room for constraint labels outside the ring
  bool draw_edges = true;
  bool draw_feature_labels = true;
  std::string font_family = "sans-serif";
};

namespace detail {

inline std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  std::string s = buf;
  if (s == "-0.000") s = "0.000";
  return s;
}

inline std::string deg(double radians) { return fmt(radians * 180.0 / kPi); }

inline std::string xml_escape(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  for (char c : text) {
    switch (c) {
    case '&': out += "&amp;"; break;
    case '<': out += "&lt;"; break;
    case '>': out += "&gt;"; break;
    case '"': out += "&quot;"; break;
    case '\'': out += "&apos;"; break;
    default:
      // control bytes are not allowed in XML 1.0 text
      if (static_cast<unsigned char>(c) < 0x20 && c != '\t' && c != '\n' && c != '\r') out += "?";
      else out += c;
    }
  }
  return out;
}

/// Annular sector drawn as two half arcs per side, which also renders a
/// full ring correctly.
inline std::string sector_path(double r0, double r1, double a0, double a1) {
  double mid = (a0 + a1) / 2;
  auto pt = [](double r, double a) {
    Point p = polar(r, a);
    return fmt(p.x) + "," + fmt(p.y);
  };
  auto large = [](double span) { return span > kPi ? "1" : "0"; };
  std::string half0 = large(mid - a0), half1 = large(a1 - mid);
  std::string d = "M" + pt(r1, a0);
  d += " A" + fmt(r1) + "," + fmt(r1) + " 0 " + half0 + " 1 " + pt(r1, mid);
  d += " A" + fmt(r1) + "," + fmt(r1) + " 0 " + half1 + " 1 " + pt(r1, a1);
  d += " L" + pt(r0, a1);
  d += " A" + fmt(r0) + "," + fmt(r0) + " 0 " + half1 + " 0 " + pt(r0, mid);
  d += " A" + fmt(r0) + "," + fmt(r0) + " 0 " + half0 + " 0 " + pt(r0, a0);
  d += " Z";
  return d;
}

} // namespace detail

/// Static vector export of a layout. Output depends only on the arguments.
inline std::string render_svg(const LayoutModel& m, const SvgOptions& options = {}) {
  using detail::fmt;
  using detail::xml_escape;
  const LayoutConfig& c = m.config;
  const double half = c.R + options.margin;
  std::string out;
  out += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  out += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + fmt(2 * half) + "\" height=\"" + fmt(2 * half) +
         "\" viewBox=\"" + fmt(-half) + " " + fmt(-half) + " " + fmt(2 * half) + " " + fmt(2 * half) + "\">\n";
  out += "<g id=\"root\" font-family=\"" + xml_escape(options.font_family) + "\" font-size=\"" + fmt(c.font_size) +
         "\">\n";
  if (!m.constraints.empty()) {
    if (options.draw_edges) {
      out += "<g class=\"edges\" stroke=\"#999999\" stroke-opacity=\"0.5\" fill=\"none\">\n";
      for (const auto& e : m.edges)
        out += "<line x1=\"" + fmt(e.from.x) + "\" y1=\"" + fmt(e.from.y) + "\" x2=\"" + fmt(e.to.x) + "\" y2=\"" +
               fmt(e.to.y) + "\"/>\n";
      out += "</g>\n";
    }

    out += "<g class=\"arcs\" stroke=\"#ffffff\" stroke-width=\"1\">\n";
    for (const auto& a : m.arcs) {
      out += "<path data-ref=\"" + xml_escape(a.ref()) + "\" fill=\"" + a.color.hex() + "\" d=\"" +
             detail::sector_path(a.inner_radius, a.outer_radius, a.start_angle, a.end_angle) + "\"/>\n";
      if (!a.label.empty())
        out += "<text text-anchor=\"middle\" dominant-baseline=\"central\" transform=\"translate(" +
               fmt(a.label_position.x) + "," + fmt(a.label_position.y) + ") rotate(" +
               detail::deg(a.label_rotation) + ")\">" + xml_escape(a.label) + "</text>\n";
    }
    out += "</g>\n";

    out += "<g class=\"features\">\n";
    for (const auto& f : m.features) {
      out += "<circle data-ref=\"" + xml_escape(f.feature.ref()) + "\" cx=\"" + fmt(f.position.x) + "\" cy=\"" +
             fmt(f.position.y) + "\" r=\"" + fmt(c.node_radius * 0.6) + "\" fill=\"#444444\"/>\n";
      if (options.draw_feature_labels && f.show_label)
        out += "<text x=\"" + fmt(f.position.x + c.node_radius * 0.6 + 2) + "\" y=\"" + fmt(f.position.y) +
               "\" dominant-baseline=\"central\">" + xml_escape(f.feature.name) + "</text>\n";
    }
    out += "</g>\n";

    out += "<g class=\"constraints\">\n";
    for (const auto& p : m.constraints) {
      out += "<g data-ref=\"" + xml_escape(p.ref.str()) + "\">\n";
      out += "<circle cx=\"" + fmt(p.position.x) + "\" cy=\"" + fmt(p.position.y) + "\" r=\"" + fmt(c.node_radius) +
             "\" fill=\"" + p.color.hex() + "\" stroke=\"#333333\"/>\n";
      std::string badge = p.weight ? std::to_string(*p.weight) : "H";
      out += "<text x=\"" + fmt(p.position.x) + "\" y=\"" + fmt(p.position.y) +
             "\" text-anchor=\"middle\" dominant-baseline=\"central\" font-size=\"" + fmt(c.font_size * 0.8) +
             "\">" + badge + "</text>\n";
      std::string name = p.ref.ordinal > 0 ? p.ref.id + "#" + std::to_string(p.ref.ordinal) : p.ref.id;
      out += "<text text-anchor=\"" + std::string(p.label_mirrored ? "end" : "start") +
             "\" dominant-baseline=\"central\" transform=\"translate(" + fmt(p.label_anchor.x) + "," +
             fmt(p.label_anchor.y) + ") rotate(" + detail::deg(p.label_angle) + ")\">" + xml_escape(name) +
             "</text>\n";
      out += "</g>\n";
    }
    out += "</g>\n";
  }
  out += "</g>\n</svg>\n";
  return out;
}

} // namespace kbviz
