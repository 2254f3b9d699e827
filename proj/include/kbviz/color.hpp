#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace kbviz {

struct Rgb {
  std::uint8_t r = 0, g = 0, b = 0;

  bool operator==(const Rgb&) const = default;

  std::string hex() const {
    char buf[8];
    std::snprintf(buf, sizeof buf, "#%02x%02x%02x", r, g, b);
    return buf;
  }

  /// Accepts "#rrggbb". Throws std::invalid_argument otherwise.
  static Rgb from_hex(std::string_view s) {
    auto nibble = [&](char c) -> int {
      if (c >= '0' && c <= '9') return c - '0';
      if (c >= 'a' && c <= 'f') return c - 'a' + 10;
      if (c >= 'A' && c <= 'F') return c - 'A' + 10;
      throw std::invalid_argument("bad hex colour '" + std::string(s) + "'");
    };
    if (s.size() != 7 || s[0] != '#') throw std::invalid_argument("bad hex colour '" + std::string(s) + "'");
    auto byte = [&](std::size_t i) { return static_cast<std::uint8_t>(nibble(s[i]) * 16 + nibble(s[i + 1])); };
    return Rgb{byte(1), byte(3), byte(5)};
  }
};

/// CIE L*a*b* under the D65 white point.
struct Lab {
  double L = 0, a = 0, b = 0;
};

namespace detail {

inline double srgb_to_linear(double c) {
  return c <= 0.04045 ? c / 12.92 : std::pow((c + 0.055) / 1.055, 2.4);
}
inline double linear_to_srgb(double c) {
  return c <= 0.0031308 ? 12.92 * c : 1.055 * std::pow(c, 1.0 / 2.4) - 0.055;
}

inline constexpr double kXn = 0.95047, kYn = 1.0, kZn = 1.08883;
inline constexpr double kDelta = 6.0 / 29.0;

inline double lab_f(double t) {
  return t > kDelta * kDelta * kDelta ? std::cbrt(t) : t / (3 * kDelta * kDelta) + 4.0 / 29.0;
}
inline double lab_finv(double t) { return t > kDelta ? t * t * t : 3 * kDelta * kDelta * (t - 4.0 / 29.0); }

inline std::uint8_t to_byte(double c) {
  return static_cast<std::uint8_t>(std::lround(std::clamp(c, 0.0, 1.0) * 255.0));
}

} // namespace detail

inline Lab to_lab(Rgb c) {
  double r = detail::srgb_to_linear(c.r / 255.0);
  double g = detail::srgb_to_linear(c.g / 255.0);
  double b = detail::srgb_to_linear(c.b / 255.0);
  double x = 0.4124564 * r + 0.3575761 * g + 0.1804375 * b;
  double y = 0.2126729 * r + 0.7151522 * g + 0.0721750 * b;
  double z = 0.0193339 * r + 0.1191920 * g + 0.9503041 * b;
  double fx = detail::lab_f(x / detail::kXn), fy = detail::lab_f(y / detail::kYn), fz = detail::lab_f(z / detail::kZn);
  return Lab{116 * fy - 16, 500 * (fx - fy), 200 * (fy - fz)};
}

inline Rgb to_rgb(Lab lab) {
  double fy = (lab.L + 16) / 116, fx = fy + lab.a / 500, fz = fy - lab.b / 200;
  double x = detail::kXn * detail::lab_finv(fx), y = detail::kYn * detail::lab_finv(fy),
         z = detail::kZn * detail::lab_finv(fz);
  double r = 3.2404542 * x - 1.5371385 * y - 0.4985314 * z;
  double g = -0.9692660 * x + 1.8760108 * y + 0.0415560 * z;
  double b = 0.0556434 * x - 0.2040259 * y + 1.0572252 * z;
  return Rgb{detail::to_byte(detail::linear_to_srgb(r)), detail::to_byte(detail::linear_to_srgb(g)),
             detail::to_byte(detail::linear_to_srgb(b))};
}

/// Straight-line interpolation in Lab; t outside [0,1] is clamped and the
/// endpoints are returned unchanged.
inline Rgb lerp_lab(Rgb from, Rgb to, double t) {
  if (!(t > 0)) return from;
  if (t >= 1) return to;
  Lab a = to_lab(from), b = to_lab(to);
  return to_rgb(Lab{a.L + (b.L - a.L) * t, a.a + (b.a - a.a) * t, a.b + (b.b - a.b) * t});
}

} // namespace kbviz
