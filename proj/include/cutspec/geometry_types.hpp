#pragma once

#include <cmath>

namespace cutspec {

struct Point2 {
  double x = 0.0;
  double y = 0.0;
};

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  double norm() const { return std::hypot(x, y); }
};

inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }

/// Axis-aligned rectangle [x0,x1] x [y0,y1].
struct Rect {
  double x0 = 0.0;
  double x1 = 0.0;
  double y0 = 0.0;
  double y1 = 0.0;

  double width() const { return x1 - x0; }
  double height() const { return y1 - y0; }
  double area() const { return width() * height(); }
  Point2 center() const { return {0.5 * (x0 + x1), 0.5 * (y0 + y1)}; }
};

enum class Side { Neg = 0, Pos = 1 };

inline constexpr Side kSides[2] = {Side::Pos, Side::Neg};

inline const char* to_string(Side s) { return s == Side::Neg ? "neg" : "pos"; }

/// Tie-break: phi == 0 counts as the negative side.
inline Side side_of(double phi) { return phi > 0.0 ? Side::Pos : Side::Neg; }

}  // namespace cutspec
