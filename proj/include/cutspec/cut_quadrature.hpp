#pragma once

#include <functional>
#include <vector>

#include "cutspec/geometry_types.hpp"
#include "cutspec/mesh_geometry.hpp"

namespace cutspec {

/// Physical-coordinate volume rule (area measure).
struct VolumeRule {
  std::vector<Point2> points;
  std::vector<double> weights;

  std::size_t size() const { return points.size(); }
  bool empty() const { return points.empty(); }
  double measure() const;
};

/// Rule on Gamma cap K in arc-length measure, with unit normals pointing
/// from Omega_- into Omega_+.
struct SurfaceRule {
  std::vector<Point2> points;
  std::vector<double> weights;
  std::vector<Vec2> normals;

  std::size_t size() const { return points.size(); }
  bool empty() const { return points.empty(); }
  double measure() const;
};

/// Gauss rule on a mesh edge, arc-length weights.
struct LineRule {
  std::vector<Point2> points;
  std::vector<double> weights;

  std::size_t size() const { return points.size(); }
};

/// Ridder's bracketing root finder. Requires f(a) * f(b) < 0; stops when the
/// bracket (or successive estimates) shrink below `tol` or f hits zero.
double ridder_root(const std::function<double(double)>& f, double a, double b, double tol);

/// All rules of one element, computed together so the root finding is
/// shared between the two sides and the interface.
struct ElementRules {
  VolumeRule neg;
  VolumeRule pos;
  SurfaceRule gamma;

  const VolumeRule& side(Side s) const { return s == Side::Neg ? neg : pos; }
};

/// Splits `cell` by phi with the height-function scheme: the height
/// direction is the coordinate of larger |d phi| at the center (ties: x),
/// the base interval is partitioned at the zeros of phi on the two
/// height-bounding edges, uncut sub-rectangles get tensor Gauss rules and
/// cut columns get q base points with per-column roots and 1D Gauss rules
/// below and above. Throws GraphConditionViolated if a column has more than
/// one root.
ElementRules element_rules(const Rect& cell, const LevelSet& phi, int q);

VolumeRule cut_volume_rule(const Rect& cell, const LevelSet& phi, Side side, int q);
SurfaceRule interface_rule(const Rect& cell, const LevelSet& phi, int q);

/// q x q tensor Gauss rule on the full rectangle.
VolumeRule tensor_rule(const Rect& cell, int q);

LineRule face_rule(const Face& face, int q);

}  // namespace cutspec
