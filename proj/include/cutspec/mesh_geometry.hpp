#pragma once

#include <algorithm>
#include <functional>
#include <string>
#include <vector>

#include "cutspec/geometry_types.hpp"

namespace cutspec {

/// Scalar field phi with analytic gradient. Omega_- = {phi < 0},
/// Omega_+ = {phi > 0}, Gamma = {phi = 0}.
class LevelSet {
 public:
  enum class Kind { Circle, Flower, HalfPlane, Custom };

  using ValueFn = std::function<double(Point2)>;
  using GradientFn = std::function<Vec2(Point2)>;

  LevelSet(Kind kind, ValueFn value, GradientFn gradient, std::string description);

  /// phi = |x - c|^2 - r^2.
  static LevelSet circle(Point2 center, double radius);
  /// phi = r - (r0 + amplitude * sin(lobes * theta)), polar about center.
  static LevelSet flower(Point2 center, double r0, double amplitude, int lobes);
  /// phi = n . x - offset.
  static LevelSet half_plane(Vec2 normal, double offset);
  static LevelSet constant(double value);
  static LevelSet custom(ValueFn value, GradientFn gradient, std::string description);

  double operator()(Point2 pt) const { return value_(pt); }
  Vec2 gradient(Point2 pt) const { return gradient_(pt); }
  Kind kind() const { return kind_; }
  const std::string& description() const { return description_; }

 private:
  Kind kind_;
  ValueFn value_;
  GradientFn gradient_;
  std::string description_;
};

enum class ElementClass { Neg, Pos, Cut };

const char* to_string(ElementClass c);

struct ElementRecord {
  int i = 0;  // column
  int j = 0;  // row
  Rect bounds;
  ElementClass cls = ElementClass::Neg;
};

/// Interior edge shared by two elements. `left` lies on the -normal side,
/// `right` on the +normal side; normal is +x for vertical edges and +y for
/// horizontal ones.
struct Face {
  int left = -1;
  int right = -1;
  Point2 a;
  Point2 b;
  Vec2 normal;

  double length() const { return std::hypot(b.x - a.x, b.y - a.y); }
  bool vertical() const { return normal.x != 0.0; }
};

class CutMesh {
 public:
  CutMesh() = default;
  CutMesh(Rect domain, int n);

  const Rect& domain() const { return domain_; }
  int n() const { return n_; }
  double hx() const { return domain_.width() / n_; }
  double hy() const { return domain_.height() / n_; }
  /// Mesh size: maximal element edge length.
  double h() const { return std::max(hx(), hy()); }

  int num_elements() const { return static_cast<int>(elements_.size()); }
  int element_index(int i, int j) const { return j * n_ + i; }
  const ElementRecord& element(int e) const { return elements_[e]; }
  const std::vector<ElementRecord>& elements() const { return elements_; }

  bool classified() const { return classified_; }
  /// Element belongs to T_{side,h}: its class is `side` or Cut.
  bool in_side(int e, Side side) const;
  int count(ElementClass c) const;

  const std::vector<Face>& ghost_faces_neg() const { return ghost_neg_; }
  const std::vector<Face>& ghost_faces_pos() const { return ghost_pos_; }
  const std::vector<Face>& ghost_faces_of(Side s) const {
    return s == Side::Neg ? ghost_neg_ : ghost_pos_;
  }

 private:
  friend CutMesh classify_elements(const CutMesh& mesh, const LevelSet& phi);

  Rect domain_;
  int n_ = 0;
  std::vector<ElementRecord> elements_;
  std::vector<Face> ghost_neg_;
  std::vector<Face> ghost_pos_;
  bool classified_ = false;
};

/// Number of sub-intervals per element edge used for sign sampling.
inline constexpr int kEdgeSamples = 64;
/// Interior lattice resolution (per direction) used to detect interface
/// components that do not reach the element boundary.
inline constexpr int kInteriorSamples = 16;

CutMesh build_mesh(Rect domain, int n);

/// Cut iff phi has a zero on the closed element (sign change or exact zero
/// among the edge samples and an interior lattice); otherwise by the sign at
/// the center.
CutMesh classify_elements(const CutMesh& mesh, const LevelSet& phi);

/// Faces K cap K' with K Cut and K' in T_{side,h}, each listed once.
std::vector<Face> ghost_faces(const CutMesh& mesh, Side side);

struct AssumptionReport {
  bool ok = true;
  std::vector<int> violations;  // element indices
};

/// Every Cut element boundary must be crossed exactly twice, each edge at
/// most once. Elements that only touch Gamma (no sign change on the
/// boundary, one strict sign overall) are accepted; an interface component
/// enclosed in a single element is a violation.
AssumptionReport check_interface_assumption(const CutMesh& mesh, const LevelSet& phi);

}  // namespace cutspec
