#include "cutspec/mesh_geometry.hpp"

#include <array>
#include <cmath>
#include <sstream>

#include "cutspec/error.hpp"

namespace cutspec {

LevelSet::LevelSet(Kind kind, ValueFn value, GradientFn gradient, std::string description)
    : kind_(kind),
      value_(std::move(value)),
      gradient_(std::move(gradient)),
      description_(std::move(description)) {}

LevelSet LevelSet::circle(Point2 center, double radius) {
  if (!(radius > 0.0)) fail(ErrorCode::InvalidArgument, "circle radius must be positive");
  std::ostringstream os;
  os << "circle(center=(" << center.x << "," << center.y << "), r=" << radius << ")";
  const double r2 = radius * radius;
  return LevelSet(
      Kind::Circle,
      [center, r2](Point2 p) {
        const double dx = p.x - center.x, dy = p.y - center.y;
        return dx * dx + dy * dy - r2;
      },
      [center](Point2 p) { return Vec2{2.0 * (p.x - center.x), 2.0 * (p.y - center.y)}; },
      os.str());
}

LevelSet LevelSet::flower(Point2 center, double r0, double amplitude, int lobes) {
  std::ostringstream os;
  os << "flower(center=(" << center.x << "," << center.y << "), r0=" << r0
     << ", amplitude=" << amplitude << ", lobes=" << lobes << ")";
  const double k = lobes;
  return LevelSet(
      Kind::Flower,
      [=](Point2 p) {
        const double dx = p.x - center.x, dy = p.y - center.y;
        const double r = std::hypot(dx, dy);
        const double theta = std::atan2(dy, dx);
        return r - (r0 + amplitude * std::sin(k * theta));
      },
      [=](Point2 p) {
        const double dx = p.x - center.x, dy = p.y - center.y;
        const double r2 = dx * dx + dy * dy;
        if (r2 == 0.0) return Vec2{0.0, 0.0};
        const double r = std::sqrt(r2);
        const double theta = std::atan2(dy, dx);
        const double c = amplitude * k * std::cos(k * theta);
        // d(theta)/dx = -y/r^2, d(theta)/dy = x/r^2.
        return Vec2{dx / r + c * dy / r2, dy / r - c * dx / r2};
      },
      os.str());
}

LevelSet LevelSet::half_plane(Vec2 normal, double offset) {
  std::ostringstream os;
  os << "half_plane(n=(" << normal.x << "," << normal.y << "), offset=" << offset << ")";
  return LevelSet(
      Kind::HalfPlane, [=](Point2 p) { return normal.x * p.x + normal.y * p.y - offset; },
      [=](Point2) { return normal; }, os.str());
}

LevelSet LevelSet::constant(double value) {
  std::ostringstream os;
  os << "constant(" << value << ")";
  return LevelSet(
      Kind::Custom, [value](Point2) { return value; }, [](Point2) { return Vec2{0.0, 0.0}; },
      os.str());
}

LevelSet LevelSet::custom(ValueFn value, GradientFn gradient, std::string description) {
  return LevelSet(Kind::Custom, std::move(value), std::move(gradient), std::move(description));
}

const char* to_string(ElementClass c) {
  switch (c) {
    case ElementClass::Neg: return "neg";
    case ElementClass::Pos: return "pos";
    case ElementClass::Cut: return "cut";
  }
  return "?";
}

CutMesh::CutMesh(Rect domain, int n) : domain_(domain), n_(n) {
  elements_.reserve(static_cast<std::size_t>(n) * n);
  const double hx = domain.width() / n, hy = domain.height() / n;
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      ElementRecord rec;
      rec.i = i;
      rec.j = j;
      rec.bounds = {domain.x0 + i * hx, i + 1 == n ? domain.x1 : domain.x0 + (i + 1) * hx,
                    domain.y0 + j * hy, j + 1 == n ? domain.y1 : domain.y0 + (j + 1) * hy};
      elements_.push_back(rec);
    }
}

bool CutMesh::in_side(int e, Side side) const {
  const ElementClass c = elements_[e].cls;
  if (c == ElementClass::Cut) return true;
  return (side == Side::Neg) == (c == ElementClass::Neg);
}

int CutMesh::count(ElementClass c) const {
  int total = 0;
  for (const auto& el : elements_) total += el.cls == c;
  return total;
}

CutMesh build_mesh(Rect domain, int n) {
  if (!(domain.x1 > domain.x0) || !(domain.y1 > domain.y0))
    fail(ErrorCode::InvalidDomain, "domain must satisfy x1 > x0 and y1 > y0");
  if (n < 2) fail(ErrorCode::InvalidDomain, "need at least 2 elements per side, got " +
                                                std::to_string(n));
  return CutMesh(domain, n);
}

namespace {

// Point on edge `edge` of `r` at parameter t in [0,1]: 0 bottom, 1 right,
// 2 top, 3 left; bottom/top run in +x, left/right in +y.
Point2 edge_point(const Rect& r, int edge, double t) {
  switch (edge) {
    case 0: return {r.x0 + t * r.width(), r.y0};
    case 1: return {r.x1, r.y0 + t * r.height()};
    case 2: return {r.x0 + t * r.width(), r.y1};
    default: return {r.x0, r.y0 + t * r.height()};
  }
}

struct EdgeScan {
  int sign_changes = 0;
  bool has_zero = false;
  bool has_neg = false;
  bool has_pos = false;
};

EdgeScan scan_edge(const Rect& r, int edge, const LevelSet& phi) {
  EdgeScan scan;
  Side prev = Side::Neg;
  for (int k = 0; k <= kEdgeSamples; ++k) {
    const double v = phi(edge_point(r, edge, static_cast<double>(k) / kEdgeSamples));
    const Side s = side_of(v);
    scan.has_zero |= (v == 0.0);
    scan.has_neg |= (v < 0.0);
    scan.has_pos |= (v > 0.0);
    if (k > 0 && s != prev) ++scan.sign_changes;
    prev = s;
  }
  return scan;
}

// Signs of phi on an interior lattice of the element (boundary excluded).
EdgeScan scan_interior(const Rect& r, const LevelSet& phi) {
  EdgeScan scan;
  constexpr int m = kInteriorSamples;
  for (int a = 1; a < m; ++a)
    for (int b = 1; b < m; ++b) {
      const double v = phi({r.x0 + r.width() * a / m, r.y0 + r.height() * b / m});
      scan.has_zero |= (v == 0.0);
      scan.has_neg |= (v < 0.0);
      scan.has_pos |= (v > 0.0);
    }
  return scan;
}

}  // namespace

CutMesh classify_elements(const CutMesh& mesh, const LevelSet& phi) {
  CutMesh out = mesh;
  for (auto& el : out.elements_) {
    bool zero = false, neg = false, pos = false;
    for (int edge = 0; edge < 4; ++edge) {
      const EdgeScan scan = scan_edge(el.bounds, edge, phi);
      zero |= scan.has_zero;
      neg |= scan.has_neg;
      pos |= scan.has_pos;
    }
    const EdgeScan inner = scan_interior(el.bounds, phi);
    zero |= inner.has_zero;
    neg |= inner.has_neg;
    pos |= inner.has_pos;
    if (zero || (neg && pos))
      el.cls = ElementClass::Cut;
    else
      el.cls = side_of(phi(el.bounds.center())) == Side::Neg ? ElementClass::Neg
                                                              : ElementClass::Pos;
  }
  out.classified_ = true;
  out.ghost_neg_ = ghost_faces(out, Side::Neg);
  out.ghost_pos_ = ghost_faces(out, Side::Pos);
  return out;
}

std::vector<Face> ghost_faces(const CutMesh& mesh, Side side) {
  if (!mesh.classified()) fail(ErrorCode::InvalidArgument, "mesh is not classified");
  std::vector<Face> faces;
  const int n = mesh.n();
  auto qualifies = [&](int a, int b) {
    const bool a_cut = mesh.element(a).cls == ElementClass::Cut;
    const bool b_cut = mesh.element(b).cls == ElementClass::Cut;
    return (a_cut && mesh.in_side(b, side)) || (b_cut && mesh.in_side(a, side));
  };
  // Row-major over elements; for each element its right face then its top face.
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      const int e = mesh.element_index(i, j);
      const Rect& r = mesh.element(e).bounds;
      if (i + 1 < n) {
        const int f = mesh.element_index(i + 1, j);
        if (qualifies(e, f)) faces.push_back({e, f, {r.x1, r.y0}, {r.x1, r.y1}, {1.0, 0.0}});
      }
      if (j + 1 < n) {
        const int f = mesh.element_index(i, j + 1);
        if (qualifies(e, f)) faces.push_back({e, f, {r.x0, r.y1}, {r.x1, r.y1}, {0.0, 1.0}});
      }
    }
  return faces;
}

AssumptionReport check_interface_assumption(const CutMesh& mesh, const LevelSet& phi) {
  if (!mesh.classified()) fail(ErrorCode::InvalidArgument, "mesh is not classified");
  AssumptionReport report;
  for (int e = 0; e < mesh.num_elements(); ++e) {
    const auto& el = mesh.element(e);
    if (el.cls != ElementClass::Cut) continue;
    int total = 0;
    bool edge_twice = false, neg = false, pos = false;
    for (int edge = 0; edge < 4; ++edge) {
      const EdgeScan scan = scan_edge(el.bounds, edge, phi);
      total += scan.sign_changes;
      edge_twice |= scan.sign_changes > 1;
      neg |= scan.has_neg;
      pos |= scan.has_pos;
    }
    // No boundary crossing is fine when Gamma only touches the element; an
    // interface component strictly inside it is not.
    bool enclosed = false;
    if (total == 0) {
      const EdgeScan inner = scan_interior(el.bounds, phi);
      enclosed = (neg || inner.has_neg) && (pos || inner.has_pos);
    }
    if (edge_twice || (total != 0 && total != 2) || enclosed) report.violations.push_back(e);
  }
  report.ok = report.violations.empty();
  return report;
}

}  // namespace cutspec
