#include "cutspec/cut_quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <tuple>

#include "cutspec/error.hpp"
#include "cutspec/lgl_basis.hpp"

namespace cutspec {

double VolumeRule::measure() const {
  return std::accumulate(weights.begin(), weights.end(), 0.0);
}

double SurfaceRule::measure() const {
  return std::accumulate(weights.begin(), weights.end(), 0.0);
}

double ridder_root(const std::function<double(double)>& f, double a, double b, double tol) {
  double fl = f(a), fh = f(b);
  if (!(fl * fh < 0.0)) fail(ErrorCode::NoSignChange, "f(a) * f(b) must be negative");
  double xl = a, xh = b;
  double ans = std::numeric_limits<double>::quiet_NaN();
  for (int it = 0; it < 200; ++it) {
    const double xm = 0.5 * (xl + xh);
    const double fm = f(xm);
    const double s = std::sqrt(fm * fm - fl * fh);
    if (s == 0.0) return xm;
    const double xnew = xm + (xm - xl) * ((fl >= fh ? 1.0 : -1.0) * fm / s);
    const double eps = std::max(tol, 4.0 * std::numeric_limits<double>::epsilon() * std::abs(xnew));
    if (std::abs(xnew - ans) <= eps) return xnew;
    ans = xnew;
    const double fnew = f(ans);
    if (fnew == 0.0) return ans;
    if (std::copysign(fm, fnew) != fm) {
      xl = xm;
      fl = fm;
      xh = ans;
      fh = fnew;
    } else if (std::copysign(fl, fnew) != fl) {
      xh = ans;
      fh = fnew;
    } else {
      xl = ans;
      fl = fnew;
    }
    if (std::abs(xh - xl) <= eps) return ans;
  }
  fail(ErrorCode::NonConvergence, "Ridder iteration did not converge in 200 steps");
}

namespace {

// Root of g on [a,b] where side_of(g(a)) != side_of(g(b)); exact zeros at
// either end are returned directly.
double bracketed_root(const std::function<double(double)>& g, double a, double ga, double b,
                      double gb, double tol) {
  if (ga == 0.0) return a;
  if (gb == 0.0) return b;
  return ridder_root(g, a, b, tol);
}

// All sign changes of g on [a,b] under the phi <= 0 tie-break, sampled on
// `samples` sub-intervals and polished.
std::vector<double> sampled_roots(const std::function<double(double)>& g, double a, double b,
                                  int samples, double tol) {
  std::vector<double> roots;
  double t_prev = a, g_prev = g(a);
  for (int k = 1; k <= samples; ++k) {
    const double t = k == samples ? b : a + (b - a) * k / samples;
    const double gt = g(t);
    if (side_of(gt) != side_of(g_prev))
      roots.push_back(bracketed_root(g, t_prev, g_prev, t, gt, tol));
    t_prev = t;
    g_prev = gt;
  }
  return roots;
}

int count_sign_changes(const std::function<double(double)>& g, double a, double b, int samples) {
  int changes = 0;
  Side prev = side_of(g(a));
  for (int k = 1; k <= samples; ++k) {
    const Side s = side_of(g(k == samples ? b : a + (b - a) * k / samples));
    changes += s != prev;
    prev = s;
  }
  return changes;
}

constexpr int kColumnSamples = 16;
constexpr int kGraphLines = 64;

// True if d phi / d(height) keeps one strict sign at every interface point
// found on kGraphLines + 1 lines of each family through the cell.
bool height_graph_ok(const Rect& cell, const LevelSet& phi, bool height_is_x, double tol) {
  int sign = 0;
  auto check = [&](Point2 x) {
    const Vec2 g = phi.gradient(x);
    const double dv = height_is_x ? g.x : g.y;
    if (!(std::abs(dv) > 1e-10 * g.norm())) return false;
    const int s = dv > 0.0 ? 1 : -1;
    if (sign == 0) sign = s;
    return s == sign;
  };
  for (int family = 0; family < 2; ++family) {
    const bool along_y = family == 0;  // lines x = const, parametrized by y
    const double a = along_y ? cell.y0 : cell.x0, b = along_y ? cell.y1 : cell.x1;
    const double c0 = along_y ? cell.x0 : cell.y0, c1 = along_y ? cell.x1 : cell.y1;
    for (int k = 0; k <= kGraphLines; ++k) {
      const double c = k == kGraphLines ? c1 : c0 + (c1 - c0) * k / kGraphLines;
      auto line = [&](double t) { return phi(along_y ? Point2{c, t} : Point2{t, c}); };
      for (const double t : sampled_roots(line, a, b, kEdgeSamples, tol))
        if (!check(along_y ? Point2{c, t} : Point2{t, c})) return false;
    }
  }
  return true;
}

void append_tensor(VolumeRule& rule, const QuadRule1D& gx, const QuadRule1D& gy) {
  for (std::size_t j = 0; j < gy.size(); ++j)
    for (std::size_t i = 0; i < gx.size(); ++i) {
      rule.points.push_back({gx.nodes[i], gy.nodes[j]});
      rule.weights.push_back(gx.weights[i] * gy.weights[j]);
    }
}

}  // namespace

VolumeRule tensor_rule(const Rect& cell, int q) {
  VolumeRule rule;
  append_tensor(rule, gauss_legendre(q, cell.x0, cell.x1), gauss_legendre(q, cell.y0, cell.y1));
  return rule;
}

ElementRules element_rules(const Rect& cell, const LevelSet& phi, int q) {
  if (q < 1) fail(ErrorCode::InvalidArgument, "quadrature size must be >= 1");
  ElementRules out;

  const Vec2 gc = phi.gradient(cell.center());
  const double size = std::max(cell.width(), cell.height());
  const double tol = 1e-14 * size;
  // Center rule first; the other direction only if the interface is not a
  // graph over the preferred one.
  bool height_is_x = std::abs(gc.x) >= std::abs(gc.y);
  if (!height_graph_ok(cell, phi, height_is_x, tol)) {
    if (!height_graph_ok(cell, phi, !height_is_x, tol))
      fail(ErrorCode::GraphConditionViolated, "interface is not a height graph in either direction");
    height_is_x = !height_is_x;
  }
  // (u, v) = (base, height) coordinates.
  const double um = height_is_x ? cell.y0 : cell.x0;
  const double uM = height_is_x ? cell.y1 : cell.x1;
  const double vm = height_is_x ? cell.x0 : cell.y0;
  const double vM = height_is_x ? cell.x1 : cell.y1;
  auto to_point = [height_is_x](double u, double v) {
    return height_is_x ? Point2{v, u} : Point2{u, v};
  };
  auto F = [&](double u, double v) { return phi(to_point(u, v)); };

  std::vector<double> breaks{um};
  for (const double v_edge : {vm, vM}) {
    const auto roots = sampled_roots([&](double u) { return F(u, v_edge); }, um, uM,
                                     kEdgeSamples, tol);
    breaks.insert(breaks.end(), roots.begin(), roots.end());
  }
  breaks.push_back(uM);
  std::sort(breaks.begin(), breaks.end());

  auto side_rule = [&](Side s) -> VolumeRule& { return s == Side::Neg ? out.neg : out.pos; };
  const QuadRule1D ref = gauss_legendre(q);
  auto mapped = [&ref](double a, double b) {
    QuadRule1D r = ref;
    const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    for (std::size_t k = 0; k < r.size(); ++k) {
      r.nodes[k] = mid + half * r.nodes[k];
      r.weights[k] *= half;
    }
    return r;
  };

  for (std::size_t b = 0; b + 1 < breaks.size(); ++b) {
    const double a0 = breaks[b], a1 = breaks[b + 1];
    if (a1 - a0 <= tol) continue;
    const double umid = 0.5 * (a0 + a1);
    const Side s_bottom = side_of(F(umid, vm));
    const Side s_top = side_of(F(umid, vM));

    if (s_bottom == s_top) {
      if (count_sign_changes([&](double v) { return F(umid, v); }, vm, vM, kColumnSamples) > 0)
        fail(ErrorCode::GraphConditionViolated,
             "interface is not a height graph over the chosen direction");
      const QuadRule1D gu = mapped(a0, a1), gv = mapped(vm, vM);
      VolumeRule& target = side_rule(s_bottom);
      for (std::size_t j = 0; j < gv.size(); ++j)
        for (std::size_t i = 0; i < gu.size(); ++i) {
          target.points.push_back(to_point(gu.nodes[i], gv.nodes[j]));
          target.weights.push_back(gu.weights[i] * gv.weights[j]);
        }
      continue;
    }

    const QuadRule1D gu = mapped(a0, a1);
    for (std::size_t j = 0; j < gu.size(); ++j) {
      const double u = gu.nodes[j];
      auto column = [&](double v) { return F(u, v); };
      if (count_sign_changes(column, vm, vM, kColumnSamples) > 1)
        fail(ErrorCode::GraphConditionViolated, "more than one height root in a column");
      const double g_lo = column(vm), g_hi = column(vM);
      if (side_of(g_lo) == side_of(g_hi))
        fail(ErrorCode::GraphConditionViolated, "cut column without a height root");
      const double root = bracketed_root(column, vm, g_lo, vM, g_hi, tol);

      for (const auto& [lo, hi, s] : {std::tuple{vm, root, s_bottom}, std::tuple{root, vM, s_top}}) {
        if (hi - lo <= 0.0) continue;
        const QuadRule1D gv = mapped(lo, hi);
        VolumeRule& target = side_rule(s);
        for (std::size_t k = 0; k < gv.size(); ++k) {
          target.points.push_back(to_point(u, gv.nodes[k]));
          target.weights.push_back(gu.weights[j] * gv.weights[k]);
        }
      }

      const Point2 x = to_point(u, root);
      const Vec2 g = phi.gradient(x);
      const double gnorm = g.norm();
      const double dv = std::abs(height_is_x ? g.x : g.y);
      if (!(dv > 1e-14 * gnorm) || gnorm == 0.0)
        fail(ErrorCode::GraphConditionViolated, "vanishing height derivative at an interface point");
      out.gamma.points.push_back(x);
      out.gamma.weights.push_back(gu.weights[j] * gnorm / dv);
      out.gamma.normals.push_back({g.x / gnorm, g.y / gnorm});
    }
  }
  return out;
}

VolumeRule cut_volume_rule(const Rect& cell, const LevelSet& phi, Side side, int q) {
  ElementRules rules = element_rules(cell, phi, q);
  return side == Side::Neg ? std::move(rules.neg) : std::move(rules.pos);
}

SurfaceRule interface_rule(const Rect& cell, const LevelSet& phi, int q) {
  return element_rules(cell, phi, q).gamma;
}

LineRule face_rule(const Face& face, int q) {
  const QuadRule1D ref = gauss_legendre(q);
  const double len = face.length();
  LineRule rule;
  for (std::size_t k = 0; k < ref.size(); ++k) {
    const double t = 0.5 * (ref.nodes[k] + 1.0);
    rule.points.push_back({face.a.x + t * (face.b.x - face.a.x), face.a.y + t * (face.b.y - face.a.y)});
    rule.weights.push_back(0.5 * ref.weights[k] * len);
  }
  return rule;
}

}  // namespace cutspec
