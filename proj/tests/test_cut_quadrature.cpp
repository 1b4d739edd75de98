#include <doctest.h>

#include <cmath>

#include "cutspec/cut_quadrature.hpp"
#include "cutspec/error.hpp"

using namespace cutspec;

namespace {

struct Totals {
  double neg = 0.0;
  double pos = 0.0;
  double gamma = 0.0;
  double neg_x2 = 0.0;  // integral of x^2 over Omega_-
};

Totals integrate_mesh(const LevelSet& phi, Rect domain, int n, int q) {
  const CutMesh m = classify_elements(build_mesh(domain, n), phi);
  Totals t;
  for (const auto& el : m.elements()) {
    if (el.cls == ElementClass::Cut) {
      const ElementRules r = element_rules(el.bounds, phi, q);
      t.neg += r.neg.measure();
      t.pos += r.pos.measure();
      t.gamma += r.gamma.measure();
      for (std::size_t k = 0; k < r.neg.size(); ++k)
        t.neg_x2 += r.neg.weights[k] * r.neg.points[k].x * r.neg.points[k].x;
    } else {
      const VolumeRule r = tensor_rule(el.bounds, q);
      (el.cls == ElementClass::Neg ? t.neg : t.pos) += r.measure();
      if (el.cls == ElementClass::Neg)
        for (std::size_t k = 0; k < r.size(); ++k)
          t.neg_x2 += r.weights[k] * r.points[k].x * r.points[k].x;
    }
  }
  return t;
}

}  // namespace

TEST_CASE("ridder_root") {
  CHECK(ridder_root([](double x) { return x - 0.3; }, 0.0, 1.0, 1e-14) ==
        doctest::Approx(0.3).epsilon(1e-14));
  CHECK(ridder_root([](double x) { return std::cos(x); }, 1.0, 2.0, 1e-14) ==
        doctest::Approx(M_PI / 2).epsilon(1e-13));
  try {
    ridder_root([](double x) { return x * x + 1.0; }, 0.0, 1.0, 1e-14);
    FAIL("expected NoSignChange");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NoSignChange);
  }
  // the bracket must be strict: a zero endpoint is not a sign change
  CHECK_THROWS_AS(ridder_root([](double x) { return x; }, 0.0, 1.0, 1e-14), Error);
}

TEST_CASE("volume rules") {
  const VolumeRule t = tensor_rule({0, 0.5, 0, 0.5}, 4);
  CHECK(t.size() == 16);
  CHECK(t.measure() == doctest::Approx(0.25).epsilon(1e-15));

  const LevelSet half = LevelSet::half_plane({1, 0}, 0.0);
  CHECK(std::abs(cut_volume_rule({-1, 1, -1, 1}, half, Side::Neg, 6).measure() - 2.0) < 1e-13);
  CHECK(std::abs(cut_volume_rule({-1, 1, -1, 1}, half, Side::Pos, 6).measure() - 2.0) < 1e-13);

  // circle piece of one element: exact polynomial moments are not needed,
  // the measure of both sides must add up to the cell
  const LevelSet c = LevelSet::circle({0, 0}, 0.5);
  const ElementRules r = element_rules({0.25, 0.5, 0.25, 0.5}, c, 8);
  CHECK(std::abs(r.neg.measure() + r.pos.measure() - 0.0625) < 1e-15);
}

TEST_CASE("disk area, moment and perimeter on N = 16, q = 10") {
  const double r0 = 0.5;
  const Totals t = integrate_mesh(LevelSet::circle({0, 0}, r0), {-1, 1, -1, 1}, 16, 10);
  CHECK(std::abs(t.neg - M_PI * r0 * r0) < 1e-10);
  CHECK(std::abs(t.gamma - 2 * M_PI * r0) < 1e-10);
  CHECK(std::abs(t.neg + t.pos - 4.0) < 1e-12);
  CHECK(std::abs(t.neg_x2 - M_PI * std::pow(r0, 4) / 4) < 1e-10);
}

TEST_CASE("flower area from the polar integral") {
  // area = (1/2) int_0^{2pi} (1/2 + sin(5t)/7)^2 dt = pi/4 + pi/98
  const LevelSet f = LevelSet::flower({0, 0}, 0.5, 1.0 / 7.0, 5);
  const double exact = M_PI / 4 + M_PI / 98;
  for (const int n : {16, 32, 64}) {
    const Totals t = integrate_mesh(f, {-1, 1, -1, 1}, n, 10);
    CHECK(std::abs(t.neg - exact) < 1e-7);
    CHECK(std::abs(t.neg + t.pos - 4.0) < 1e-12);
  }
}

TEST_CASE("interface rules") {
  const SurfaceRule flat = interface_rule({0, 1, 0, 1}, LevelSet::half_plane({0, 1}, 0.2), 5);
  CHECK(flat.measure() == doctest::Approx(1.0).epsilon(1e-14));
  for (const Vec2 n : flat.normals) {
    CHECK(n.x == doctest::Approx(0.0));
    CHECK(n.y == doctest::Approx(1.0));
  }

  const LevelSet diag = LevelSet::half_plane({-1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0)}, 0.0);
  const SurfaceRule d = interface_rule({0.0, 1.0, 0.0, 1.0}, diag, 5);
  CHECK(d.measure() == doctest::Approx(std::sqrt(2.0)).epsilon(1e-13));

  // unnormalised level set phi = y - x gives the same arc length
  const LevelSet raw = LevelSet::custom([](Point2 p) { return p.y - p.x; },
                                        [](Point2) { return Vec2{-1.0, 1.0}; }, "y - x");
  CHECK(interface_rule({0.0, 1.0, 0.0, 1.0}, raw, 5).measure() ==
        doctest::Approx(std::sqrt(2.0)).epsilon(1e-13));
  // normals point from Omega_- into Omega_+
  const SurfaceRule c = interface_rule({0.25, 0.5, 0.25, 0.5}, LevelSet::circle({0, 0}, 0.5), 6);
  for (std::size_t k = 0; k < c.size(); ++k) {
    const Point2 x = c.points[k];
    CHECK(std::abs(std::hypot(x.x, x.y) - 0.5) < 1e-14);
    CHECK(dot(c.normals[k], {x.x, x.y}) > 0.0);
    CHECK(c.normals[k].norm() == doctest::Approx(1.0));
  }
}

TEST_CASE("face rules") {
  Face f;
  f.a = {0.0, 0.0};
  f.b = {0.5, 0.0};
  f.normal = {0.0, 1.0};
  const LineRule r = face_rule(f, 3);
  double w = 0.0, lin = 0.0;
  for (std::size_t k = 0; k < r.size(); ++k) {
    w += r.weights[k];
    lin += r.weights[k] * (3.0 * r.points[k].x + 1.0);
  }
  CHECK(w == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(lin == doctest::Approx((3.0 * 0.25 + 1.0) * 0.5).epsilon(1e-15));

  f.b = {1.0, 0.0};
  const LineRule u = face_rule(f, 3);
  double x4 = 0.0;
  for (std::size_t k = 0; k < u.size(); ++k) x4 += u.weights[k] * std::pow(u.points[k].x, 4);
  CHECK(std::abs(x4 - 0.2) < 1e-14);
}

TEST_CASE("graph condition") {
  // A circle well inside one cell: every column meets the interface twice.
  const LevelSet tiny = LevelSet::circle({0.5, 0.5}, 0.2);
  CHECK_THROWS_AS(element_rules({0, 1, 0, 1}, tiny, 4), Error);
}
