#include <doctest.h>

#include <cmath>
#include <random>

#include "cutspec/error.hpp"
#include "cutspec/norms_errors.hpp"

using namespace cutspec;

namespace {

Discretization plain(Rect d, int n, int p) {
  const LevelSet phi = LevelSet::constant(-1.0);
  return Discretization(classify_elements(build_mesh(d, n), phi), phi, p);
}

Discretization circle(int n, int p) {
  const LevelSet phi = LevelSet::circle({0.03, -0.01}, 0.5);
  return Discretization(classify_elements(build_mesh({-1, 1, -1, 1}, n), phi), phi, p);
}

ExactSolution field(std::function<double(Point2)> u, std::function<Vec2(Point2)> g) {
  return {[u](Point2 x, Side) { return u(x); }, [g](Point2 x, Side) { return g(x); }, std::nullopt};
}

}  // namespace

TEST_CASE("broken L2 error") {
  SUBCASE("interpolant of a degree-p polynomial is exact") {
    const Discretization disc = circle(6, 3);
    const auto u = [](Point2 x, Side s) {
      return s == Side::Pos ? x.x * x.x * x.y - 2 * x.y * x.y * x.y + 1 : 3 * x.x * x.y * x.y - x.x;
    };
    const DiscreteFunction uh(disc, interpolate(disc.dofs(), u));
    const ExactSolution ex{u, [](Point2 x, Side s) {
                             return s == Side::Pos ? Vec2{2 * x.x * x.y, x.x * x.x - 6 * x.y * x.y}
                                                   : Vec2{3 * x.y * x.y - 1, 6 * x.x * x.y};
                           },
                           std::nullopt};
    CHECK(broken_l2_error(uh, ex) < 1e-12);
    CHECK(broken_h1_error(uh, ex) < 1e-11);
  }

  SUBCASE("zero against constants and sines") {
    const Discretization sq = plain({-1, 1, -1, 1}, 4, 2);
    const DiscreteFunction zero(sq, Vector::Zero(sq.dofs().num_dofs()));
    CHECK(broken_l2_error(zero, field([](Point2) { return 1.0; }, [](Point2) { return Vec2{}; })) ==
          doctest::Approx(2.0).epsilon(1e-13));
    CHECK(broken_h1_error(zero, field([](Point2 x) { return x.x; }, [](Point2) { return Vec2{1, 0}; })) ==
          doctest::Approx(2.0).epsilon(1e-13));

    const Discretization pi = plain({0, M_PI, 0, M_PI}, 8, 4);
    const DiscreteFunction z(pi, Vector::Zero(pi.dofs().num_dofs()));
    const auto s = field([](Point2 x) { return std::sin(x.x) * std::sin(x.y); },
                         [](Point2 x) {
                           return Vec2{std::cos(x.x) * std::sin(x.y), std::sin(x.x) * std::cos(x.y)};
                         });
    CHECK(broken_l2_error(z, s) == doctest::Approx(M_PI / 2).epsilon(1e-10));
    CHECK(broken_h1_error(z, s) == doctest::Approx(M_PI / std::sqrt(2.0)).epsilon(1e-10));
  }

  SUBCASE("H1 is a seminorm") {
    const Discretization disc = circle(4, 2);
    const DiscreteFunction c(disc, Vector::Constant(disc.dofs().num_dofs(), 3.0));
    CHECK(broken_h1_error(c, field([](Point2) { return -1.0; }, [](Point2) { return Vec2{}; })) < 1e-12);
  }
}

TEST_CASE("discrete function evaluation") {
  const Discretization disc = circle(5, 3);
  CHECK_THROWS_AS(DiscreteFunction(disc, Vector::Zero(3)), Error);
  const DiscreteFunction f(disc, interpolate(disc.dofs(), [](Point2 x, Side) { return x.x - 2 * x.y; }));
  const auto s = f.evaluate({0.9, 0.9}, Side::Pos);
  CHECK(s.value == doctest::Approx(0.9 - 1.8));
  CHECK(s.gradient.x == doctest::Approx(1.0));
  CHECK(s.gradient.y == doctest::Approx(-2.0));
  // an element far from the interface is not in T_{-,h}
  CHECK_THROWS_AS(f.evaluate({0.95, 0.95}, Side::Neg), Error);
}

TEST_CASE("energy norm") {
  const Discretization disc = circle(8, 3);
  const SparseSymMatrix g = assemble_ghost_penalty(disc);
  const Coefficients alpha{10.0, 1.0};
  const DiscreteFunction c(disc, Vector::Constant(disc.dofs().num_dofs(), 2.5));
  CHECK(energy_norm(c, alpha, g) < 1e-6);

  // without an interface it reduces to the H1 seminorm
  const Discretization sq = plain({0, M_PI, 0, M_PI}, 4, 4);
  const DiscreteFunction s(sq, interpolate(sq.dofs(), [](Point2 x, Side) { return std::sin(x.x) * std::sin(x.y); }));
  const SparseSymMatrix g0 = assemble_ghost_penalty(sq);
  const double h1 = broken_h1_error(s, field([](Point2) { return 0.0; }, [](Point2) { return Vec2{}; }), sq.q());
  CHECK(energy_norm(s, {1.0, 1.0}, g0) == doctest::Approx(h1).epsilon(1e-12));

  CHECK_THROWS_AS(energy_norm(c, alpha, SparseSymMatrix(2, 2)), Error);
}

TEST_CASE("ghost form: direct evaluation matches the assembled matrix") {
  for (const int p : {1, 2, 3, 5}) {
    const Discretization disc = circle(8, p);
    const SparseSymMatrix g = assemble_ghost_penalty(disc);
    std::mt19937 rng(p);
    std::normal_distribution<double> nd;
    Vector v(disc.dofs().num_dofs());
    for (int k = 0; k < v.size(); ++k) v[k] = nd(rng);
    const DiscreteFunction f(disc, v);
    const double direct = ghost_form_direct(f);
    CHECK(std::abs(direct - v.dot(g * v)) < 1e-10 * std::abs(direct));
  }
}

TEST_CASE("eigenvalue errors") {
  const auto z = eigenvalue_errors({1.0, 2.0, 3.0}, {1.0, 2.0, 3.0});
  for (const double e : z) CHECK(e == 0.0);
  const auto e = eigenvalue_errors({2.2}, {2.0});
  CHECK(e[0] == doctest::Approx(0.1).epsilon(1e-14));
  // sorted by index
  const auto s = eigenvalue_errors({5.5, 2.0}, {2.0, 5.0});
  CHECK(s[0] == 0.0);
  CHECK(s[1] == doctest::Approx(0.1));
  try {
    eigenvalue_errors({1.0}, {1.0, 2.0});
    FAIL("expected LengthMismatch");
  } catch (const Error& err) {
    CHECK(err.code() == ErrorCode::LengthMismatch);
  }
}
