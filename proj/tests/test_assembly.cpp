#include <doctest.h>

#include <cmath>
#include <random>

#include <Eigen/Dense>

#include "cutspec/assembly.hpp"
#include "cutspec/error.hpp"
#include "cutspec/solvers.hpp"
#include "conforming_oracle.hpp"

using namespace cutspec;
using cutspec::testing::ConformingOracle;
using cutspec::testing::oracle_index;

namespace {

double max_abs(const SparseSymMatrix& a) {
  double m = 0.0;
  for (int k = 0; k < a.outerSize(); ++k)
    for (SparseSymMatrix::InnerIterator it(a, k); it; ++it) m = std::max(m, std::abs(it.value()));
  return m;
}

Discretization circle_disc(int n, int p, double r0 = 0.5) {
  const LevelSet phi = LevelSet::circle({0, 0}, r0);
  return Discretization(classify_elements(build_mesh({-1, 1, -1, 1}, n), phi), phi, p);
}

}  // namespace

TEST_CASE("Nitsche weights") {
  auto c = compute_nitsche_coeffs(0.5, 0.5, 1.0, {1.0, 1.0}, 1.0);
  CHECK(c.kappa_pos == doctest::Approx(0.5));
  CHECK(c.kappa_neg == doctest::Approx(0.5));

  c = compute_nitsche_coeffs(0.75, 0.25, 1.0, {1000.0, 1.0}, 1.0);
  CHECK(c.kappa_pos == doctest::Approx(0.75 / 250.75).epsilon(1e-14));
  CHECK(c.kappa_neg == doctest::Approx(250.0 / 250.75).epsilon(1e-14));
  // gamma = 2 h |Gamma_K| / (|K+|/alpha+ + |K-|/alpha-)
  CHECK(c.gamma == doctest::Approx(2.0 / (0.75 / 1000.0 + 0.25)).epsilon(1e-14));

  std::mt19937 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0), a(0.1, 1000.0);
  for (int t = 0; t < 100; ++t) {
    const auto r = compute_nitsche_coeffs(u(rng), u(rng) + 1e-3, u(rng), {a(rng), a(rng)}, 0.1);
    CHECK(std::abs(r.kappa_pos + r.kappa_neg - 1.0) < 1e-14);
  }
  CHECK_THROWS_AS(compute_nitsche_coeffs(0.0, 0.0, 0.0, {1.0, 1.0}, 1.0), Error);
}

TEST_CASE("no interface: stiffness and mass match the conforming oracle") {
  for (const auto [n, p] : {std::pair{3, 2}, std::pair{4, 3}, std::pair{2, 5}}) {
    const Rect d{0, M_PI, 0, M_PI};
    const LevelSet phi = LevelSet::constant(-1.0);
    const Discretization disc(classify_elements(build_mesh(d, n), phi), phi, p);
    const ConformingOracle oracle(d, n, p);
    const auto map = oracle_index(disc.dofs(), d, n, p);
    REQUIRE(disc.dofs().num_dofs() == oracle.side * oracle.side);

    const Eigen::MatrixXd a = Eigen::MatrixXd(assemble_stiffness(disc, {1.0, 1.0}));
    const Eigen::MatrixXd m = Eigen::MatrixXd(assemble_mass(disc));
    double da = 0.0, dm = 0.0;
    for (int r = 0; r < a.rows(); ++r)
      for (int c = 0; c < a.cols(); ++c) {
        da = std::max(da, std::abs(a(r, c) - oracle.stiffness(map[r], map[c])));
        dm = std::max(dm, std::abs(m(r, c) - oracle.mass(map[r], map[c])));
      }
    CHECK(da < 1e-12);
    CHECK(dm < 1e-12);
    CHECK(assemble_ghost_penalty(disc).nonZeros() == 0);
  }
}

TEST_CASE("single Q1 element on the unit square") {
  // N = 2 on [0,2]^2 gives unit elements; element 0 is [0,1]^2.
  const LevelSet phi = LevelSet::constant(-1.0);
  const Discretization disc(classify_elements(build_mesh({0, 2, 0, 2}, 2), phi), phi, 1);
  const Eigen::MatrixXd a = Eigen::MatrixXd(assemble_stiffness(disc, {1.0, 1.0}));
  const Eigen::MatrixXd m = Eigen::MatrixXd(assemble_mass(disc));
  const auto dofs = disc.dofs().element_dofs(0, Side::Neg);
  // hand assembly by 2 x 2 Gauss of grad(phi_i).grad(phi_j) and phi_i phi_j
  Eigen::Matrix4d k_ref, m_ref;
  const double g = 1.0 / std::sqrt(3.0);
  k_ref.setZero();
  m_ref.setZero();
  for (const double s : {-g, g})
    for (const double t : {-g, g}) {
      const double x = 0.5 * (s + 1), y = 0.5 * (t + 1);
      const double v[4] = {(1 - x) * (1 - y), x * (1 - y), (1 - x) * y, x * y};
      const double dx[4] = {-(1 - y), 1 - y, -y, y};
      const double dy[4] = {-(1 - x), -x, 1 - x, x};
      for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) {
          k_ref(i, j) += 0.25 * (dx[i] * dx[j] + dy[i] * dy[j]);
          m_ref(i, j) += 0.25 * v[i] * v[j];
        }
    }
  CHECK(k_ref(0, 0) == doctest::Approx(2.0 / 3.0));
  CHECK(m_ref(0, 0) == doctest::Approx(1.0 / 9.0));
  CHECK(m_ref(0, 1) == doctest::Approx(1.0 / 18.0));
  // element 0 is the only contributor to its corner node 0 row; compare the
  // element-local entries the corner shares with the rest of the element
  for (int j = 0; j < 4; ++j) {
    CHECK(a(dofs[0], dofs[j]) == doctest::Approx(k_ref(0, j)).epsilon(1e-14));
    CHECK(m(dofs[0], dofs[j]) == doctest::Approx(m_ref(0, j)).epsilon(1e-14));
  }
}

TEST_CASE("stiffness with an interface") {
  const Discretization disc = circle_disc(8, 3);
  const SparseSymMatrix a = assemble_stiffness(disc, {1000.0, 1.0});
  CHECK(symmetry_defect(a) < 1e-13);
  const Vector ones = Vector::Ones(a.rows());
  CHECK((a * ones).lpNorm<Eigen::Infinity>() < 1e-10 * max_abs(a));

  // matrix is positive semidefinite: x^T A x >= 0 for random x
  std::mt19937 rng(11);
  std::normal_distribution<double> nd;
  for (int t = 0; t < 5; ++t) {
    Vector x(a.rows());
    for (int i = 0; i < x.size(); ++i) x[i] = nd(rng);
    CHECK(x.dot(a * x) > -1e-10 * x.squaredNorm() * max_abs(a));
  }
}

TEST_CASE("ghost penalty") {
  SUBCASE("two unit elements, v = x | 2x") {
    const Basis2D basis(1);
    Face f;
    f.left = 0;
    f.right = 1;
    f.a = {1.0, 0.0};
    f.b = {1.0, 1.0};
    f.normal = {1.0, 0.0};
    const Eigen::MatrixXd blk = ghost_face_block(basis, f, 1.0, 1.0, 1.0, 4);
    // local nodes k = j*2 + i at (i, j); left element [0,1]^2, right [1,2]x[0,1]
    Eigen::VectorXd v(8);
    v << 0, 1, 0, 1, 2, 4, 2, 4;
    CHECK(v.dot(blk * v) == doctest::Approx(2.0).epsilon(1e-14));
    CHECK((blk - blk.transpose()).norm() < 1e-15);
  }

  SUBCASE("vanishes on global polynomials of degree <= p") {
    for (const int p : {1, 2, 3, 4}) {
      const Discretization disc = circle_disc(8, p);
      const SparseSymMatrix g = assemble_ghost_penalty(disc);
      CHECK(symmetry_defect(g) < 1e-14);
      const Vector v = interpolate(disc.dofs(), [p](Point2 x, Side s) {
        const double c = s == Side::Pos ? 1.0 : -2.0;
        return c * std::pow(x.x + 0.3, p) + std::pow(x.y, p) * x.x / (p + 1.0) + 0.5;
      });
      Vector absv = v.cwiseAbs();
      SparseSymMatrix ga = g.cwiseAbs();
      const double scale = absv.dot(ga * absv);
      CHECK(std::abs(v.dot(g * v)) < 1e-14 * scale);
      // not identically zero: a non-polynomial function is penalized
      const Vector w = interpolate(disc.dofs(), [](Point2 x, Side) { return std::sin(7 * x.x * x.y); });
      CHECK(w.dot(g * w) > 1e-8);
    }
  }

  SUBCASE("no cut elements gives the zero matrix") {
    const LevelSet phi = LevelSet::constant(1.0);
    const Discretization disc(classify_elements(build_mesh({-1, 1, -1, 1}, 4), phi), phi, 3);
    CHECK(assemble_ghost_penalty(disc).nonZeros() == 0);
  }
}

TEST_CASE("mass and load") {
  const Discretization disc = circle_disc(8, 3);
  const SparseSymMatrix m = assemble_mass(disc);
  CHECK(symmetry_defect(m) < 1e-14);
  const Vector ones = Vector::Ones(m.rows());
  CHECK(ones.dot(m * ones) == doctest::Approx(4.0).epsilon(1e-12));

  const Vector zero = assemble_load(disc, {1.0, 1.0}, [](Point2, Side) { return 0.0; });
  CHECK(zero.norm() == 0.0);
  const Vector one = assemble_load(disc, {1.0, 1.0}, [](Point2, Side) { return 1.0; });
  CHECK(ones.dot(one) == doctest::Approx(4.0).epsilon(1e-12));
}

TEST_CASE("extended forms") {
  const Discretization disc = circle_disc(8, 2);
  const SparseSymMatrix a = assemble_stiffness(disc, {10.0, 1.0});
  const SparseSymMatrix g = assemble_ghost_penalty(disc);
  const SparseSymMatrix m = assemble_mass(disc);
  const double h = disc.h();

  const ExtendedForms zero = build_extended_forms(a, g, m, 0.0, 0.0, h);
  CHECK(max_abs(zero.stiffness - a) == 0.0);
  CHECK(max_abs(zero.mass - m) == 0.0);

  const ExtendedForms one = build_extended_forms(a, g, m, 1.0, 0.01, h);
  const ExtendedForms two = build_extended_forms(a, g, m, 2.0, 0.01, h);
  CHECK(max_abs(SparseSymMatrix(two.stiffness - a) - SparseSymMatrix(2.0 * (one.stiffness - a))) <
        1e-12 * max_abs(a));
  CHECK(symmetry_defect(two.stiffness) < 1e-13);
  CHECK(symmetry_defect(two.mass) < 1e-13);
  CHECK_THROWS_AS(build_extended_forms(a, g, SparseSymMatrix(3, 3), 1.0, 1.0, h), Error);
}

TEST_CASE("Dirichlet reduction and plain Poisson") {
  const Rect d{0, M_PI, 0, M_PI};
  const LevelSet phi = LevelSet::constant(-1.0);
  const Discretization disc(classify_elements(build_mesh(d, 8), phi), phi, 4);
  const SparseSymMatrix a = assemble_stiffness(disc, {1.0, 1.0});
  const Vector b = assemble_load(disc, {1.0, 1.0},
                                 [](Point2 x, Side) { return 2.0 * std::sin(x.x) * std::sin(x.y); });
  const ReducedSystem sys = apply_dirichlet(a, b, disc.dofs());
  const SolveReport sol = solve_source(sys.matrix, sys.rhs);
  const Vector u = sys.expand(sol.x);

  // residual on interior rows of the full system
  const Vector r = b - a * u;
  const auto& mask = disc.dofs().dirichlet_mask();
  double worst = 0.0;
  for (int k = 0; k < r.size(); ++k)
    if (!mask[k]) worst = std::max(worst, std::abs(r[k]));
  CHECK(worst < 1e-10 * b.lpNorm<Eigen::Infinity>());

  double err = 0.0;
  for (int k = 0; k < u.size(); ++k) {
    const Point2 x = disc.dofs().dof_point(k);
    err = std::max(err, std::abs(u[k] - std::sin(x.x) * std::sin(x.y)));
    if (mask[k]) CHECK(u[k] == 0.0);
  }
  CHECK(err < 1e-6);

  // an all-zero pencil reduces to the empty system
  const SparseSymMatrix z(a.rows(), a.cols());
  const ReducedPair empty = reduce_pair(z, z, disc.dofs());
  CHECK(empty.free_dofs.empty());
  CHECK(empty.a.rows() == 0);
}

TEST_CASE("DOF map continuity") {
  const Discretization disc = circle_disc(6, 3);
  const DofMap& dofs = disc.dofs();
  CHECK(dofs.num_dofs() == dofs.num_dofs(Side::Pos) + dofs.num_dofs(Side::Neg));
  // neighbouring elements of the same submesh share their edge nodes
  const CutMesh& mesh = disc.mesh();
  for (const Side s : kSides)
    for (int e = 0; e + 1 < mesh.num_elements(); ++e) {
      if (mesh.element(e).i + 1 >= mesh.n()) continue;
      const auto l = dofs.element_dofs(e, s), r = dofs.element_dofs(e + 1, s);
      if (l.empty() || r.empty()) continue;
      for (int j = 0; j <= 3; ++j) CHECK(l[j * 4 + 3] == r[j * 4]);
    }
  for (int k = 0; k < dofs.num_dofs(Side::Pos); ++k) CHECK(dofs.dof_side(k) == Side::Pos);
}
