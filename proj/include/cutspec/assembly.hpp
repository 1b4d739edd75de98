#pragma once

#include <functional>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "cutspec/cut_quadrature.hpp"
#include "cutspec/lgl_basis.hpp"
#include "cutspec/mesh_geometry.hpp"

namespace cutspec {

/// Symmetric operator stored with its full sparsity pattern.
using SparseSymMatrix = Eigen::SparseMatrix<double, Eigen::ColMajor, int>;
using Vector = Eigen::VectorXd;

/// max |A_ij - A_ji| / max |A_ij|; zero for the empty matrix.
double symmetry_defect(const SparseSymMatrix& a);

/// Global numbering of V = V_+ (+) V_-. Each side space is C0 over its
/// fictitious submesh T_{side,h}: LGL nodes shared between elements of the
/// same submesh share one index. Pos indices come first.
class DofMap {
 public:
  DofMap(const CutMesh& mesh, int degree);

  int degree() const { return degree_; }
  int num_dofs() const { return num_[0] + num_[1]; }
  int num_dofs(Side s) const { return num_[slot(s)]; }
  int offset(Side s) const { return s == Side::Pos ? 0 : num_[slot(Side::Pos)]; }
  int nodes_per_element() const { return (degree_ + 1) * (degree_ + 1); }

  /// Local-to-global map of element e on side s; empty if e is not in T_{s,h}.
  std::span<const int> element_dofs(int e, Side s) const;

  const std::vector<char>& dirichlet_mask() const { return dirichlet_; }
  Point2 dof_point(int dof) const { return points_[dof]; }
  Side dof_side(int dof) const { return dof < num_[slot(Side::Pos)] ? Side::Pos : Side::Neg; }

 private:
  static int slot(Side s) { return s == Side::Pos ? 0 : 1; }

  int degree_ = 1;
  int num_[2] = {0, 0};
  std::vector<int> elem_dofs_[2];
  std::vector<char> present_[2];
  std::vector<char> dirichlet_;
  std::vector<Point2> points_;
};

/// Everything the operators need: classified mesh, level set, basis, DOF
/// map and the per-element cut rules (computed once).
class Discretization {
 public:
  /// q <= 0 selects the default p + 3 points per direction.
  Discretization(CutMesh mesh, LevelSet phi, int degree, int q = 0);

  const CutMesh& mesh() const { return mesh_; }
  const LevelSet& level_set() const { return phi_; }
  const Basis2D& basis() const { return basis_; }
  const DofMap& dofs() const { return dofs_; }
  int degree() const { return basis_.degree(); }
  int q() const { return q_; }
  double h() const { return mesh_.h(); }

  /// Rule on K cap Omega_s: tensor Gauss for uncut elements of class s,
  /// the cut rule for Cut elements, empty otherwise.
  VolumeRule volume_rule(int e, Side s) const;
  /// Cut rules of element e (Cut elements only).
  const ElementRules& cut_rules(int e) const;

  /// Maps a physical point of element e to [-1,1]^2.
  Point2 to_reference(int e, Point2 x) const;

 private:
  CutMesh mesh_;
  LevelSet phi_;
  Basis2D basis_;
  DofMap dofs_;
  int q_;
  std::vector<int> cut_slot_;
  std::vector<ElementRules> cut_rules_;
};

struct Coefficients {
  double alpha_pos = 1.0;
  double alpha_neg = 1.0;

  double alpha(Side s) const { return s == Side::Pos ? alpha_pos : alpha_neg; }
};

/// Weights and penalty of one interface element.
struct NitscheCoefficients {
  double kappa_pos = 0.5;
  double kappa_neg = 0.5;
  double gamma = 0.0;
  double measure_pos = 0.0;
  double measure_neg = 0.0;
  double interface_length = 0.0;
};

NitscheCoefficients compute_nitsche_coeffs(double measure_pos, double measure_neg,
                                           double interface_length, Coefficients alpha,
                                           double h_k);
NitscheCoefficients compute_nitsche_coeffs(const ElementRules& rules, Coefficients alpha,
                                           double h_k);

/// Volume diffusion plus symmetric weighted Nitsche coupling and penalty.
SparseSymMatrix assemble_stiffness(const Discretization& disc, Coefficients alpha);

/// Face-jump penalty of all normal derivatives of order 0..p over G_- (on
/// V_- DOFs) and G_+ (on V_+ DOFs).
SparseSymMatrix assemble_ghost_penalty(const Discretization& disc);

/// Dense face contribution on the stacked local DOFs [left; right] of two
/// neighbouring elements of side h x h (or hx, hy), scaled with mesh size h.
Eigen::MatrixXd ghost_face_block(const Basis2D& basis, const Face& face, double hx, double hy,
                                 double h, int q);

SparseSymMatrix assemble_mass(const Discretization& disc);

using ScalarField = std::function<double(Point2)>;
using SidedField = std::function<double(Point2, Side)>;

/// Interface data of the exact solution: g_D = [[u]], g_N = [[alpha d_n u]].
struct JumpData {
  ScalarField dirichlet_jump;
  ScalarField flux_jump;
};

Vector assemble_load(const Discretization& disc, Coefficients alpha, const SidedField& f,
                     const std::optional<JumpData>& jumps = std::nullopt);

struct ExtendedForms {
  SparseSymMatrix stiffness;  // a + (gamma_A / h^2) g
  SparseSymMatrix mass;       // (u, v) + gamma_M g
};

ExtendedForms build_extended_forms(const SparseSymMatrix& stiffness, const SparseSymMatrix& ghost,
                                   const SparseSymMatrix& mass, double gamma_a, double gamma_m,
                                   double h);

/// Nodal interpolation of a per-side field onto V (every DOF).
Vector interpolate(const DofMap& dofs, const SidedField& u);

/// Reduced system after eliminating Dirichlet DOFs and DOFs whose matrix
/// row is identically zero.
struct ReducedSystem {
  SparseSymMatrix matrix;
  Vector rhs;
  std::vector<int> free_dofs;
  Vector fixed_values;  // full length; prescribed values, zero on free DOFs

  Vector expand(const Vector& reduced) const;
};

/// `boundary` (full length) supplies values at Dirichlet DOFs; omitted
/// means homogeneous data.
ReducedSystem apply_dirichlet(const SparseSymMatrix& a, const Vector& b, const DofMap& dofs,
                              const Vector* boundary = nullptr);

struct ReducedPair {
  SparseSymMatrix a;
  SparseSymMatrix m;
  std::vector<int> free_dofs;
  int full_size = 0;

  Vector expand(const Vector& reduced) const;
};

/// Homogeneous Dirichlet reduction of a pencil (A, M) onto a shared free set.
ReducedPair reduce_pair(const SparseSymMatrix& a, const SparseSymMatrix& m, const DofMap& dofs);

}  // namespace cutspec
