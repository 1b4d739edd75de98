#pragma once

#include <span>
#include <vector>

#include "cutspec/geometry_types.hpp"

namespace cutspec {

inline constexpr int kMaxDegree = 12;

struct LegendreValue {
  double value;
  double derivative;
};

/// L_n(x) and L_n'(x) by the three-term recurrence.
LegendreValue legendre_eval(int n, double x);

/// Legendre-Gauss-Lobatto nodes: -1, the p-1 roots of L_p', +1.
struct NodeSet1D {
  int degree = 0;
  std::vector<double> nodes;
};

NodeSet1D lgl_points(int p);

/// Gauss-Legendre rule on [-1,1], nodes ascending.
struct QuadRule1D {
  std::vector<double> nodes;
  std::vector<double> weights;

  std::size_t size() const { return nodes.size(); }
};

QuadRule1D gauss_legendre(int n);

/// Gauss rule mapped to [a,b].
QuadRule1D gauss_legendre(int n, double a, double b);

/// Nodal Lagrange basis on the LGL points of degree p.
///
/// Values use the barycentric formula. Derivatives of order k are obtained
/// by interpolating the exact nodal derivative table D^k, which is exact
/// because l_j^(k) has degree p-k.
class LagrangeBasis1D {
 public:
  explicit LagrangeBasis1D(int degree);

  int degree() const { return degree_; }
  int size() const { return degree_ + 1; }
  const std::vector<double>& nodes() const { return nodes_; }

  void values(double x, std::span<double> out) const;
  void derivatives(double x, int order, std::span<double> out) const;

  /// Entry (i, j) = l_j^(order)(x_i), row-major.
  const std::vector<double>& nodal_derivative(int order) const {
    return diff_powers_[order];
  }

 private:
  int degree_;
  std::vector<double> nodes_;
  std::vector<double> bary_weights_;
  std::vector<std::vector<double>> diff_powers_;  // D^0 .. D^p
};

/// Table of basis values and first reference derivatives at a set of points.
/// Index: point-major, entry [q * num_basis + k].
struct BasisTable {
  std::size_t num_points = 0;
  std::size_t num_basis = 0;
  std::vector<double> values;
  std::vector<double> ds;
  std::vector<double> dt;

  double value(std::size_t q, std::size_t k) const { return values[q * num_basis + k]; }
};

/// Tensor-product Q_p basis on [-1,1]^2; local index k = j * (p+1) + i for
/// the function that is 1 at (xi_i, xi_j).
class Basis2D {
 public:
  explicit Basis2D(int degree);

  int degree() const { return line_.degree(); }
  int size() const { return line_.size() * line_.size(); }
  int index(int i, int j) const { return j * line_.size() + i; }
  const LagrangeBasis1D& line() const { return line_; }

  void evaluate(Point2 ref, std::span<double> values, std::span<double> ds,
                std::span<double> dt) const;

 private:
  LagrangeBasis1D line_;
};

BasisTable basis_eval_grid(const Basis2D& basis, std::span<const Point2> points);

}  // namespace cutspec
