#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "cutspec/assembly.hpp"

namespace cutspec {

/// Element of V = V_+ (+) V_- given by its coefficient vector.
class DiscreteFunction {
 public:
  struct Sample {
    double value = 0.0;
    Vec2 gradient;
  };

  DiscreteFunction(const Discretization& disc, Vector coefficients);

  const Discretization& discretization() const { return *disc_; }
  const Vector& coefficients() const { return coeffs_; }

  /// Side-s component at x, using element e. Throws InvalidArgument if e is
  /// not in T_{s,h}.
  Sample evaluate(int e, Point2 x, Side s) const;
  /// Locates the element containing x (ties go to the lower index).
  Sample evaluate(Point2 x, Side s) const;
  int locate(Point2 x) const;

 private:
  const Discretization* disc_;
  Vector coeffs_;
};

using SidedGradient = std::function<Vec2(Point2, Side)>;

struct ExactSolution {
  SidedField value;
  SidedGradient gradient;
  std::optional<JumpData> jumps;
};

/// Broken norms over Omega_+ and Omega_- integrated with cut quadrature of
/// q points per direction; q <= 0 selects disc.q() + 2.
double broken_l2_error(const DiscreteFunction& uh, const ExactSolution& exact, int q = 0);
double broken_h1_error(const DiscreteFunction& uh, const ExactSolution& exact, int q = 0);

/// sqrt(|v|^2 + (h/p^2) sum ||{alpha d_n v}||^2_Gamma + (p^2/h) sum ||[[v]]||^2_Gamma
///      + g(v, v) / h^2), with g taken from the assembled ghost matrix.
double energy_norm(const DiscreteFunction& v, Coefficients alpha, const SparseSymMatrix& ghost);

/// g(v, v) evaluated face by face from pointwise normal derivatives of v,
/// independently of the assembled matrix.
double ghost_form_direct(const DiscreteFunction& v);

/// |lambda_i - ref_i| / ref_i by sorted index. Throws LengthMismatch.
std::vector<double> eigenvalue_errors(const std::vector<double>& computed,
                                      const std::vector<double>& reference);

}  // namespace cutspec
