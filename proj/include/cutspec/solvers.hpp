#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "cutspec/assembly.hpp"

namespace cutspec {

/// Sparse symmetric factorization. Tries supernodal Cholesky first, then
/// LDL^T for indefinite matrices, then sparse LU.
class Factorization {
 public:
  explicit Factorization(const SparseSymMatrix& a);
  ~Factorization();
  Factorization(const Factorization&) = delete;
  Factorization& operator=(const Factorization&) = delete;

  Vector solve(const Vector& b) const;
  Eigen::MatrixXd solve(const Eigen::MatrixXd& b) const;
  const std::string& method() const { return method_; }
  int size() const { return n_; }

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  std::string method_;
  int n_ = 0;
};

struct SolveReport {
  Vector x;
  double residual = 0.0;  // ||b - A x|| / ||b||
  int refinement_steps = 0;
  bool refinement_stalled = false;
  std::string method;
};

/// Factorize and solve with iterative refinement down to 1e-10 relative
/// residual. Throws SingularMatrix if no factorization succeeds.
SolveReport solve_source(const SparseSymMatrix& a, const Vector& b);

struct EigenResult {
  std::vector<double> eigenvalues;  // ascending
  Eigen::MatrixXd eigenvectors;     // M-orthonormal columns
  std::vector<double> residuals;    // ||A u - lambda M u|| / (||A|| ||u||)
  bool converged = true;
  int iterations = 0;
};

struct EigenOptions {
  std::uint64_t seed = 0x5EED;
  int block_size = 4;
  double tolerance = 1e-11;
  int max_basis = 0;  // 0 selects max(4 k + 8 block, 64)
  int max_iterations = 500;
};

/// Smallest k eigenpairs of A u = lambda M u by block shift-invert Lanczos
/// at shift 0 with full M-reorthogonalization and thick restarts.
/// Throws FactorizationFailed, or NotConverged carrying no result; use
/// solve_smallest_eigs_partial to get the flagged partial result instead.
EigenResult solve_smallest_eigs(const SparseSymMatrix& a, const SparseSymMatrix& m, int k,
                                const EigenOptions& options = {});
EigenResult solve_smallest_eigs_partial(const SparseSymMatrix& a, const SparseSymMatrix& m, int k,
                                        const EigenOptions& options = {});

/// Dense generalized solver for n < 2000, used as an oracle.
EigenResult dense_smallest_eigs(const SparseSymMatrix& a, const SparseSymMatrix& m, int k);

struct ConditionEstimate {
  double lambda_min = 0.0;
  double lambda_max = 0.0;
  double condition() const { return lambda_max / lambda_min; }
};

/// 2-norm condition number of a symmetric positive definite matrix:
/// Lanczos for lambda_max and shift-invert for lambda_min.
ConditionEstimate estimate_extreme_eigenvalues(const SparseSymMatrix& a,
                                               std::uint64_t seed = 0x5EED);
double condition_estimate(const SparseSymMatrix& a, std::uint64_t seed = 0x5EED);

}  // namespace cutspec
