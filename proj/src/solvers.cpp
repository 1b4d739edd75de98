#include "cutspec/solvers.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include <Eigen/CholmodSupport>
#include <Eigen/Eigenvalues>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>

#include "cutspec/error.hpp"

namespace cutspec {

namespace {

constexpr double kRefineTarget = 1e-10;
constexpr int kMaxRefinement = 8;

double inf_norm(const SparseSymMatrix& a) {
  Vector rows = Vector::Zero(a.rows());
  for (int k = 0; k < a.outerSize(); ++k)
    for (SparseSymMatrix::InnerIterator it(a, k); it; ++it) rows[it.row()] += std::abs(it.value());
  return a.rows() == 0 ? 0.0 : rows.maxCoeff();
}

// A factorization can report success and still be wrong when the BLAS
// kernel misbehaves, so check one solve against a known right-hand side.
template <class Solver>
bool solves_probe(const Solver& solver, const SparseSymMatrix& a) {
  Vector x(a.rows());
  for (Eigen::Index i = 0; i < x.size(); ++i) x[i] = 1.0 + 0.5 * std::sin(0.7 * static_cast<double>(i));
  const Vector b = a * x;
  const Vector r = b - a * Vector(solver.solve(b));
  return std::isfinite(r.norm()) && r.norm() <= 1e-8 * b.norm();
}

}  // namespace

// ---------------------------------------------------------------------------
// Factorization

struct Factorization::Impl {
  std::unique_ptr<Eigen::CholmodSupernodalLLT<SparseSymMatrix, Eigen::Lower>> llt;
  std::unique_ptr<Eigen::CholmodSimplicialLLT<SparseSymMatrix, Eigen::Lower>> simplicial;
  std::unique_ptr<Eigen::SimplicialLDLT<SparseSymMatrix, Eigen::Lower>> ldlt;
  std::unique_ptr<Eigen::SparseLU<SparseSymMatrix>> lu;
};

Factorization::Factorization(const SparseSymMatrix& a) : impl_(std::make_unique<Impl>()) {
  if (a.rows() != a.cols()) fail(ErrorCode::DimensionMismatch, "matrix is not square");
  n_ = static_cast<int>(a.rows());
  if (n_ == 0) {
    method_ = "empty";
    return;
  }

  impl_->llt = std::make_unique<Eigen::CholmodSupernodalLLT<SparseSymMatrix, Eigen::Lower>>();
  impl_->llt->cholmod().print = 0;
  impl_->llt->compute(a);
  if (impl_->llt->info() == Eigen::Success && solves_probe(*impl_->llt, a)) {
    method_ = "cholmod-supernodal-llt";
    return;
  }
  impl_->llt.reset();

  // The supernodal path depends on the LAPACK kernel; the simplicial one does not.
  impl_->simplicial = std::make_unique<Eigen::CholmodSimplicialLLT<SparseSymMatrix, Eigen::Lower>>();
  impl_->simplicial->cholmod().print = 0;
  impl_->simplicial->compute(a);
  if (impl_->simplicial->info() == Eigen::Success && solves_probe(*impl_->simplicial, a)) {
    method_ = "cholmod-simplicial-llt";
    return;
  }
  impl_->simplicial.reset();

  impl_->ldlt = std::make_unique<Eigen::SimplicialLDLT<SparseSymMatrix, Eigen::Lower>>(a);
  if (impl_->ldlt->info() == Eigen::Success) {
    const auto d = impl_->ldlt->vectorD();
    const double dmax = d.cwiseAbs().maxCoeff();
    if (dmax > 0.0 && d.cwiseAbs().minCoeff() > 1e-14 * dmax) {
      method_ = "simplicial-ldlt";
      return;
    }
  }
  impl_->ldlt.reset();

  impl_->lu = std::make_unique<Eigen::SparseLU<SparseSymMatrix>>();
  impl_->lu->compute(a);
  if (impl_->lu->info() != Eigen::Success)
    fail(ErrorCode::SingularMatrix, "no factorization succeeded: " + impl_->lu->lastErrorMessage());
  method_ = "sparse-lu";
}

Factorization::~Factorization() = default;

Vector Factorization::solve(const Vector& b) const {
  if (b.size() != n_) fail(ErrorCode::DimensionMismatch, "right-hand side length");
  if (n_ == 0) return Vector();
  if (impl_->llt) return impl_->llt->solve(b);
  if (impl_->simplicial) return impl_->simplicial->solve(b);
  if (impl_->ldlt) return impl_->ldlt->solve(b);
  return impl_->lu->solve(b);
}

Eigen::MatrixXd Factorization::solve(const Eigen::MatrixXd& b) const {
  if (b.rows() != n_) fail(ErrorCode::DimensionMismatch, "right-hand side rows");
  if (n_ == 0) return Eigen::MatrixXd(0, b.cols());
  if (impl_->llt) return impl_->llt->solve(b);
  if (impl_->simplicial) return impl_->simplicial->solve(b);
  if (impl_->ldlt) return impl_->ldlt->solve(b);
  return impl_->lu->solve(b);
}

// ---------------------------------------------------------------------------
// Source solve

SolveReport solve_source(const SparseSymMatrix& a, const Vector& b) {
  if (a.rows() != b.size()) fail(ErrorCode::DimensionMismatch, "matrix and right-hand side");
  SolveReport report;
  const double bnorm = b.norm();
  if (bnorm == 0.0) {
    report.x = Vector::Zero(b.size());
    report.method = "trivial";
    return report;
  }
  const Factorization fact(a);
  report.method = fact.method();
  report.x = fact.solve(b);
  Vector r = b - a * report.x;
  report.residual = r.norm() / bnorm;
  while (report.residual > 0.01 * kRefineTarget && report.refinement_steps < kMaxRefinement) {
    const Vector x_new = report.x + fact.solve(r);
    const Vector r_new = b - a * x_new;
    const double res_new = r_new.norm() / bnorm;
    ++report.refinement_steps;
    if (!(res_new < report.residual)) break;
    report.x = x_new;
    r = r_new;
    report.residual = res_new;
  }
  if (!std::isfinite(report.residual))
    fail(ErrorCode::SingularMatrix, "solution is not finite");
  report.refinement_stalled = report.residual > kRefineTarget;
  return report;
}

// ---------------------------------------------------------------------------
// Eigenvalues

EigenResult dense_smallest_eigs(const SparseSymMatrix& a, const SparseSymMatrix& m, int k) {
  const int n = static_cast<int>(a.rows());
  if (a.cols() != n || m.rows() != n || m.cols() != n)
    fail(ErrorCode::DimensionMismatch, "pencil sizes differ");
  if (k < 1 || k > n) fail(ErrorCode::InvalidArgument, "k must lie in [1, n]");
  if (n >= 2000) fail(ErrorCode::InvalidArgument, "dense eigensolver limited to n < 2000");
  const Eigen::MatrixXd ad = Eigen::MatrixXd(a), md = Eigen::MatrixXd(m);
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(
      0.5 * (ad + ad.transpose()), 0.5 * (md + md.transpose()));
  if (es.info() != Eigen::Success)
    fail(ErrorCode::FactorizationFailed, "dense generalized eigensolver failed");
  EigenResult out;
  out.eigenvectors = es.eigenvectors().leftCols(k);
  const double anorm = std::max(inf_norm(a), 1e-300);
  for (int i = 0; i < k; ++i) {
    const double lam = es.eigenvalues()[i];
    out.eigenvalues.push_back(lam);
    const Vector u = out.eigenvectors.col(i);
    out.residuals.push_back((a * u - lam * (m * u)).norm() / (anorm * u.norm()));
  }
  return out;
}

namespace {

// M-orthonormal basis Q together with the cached products A Q and M Q.
class KrylovBasis {
 public:
  KrylovBasis(const SparseSymMatrix& a, const SparseSymMatrix& m, int capacity, std::uint64_t seed)
      : a_(a), m_(m), q_(a.rows(), capacity), aq_(a.rows(), capacity), mq_(a.rows(), capacity),
        rng_(seed) {}

  int cols() const { return cols_; }
  int capacity() const { return static_cast<int>(q_.cols()); }
  auto q() const { return q_.leftCols(cols_); }
  auto aq() const { return aq_.leftCols(cols_); }
  auto mq() const { return mq_.leftCols(cols_); }

  Vector random_vector() {
    std::normal_distribution<double> normal;
    Vector v(q_.rows());
    for (int i = 0; i < v.size(); ++i) v[i] = normal(rng_);
    return v;
  }

  // Adds the M-orthogonalized direction; a collapsed direction is replaced
  // by a random one. Returns false once no new direction can be found.
  bool add(Vector v) {
    if (cols_ >= capacity()) return false;
    for (int attempt = 0; attempt < 4; ++attempt) {
      const double before = std::sqrt(std::max(v.dot(m_ * v), 0.0));
      for (int pass = 0; pass < 2 && cols_ > 0; ++pass) v -= q() * (mq().transpose() * v);
      const Vector mv = m_ * v;
      const double norm = std::sqrt(std::max(v.dot(mv), 0.0));
      if (before > 0.0 && norm > 1e-8 * before && std::isfinite(norm)) {
        q_.col(cols_) = v / norm;
        mq_.col(cols_) = mv / norm;
        aq_.col(cols_) = (a_ * v) / norm;
        ++cols_;
        return true;
      }
      v = random_vector();
    }
    return false;
  }

  // Replaces the basis by Q Y for Y with orthonormal columns.
  void compress(const Eigen::MatrixXd& y) {
    const int keep = static_cast<int>(y.cols());
    const Eigen::MatrixXd new_q = q() * y, new_aq = aq() * y, new_mq = mq() * y;
    q_.leftCols(keep) = new_q;
    aq_.leftCols(keep) = new_aq;
    mq_.leftCols(keep) = new_mq;
    cols_ = keep;
  }

 private:
  const SparseSymMatrix& a_;
  const SparseSymMatrix& m_;
  Eigen::MatrixXd q_, aq_, mq_;
  int cols_ = 0;
  std::mt19937_64 rng_;
};

EigenResult lanczos_smallest(const SparseSymMatrix& a, const SparseSymMatrix& m, int k,
                             const EigenOptions& opt) {
  const int n = static_cast<int>(a.rows());
  if (a.cols() != n || m.rows() != n || m.cols() != n)
    fail(ErrorCode::DimensionMismatch, "pencil sizes differ");
  if (k < 1 || k > n) fail(ErrorCode::InvalidArgument, "k must lie in [1, n]");
  const int b = std::max(1, opt.block_size);
  const int capacity = opt.max_basis > 0 ? std::max(opt.max_basis, k + 3 * b)
                                         : std::max(4 * k + 8 * b, 64);
  if (n <= capacity) return dense_smallest_eigs(a, m, k);

  std::unique_ptr<Factorization> fact;
  try {
    fact = std::make_unique<Factorization>(a);
  } catch (const Error& e) {
    fail(ErrorCode::FactorizationFailed, e.what());
  }
  const double anorm = std::max(inf_norm(a), 1e-300);

  KrylovBasis basis(a, m, capacity, opt.seed);
  for (int j = 0; j < b; ++j) basis.add(basis.random_vector());
  int block_start = 0, block_end = basis.cols();
  const int keep = std::min(capacity - b, std::max(k + b, 2 * b));

  auto ritz = [&basis] {
    Eigen::MatrixXd t = basis.q().transpose() * basis.aq();
    t = 0.5 * (t + t.transpose()).eval();
    return Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(t);
  };

  EigenResult out;
  out.converged = false;
  for (int iter = 1; iter <= opt.max_iterations; ++iter) {
    out.iterations = iter;
    if (basis.cols() + (block_end - block_start) > basis.capacity()) {
      // Restart: keep the lowest Ritz vectors and expand from them. A Ritz
      // vector of the A-projection is not a Krylov vector of A^{-1} M, so
      // continuing from the old block would stall.
      basis.compress(ritz().eigenvectors().leftCols(std::min(keep, basis.cols())));
      block_start = 0;
      block_end = std::min(basis.cols(), basis.capacity() - basis.cols());
    }
    // Next block: A^{-1} M applied to the newest block.
    const Eigen::MatrixXd w =
        fact->solve(Eigen::MatrixXd(basis.mq().middleCols(block_start, block_end - block_start)));
    block_start = basis.cols();
    for (int j = 0; j < w.cols(); ++j)
      if (!basis.add(w.col(j))) break;
    block_end = basis.cols();
    if (block_end == block_start) {
      // Invariant subspace reached; restart from fresh random directions.
      for (int j = 0; j < b && basis.cols() < basis.capacity(); ++j) basis.add(basis.random_vector());
      block_end = basis.cols();
    }

    const auto es = ritz();
    const int wanted = std::min(k, basis.cols());
    const Eigen::MatrixXd y = es.eigenvectors().leftCols(wanted);
    const Eigen::MatrixXd r =
        basis.aq() * y - (basis.mq() * y) * es.eigenvalues().head(wanted).asDiagonal();
    const Eigen::MatrixXd u = basis.q() * y;
    out.eigenvalues.assign(es.eigenvalues().data(), es.eigenvalues().data() + wanted);
    out.residuals.resize(wanted);
    bool done = wanted == k;
    for (int i = 0; i < wanted; ++i) {
      out.residuals[i] = r.col(i).norm() / (anorm * u.col(i).norm());
      done = done && out.residuals[i] < opt.tolerance;
    }
    out.eigenvectors = u;
    if (done) {
      out.converged = true;
      return out;
    }
  }
  return out;
}

}  // namespace

EigenResult solve_smallest_eigs_partial(const SparseSymMatrix& a, const SparseSymMatrix& m, int k,
                                        const EigenOptions& options) {
  return lanczos_smallest(a, m, k, options);
}

EigenResult solve_smallest_eigs(const SparseSymMatrix& a, const SparseSymMatrix& m, int k,
                                const EigenOptions& options) {
  EigenResult out = lanczos_smallest(a, m, k, options);
  if (!out.converged)
    fail(ErrorCode::NotConverged, "block Lanczos did not reach the residual tolerance in " +
                                      std::to_string(out.iterations) + " iterations");
  return out;
}

// ---------------------------------------------------------------------------
// Condition numbers

namespace {

double largest_eigenvalue(const SparseSymMatrix& a, std::uint64_t seed) {
  const int n = static_cast<int>(a.rows());
  if (n <= 200) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Eigen::MatrixXd(a), Eigen::EigenvaluesOnly);
    return es.eigenvalues()[n - 1];
  }
  // Lanczos with full reorthogonalization.
  const int max_steps = std::min(n, 150);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  Eigen::MatrixXd q(n, max_steps);
  Vector v(n);
  for (int i = 0; i < n; ++i) v[i] = normal(rng);
  q.col(0) = v.normalized();
  std::vector<double> alpha, beta;
  double previous = 0.0;
  for (int j = 0; j < max_steps; ++j) {
    Vector w = a * q.col(j);
    alpha.push_back(q.col(j).dot(w));
    for (int pass = 0; pass < 2; ++pass) w -= q.leftCols(j + 1) * (q.leftCols(j + 1).transpose() * w);
    const double bnorm = w.norm();
    const int m = j + 1;
    if ((m % 10 == 0) || bnorm < 1e-12 || m == max_steps) {
      Eigen::MatrixXd t = Eigen::MatrixXd::Zero(m, m);
      for (int i = 0; i < m; ++i) {
        t(i, i) = alpha[i];
        if (i + 1 < m) t(i, i + 1) = t(i + 1, i) = beta[i];
      }
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(t, Eigen::EigenvaluesOnly);
      const double current = es.eigenvalues()[m - 1];
      if (bnorm < 1e-12 || std::abs(current - previous) <= 1e-10 * std::abs(current)) return current;
      previous = current;
    }
    if (j + 1 == max_steps) break;
    beta.push_back(bnorm);
    q.col(j + 1) = w / bnorm;
  }
  return previous;
}

}  // namespace

ConditionEstimate estimate_extreme_eigenvalues(const SparseSymMatrix& a, std::uint64_t seed) {
  if (a.rows() != a.cols()) fail(ErrorCode::DimensionMismatch, "matrix is not square");
  if (a.rows() == 0) fail(ErrorCode::InvalidArgument, "empty matrix");
  ConditionEstimate est;
  est.lambda_max = largest_eigenvalue(a, seed);
  SparseSymMatrix identity(a.rows(), a.cols());
  identity.setIdentity();
  EigenOptions opt;
  opt.seed = seed;
  opt.tolerance = 1e-10;
  est.lambda_min = solve_smallest_eigs_partial(a, identity, 1, opt).eigenvalues.at(0);
  return est;
}

double condition_estimate(const SparseSymMatrix& a, std::uint64_t seed) {
  return estimate_extreme_eigenvalues(a, seed).condition();
}

}  // namespace cutspec
