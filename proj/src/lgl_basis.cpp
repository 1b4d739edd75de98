#include "cutspec/lgl_basis.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "cutspec/error.hpp"

namespace cutspec {

LegendreValue legendre_eval(int n, double x) {
  if (n < 0) fail(ErrorCode::InvalidArgument, "legendre degree must be >= 0");
  if (n == 0) return {1.0, 0.0};
  // L'_{k+1} = L'_{k-1} + (2k+1) L_k avoids the 1/(1-x^2) singularity.
  double l_prev = 1.0, l_cur = x;
  double d_prev = 0.0, d_cur = 1.0;
  for (int k = 1; k < n; ++k) {
    const double l_next = ((2 * k + 1) * x * l_cur - k * l_prev) / (k + 1);
    const double d_next = d_prev + (2 * k + 1) * l_cur;
    l_prev = l_cur;
    l_cur = l_next;
    d_prev = d_cur;
    d_cur = d_next;
  }
  return {l_cur, d_cur};
}

NodeSet1D lgl_points(int p) {
  if (p < 1) fail(ErrorCode::InvalidArgument, "LGL degree must be >= 1");
  NodeSet1D set;
  set.degree = p;
  set.nodes.assign(p + 1, 0.0);
  set.nodes[0] = -1.0;
  set.nodes[p] = 1.0;
  // Newton on g(x) = (1-x^2) L_p'(x), with g'(x) = -p(p+1) L_p(x).
  for (int k = 1; k < p; ++k) {
    double x = -std::cos(std::numbers::pi * k / p);
    bool converged = false;
    for (int it = 0; it < 100; ++it) {
      const auto [l, dl] = legendre_eval(p, x);
      const double g = (1.0 - x * x) * dl;
      const double step = g / (-p * (p + 1.0) * l);
      x -= step;
      if (std::abs(step) <= 1e-16 * std::max(1.0, std::abs(x))) {
        converged = true;
        break;
      }
    }
    if (!converged) {
      // One last acceptance test on the residual before giving up.
      const auto [l, dl] = legendre_eval(p, x);
      if (std::abs((1.0 - x * x) * dl) > 1e-13)
        fail(ErrorCode::NonConvergence, "LGL Newton iteration, p=" + std::to_string(p));
    }
    set.nodes[k] = x;
  }
  for (int k = 1; k < p; ++k) {
    const double sym = 0.5 * (set.nodes[k] - set.nodes[p - k]);
    set.nodes[k] = sym;
    set.nodes[p - k] = -sym;
  }
  if (p % 2 == 0) set.nodes[p / 2] = 0.0;
  return set;
}

QuadRule1D gauss_legendre(int n) {
  if (n < 1) fail(ErrorCode::InvalidArgument, "Gauss rule size must be >= 1");
  QuadRule1D rule;
  rule.nodes.assign(n, 0.0);
  rule.weights.assign(n, 0.0);
  for (int k = 0; k < (n + 1) / 2; ++k) {
    double x = std::cos(std::numbers::pi * (k + 0.75) / (n + 0.5));
    bool converged = false;
    for (int it = 0; it < 100; ++it) {
      const auto [l, dl] = legendre_eval(n, x);
      const double step = l / dl;
      x -= step;
      if (std::abs(step) <= 1e-16) {
        converged = true;
        break;
      }
    }
    if (!converged && std::abs(legendre_eval(n, x).value) > 1e-13)
      fail(ErrorCode::NonConvergence, "Gauss-Legendre Newton, n=" + std::to_string(n));
    const double dl = legendre_eval(n, x).derivative;
    const double w = 2.0 / ((1.0 - x * x) * dl * dl);
    rule.nodes[k] = -x;
    rule.nodes[n - 1 - k] = x;
    rule.weights[k] = w;
    rule.weights[n - 1 - k] = w;
  }
  if (n % 2 == 1) rule.nodes[n / 2] = 0.0;
  return rule;
}

QuadRule1D gauss_legendre(int n, double a, double b) {
  QuadRule1D rule = gauss_legendre(n);
  const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
  for (std::size_t k = 0; k < rule.size(); ++k) {
    rule.nodes[k] = mid + half * rule.nodes[k];
    rule.weights[k] *= half;
  }
  return rule;
}

LagrangeBasis1D::LagrangeBasis1D(int degree) : degree_(degree) {
  if (degree < 1 || degree > kMaxDegree)
    fail(ErrorCode::InvalidArgument,
         "polynomial degree must be in [1, " + std::to_string(kMaxDegree) + "]");
  nodes_ = lgl_points(degree).nodes;
  const int n = size();
  bary_weights_.assign(n, 1.0);
  for (int j = 0; j < n; ++j)
    for (int k = 0; k < n; ++k)
      if (k != j) bary_weights_[j] /= (nodes_[j] - nodes_[k]);

  std::vector<double> d(n * n, 0.0);
  for (int i = 0; i < n; ++i) {
    double row_sum = 0.0;
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      d[i * n + j] = (bary_weights_[j] / bary_weights_[i]) / (nodes_[i] - nodes_[j]);
      row_sum += d[i * n + j];
    }
    d[i * n + i] = -row_sum;
  }

  diff_powers_.resize(degree + 1);
  diff_powers_[0].assign(n * n, 0.0);
  for (int i = 0; i < n; ++i) diff_powers_[0][i * n + i] = 1.0;
  for (int order = 1; order <= degree; ++order) {
    auto& cur = diff_powers_[order];
    const auto& prev = diff_powers_[order - 1];
    cur.assign(n * n, 0.0);
    for (int i = 0; i < n; ++i)
      for (int m = 0; m < n; ++m) {
        const double dim = d[i * n + m];
        for (int j = 0; j < n; ++j) cur[i * n + j] += dim * prev[m * n + j];
      }
  }
}

void LagrangeBasis1D::values(double x, std::span<double> out) const {
  const int n = size();
  for (int j = 0; j < n; ++j) {
    if (x == nodes_[j]) {
      std::fill(out.begin(), out.begin() + n, 0.0);
      out[j] = 1.0;
      return;
    }
  }
  double denom = 0.0;
  for (int j = 0; j < n; ++j) {
    out[j] = bary_weights_[j] / (x - nodes_[j]);
    denom += out[j];
  }
  for (int j = 0; j < n; ++j) out[j] /= denom;
}

void LagrangeBasis1D::derivatives(double x, int order, std::span<double> out) const {
  const int n = size();
  if (order == 0) {
    values(x, out);
    return;
  }
  std::fill(out.begin(), out.begin() + n, 0.0);
  if (order > degree_) return;
  double lv[kMaxDegree + 1];
  values(x, std::span<double>(lv, n));
  const auto& dk = diff_powers_[order];
  for (int m = 0; m < n; ++m) {
    if (lv[m] == 0.0) continue;
    for (int j = 0; j < n; ++j) out[j] += lv[m] * dk[m * n + j];
  }
}

Basis2D::Basis2D(int degree) : line_(degree) {}

void Basis2D::evaluate(Point2 ref, std::span<double> values, std::span<double> ds,
                       std::span<double> dt) const {
  const int n = line_.size();
  double ls[kMaxDegree + 1], lt[kMaxDegree + 1], dls[kMaxDegree + 1], dlt[kMaxDegree + 1];
  line_.values(ref.x, std::span<double>(ls, n));
  line_.values(ref.y, std::span<double>(lt, n));
  line_.derivatives(ref.x, 1, std::span<double>(dls, n));
  line_.derivatives(ref.y, 1, std::span<double>(dlt, n));
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      const int k = j * n + i;
      values[k] = ls[i] * lt[j];
      ds[k] = dls[i] * lt[j];
      dt[k] = ls[i] * dlt[j];
    }
}

BasisTable basis_eval_grid(const Basis2D& basis, std::span<const Point2> points) {
  BasisTable table;
  table.num_points = points.size();
  table.num_basis = basis.size();
  const std::size_t total = table.num_points * table.num_basis;
  table.values.resize(total);
  table.ds.resize(total);
  table.dt.resize(total);
  for (std::size_t q = 0; q < points.size(); ++q) {
    const std::size_t off = q * table.num_basis;
    basis.evaluate(points[q], std::span<double>(table.values.data() + off, table.num_basis),
                   std::span<double>(table.ds.data() + off, table.num_basis),
                   std::span<double>(table.dt.data() + off, table.num_basis));
  }
  return table;
}

}  // namespace cutspec
