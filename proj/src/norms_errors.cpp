#include "cutspec/norms_errors.hpp"

#include <algorithm>
#include <cmath>

#include "cutspec/error.hpp"

namespace cutspec {

DiscreteFunction::DiscreteFunction(const Discretization& disc, Vector coefficients)
    : disc_(&disc), coeffs_(std::move(coefficients)) {
  if (coeffs_.size() != disc.dofs().num_dofs())
    fail(ErrorCode::DimensionMismatch, "coefficient vector does not match the DOF map");
}

DiscreteFunction::Sample DiscreteFunction::evaluate(int e, Point2 x, Side s) const {
  const auto dofs = disc_->dofs().element_dofs(e, s);
  if (dofs.empty()) fail(ErrorCode::InvalidArgument, "element is not in the requested submesh");
  const int nb = static_cast<int>(dofs.size());
  std::vector<double> v(nb), ds(nb), dt(nb);
  disc_->basis().evaluate(disc_->to_reference(e, x), v, ds, dt);
  const Rect& r = disc_->mesh().element(e).bounds;
  Sample out;
  double gs = 0.0, gt = 0.0;
  for (int k = 0; k < nb; ++k) {
    const double c = coeffs_[dofs[k]];
    out.value += c * v[k];
    gs += c * ds[k];
    gt += c * dt[k];
  }
  out.gradient = {2.0 * gs / r.width(), 2.0 * gt / r.height()};
  return out;
}

int DiscreteFunction::locate(Point2 x) const {
  const CutMesh& mesh = disc_->mesh();
  const Rect& d = mesh.domain();
  const int n = mesh.n();
  const int i = std::clamp(static_cast<int>(std::floor((x.x - d.x0) / mesh.hx())), 0, n - 1);
  const int j = std::clamp(static_cast<int>(std::floor((x.y - d.y0) / mesh.hy())), 0, n - 1);
  return mesh.element_index(i, j);
}

DiscreteFunction::Sample DiscreteFunction::evaluate(Point2 x, Side s) const {
  return evaluate(locate(x), x, s);
}

namespace {

// Calls body(e, side, rule) for every nonempty piece K cap Omega_side at q points.
template <class Body>
void for_each_piece(const Discretization& disc, int q, Body&& body) {
  const CutMesh& mesh = disc.mesh();
  for (int e = 0; e < mesh.num_elements(); ++e) {
    const ElementRecord& el = mesh.element(e);
    if (el.cls == ElementClass::Cut) {
      const ElementRules rules = q == disc.q() ? disc.cut_rules(e)
                                               : element_rules(el.bounds, disc.level_set(), q);
      for (const Side s : kSides)
        if (!rules.side(s).empty()) body(e, s, rules.side(s));
    } else {
      body(e, el.cls == ElementClass::Neg ? Side::Neg : Side::Pos, tensor_rule(el.bounds, q));
    }
  }
}

int error_q(const DiscreteFunction& uh, int q) {
  return q > 0 ? q : uh.discretization().q() + 2;
}

}  // namespace

double broken_l2_error(const DiscreteFunction& uh, const ExactSolution& exact, int q) {
  double sum = 0.0;
  for_each_piece(uh.discretization(), error_q(uh, q), [&](int e, Side s, const VolumeRule& rule) {
    for (std::size_t k = 0; k < rule.size(); ++k) {
      const double d = uh.evaluate(e, rule.points[k], s).value - exact.value(rule.points[k], s);
      sum += rule.weights[k] * d * d;
    }
  });
  return std::sqrt(sum);
}

double broken_h1_error(const DiscreteFunction& uh, const ExactSolution& exact, int q) {
  double sum = 0.0;
  for_each_piece(uh.discretization(), error_q(uh, q), [&](int e, Side s, const VolumeRule& rule) {
    for (std::size_t k = 0; k < rule.size(); ++k) {
      const Vec2 g = uh.evaluate(e, rule.points[k], s).gradient;
      const Vec2 ge = exact.gradient(rule.points[k], s);
      const double dx = g.x - ge.x, dy = g.y - ge.y;
      sum += rule.weights[k] * (dx * dx + dy * dy);
    }
  });
  return std::sqrt(sum);
}

double energy_norm(const DiscreteFunction& v, Coefficients alpha, const SparseSymMatrix& ghost) {
  const Discretization& disc = v.discretization();
  if (ghost.rows() != v.coefficients().size())
    fail(ErrorCode::DimensionMismatch, "ghost matrix does not match the function");
  const double h = disc.h();
  const double p2 = static_cast<double>(disc.degree()) * disc.degree();

  double grad = 0.0;
  for_each_piece(disc, disc.q(), [&](int e, Side s, const VolumeRule& rule) {
    for (std::size_t k = 0; k < rule.size(); ++k) {
      const Vec2 g = v.evaluate(e, rule.points[k], s).gradient;
      grad += rule.weights[k] * (g.x * g.x + g.y * g.y);
    }
  });

  double flux = 0.0, jump = 0.0;
  const CutMesh& mesh = disc.mesh();
  for (int e = 0; e < mesh.num_elements(); ++e) {
    if (mesh.element(e).cls != ElementClass::Cut) continue;
    const ElementRules& rules = disc.cut_rules(e);
    if (rules.gamma.empty()) continue;
    const Rect& r = mesh.element(e).bounds;
    const NitscheCoefficients c =
        compute_nitsche_coeffs(rules, alpha, std::max(r.width(), r.height()));
    for (std::size_t k = 0; k < rules.gamma.size(); ++k) {
      const Point2 x = rules.gamma.points[k];
      const Vec2 n = rules.gamma.normals[k];
      const auto vp = v.evaluate(e, x, Side::Pos), vn = v.evaluate(e, x, Side::Neg);
      const double avg = c.kappa_pos * alpha.alpha_pos * dot(vp.gradient, n) +
                         c.kappa_neg * alpha.alpha_neg * dot(vn.gradient, n);
      const double jmp = vp.value - vn.value;
      flux += rules.gamma.weights[k] * avg * avg;
      jump += rules.gamma.weights[k] * jmp * jmp;
    }
  }

  const Vector& x = v.coefficients();
  const double g = x.dot(ghost * x);
  return std::sqrt(std::max(grad + (h / p2) * flux + (p2 / h) * jump + g / (h * h), 0.0));
}

double ghost_form_direct(const DiscreteFunction& v) {
  const Discretization& disc = v.discretization();
  const CutMesh& mesh = disc.mesh();
  const LagrangeBasis1D& line = disc.basis().line();
  const int p = disc.degree();
  const int n1 = line.size();
  const double h = disc.h();
  std::vector<double> normal_left(n1), normal_right(n1), tangential(n1);

  double total = 0.0;
  for (const Side s : kSides) {
    for (const Face& face : mesh.ghost_faces_of(s)) {
      const LineRule rule = face_rule(face, disc.q());
      const auto left = disc.dofs().element_dofs(face.left, s);
      const auto right = disc.dofs().element_dofs(face.right, s);
      const bool vertical = face.vertical();
      const double hn = vertical ? mesh.hx() : mesh.hy();
      for (int j = 0; j <= p; ++j) {
        line.derivatives(1.0, j, normal_left);
        line.derivatives(-1.0, j, normal_right);
        const double scale = std::pow(2.0 / hn, j);
        const double coeff = std::pow(h, 2 * j + 1) / std::pow(static_cast<double>(p), 2 * j);
        for (std::size_t k = 0; k < rule.size(); ++k) {
          const Point2 x = rule.points[k];
          const Point2 ref = disc.to_reference(face.left, x);
          line.values(vertical ? ref.y : ref.x, tangential);
          double dl = 0.0, dr = 0.0;
          for (int b = 0; b < n1; ++b)
            for (int a = 0; a < n1; ++a) {
              const int loc = b * n1 + a;
              const double w = vertical ? normal_left[a] * tangential[b] : tangential[a] * normal_left[b];
              const double wr = vertical ? normal_right[a] * tangential[b] : tangential[a] * normal_right[b];
              dl += v.coefficients()[left[loc]] * w;
              dr += v.coefficients()[right[loc]] * wr;
            }
          const double jmp = scale * (dr - dl);
          total += coeff * rule.weights[k] * jmp * jmp;
        }
      }
    }
  }
  return total;
}

std::vector<double> eigenvalue_errors(const std::vector<double>& computed,
                                      const std::vector<double>& reference) {
  if (computed.size() != reference.size())
    fail(ErrorCode::LengthMismatch, "eigenvalue lists differ in length");
  std::vector<double> a = computed, b = reference;
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = std::abs(a[i] - b[i]) / std::abs(b[i]);
  return out;
}

}  // namespace cutspec
