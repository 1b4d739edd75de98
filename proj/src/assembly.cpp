#include "cutspec/assembly.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "cutspec/error.hpp"

namespace cutspec {

double symmetry_defect(const SparseSymMatrix& a) {
  double max_entry = 0.0;
  for (int k = 0; k < a.outerSize(); ++k)
    for (SparseSymMatrix::InnerIterator it(a, k); it; ++it)
      max_entry = std::max(max_entry, std::abs(it.value()));
  if (max_entry == 0.0) return 0.0;
  const SparseSymMatrix diff = SparseSymMatrix(a.transpose()) - a;
  double max_diff = 0.0;
  for (int k = 0; k < diff.outerSize(); ++k)
    for (SparseSymMatrix::InnerIterator it(diff, k); it; ++it)
      max_diff = std::max(max_diff, std::abs(it.value()));
  return max_diff / max_entry;
}

// ---------------------------------------------------------------------------
// DofMap

DofMap::DofMap(const CutMesh& mesh, int degree) : degree_(degree) {
  if (!mesh.classified()) fail(ErrorCode::InvalidArgument, "DofMap needs a classified mesh");
  if (degree < 1 || degree > kMaxDegree)
    fail(ErrorCode::InvalidArgument, "degree out of range: " + std::to_string(degree));
  const int n = mesh.n();
  const int grid = n * degree + 1;
  const int npe = nodes_per_element();
  const auto lgl = lgl_points(degree).nodes;

  std::vector<int> node_dof[2];
  int next = 0;
  for (const Side s : kSides) {
    const int sl = slot(s);
    std::vector<char> used(static_cast<std::size_t>(grid) * grid, 0);
    present_[sl].assign(mesh.num_elements(), 0);
    for (int e = 0; e < mesh.num_elements(); ++e) {
      if (!mesh.in_side(e, s)) continue;
      present_[sl][e] = 1;
      const auto& el = mesh.element(e);
      for (int b = 0; b <= degree; ++b)
        for (int a = 0; a <= degree; ++a)
          used[(el.j * degree + b) * grid + el.i * degree + a] = 1;
    }
    node_dof[sl].assign(used.size(), -1);
    const int first = next;
    for (std::size_t node = 0; node < used.size(); ++node)
      if (used[node]) node_dof[sl][node] = next++;
    num_[sl] = next - first;
  }

  points_.resize(next);
  dirichlet_.assign(next, 0);
  for (const Side s : kSides) {
    const int sl = slot(s);
    elem_dofs_[sl].assign(static_cast<std::size_t>(mesh.num_elements()) * npe, -1);
    for (int e = 0; e < mesh.num_elements(); ++e) {
      if (!present_[sl][e]) continue;
      const auto& el = mesh.element(e);
      const Rect& r = el.bounds;
      for (int b = 0; b <= degree; ++b)
        for (int a = 0; a <= degree; ++a) {
          const int gi = el.i * degree + a, gj = el.j * degree + b;
          const int dof = node_dof[sl][gj * grid + gi];
          elem_dofs_[sl][static_cast<std::size_t>(e) * npe + b * (degree + 1) + a] = dof;
          points_[dof] = {r.x0 + 0.5 * (lgl[a] + 1.0) * r.width(),
                          r.y0 + 0.5 * (lgl[b] + 1.0) * r.height()};
          dirichlet_[dof] = gi == 0 || gj == 0 || gi == grid - 1 || gj == grid - 1;
        }
    }
  }
}

std::span<const int> DofMap::element_dofs(int e, Side s) const {
  const int sl = slot(s);
  if (!present_[sl][e]) return {};
  const int npe = nodes_per_element();
  return std::span<const int>(elem_dofs_[sl].data() + static_cast<std::size_t>(e) * npe, npe);
}

// ---------------------------------------------------------------------------
// Discretization

Discretization::Discretization(CutMesh mesh, LevelSet phi, int degree, int q)
    : mesh_(std::move(mesh)),
      phi_(std::move(phi)),
      basis_(degree),
      dofs_(mesh_, degree),
      q_(q > 0 ? q : degree + 3) {
  cut_slot_.assign(mesh_.num_elements(), -1);
  for (int e = 0; e < mesh_.num_elements(); ++e) {
    if (mesh_.element(e).cls != ElementClass::Cut) continue;
    cut_slot_[e] = static_cast<int>(cut_rules_.size());
    cut_rules_.push_back(element_rules(mesh_.element(e).bounds, phi_, q_));
  }
}

VolumeRule Discretization::volume_rule(int e, Side s) const {
  const ElementClass c = mesh_.element(e).cls;
  if (c == ElementClass::Cut) return cut_rules(e).side(s);
  if ((c == ElementClass::Neg) == (s == Side::Neg)) return tensor_rule(mesh_.element(e).bounds, q_);
  return {};
}

const ElementRules& Discretization::cut_rules(int e) const {
  if (cut_slot_[e] < 0) fail(ErrorCode::InvalidArgument, "element is not cut");
  return cut_rules_[cut_slot_[e]];
}

Point2 Discretization::to_reference(int e, Point2 x) const {
  const Rect& r = mesh_.element(e).bounds;
  return {2.0 * (x.x - r.x0) / r.width() - 1.0, 2.0 * (x.y - r.y0) / r.height() - 1.0};
}

// ---------------------------------------------------------------------------
// Coefficients

NitscheCoefficients compute_nitsche_coeffs(double measure_pos, double measure_neg,
                                           double interface_length, Coefficients alpha,
                                           double h_k) {
  if (!(measure_pos + measure_neg > 0.0))
    fail(ErrorCode::DegenerateElement, "interface element with zero measure");
  NitscheCoefficients c;
  c.measure_pos = measure_pos;
  c.measure_neg = measure_neg;
  c.interface_length = interface_length;
  const double denom = alpha.alpha_neg * measure_pos + alpha.alpha_pos * measure_neg;
  c.kappa_pos = alpha.alpha_neg * measure_pos / denom;
  c.kappa_neg = alpha.alpha_pos * measure_neg / denom;
  c.gamma = 2.0 * h_k * interface_length /
            (measure_pos / alpha.alpha_pos + measure_neg / alpha.alpha_neg);
  return c;
}

NitscheCoefficients compute_nitsche_coeffs(const ElementRules& rules, Coefficients alpha,
                                           double h_k) {
  return compute_nitsche_coeffs(rules.pos.measure(), rules.neg.measure(), rules.gamma.measure(),
                                alpha, h_k);
}

// ---------------------------------------------------------------------------
// Assembly helpers

namespace {

using Triplets = std::vector<Eigen::Triplet<double>>;

void scatter(Triplets& trips, std::span<const int> rows, const Eigen::MatrixXd& block) {
  const int n = static_cast<int>(rows.size());
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      const double v = block(i, j);
      if (v != 0.0) trips.emplace_back(rows[i], rows[j], v);
    }
}

SparseSymMatrix from_triplets(int n, const Triplets& trips) {
  SparseSymMatrix m(n, n);
  m.setFromTriplets(trips.begin(), trips.end());
  m.makeCompressed();
  return m;
}

// Basis values and physical gradients at one point.
struct PointBasis {
  std::vector<double> v, dx, dy;

  explicit PointBasis(int nb) : v(nb), dx(nb), dy(nb) {}

  void eval(const Discretization& disc, int e, Point2 x) {
    const Rect& r = disc.mesh().element(e).bounds;
    disc.basis().evaluate(disc.to_reference(e, x), v, dx, dy);
    const double sx = 2.0 / r.width(), sy = 2.0 / r.height();
    for (std::size_t k = 0; k < v.size(); ++k) {
      dx[k] *= sx;
      dy[k] *= sy;
    }
  }
};

std::vector<int> stacked_dofs(std::span<const int> first, std::span<const int> second) {
  std::vector<int> rows(first.begin(), first.end());
  rows.insert(rows.end(), second.begin(), second.end());
  return rows;
}

}  // namespace

SparseSymMatrix assemble_stiffness(const Discretization& disc, Coefficients alpha) {
  const CutMesh& mesh = disc.mesh();
  const DofMap& dofs = disc.dofs();
  const int npe = dofs.nodes_per_element();
  const int p = disc.degree();
  const double h = disc.h();
  const double penalty = static_cast<double>(p) * p / h;
  Triplets trips;
  PointBasis pb(npe);
  Eigen::MatrixXd block(npe, npe);

  for (int e = 0; e < mesh.num_elements(); ++e) {
    for (const Side s : kSides) {
      const auto rows = dofs.element_dofs(e, s);
      if (rows.empty()) continue;
      const VolumeRule rule = disc.volume_rule(e, s);
      if (rule.empty()) continue;
      block.setZero();
      const double a = alpha.alpha(s);
      for (std::size_t k = 0; k < rule.size(); ++k) {
        pb.eval(disc, e, rule.points[k]);
        const double w = a * rule.weights[k];
        for (int j = 0; j < npe; ++j)
          for (int i = 0; i < npe; ++i)
            block(i, j) += w * (pb.dx[i] * pb.dx[j] + pb.dy[i] * pb.dy[j]);
      }
      scatter(trips, rows, block);
    }

    if (mesh.element(e).cls != ElementClass::Cut) continue;
    const ElementRules& rules = disc.cut_rules(e);
    if (rules.gamma.empty()) continue;
    const Rect& r = mesh.element(e).bounds;
    const NitscheCoefficients c =
        compute_nitsche_coeffs(rules, alpha, std::max(r.width(), r.height()));
    const auto rows = stacked_dofs(dofs.element_dofs(e, Side::Pos), dofs.element_dofs(e, Side::Neg));
    Eigen::MatrixXd local = Eigen::MatrixXd::Zero(2 * npe, 2 * npe);
    Eigen::VectorXd jump(2 * npe), flux(2 * npe);
    for (std::size_t k = 0; k < rules.gamma.size(); ++k) {
      pb.eval(disc, e, rules.gamma.points[k]);
      const Vec2 n = rules.gamma.normals[k];
      for (int i = 0; i < npe; ++i) {
        const double dn = pb.dx[i] * n.x + pb.dy[i] * n.y;
        jump[i] = pb.v[i];
        jump[npe + i] = -pb.v[i];
        flux[i] = c.kappa_pos * alpha.alpha_pos * dn;
        flux[npe + i] = c.kappa_neg * alpha.alpha_neg * dn;
      }
      const double w = rules.gamma.weights[k];
      local.noalias() += w * (jump * flux.transpose() + flux * jump.transpose());
      local.noalias() += (w * penalty * c.gamma) * (jump * jump.transpose());
    }
    scatter(trips, rows, local);
  }
  return from_triplets(dofs.num_dofs(), trips);
}

Eigen::MatrixXd ghost_face_block(const Basis2D& basis, const Face& face, double hx, double hy,
                                 double h, int q) {
  const LagrangeBasis1D& line = basis.line();
  const int n1 = line.size();
  const int p = line.degree();
  const int npe = n1 * n1;
  const bool vertical = face.vertical();
  const double hn = vertical ? hx : hy;  // element size across the face
  const LineRule rule = face_rule(face, q);
  // Tangential reference coordinate of the face points (same for both sides).
  const double t0 = vertical ? face.a.y : face.a.x;
  const double ht = vertical ? hy : hx;

  Eigen::MatrixXd block = Eigen::MatrixXd::Zero(2 * npe, 2 * npe);
  Eigen::VectorXd v(2 * npe);
  std::vector<double> lt(n1);
  for (int j = 0; j <= p; ++j) {
    const auto& dj = line.nodal_derivative(j);
    const double* left_row = &dj[static_cast<std::size_t>(p) * n1];  // l^(j)(+1)
    const double* right_row = &dj[0];                                // l^(j)(-1)
    const double scale_ref = std::pow(2.0 / hn, j);
    const double coeff = std::pow(h, 2 * j + 1) / std::pow(static_cast<double>(p), 2 * j);
    for (std::size_t k = 0; k < rule.size(); ++k) {
      const Point2 x = rule.points[k];
      const double t = 2.0 * ((vertical ? x.y : x.x) - t0) / ht - 1.0;
      line.values(t, lt);
      for (int b = 0; b < n1; ++b)
        for (int a = 0; a < n1; ++a) {
          // Normal index runs along the face normal, tangential along the face.
          const int normal_idx = vertical ? a : b;
          const int tang_idx = vertical ? b : a;
          const int loc = b * n1 + a;
          v[loc] = -scale_ref * left_row[normal_idx] * lt[tang_idx];
          v[npe + loc] = scale_ref * right_row[normal_idx] * lt[tang_idx];
        }
      block.noalias() += (coeff * rule.weights[k]) * (v * v.transpose());
    }
  }
  return block;
}

SparseSymMatrix assemble_ghost_penalty(const Discretization& disc) {
  const CutMesh& mesh = disc.mesh();
  const DofMap& dofs = disc.dofs();
  Triplets trips;
  for (const Side s : kSides) {
    for (const Face& face : mesh.ghost_faces_of(s)) {
      const auto rows = stacked_dofs(dofs.element_dofs(face.left, s), dofs.element_dofs(face.right, s));
      const Eigen::MatrixXd block =
          ghost_face_block(disc.basis(), face, mesh.hx(), mesh.hy(), disc.h(), disc.q());
      scatter(trips, rows, block);
    }
  }
  return from_triplets(dofs.num_dofs(), trips);
}

SparseSymMatrix assemble_mass(const Discretization& disc) {
  const CutMesh& mesh = disc.mesh();
  const DofMap& dofs = disc.dofs();
  const int npe = dofs.nodes_per_element();
  Triplets trips;
  PointBasis pb(npe);
  Eigen::MatrixXd block(npe, npe);
  for (int e = 0; e < mesh.num_elements(); ++e)
    for (const Side s : kSides) {
      const auto rows = dofs.element_dofs(e, s);
      if (rows.empty()) continue;
      const VolumeRule rule = disc.volume_rule(e, s);
      if (rule.empty()) continue;
      block.setZero();
      for (std::size_t k = 0; k < rule.size(); ++k) {
        pb.eval(disc, e, rule.points[k]);
        const double w = rule.weights[k];
        for (int j = 0; j < npe; ++j)
          for (int i = 0; i < npe; ++i) block(i, j) += w * pb.v[i] * pb.v[j];
      }
      scatter(trips, rows, block);
    }
  return from_triplets(dofs.num_dofs(), trips);
}

Vector assemble_load(const Discretization& disc, Coefficients alpha, const SidedField& f,
                     const std::optional<JumpData>& jumps) {
  const CutMesh& mesh = disc.mesh();
  const DofMap& dofs = disc.dofs();
  const int npe = dofs.nodes_per_element();
  const int p = disc.degree();
  const double penalty = static_cast<double>(p) * p / disc.h();
  Vector load = Vector::Zero(dofs.num_dofs());
  PointBasis pb(npe);

  for (int e = 0; e < mesh.num_elements(); ++e) {
    for (const Side s : kSides) {
      const auto rows = dofs.element_dofs(e, s);
      if (rows.empty()) continue;
      const VolumeRule rule = disc.volume_rule(e, s);
      for (std::size_t k = 0; k < rule.size(); ++k) {
        pb.eval(disc, e, rule.points[k]);
        const double wf = rule.weights[k] * f(rule.points[k], s);
        for (int i = 0; i < npe; ++i) load[rows[i]] += wf * pb.v[i];
      }
    }

    if (!jumps || mesh.element(e).cls != ElementClass::Cut) continue;
    const ElementRules& rules = disc.cut_rules(e);
    if (rules.gamma.empty()) continue;
    const Rect& r = mesh.element(e).bounds;
    const NitscheCoefficients c =
        compute_nitsche_coeffs(rules, alpha, std::max(r.width(), r.height()));
    const auto pos = dofs.element_dofs(e, Side::Pos);
    const auto neg = dofs.element_dofs(e, Side::Neg);
    for (std::size_t k = 0; k < rules.gamma.size(); ++k) {
      const Point2 x = rules.gamma.points[k];
      const Vec2 n = rules.gamma.normals[k];
      pb.eval(disc, e, x);
      const double w = rules.gamma.weights[k];
      const double gd = jumps->dirichlet_jump ? jumps->dirichlet_jump(x) : 0.0;
      const double gn = jumps->flux_jump ? jumps->flux_jump(x) : 0.0;
      for (int i = 0; i < npe; ++i) {
        const double dn = pb.dx[i] * n.x + pb.dy[i] * n.y;
        // <g_D, {alpha d_n v}> + (p^2/h) <gamma g_D, [[v]]> - <g_N, kappa_- v_+ + kappa_+ v_->
        load[pos[i]] += w * (gd * c.kappa_pos * alpha.alpha_pos * dn +
                             penalty * c.gamma * gd * pb.v[i] - gn * c.kappa_neg * pb.v[i]);
        load[neg[i]] += w * (gd * c.kappa_neg * alpha.alpha_neg * dn -
                             penalty * c.gamma * gd * pb.v[i] - gn * c.kappa_pos * pb.v[i]);
      }
    }
  }
  return load;
}

ExtendedForms build_extended_forms(const SparseSymMatrix& stiffness, const SparseSymMatrix& ghost,
                                   const SparseSymMatrix& mass, double gamma_a, double gamma_m,
                                   double h) {
  if (stiffness.rows() != ghost.rows() || stiffness.rows() != mass.rows() ||
      stiffness.cols() != ghost.cols() || stiffness.cols() != mass.cols())
    fail(ErrorCode::DimensionMismatch, "operators live on different DOF maps");
  ExtendedForms out;
  out.stiffness = stiffness + (gamma_a / (h * h)) * ghost;
  out.mass = mass + gamma_m * ghost;
  out.stiffness.makeCompressed();
  out.mass.makeCompressed();
  return out;
}

Vector interpolate(const DofMap& dofs, const SidedField& u) {
  Vector out(dofs.num_dofs());
  for (int d = 0; d < dofs.num_dofs(); ++d) out[d] = u(dofs.dof_point(d), dofs.dof_side(d));
  return out;
}

// ---------------------------------------------------------------------------
// Reduction

namespace {

std::vector<char> zero_columns(const SparseSymMatrix& a) {
  std::vector<char> zero(a.cols(), 1);
  for (int k = 0; k < a.outerSize(); ++k)
    for (SparseSymMatrix::InnerIterator it(a, k); it; ++it)
      if (it.value() != 0.0) {
        zero[k] = 0;
        break;
      }
  return zero;
}

SparseSymMatrix restrict_to(const SparseSymMatrix& a, const std::vector<int>& reduced_index,
                            int n_free) {
  Triplets trips;
  trips.reserve(a.nonZeros());
  for (int k = 0; k < a.outerSize(); ++k) {
    const int col = reduced_index[k];
    if (col < 0) continue;
    for (SparseSymMatrix::InnerIterator it(a, k); it; ++it) {
      const int row = reduced_index[it.row()];
      if (row >= 0) trips.emplace_back(row, col, it.value());
    }
  }
  return from_triplets(n_free, trips);
}

}  // namespace

Vector ReducedSystem::expand(const Vector& reduced) const {
  Vector full = fixed_values;
  for (std::size_t k = 0; k < free_dofs.size(); ++k) full[free_dofs[k]] = reduced[k];
  return full;
}

ReducedSystem apply_dirichlet(const SparseSymMatrix& a, const Vector& b, const DofMap& dofs,
                              const Vector* boundary) {
  const int n = dofs.num_dofs();
  if (a.rows() != n || a.cols() != n || b.size() != n ||
      (boundary != nullptr && boundary->size() != n))
    fail(ErrorCode::DimensionMismatch, "system size does not match the DOF map");
  const auto& mask = dofs.dirichlet_mask();
  const auto zero = zero_columns(a);

  ReducedSystem out;
  out.fixed_values = Vector::Zero(n);
  std::vector<int> reduced_index(n, -1);
  for (int d = 0; d < n; ++d) {
    if (mask[d]) {
      if (boundary != nullptr) out.fixed_values[d] = (*boundary)[d];
    } else if (!zero[d]) {
      reduced_index[d] = static_cast<int>(out.free_dofs.size());
      out.free_dofs.push_back(d);
    }
  }
  const int n_free = static_cast<int>(out.free_dofs.size());
  out.matrix = restrict_to(a, reduced_index, n_free);
  const Vector lifted = b - a * out.fixed_values;
  out.rhs.resize(n_free);
  for (int k = 0; k < n_free; ++k) out.rhs[k] = lifted[out.free_dofs[k]];
  return out;
}

Vector ReducedPair::expand(const Vector& reduced) const {
  Vector full = Vector::Zero(full_size);
  for (std::size_t k = 0; k < free_dofs.size(); ++k) full[free_dofs[k]] = reduced[k];
  return full;
}

ReducedPair reduce_pair(const SparseSymMatrix& a, const SparseSymMatrix& m, const DofMap& dofs) {
  const int n = dofs.num_dofs();
  if (a.rows() != n || m.rows() != n || a.cols() != n || m.cols() != n)
    fail(ErrorCode::DimensionMismatch, "pencil size does not match the DOF map");
  const auto& mask = dofs.dirichlet_mask();
  const auto zero_a = zero_columns(a);
  const auto zero_m = zero_columns(m);
  ReducedPair out;
  out.full_size = n;
  std::vector<int> reduced_index(n, -1);
  for (int d = 0; d < n; ++d) {
    if (mask[d] || (zero_a[d] && zero_m[d])) continue;
    reduced_index[d] = static_cast<int>(out.free_dofs.size());
    out.free_dofs.push_back(d);
  }
  const int n_free = static_cast<int>(out.free_dofs.size());
  out.a = restrict_to(a, reduced_index, n_free);
  out.m = restrict_to(m, reduced_index, n_free);
  return out;
}

}  // namespace cutspec
