#include "fairplan/constraints.hpp"

namespace fairplan {

LaneLine LaneLine::normalized(double a, double b, double c) {
  const double n = std::hypot(a, b);
  if (n == 0.0) throw InvalidInput("degenerate lane line");
  return {a / n, b / n, c / n};
}

void LinearConstraintBlock::append(const LinearConstraintBlock& other) {
  if (other.kind != kind) throw InvalidInput("cannot append mixed constraint kinds");
  if (other.rows() == 0) return;
  if (rows() == 0) {
    *this = other;
    return;
  }
  if (other.map.J.cols() != map.J.cols()) throw InvalidInput("column mismatch");
  const int r0 = rows();
  map.J.conservativeResize(r0 + other.rows(), Eigen::NoChange);
  map.b.conservativeResize(r0 + other.rows());
  map.J.bottomRows(other.rows()) = other.map.J;
  map.b.tail(other.rows()) = other.map.b;
  labels.insert(labels.end(), other.labels.begin(), other.labels.end());
}

LinearConstraintBlock LinearConstraintBlock::empty(ConstraintKind kind, int cols) {
  LinearConstraintBlock b;
  b.kind = kind;
  b.map.J = Eigen::MatrixXd::Zero(0, cols);
  b.map.b = Eigen::VectorXd::Zero(0);
  return b;
}

Eigen::Vector3d line_in_vehicle_frame(const LaneLine& line, const VehicleState& pose) {
  // World point of a frame point (cx, cy):
  //   x = px + cos(psi) cx - sin(psi) cy,  y = py + sin(psi) cx + cos(psi) cy.
  const double cp = std::cos(pose.psi), sp = std::sin(pose.psi);
  const double d = line.a * cp + line.b * sp;
  const double e = -line.a * sp + line.b * cp;
  const double f = line.a * pose.px + line.b * pose.py + line.c;
  return {d, e, f};
}

double lane_discriminant(const VehicleState& pose, const LaneLine& line,
                         const EllipseParams& el) {
  const Eigen::Vector3d def = line_in_vehicle_frame(line, pose);
  const double d = def(0), e = def(1), f = def(2);
  return d * d * el.U * el.U + e * e * el.V * el.V - f * f;
}

Eigen::Vector3d lane_discriminant_gradient(const VehicleState& pose,
                                           const LaneLine& line,
                                           const EllipseParams& el) {
  const Eigen::Vector3d def = line_in_vehicle_frame(line, pose);
  const double d = def(0), e = def(1), f = def(2);
  // dd/dpsi = e, de/dpsi = -d, df/d(px,py) = (a, b).
  return {-2.0 * f * line.a, -2.0 * f * line.b,
          2.0 * d * e * (el.U * el.U - el.V * el.V)};
}

namespace {
struct KeepOut {
  double A, B; // semi-axes of the keep-out superellipse
};
KeepOut keep_out(const VehicleParams& p) {
  return {p.length / 2.0 + p.diag / 2.0, p.width / 2.0 + p.diag / 2.0};
}
double pow6(double x) {
  const double x2 = x * x;
  return x2 * x2 * x2;
}
double pow5(double x) {
  const double x2 = x * x;
  return x2 * x2 * x;
}
} // namespace

double superellipse_value(const VehicleState& pose_i, const VehicleState& pose_j,
                          const VehicleParams& p) {
  if (!pose_i.finite() || !pose_j.finite()) throw InvalidInput("non-finite pose");
  const KeepOut k = keep_out(p);
  const double dx = pose_j.px - pose_i.px, dy = pose_j.py - pose_i.py;
  const double cp = std::cos(pose_i.psi), sp = std::sin(pose_i.psi);
  const double cx = cp * dx + sp * dy;
  const double cy = -sp * dx + cp * dy;
  return 1.0 - pow6(cx / k.A) - pow6(cy / k.B);
}

double collision_pair_value(int i, int j, const VehicleState& pose_i,
                            const VehicleState& pose_j, const VehicleParams& p) {
  if (i == j) throw InvalidInput("collision pair needs distinct vehicles");
  return (i < j) ? superellipse_value(pose_i, pose_j, p)
                 : superellipse_value(pose_j, pose_i, p);
}

Eigen::Matrix<double, 5, 1> superellipse_gradient(const VehicleState& pose_lo,
                                                  const VehicleState& pose_hi,
                                                  const VehicleParams& p) {
  const KeepOut k = keep_out(p);
  const double dx = pose_hi.px - pose_lo.px, dy = pose_hi.py - pose_lo.py;
  const double cp = std::cos(pose_lo.psi), sp = std::sin(pose_lo.psi);
  const double cx = cp * dx + sp * dy;
  const double cy = -sp * dx + cp * dy;
  const double dh_dcx = -6.0 * pow5(cx) / pow6(k.A);
  const double dh_dcy = -6.0 * pow5(cy) / pow6(k.B);
  Eigen::Matrix<double, 5, 1> g;
  // cx = cp dx + sp dy, cy = -sp dx + cp dy
  const double dcx_dpxhi = cp, dcx_dpyhi = sp;
  const double dcy_dpxhi = -sp, dcy_dpyhi = cp;
  g(3) = dh_dcx * dcx_dpxhi + dh_dcy * dcy_dpxhi;
  g(4) = dh_dcx * dcx_dpyhi + dh_dcy * dcy_dpyhi;
  g(0) = -g(3);
  g(1) = -g(4);
  // dcx/dpsi = cy, dcy/dpsi = -cx
  g(2) = dh_dcx * cy - dh_dcy * cx;
  return g;
}

CollisionPairLin linearize_collision_pair(int i, int j, const Trajectory& nominal_i,
                                          const Trajectory& nominal_j,
                                          const VehicleParams& p) {
  if (nominal_i.horizon() != nominal_j.horizon())
    throw InvalidInput("collision pair horizons differ");
  const int T = nominal_i.horizon();
  const DecisionLayout& L = nominal_i.layout();
  CollisionPairLin out;
  out.i = i;
  out.j = j;
  out.value.resize(T - 1);
  out.grad_i = Eigen::MatrixXd::Zero(T - 1, L.dim());
  out.grad_j = Eigen::MatrixXd::Zero(T - 1, L.dim());
  const bool i_is_frame = i < j;
  for (int k = 2; k <= T; ++k) {
    const int r = k - 2;
    const VehicleState xi = nominal_i.state(k), xj = nominal_j.state(k);
    const VehicleState& lo = i_is_frame ? xi : xj;
    const VehicleState& hi = i_is_frame ? xj : xi;
    if (std::hypot(hi.px - lo.px, hi.py - lo.py) < 1e-9)
      throw DegenerateLinearization("coincident nominal positions at step " +
                                    std::to_string(k));
    out.value(r) = superellipse_value(lo, hi, p);
    const Eigen::Matrix<double, 5, 1> g = superellipse_gradient(lo, hi, p);
    const int off_i = L.state_offset(k), off_j = nominal_j.layout().state_offset(k);
    if (i_is_frame) {
      out.grad_i(r, off_i + 0) = g(0);
      out.grad_i(r, off_i + 1) = g(1);
      out.grad_i(r, off_i + 3) = g(2);
      out.grad_j(r, off_j + 0) = g(3);
      out.grad_j(r, off_j + 1) = g(4);
    } else {
      out.grad_j(r, off_j + 0) = g(0);
      out.grad_j(r, off_j + 1) = g(1);
      out.grad_j(r, off_j + 3) = g(2);
      out.grad_i(r, off_i + 0) = g(3);
      out.grad_i(r, off_i + 1) = g(4);
    }
  }
  return out;
}

LinearConstraintBlock box_rows(const VehicleParams& p, int T) {
  const DecisionLayout L(T);
  LinearConstraintBlock blk;
  blk.kind = ConstraintKind::inequality;
  const int n = 6 * (T - 1);
  blk.map.J = Eigen::MatrixXd::Zero(n, L.dim());
  blk.map.b = Eigen::VectorXd::Zero(n);
  int r = 0;
  auto bound = [&](int col, double lo, double hi, ConstraintFamily fam, int step) {
    blk.map.J(r, col) = 1.0;
    blk.map.b(r) = -hi; // x - hi <= 0
    blk.labels.push_back({fam, step, -1, -1});
    ++r;
    blk.map.J(r, col) = -1.0;
    blk.map.b(r) = lo; // lo - x <= 0
    blk.labels.push_back({fam, step, -1, -1});
    ++r;
  };
  for (int k = 2; k <= T; ++k)
    bound(L.state_offset(k) + 2, p.v_min, p.v_max, ConstraintFamily::box_velocity, k);
  for (int k = 1; k <= T - 1; ++k) {
    bound(L.control_offset(k) + 0, p.a_min, p.a_max, ConstraintFamily::box_acceleration, k);
    bound(L.control_offset(k) + 1, p.delta_min, p.delta_max, ConstraintFamily::box_steering, k);
  }
  return blk;
}

PrivateSet build_private_set(const Trajectory& nominal,
                             const std::vector<ScopedLaneLine>& lanes,
                             const VehicleParams& p, const EllipseParams& e,
                             double lane_active_dist,
                             const std::vector<double>* nominal_progress) {
  const int T = nominal.horizon();
  const DecisionLayout& L = nominal.layout();
  PrivateSet out;
  out.equalities.kind = ConstraintKind::equality;
  out.equalities.map = linearize_dynamics(nominal, p);
  for (int k = 1; k <= T - 1; ++k)
    for (int c = 0; c < kStateDim; ++c)
      out.equalities.labels.push_back({ConstraintFamily::dynamics, k, -1, c});

  out.inequalities = box_rows(p, T);

  for (int li = 0; li < static_cast<int>(lanes.size()); ++li) {
    const ScopedLaneLine& sl = lanes[li];
    for (int k = 2; k <= T; ++k) {
      const VehicleState pose = nominal.state(k);
      if (nominal_progress) {
        const double s = (*nominal_progress)[k - 1];
        if (s < sl.s_begin || s > sl.s_end) continue;
      }
      if (std::abs(sl.line.side(pose.px, pose.py)) > lane_active_dist) continue;

      LinearConstraintBlock rows = LinearConstraintBlock::empty(
          ConstraintKind::inequality, L.dim());
      rows.map.J = Eigen::MatrixXd::Zero(2, L.dim());
      rows.map.b = Eigen::VectorXd::Zero(2);
      const int off = L.state_offset(k);
      // Discriminant row, linearized at the nominal pose.
      const double c0 = lane_discriminant(pose, sl.line, e);
      const Eigen::Vector3d g = lane_discriminant_gradient(pose, sl.line, e);
      rows.map.J(0, off + 0) = g(0);
      rows.map.J(0, off + 1) = g(1);
      rows.map.J(0, off + 3) = g(2);
      rows.map.b(0) = c0 - g(0) * pose.px - g(1) * pose.py - g(2) * pose.psi;
      rows.labels.push_back({ConstraintFamily::lane_discriminant, k, -1, li});
      // Inner-side row, already affine.
      rows.map.J(1, off + 0) = sl.line.a;
      rows.map.J(1, off + 1) = sl.line.b;
      rows.map.b(1) = sl.line.c;
      rows.labels.push_back({ConstraintFamily::lane_side, k, -1, li});
      out.inequalities.append(rows);

      // The discriminant's heading sensitivity vanishes at a line-parallel
      // pose (it is quadratic there), which lets the linearized row admit
      // heading moves the exact constraint forbids.  Close to the boundary we
      // add the heading band implied by c <= 0 at the nominal offset:
      // |cos(psi - phi)| <= sqrt((f^2 - V^2) / (U^2 - V^2)), linear in psi
      // once unwrapped around the nominal heading.
      const double f = sl.line.side(pose.px, pose.py);
      const double span = e.U * e.U - e.V * e.V;
      const double dmax_sq = (f * f - e.V * e.V) / span;
      if (dmax_sq < 1.0) {
        const double umax = dmax_sq <= 0.0 ? 0.0 : std::asin(std::sqrt(dmax_sq));
        const double phi = std::atan2(sl.line.b, sl.line.a);
        const double raw = pose.psi - phi + M_PI / 2.0;
        const double center = pose.psi - (raw - std::round(raw / M_PI) * M_PI);
        LinearConstraintBlock band = LinearConstraintBlock::empty(
            ConstraintKind::inequality, L.dim());
        band.map.J = Eigen::MatrixXd::Zero(2, L.dim());
        band.map.b = Eigen::VectorXd::Zero(2);
        band.map.J(0, off + 3) = 1.0;
        band.map.b(0) = -(center + umax);
        band.map.J(1, off + 3) = -1.0;
        band.map.b(1) = center - umax;
        band.labels.push_back({ConstraintFamily::lane_heading, k, -1, li});
        band.labels.push_back({ConstraintFamily::lane_heading, k, -1, li});
        out.inequalities.append(band);
      }
    }
  }
  return out;
}

LinearConstraintBlock build_coupled_block(int i,
                                          const std::vector<const CollisionPairLin*>& pairs,
                                          const Eigen::VectorXd& nominal_i, int T) {
  const int dim = static_cast<int>(nominal_i.size());
  LinearConstraintBlock blk = LinearConstraintBlock::empty(
      ConstraintKind::inequality, dim);
  for (const CollisionPairLin* pl : pairs) {
    if (pl->i != i && pl->j != i) throw InvalidInput("pair does not involve vehicle");
    const bool own_i = (pl->i == i);
    const int neighbor = own_i ? pl->j : pl->i;
    LinearConstraintBlock rows = LinearConstraintBlock::empty(
        ConstraintKind::inequality, dim);
    rows.map.J = own_i ? pl->grad_i : pl->grad_j;
    // The pairs are linearized at the current iterates, so the neighbor term
    // folded at the neighbor's iterate is zero and the offset reduces to
    // h(nominal) - J * nominal_i.
    rows.map.b = pl->value - rows.map.J * nominal_i;
    for (int k = 2; k <= T; ++k)
      rows.labels.push_back({ConstraintFamily::collision, k, neighbor, -1});
    blk.append(rows);
  }
  return blk;
}

} // namespace fairplan
