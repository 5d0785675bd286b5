#include "fairplan/scenario.hpp"

#include <algorithm>
#include <cmath>

namespace fairplan {

Route Route::straight(double x0, double y0, double heading, double length) {
  Route r;
  Segment s;
  s.is_arc = false;
  s.x0 = x0;
  s.y0 = y0;
  s.heading = heading;
  s.length = length;
  r.segments_.push_back(s);
  r.total_length_ = length;
  return r;
}

namespace {
void segment_end(const Route::Segment& s, double& x, double& y, double& heading) {
  if (!s.is_arc) {
    x = s.x0 + s.length * std::cos(s.heading);
    y = s.y0 + s.length * std::sin(s.heading);
    heading = s.heading;
  } else {
    const double dtheta = s.sweep_sign * s.length / s.radius;
    const double a = s.angle0 + dtheta;
    x = s.cx + s.radius * std::cos(a);
    y = s.cy + s.radius * std::sin(a);
    heading = a + s.sweep_sign * M_PI / 2.0;
  }
}
} // namespace

Route& Route::then_arc(double radius, double sweep, bool left) {
  double x, y, h;
  segment_end(segments_.back(), x, y, h);
  Segment s;
  s.is_arc = true;
  s.radius = radius;
  s.sweep_sign = left ? 1.0 : -1.0;
  s.length = radius * sweep;
  // Center is perpendicular to the heading, on the turning side.
  s.cx = x + (left ? -radius * std::sin(h) : radius * std::sin(h));
  s.cy = y + (left ? radius * std::cos(h) : -radius * std::cos(h));
  s.angle0 = std::atan2(y - s.cy, x - s.cx);
  segments_.push_back(s);
  total_length_ += s.length;
  return *this;
}

Route& Route::then_straight(double length) {
  double x, y, h;
  segment_end(segments_.back(), x, y, h);
  Segment s;
  s.is_arc = false;
  s.x0 = x;
  s.y0 = y;
  s.heading = h;
  s.length = length;
  segments_.push_back(s);
  total_length_ += length;
  return *this;
}

void Route::sample(double s, double& x, double& y, double& heading) const {
  double rem = std::max(s, 0.0);
  for (std::size_t i = 0; i < segments_.size(); ++i) {
    const Segment& seg = segments_[i];
    const bool last = (i + 1 == segments_.size());
    if (rem <= seg.length || last) {
      if (!seg.is_arc) {
        x = seg.x0 + rem * std::cos(seg.heading);
        y = seg.y0 + rem * std::sin(seg.heading);
        heading = seg.heading;
      } else {
        const double capped = last ? std::min(rem, seg.length) : rem;
        const double a = seg.angle0 + seg.sweep_sign * capped / seg.radius;
        x = seg.cx + seg.radius * std::cos(a);
        y = seg.cy + seg.radius * std::sin(a);
        heading = a + seg.sweep_sign * M_PI / 2.0;
        if (last && rem > seg.length) {
          // extend beyond a terminal arc along its exit tangent
          const double extra = rem - seg.length;
          x += extra * std::cos(heading);
          y += extra * std::sin(heading);
        }
      }
      return;
    }
    rem -= seg.length;
  }
  throw InternalError("route has no segments");
}

VehicleState Route::state_at(double s, double speed) const {
  double x, y, h;
  sample(s, x, y, h);
  return {x, y, speed, h};
}

double Route::project(double x, double y) const {
  // Dense arc-length scan refined by local bisection: robust for the short
  // composite routes used here.
  const double end = total_length_ + 100.0;
  double best_s = 0.0, best_d = std::numeric_limits<double>::infinity();
  const double coarse = 0.5;
  for (double s = 0.0; s <= end; s += coarse) {
    double px, py, h;
    sample(s, px, py, h);
    const double d = std::hypot(px - x, py - y);
    if (d < best_d) {
      best_d = d;
      best_s = s;
    }
  }
  double lo = std::max(0.0, best_s - coarse), hi = best_s + coarse;
  for (int it = 0; it < 40; ++it) {
    const double m1 = lo + (hi - lo) / 3.0, m2 = hi - (hi - lo) / 3.0;
    double x1, y1, x2, y2, h;
    sample(m1, x1, y1, h);
    sample(m2, x2, y2, h);
    if (std::hypot(x1 - x, y1 - y) < std::hypot(x2 - x, y2 - y))
      hi = m2;
    else
      lo = m1;
  }
  return 0.5 * (lo + hi);
}

double Route::lateral_offset(double x, double y) const {
  const double s = project(x, y);
  double px, py, h;
  sample(s, px, py, h);
  return std::hypot(px - x, py - y);
}

ReferenceTrajectory make_reference(const VehicleSpec& v, const AlgorithmParams& p) {
  ReferenceTrajectory ref;
  ref.states.reserve(p.horizon - 1);
  for (int k = 2; k <= p.horizon; ++k) {
    const double s = v.start_progress + v.ref_speed * (k - 1) * p.ts;
    ref.states.push_back(v.route.state_at(s, v.ref_speed));
  }
  return ref;
}

Trajectory make_initial_nominal(const VehicleSpec& v, const AlgorithmParams& p,
                                double speed_scale) {
  Trajectory traj(p.horizon, p.ts, v.start);
  const double speed = v.start.v * speed_scale;
  for (int k = 2; k <= p.horizon; ++k) {
    const double s = v.start_progress + speed * (k - 1) * p.ts;
    VehicleState x = v.route.state_at(s, speed);
    traj.set_state(k, x);
  }
  for (int k = 1; k <= p.horizon - 1; ++k) {
    // Controls consistent with constant speed and the heading change of the
    // sampled path, so the nominal is close to dynamically feasible.
    const VehicleState a = traj.state(k), b = traj.state(k + 1);
    double dpsi = b.psi - a.psi;
    while (dpsi > M_PI) dpsi -= 2.0 * M_PI;
    while (dpsi < -M_PI) dpsi += 2.0 * M_PI;
    ControlInput u;
    u.a = 0.0;
    u.delta = (a.v > 1e-6)
                  ? std::atan(dpsi / p.ts * v.params.length / std::max(a.v, 1e-6))
                  : 0.0;
    u.delta = std::clamp(u.delta, v.params.delta_min, v.params.delta_max);
    traj.set_control(k, u);
  }
  return traj;
}

} // namespace fairplan
