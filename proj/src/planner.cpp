#include "swarmloc/planner.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace swarmloc::plan {

namespace {
constexpr double kPi = 3.141592653589793238462643383279502884;

Eigen::Matrix2d rot2(double a) {
  Eigen::Matrix2d r;
  r << std::cos(a), -std::sin(a), std::sin(a), std::cos(a);
  return r;
}
}  // namespace

double wrap_angle(double a) {
  double w = std::remainder(a, 2.0 * kPi);  // [-pi, pi]
  if (w <= -kPi) w += 2.0 * kPi;
  return w;
}

double chi_square_scale(double confidence) {
  if (!(confidence > 0.0) || !(confidence < 1.0))
    throw std::domain_error("confidence must be in (0, 1)");
  return -2.0 * std::log1p(-confidence);
}

ConfidenceEllipse confidence_ellipse(const Eigen::Matrix2d& cov_xy,
                                     const Eigen::Vector2d& rel_center,
                                     double confidence) {
  const double scale = std::max(1.0, cov_xy.cwiseAbs().maxCoeff());
  if (std::abs(cov_xy(0, 1) - cov_xy(1, 0)) > 1e-9 * scale)
    throw std::domain_error("covariance not symmetric");

  const double a = cov_xy(0, 0);
  const double c = cov_xy(1, 1);
  const double b = 0.5 * (cov_xy(0, 1) + cov_xy(1, 0));

  // closed-form 2x2 symmetric eigendecomposition
  const double mean = 0.5 * (a + c);
  const double disc = std::hypot(0.5 * (a - c), b);
  double l1 = mean + disc;
  double l2 = mean - disc;
  if (l2 < -1e-9 * scale) throw std::domain_error("covariance not PSD");
  l2 = std::max(l2, 0.0);
  l1 = std::max(l1, 0.0);

  ConfidenceEllipse e;
  e.center = rel_center;
  e.lambda1 = l1;
  e.lambda2 = l2;
  // atan2 in (-pi, pi] halves straight into (-pi/2, pi/2]; the isotropic
  // case lands on 0
  e.alpha = 0.5 * std::atan2(2.0 * b, a - c);
  e.s = chi_square_scale(confidence);
  return e;
}

std::optional<double> desired_yaw(const Eigen::Vector2d& /*observer_pos*/,
                                  double observer_yaw,
                                  const ConfidenceEllipse& ellipse,
                                  const PlannerConfig& cfg) {
  // the ellipse center is already observer-relative
  const Eigen::Vector2d rel = ellipse.center;
  if (rel.norm() == 0.0)
    throw std::domain_error("ellipse centered on the observer");

  const double theta_c = std::atan2(rel.y(), rel.x());

  const double semi_a = ellipse.semi_major();
  if (semi_a == 0.0) {
    // point-like ellipse: no tangent construction, aim at the center
    return wrap_angle(theta_c);
  }
  // keep the construction defined for segment-like ellipses
  const double semi_b = std::max(ellipse.semi_minor(), semi_a * 1e-12);

  // observer in the unit-circle space of the ellipse
  const Eigen::Matrix2d r_align = rot2(-ellipse.alpha);
  Eigen::Vector2d u = r_align * (-rel);
  u.x() /= semi_a;
  u.y() /= semi_b;
  const double d2 = u.squaredNorm();
  if (d2 <= 1.0) return std::nullopt;  // inside: no feasible viewing yaw

  // tangent points on the unit circle seen from u
  const Eigen::Vector2d perp(-u.y(), u.x());
  const double k = std::sqrt(d2 - 1.0) / d2;
  const Eigen::Vector2d ut1 = u / d2 + k * perp;
  const Eigen::Vector2d ut2 = u / d2 - k * perp;

  const Eigen::Matrix2d r_back = rot2(ellipse.alpha);
  auto bearing_of = [&](const Eigen::Vector2d& ut) {
    Eigen::Vector2d q = ut;
    q.x() *= semi_a;
    q.y() *= semi_b;
    q = rel + r_back * q;  // tangent point relative to observer
    return std::atan2(q.y(), q.x());
  };

  // tangent bearings as offsets from the center bearing; the subtended
  // interval of a convex body from an exterior point is narrower than pi,
  // so the offsets are unambiguous
  const double o1 = wrap_angle(bearing_of(ut1) - theta_c);
  const double o2 = wrap_angle(bearing_of(ut2) - theta_c);
  const double o_lo = std::min(o1, o2);
  const double o_hi = std::max(o1, o2);
  const double width = o_hi - o_lo;

  if (width > 2.0 * cfg.fov_half_angle) {
    // cannot cover it all, aim at the center and let the sweep do its best
    return wrap_angle(theta_c);
  }

  // yaws (relative to theta_c) whose cone contains [o_lo, o_hi]
  const double e_lo = o_hi - cfg.fov_half_angle;
  const double e_hi = o_lo + cfg.fov_half_angle;
  const double cur = wrap_angle(observer_yaw - theta_c);
  if (cur >= e_lo && cur <= e_hi) return wrap_angle(observer_yaw);

  const double d_lo = std::abs(wrap_angle(cur - e_lo));
  const double d_hi = std::abs(wrap_angle(cur - e_hi));
  double pick;
  if (d_lo < d_hi) {
    pick = e_lo;
  } else if (d_hi < d_lo) {
    pick = e_hi;
  } else {
    // exact tie: take the counter-clockwise turn
    pick = wrap_angle(e_lo - cur) > 0.0 ? e_lo : e_hi;
  }
  return wrap_angle(theta_c + pick);
}

std::vector<PairCandidate> candidate_pairs(
    const est::DriftState& state, const std::vector<Vec3>& positions,
    const PlannerConfig& cfg,
    const std::function<bool(int, int)>& cooldown_ok) {
  if (static_cast<int>(positions.size()) != state.n)
    throw std::invalid_argument("positions size != drone count");
  std::vector<PairCandidate> out;
  for (int i = 0; i < state.n; ++i) {
    for (int j = i + 1; j < state.n; ++j) {
      const double tr = est::relative_covariance(state, i, j).trace();
      if (tr < cfg.trace_threshold) continue;
      if ((positions[i] - positions[j]).norm() > cfg.max_range) continue;
      if (cooldown_ok && !cooldown_ok(i, j)) continue;
      out.push_back({i, j, tr});
    }
  }
  std::sort(out.begin(), out.end(),
            [](const PairCandidate& a, const PairCandidate& b) {
              if (a.trace != b.trace) return a.trace > b.trace;
              if (a.i != b.i) return a.i < b.i;
              return a.j < b.j;
            });
  return out;
}

std::optional<std::pair<int, int>> select_pair(
    const est::DriftState& state, const std::vector<Vec3>& positions,
    const PlannerConfig& cfg,
    const std::function<bool(int, int)>& cooldown_ok) {
  auto cand = candidate_pairs(state, positions, cfg, cooldown_ok);
  if (cand.empty()) return std::nullopt;
  return std::make_pair(cand.front().i, cand.front().j);
}

std::optional<RoleAssignment> assign_roles(int i, int j,
                                           const PlanSnapshot& snap,
                                           const est::DriftState& state,
                                           const PlannerConfig& cfg) {
  const Eigen::Matrix2d cov_xy =
      est::relative_covariance(state, i, j).topLeftCorner<2, 2>();

  std::optional<RoleAssignment> best;
  double best_delta = 0.0;
  for (auto [obs, tgt] : {std::pair{i, j}, std::pair{j, i}}) {
    const auto& o = snap.drones.at(obs);
    const auto& t = snap.drones.at(tgt);
    if (o.busy) continue;
    const Eigen::Vector2d center = (t.pos - o.pos).head<2>();
    if (center.norm() == 0.0) continue;
    const auto ellipse = confidence_ellipse(cov_xy, center, cfg.confidence);
    const auto psi = desired_yaw(o.pos.head<2>(), o.yaw, ellipse, cfg);
    if (!psi) continue;
    const double delta = std::abs(wrap_angle(*psi - o.yaw));
    if (!best || delta < best_delta) {  // tie keeps the lower-id observer
      best = RoleAssignment{obs, tgt, *psi, o.yaw};
      best_delta = delta;
    }
  }
  return best;
}

bool safety_check(const ObservationTask& task, double t_out, double t_cur,
                  double v_after, const PlannerConfig& cfg) {
  if (std::isinf(t_out)) return true;  // no map horizon to run out of
  return cfg.a_max * (t_out - t_cur - task.t_turn) >= std::abs(v_after);
}

bool visibility_check(const Vec3& observer_pos, const Vec3& target_pos,
                      const sim::OccupancyGrid* grid,
                      const PlannerConfig& cfg) {
  if ((target_pos - observer_pos).norm() > cfg.max_range) return false;
  if (grid && grid->segment_blocked(observer_pos.head<2>(),
                                    target_pos.head<2>()))
    return false;
  return true;
}

PlanOutcome YawPlanner::plan(const est::DriftState& state,
                             const PlanSnapshot& snap) {
  if (static_cast<int>(snap.drones.size()) != state.n)
    throw std::invalid_argument("snapshot size != drone count");

  std::vector<Vec3> positions;
  positions.reserve(snap.drones.size());
  for (const auto& d : snap.drones) positions.push_back(d.pos);

  PlanOutcome out;
  const auto cand = candidate_pairs(
      state, positions, cfg_,
      [&](int i, int j) { return cooldown_ok(i, j, snap.time); });

  int tried = 0;
  for (const auto& c : cand) {
    if (tried++ >= cfg_.max_pairs_per_cycle) break;

    const auto roles = assign_roles(c.i, c.j, snap, state, cfg_);
    if (!roles) {
      out.rejections.push_back({c.i, c.j, c.trace, "no feasible observer"});
      continue;
    }

    ObservationTask task;
    task.observer = roles->observer;
    task.target = roles->target;
    task.psi_des = roles->psi_des;
    task.psi_cur = roles->psi_cur;
    task.t_turn =
        2.0 * std::abs(wrap_angle(task.psi_des - task.psi_cur)) / cfg_.turn_rate;
    task.issued_at = snap.epoch;

    const auto& obs = snap.drones[task.observer];
    if (!safety_check(task, obs.t_out, snap.time, obs.vel.norm(), cfg_)) {
      out.rejections.push_back({c.i, c.j, c.trace, "safety"});
      continue;
    }
    if (!visibility_check(obs.pos, snap.drones[task.target].pos, snap.grid,
                          cfg_)) {
      out.rejections.push_back({c.i, c.j, c.trace, "occluded"});
      continue;
    }

    last_issue_[{c.i, c.j}] = snap.time;
    out.task = task;
    return out;
  }
  return out;
}

bool YawPlanner::cooldown_ok(int i, int j, double now) const {
  const auto key = std::minmax(i, j);
  const auto it = last_issue_.find({key.first, key.second});
  if (it == last_issue_.end()) return true;
  return now - it->second >= cfg_.min_retrigger_interval;
}

}  // namespace swarmloc::plan
