#include "swarmloc/sim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "swarmloc/planner.hpp"  // wrap_angle
#include "swarmloc/rng.hpp"

namespace swarmloc::sim {

using plan::wrap_angle;

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();

// Fresh distribution per call: normal_distribution caches a spare variate,
// and that cache must not leak between the per-drone streams.
Vec3 gauss3(std::mt19937_64& g) {
  std::normal_distribution<double> n(0.0, 1.0);
  return Vec3(n(g), n(g), n(g));
}
}

Eigen::Matrix3d yaw_rotation_global_to_body(double yaw) {
  Eigen::Matrix3d r;
  const double c = std::cos(yaw), s = std::sin(yaw);
  // rotate a global vector into a frame whose x-axis points along yaw
  r << c, s, 0, -s, c, 0, 0, 0, 1;
  return r;
}

Trajectory::Trajectory(std::vector<Vec3> waypoints, double speed)
    : pts_(std::move(waypoints)), speed_(speed) {
  if (pts_.empty()) throw std::invalid_argument("trajectory needs waypoints");
  if (pts_.size() > 1 && speed <= 0.0)
    throw std::invalid_argument("speed must be > 0 for a moving trajectory");
  times_.resize(pts_.size(), 0.0);
  for (std::size_t k = 1; k < pts_.size(); ++k) {
    const double len = (pts_[k] - pts_[k - 1]).norm();
    if (len == 0.0)
      throw std::invalid_argument("zero-length trajectory segment");
    times_[k] = times_[k - 1] + len / speed_;
  }
}

Vec3 Trajectory::pos(double t) const {
  if (pts_.size() == 1 || t <= 0.0) return pts_.front();
  if (t >= times_.back()) return pts_.back();
  std::size_t k = 1;
  while (times_[k] < t) ++k;  // few waypoints, linear scan is fine
  const double s = (t - times_[k - 1]) / (times_[k] - times_[k - 1]);
  return pts_[k - 1] + s * (pts_[k] - pts_[k - 1]);
}

Vec3 Trajectory::vel(double t) const {
  if (pts_.size() == 1 || t < 0.0 || t >= times_.back()) return Vec3::Zero();
  std::size_t k = 1;
  while (times_[k] < t) ++k;
  if (times_[k] == t && k + 1 < pts_.size()) ++k;  // boundary: next segment
  return (pts_[k] - pts_[k - 1]).normalized() * speed_;
}

double Trajectory::exit_time(const Aabb2& box, double t_from) const {
  auto inside = [&](const Vec3& p) { return box.contains(p.head<2>()); };
  if (!inside(pos(t_from))) return t_from;

  // walk the remaining segments; within each, find the earliest face crossing
  const double t_end = end_time();
  double t0 = t_from;
  while (t0 < t_end) {
    std::size_t k = 1;
    while (times_[k] <= t0) ++k;
    const double t1 = times_[k];
    const Vec3 a = pos(t0), b = pos(t1);
    double best = kInf;
    auto face = [&](double pa, double pb, double lim, bool upper) {
      if (upper ? (pb > lim) : (pb < lim)) {
        const double s = (lim - pa) / (pb - pa);
        if (s >= 0.0 && s <= 1.0) best = std::min(best, t0 + s * (t1 - t0));
      }
    };
    face(a.x(), b.x(), box.hi.x(), true);
    face(a.x(), b.x(), box.lo.x(), false);
    face(a.y(), b.y(), box.hi.y(), true);
    face(a.y(), b.y(), box.lo.y(), false);
    if (best < kInf) return best;
    t0 = t1;
  }
  return kInf;  // parks inside the box
}

World::World(const WorldConfig& cfg) : cfg_(cfg) {
  const int n = static_cast<int>(cfg.trajectories.size());
  if (n < 1) throw std::invalid_argument("world needs at least one drone");
  if (cfg.yaw0.size() != cfg.trajectories.size())
    throw std::invalid_argument("yaw0 size != trajectory count");
  truth_.resize(n);
  yaw_.resize(n);
  drift_.assign(n, Vec3::Zero());
  for (int i = 0; i < n; ++i) {
    truth_[i].pos = cfg.trajectories[i].pos(0.0);
    truth_[i].vel = cfg.trajectories[i].vel(0.0);
    yaw_[i].hold_yaw = cfg.yaw0[i];
    truth_[i].yaw = cruise_yaw(i, 0.0);
    yaw_[i].hold_yaw = truth_[i].yaw;
    drift_rng_.push_back(make_stream(cfg.seed, stream::kVioDrift, i));
    det_rng_.push_back(make_stream(cfg.seed, stream::kDetector, i));
  }
}

double World::cruise_yaw(int i, double t) const {
  const Vec3 v = cfg_.trajectories[i].vel(t);
  if (v.head<2>().norm() > 0.0) return std::atan2(v.y(), v.x());
  return yaw_[i].hold_yaw;
}

void World::advance_to(double t) {
  if (t < time_)
    throw std::invalid_argument("world time cannot move backwards");
  for (int i = 0; i < n(); ++i) {
    advance_yaw(i, time_, t);
    truth_[i].pos = cfg_.trajectories[i].pos(t);
    truth_[i].vel = cfg_.trajectories[i].vel(t);
  }
  time_ = t;
}

// exact sub-phase advance: each pass either consumes the rest of the
// interval or lands exactly on a phase boundary, so the result does not
// depend on how the interval was chopped up by the event schedule
void World::advance_yaw(int i, double t0, double t1) {
  auto& ex = yaw_[i];
  auto& tr = truth_[i];
  double t = t0;
  while (true) {
    if (ex.phase == YawExec::Phase::Cruise) {
      tr.yaw = cruise_yaw(i, t1);
      if (cfg_.trajectories[i].vel(t1).head<2>().norm() > 0.0)
        ex.hold_yaw = tr.yaw;
      break;
    }
    if (t >= t1) break;
    switch (ex.phase) {
      case YawExec::Phase::TurnOut: {
        const double d = wrap_angle(ex.target - tr.yaw);
        const double need = std::abs(d) / ex.rate;
        if (need <= t1 - t) {
          tr.yaw = ex.target;
          ex.phase = YawExec::Phase::Dwell;
          ex.dwell_until = t + need + cfg_.dwell;
          t += need;
        } else {
          tr.yaw = wrap_angle(tr.yaw + std::copysign(ex.rate * (t1 - t), d));
          t = t1;
        }
        break;
      }
      case YawExec::Phase::Dwell: {
        if (ex.dwell_until <= t1) {
          t = std::max(t, ex.dwell_until);
          ex.phase = YawExec::Phase::TurnBack;
        } else {
          t = t1;
        }
        break;
      }
      case YawExec::Phase::TurnBack: {
        const double goal = cruise_yaw(i, t);
        const double d = wrap_angle(goal - tr.yaw);
        const double need = std::abs(d) / ex.rate;
        if (need <= t1 - t) {
          tr.yaw = goal;
          ex.phase = YawExec::Phase::Cruise;
          t += need;
        } else {
          tr.yaw = wrap_angle(tr.yaw + std::copysign(ex.rate * (t1 - t), d));
          t = t1;
        }
        break;
      }
      case YawExec::Phase::Cruise:
        break;  // unreachable, handled above
    }
  }
  tr.yaw_mode = ex.phase == YawExec::Phase::Cruise
                    ? YawMode::Cruise
                    : (ex.phase == YawExec::Phase::Dwell ? YawMode::Holding
                                                         : YawMode::Turning);
}

void World::vio_tick(int i) {
  drift_[i] += cfg_.sigma_v * gauss3(drift_rng_.at(i));
}

Vec3 World::vio_output(int i) const { return truth_.at(i).pos + drift_.at(i); }

void World::command_turn(int i, double psi_des, double rate) {
  if (rate <= 0.0) throw std::invalid_argument("turn rate must be > 0");
  auto& ex = yaw_.at(i);
  ex.phase = YawExec::Phase::TurnOut;  // newest command wins
  ex.target = wrap_angle(psi_des);
  ex.rate = rate;
}

void World::abort_turn(int i) {
  auto& ex = yaw_.at(i);
  if (ex.phase == YawExec::Phase::TurnOut ||
      ex.phase == YawExec::Phase::Dwell)
    ex.phase = YawExec::Phase::TurnBack;
}

bool World::turning(int i) const {
  return yaw_.at(i).phase != YawExec::Phase::Cruise;
}

std::vector<Vec3> World::detect(int observer) {
  const auto& cam = cfg_.camera;
  const auto& obs = truth_.at(observer);
  const Eigen::Matrix3d r_gb = yaw_rotation_global_to_body(obs.yaw);

  std::vector<Vec3> hits;
  for (int j = 0; j < n(); ++j) {
    if (j == observer) continue;
    const Vec3 rel_g = truth_[j].pos - obs.pos;
    const double dist = rel_g.norm();
    if (dist == 0.0 || dist > cam.max_range) continue;
    const Vec3 body = r_gb * rel_g;
    if (std::abs(std::atan2(body.y(), body.x())) > cam.h_fov_half) continue;
    if (std::abs(std::atan2(body.z(), body.head<2>().norm())) >
        cam.v_fov_half)
      continue;
    if (!cfg_.grid.empty() &&
        cfg_.grid.segment_blocked(obs.pos.head<2>(), truth_[j].pos.head<2>()))
      continue;
    hits.push_back(body + cam.sigma_d * gauss3(det_rng_.at(observer)));
  }
  return hits;
}

double World::t_out(int i, double now) const {
  if (cfg_.grid.empty()) return kInf;
  return cfg_.trajectories.at(i).exit_time(cfg_.grid.bounds(), now);
}

std::optional<int> identify(const Vec3& z_body, const Vec3& observer_odo,
                            double observer_yaw,
                            const std::vector<std::optional<Vec3>>& shared_odometry,
                            const std::vector<Vec3>& drift_estimates,
                            int observer_id, double gate) {
  if (shared_odometry.size() != drift_estimates.size())
    throw std::invalid_argument("shared odometry / drift size mismatch");
  const int n = static_cast<int>(shared_odometry.size());
  if (observer_id < 0 || observer_id >= n)
    throw std::invalid_argument("observer id out of range");
  if (gate <= 0.0) throw std::invalid_argument("gate must be > 0");

  const Vec3 obs_corrected = observer_odo + drift_estimates[observer_id];
  const Vec3 lifted = obs_corrected +
                      yaw_rotation_global_to_body(observer_yaw).transpose() *
                          z_body;

  struct Cand {
    int id;
    Vec3 pos;
    double dist;
  };
  std::vector<Cand> cands;
  for (int j = 0; j < n; ++j) {
    if (j == observer_id || !shared_odometry[j]) continue;
    const Vec3 p = *shared_odometry[j] + drift_estimates[j];
    const double d = (p - lifted).norm();
    if (d <= gate) cands.push_back({j, p, d});
  }
  if (cands.empty()) return std::nullopt;
  // two plausible candidates packed closer than half the gate: ambiguous
  for (std::size_t a = 0; a < cands.size(); ++a)
    for (std::size_t b = a + 1; b < cands.size(); ++b)
      if ((cands[a].pos - cands[b].pos).norm() < 0.5 * gate)
        return std::nullopt;
  const auto best = std::min_element(
      cands.begin(), cands.end(),
      [](const Cand& a, const Cand& b) { return a.dist < b.dist; });
  return best->id;
}

}  // namespace swarmloc::sim
