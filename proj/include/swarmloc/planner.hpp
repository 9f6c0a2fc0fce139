#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "swarmloc/estimator.hpp"
#include "swarmloc/grid.hpp"

// Active mutual-observation planning. The trigger is the trace of a pair's
// relative drift covariance; the commanded observer yaw is the smallest turn
// whose camera cone covers the target's confidence ellipse, so the trailing
// edge of the field of view ends up tangent to the ellipse.

namespace swarmloc::plan {

using est::Vec3;

struct PlannerConfig {
  double trace_threshold = 6e-4;        // m^2, trigger on tr(relative cov)
  double confidence = 0.95;             // ellipse mass
  double fov_half_angle = 0.7592;       // rad, horizontal camera half-angle
  double max_range = 3.0;               // m, detection range
  double turn_rate = 1.5707963267948966;  // rad/s commanded yaw rate
  double a_max = 4.0;                   // m/s^2 available deceleration
  double min_retrigger_interval = 2.0;  // s per-pair cooldown
  int max_pairs_per_cycle = 3;          // candidate retries per planning cycle
};

// Confidence ellipse of the target position relative to the observer,
// horizontal plane. lambda1 >= lambda2 are the eigenvalues of the 2x2
// covariance block; semi-axes are sqrt(s * lambda).
struct ConfidenceEllipse {
  Eigen::Vector2d center = Eigen::Vector2d::Zero();
  double lambda1 = 0.0;
  double lambda2 = 0.0;
  double alpha = 0.0;  // major-axis direction, (-pi/2, pi/2]
  double s = 0.0;      // chi-square scale for the configured confidence

  double semi_major() const { return std::sqrt(s * lambda1); }
  double semi_minor() const { return std::sqrt(s * lambda2); }
};

struct ObservationTask {
  int observer = -1;
  int target = -1;
  double psi_des = 0.0;
  double psi_cur = 0.0;
  double t_turn = 0.0;  // round-trip turn budget 2|dpsi|/turn_rate
  std::int64_t issued_at = 0;  // epoch
};

// inverse chi-square CDF with 2 dof at `confidence`: s = -2 ln(1 - c)
double chi_square_scale(double confidence);

// wrap to (-pi, pi]
double wrap_angle(double a);

// Build the ellipse from the xy block of a relative covariance. Throws
// std::domain_error when cov_xy is not symmetric PSD (small negative
// eigenvalues within tolerance are clamped to zero). Equal eigenvalues
// resolve to alpha = 0.
ConfidenceEllipse confidence_ellipse(const Eigen::Matrix2d& cov_xy,
                                     const Eigen::Vector2d& rel_center,
                                     double confidence);

// Yaw that brings the whole ellipse inside the field of view with the
// smallest |psi_des - psi_cur|; falls back to the center bearing when the
// subtended interval is wider than the cone. nullopt when the observer is
// inside the ellipse (no tangent geometry, task infeasible). Throws
// std::domain_error when the ellipse center coincides with the observer.
std::optional<double> desired_yaw(const Eigen::Vector2d& observer_pos,
                                  double observer_yaw,
                                  const ConfidenceEllipse& ellipse,
                                  const PlannerConfig& cfg);

// Everything the leader knows about one drone when planning.
struct DroneView {
  Vec3 pos = Vec3::Zero();  // corrected position estimate
  double yaw = 0.0;
  Vec3 vel = Vec3::Zero();
  double t_out = std::numeric_limits<double>::infinity();  // map-exit time
  bool busy = false;  // currently executing an observation turn
};

struct PlanSnapshot {
  double time = 0.0;
  std::int64_t epoch = 0;
  std::vector<DroneView> drones;
  const sim::OccupancyGrid* grid = nullptr;  // shared known map, optional
};

struct PairCandidate {
  int i = -1, j = -1;
  double trace = 0.0;
};

// Pairs with trace >= threshold, estimated distance <= max_range and an
// expired cooldown, sorted by descending trace; ties resolve to the smaller
// (i, j). cooldown_ok may be empty (treated as all-clear).
std::vector<PairCandidate> candidate_pairs(
    const est::DriftState& state, const std::vector<Vec3>& positions,
    const PlannerConfig& cfg,
    const std::function<bool(int, int)>& cooldown_ok = {});

// Highest-trace candidate, if any.
std::optional<std::pair<int, int>> select_pair(
    const est::DriftState& state, const std::vector<Vec3>& positions,
    const PlannerConfig& cfg,
    const std::function<bool(int, int)>& cooldown_ok = {});

struct RoleAssignment {
  int observer = -1;
  int target = -1;
  double psi_des = 0.0;
  double psi_cur = 0.0;
};

// Pick which side of the pair turns: smaller |dpsi| wins, exact ties go to
// the lower id, busy drones and infeasible geometry disqualify a side.
// nullopt when neither side can observe.
std::optional<RoleAssignment> assign_roles(int i, int j,
                                           const PlanSnapshot& snap,
                                           const est::DriftState& state,
                                           const PlannerConfig& cfg);

// Deceleration budget: a_max * (t_out - t_cur - t_turn) >= |v_after|.
bool safety_check(const ObservationTask& task, double t_out, double t_cur,
                  double v_after, const PlannerConfig& cfg);

// Range plus occlusion along the straight sight line (2D, conservative).
bool visibility_check(const Vec3& observer_pos, const Vec3& target_pos,
                      const sim::OccupancyGrid* grid,
                      const PlannerConfig& cfg);

struct PairRejection {
  int i = -1, j = -1;
  double trace = 0.0;
  std::string reason;
};

struct PlanOutcome {
  std::optional<ObservationTask> task;
  std::vector<PairRejection> rejections;
};

// Full planning cycle with per-pair retry bound and a persistent
// per-pair retrigger cooldown (stamped when a task is issued).
class YawPlanner {
 public:
  explicit YawPlanner(const PlannerConfig& cfg) : cfg_(cfg) {}

  const PlannerConfig& config() const { return cfg_; }
  PlanOutcome plan(const est::DriftState& state, const PlanSnapshot& snap);

  bool cooldown_ok(int i, int j, double now) const;
  void clear_cooldowns() { last_issue_.clear(); }

 private:
  PlannerConfig cfg_;
  std::map<std::pair<int, int>, double> last_issue_;
};

}  // namespace swarmloc::plan
