#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <random>
#include <vector>

#include "swarmloc/grid.hpp"

// Truth-side simulation: scripted trajectories, a yaw state machine per
// drone, random-walk VIO drift and a yaw-mounted stereo detector. Positions
// are evaluated in closed form from the waypoint script, so advancing the
// world to a time stamp is exact regardless of the step sizes used.

namespace swarmloc::sim {

using Vec3 = Eigen::Vector3d;

struct CameraModel {
  double h_fov_half = 0.7592;  // rad, horizontal half-angle
  double v_fov_half = 0.5061;  // rad, vertical half-angle
  double max_range = 3.0;      // m
  double sigma_d = 0.005;      // m per-axis detection noise
};

// piecewise-linear constant-speed waypoint track; holds position after the
// last waypoint
class Trajectory {
 public:
  Trajectory() = default;
  Trajectory(std::vector<Vec3> waypoints, double speed);

  Vec3 pos(double t) const;
  Vec3 vel(double t) const;
  double end_time() const { return times_.empty() ? 0.0 : times_.back(); }

  // first time >= t_from at which the track leaves `box` (xy); +inf when it
  // never does
  double exit_time(const Aabb2& box, double t_from) const;

 private:
  std::vector<Vec3> pts_;
  std::vector<double> times_;  // arrival time per waypoint, times_[0] = 0
  double speed_ = 0.0;
};

enum class YawMode { Cruise, Turning, Holding };

struct DroneTruth {
  Vec3 pos = Vec3::Zero();
  double yaw = 0.0;
  Vec3 vel = Vec3::Zero();
  YawMode yaw_mode = YawMode::Cruise;
};

struct WorldConfig {
  std::vector<Trajectory> trajectories;
  std::vector<double> yaw0;          // initial yaw per drone
  double sigma_v = 0.001;            // m per VIO tick, drift increment std
  CameraModel camera;
  OccupancyGrid grid;                // empty = obstacle-free world
  double dwell = 0.5;                // s to hold at the commanded yaw
  std::uint64_t seed = 1;
};

class World {
 public:
  explicit World(const WorldConfig& cfg);

  int n() const { return static_cast<int>(truth_.size()); }
  double time() const { return time_; }
  const OccupancyGrid& grid() const { return cfg_.grid; }
  const CameraModel& camera() const { return cfg_.camera; }

  // advance truth (positions closed-form, yaw machine exact) to time t
  void advance_to(double t);
  void step(double dt) { advance_to(time_ + dt); }

  const DroneTruth& truth(int i) const { return truth_.at(i); }
  const Vec3& drift(int i) const { return drift_.at(i); }

  // one VIO epoch for drone i: drift random-walks one increment
  void vio_tick(int i);
  // odometry output: truth position plus accumulated drift
  Vec3 vio_output(int i) const;

  // start an observation turn: rotate to psi_des at `rate`, hold, return
  void command_turn(int i, double psi_des, double rate);
  // cut the turn or the hold short (assigned target already identified)
  void abort_turn(int i);
  bool turning(int i) const;

  // anonymous body-frame detections of every drone inside the camera cone,
  // in range and not occluded; consumes detector noise for emitted hits only
  std::vector<Vec3> detect(int observer);

  // time at which drone i's scripted track leaves the known map, from `now`
  double t_out(int i, double now) const;

 private:
  struct YawExec {
    enum class Phase { Cruise, TurnOut, Dwell, TurnBack } phase = Phase::Cruise;
    double target = 0.0;
    double rate = 0.0;
    double dwell_until = 0.0;
    double hold_yaw = 0.0;  // cruise yaw to keep when velocity is zero
  };

  void advance_yaw(int i, double t0, double t1);
  double cruise_yaw(int i, double t) const;

  WorldConfig cfg_;
  double time_ = 0.0;
  std::vector<DroneTruth> truth_;
  std::vector<YawExec> yaw_;
  std::vector<Vec3> drift_;
  std::vector<std::mt19937_64> drift_rng_;
  std::vector<std::mt19937_64> det_rng_;
};

// Match an anonymous body-frame detection against the corrected estimated
// positions of the other drones. shared_odometry holds the latest odometry
// received from each drone (nullopt when never heard from), drift_estimates
// the latest broadcast drift state. Returns the nearest candidate within
// `gate`; nothing when none qualifies or when two candidates inside the gate
// sit closer than gate/2 to each other (ambiguous).
std::optional<int> identify(const Vec3& z_body, const Vec3& observer_odo,
                            double observer_yaw,
                            const std::vector<std::optional<Vec3>>& shared_odometry,
                            const std::vector<Vec3>& drift_estimates,
                            int observer_id, double gate);

// body<->global helpers for a yaw-only attitude
Eigen::Matrix3d yaw_rotation_global_to_body(double yaw);

}  // namespace swarmloc::sim
