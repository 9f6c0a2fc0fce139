#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "swarmloc/net.hpp"
#include "swarmloc/planner.hpp"
#include "swarmloc/sim.hpp"

// Run description: a flat "key = value" text format with '#' comments,
// strict about unknown and duplicated keys, plus the built-in scenarios.
// The effective config echoes back to canonical text that re-parses to the
// same run (doubles are printed with full round-trip precision).

namespace swarmloc::scn {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DroneSpec {
  std::vector<sim::Vec3> waypoints;
  std::optional<double> yaw0;  // resolved to first-leg bearing when absent
};

struct GridSpec {
  bool present = false;
  Eigen::Vector2d origin = Eigen::Vector2d::Zero();
  double resolution = 0.1;
  int nx = 0, ny = 0;
  std::vector<Eigen::Vector4d> rects;  // occupied boxes, x0 y0 x1 y1

  sim::OccupancyGrid build() const;
};

struct ScenarioConfig {
  std::string name = "custom";
  int n_drones = 0;
  double duration = 0.0;  // s
  std::uint64_t seed = 1;

  int clock_hz = 600;
  int vio_rate = 30;     // Hz, drift epochs and odometry
  int detect_rate = 15;  // Hz, camera exposures
  int plan_rate = 10;    // Hz, leader planning passes
  int eval_rate = 2;     // Hz, truth/estimate sampling

  double sigma_v = 0.001;  // m per VIO tick, drift increment std per axis
  double sigma_d = 0.005;  // m, detection noise std per axis
  double speed = 0.75;     // m/s along the waypoint tracks
  double dwell = 0.5;      // s to hold a commanded yaw
  double ident_gate = 1.0;  // m, detection-to-drone matching gate
  int max_age_epochs = 10;
  bool joseph = false;
  double busy_slack = 0.25;  // s, extra margin in the leader's busy window

  bool planner_enabled = true;
  plan::PlannerConfig planner;
  double v_fov_half = 0.5061;  // rad, vertical camera half-angle

  net::LinkModel link{0.02, 0.0, 0.0};

  bool log_messages = true;
  bool log_traces = true;

  std::vector<DroneSpec> drones;
  GridSpec grid;

  // sweep spec applied when the caller asks for the default sweep
  std::string default_sweep;

  // throws ConfigError on any out-of-range or inconsistent value
  void validate() const;
  // fills derived defaults (per-drone yaw0); call after validate
  void finalize();
  // canonical text; parse_config(echo()) reproduces this config
  std::string echo() const;
};

// Parse from text. source_name prefixes error messages ("file:line: ...").
ScenarioConfig parse_config(const std::string& text,
                            const std::string& source_name);
// Read a file and parse it. Throws ConfigError (also for unreadable files).
ScenarioConfig load_config(const std::string& path);

const std::vector<std::string>& builtin_names();
std::optional<ScenarioConfig> builtin(const std::string& name);

// One sweep dimension; key is "sigma_v", "sigma_d" or "n_drones".
struct SweepAxis {
  std::string key;
  std::vector<double> values;
};

// "sigma_v=1e-4,2e-4;sigma_d=0.005" or "n_drones=10,25,50". Noise keys may
// combine with each other; n_drones stands alone.
std::vector<SweepAxis> parse_sweep_spec(const std::string& spec);

// Replace the formation with n drones on a square-ish grid (row-major,
// `spacing` apart) all flying +x for `leg` meters. Used by the scale
// builtins and by n_drones sweeps.
void grid_formation(ScenarioConfig& c, int n, double spacing, double leg);

}  // namespace swarmloc::scn
