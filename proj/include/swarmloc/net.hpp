#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <queue>
#include <random>
#include <string>
#include <variant>
#include <vector>

#include "swarmloc/estimator.hpp"
#include "swarmloc/planner.hpp"

// Simulated wireless side: a discrete-event scheduler with a total order on
// (tick, priority, sequence), a lossy latency link, and the leader process
// that binds the drift filter to the yaw planner.

namespace swarmloc::net {

using est::Vec3;
using Tick = std::int64_t;

// event priorities inside one tick, lower runs first
namespace prio {
constexpr int kVio = 0;       // drift step + odometry emit
constexpr int kPropagate = 1;
constexpr int kDeliver = 2;
constexpr int kDetect = 3;
constexpr int kPlan = 4;
constexpr int kSample = 5;
}  // namespace prio

class Scheduler {
 public:
  using Fn = std::function<void()>;

  void at(Tick tick, int priority, Fn fn);
  Tick now() const { return now_; }
  bool empty() const { return heap_.empty(); }
  // run events up to and including `end`; returns count executed
  std::size_t run_until(Tick end);

 private:
  struct Ev {
    Tick tick;
    int priority;
    std::uint64_t seq;
    Fn fn;
  };
  struct Later {
    bool operator()(const Ev& a, const Ev& b) const {
      if (a.tick != b.tick) return a.tick > b.tick;
      if (a.priority != b.priority) return a.priority > b.priority;
      return a.seq > b.seq;
    }
  };
  std::priority_queue<Ev, std::vector<Ev>, Later> heap_;
  std::uint64_t seq_ = 0;
  Tick now_ = 0;
};

enum class MsgKind : char {
  Odometry = 'O',
  Measurement = 'M',
  YawCommand = 'Y',
  DriftCorrection = 'C',
};

struct OdometryPayload {
  int drone = -1;
  Vec3 pos = Vec3::Zero();  // raw VIO position
  double yaw = 0.0;
  Vec3 vel = Vec3::Zero();
  double t_out = std::numeric_limits<double>::infinity();
  std::int64_t epoch = 0;
};

struct MeasurementPayload {
  int observer = -1;
  int target = -1;
  Vec3 z_body = Vec3::Zero();
  double observer_yaw = 0.0;
  std::int64_t stamp = 0;
};

struct YawCommandPayload {
  plan::ObservationTask task;
};

struct DriftCorrectionPayload {
  std::int64_t epoch = 0;
  std::vector<Vec3> drift;  // estimated drift for every drone
};

struct Message {
  MsgKind kind{};
  int sender = -1;
  int receiver = -1;  // drone id; the leader is drone 0
  double send_time = 0.0;
  std::variant<OdometryPayload, MeasurementPayload, YawCommandPayload,
               DriftCorrectionPayload>
      payload;
};

struct LinkModel {
  double latency = 0.0;    // s, fixed part
  double jitter = 0.0;     // s, uniform extra in [0, jitter)
  double drop_prob = 0.0;  // per message
};

// Applies drop/latency and keeps per-(sender, receiver) delivery FIFO. The
// caller supplies the handler that runs at delivery time.
class Network {
 public:
  Network(Scheduler& sched, const LinkModel& link, double clock_hz,
          std::uint64_t seed);

  // schedules delivery; returns the delivery tick, nullopt when dropped
  std::optional<Tick> publish(const Message& msg,
                              std::function<void(const Message&)> deliver);

  struct LogRow {
    double send_time;
    MsgKind kind;
    int sender, receiver;
    bool dropped;
    double deliver_time;  // meaningless when dropped
  };
  void set_log(std::function<void(const LogRow&)> log) { log_ = std::move(log); }

  std::size_t sent() const { return sent_; }
  std::size_t dropped() const { return dropped_; }

 private:
  Scheduler& sched_;
  LinkModel link_;
  double clock_hz_;
  std::mt19937_64 rng_;
  std::uniform_real_distribution<double> uni_{0.0, 1.0};
  std::map<std::pair<int, int>, Tick> fifo_floor_;
  std::function<void(const LogRow&)> log_;
  std::size_t sent_ = 0, dropped_ = 0;
};

struct LeaderOptions {
  double sigma_v = 0.001;  // process noise calibration, m per epoch
  double sigma_d = 0.005;  // measurement noise calibration, m per axis
  bool joseph = false;
  std::int64_t max_age_epochs = 10;
  double dwell = 0.5;
  double busy_slack = 0.25;  // extra busy margin after a commanded turn
  bool planner_enabled = true;
};

// Rows the leader reports to whoever is logging.
struct UpdateLogRow {
  double time = 0.0;
  std::int64_t stamp = 0;
  int observer = -1, target = -1;
  Vec3 residual = Vec3::Zero();
  double trace_before = 0.0, trace_after = 0.0;
  bool accepted = false;
  std::string reason;
};

struct PlanLogRow {
  double time = 0.0;
  int observer = -1, target = -1;
  double trace = 0.0;
  double psi_cur = 0.0, psi_des = 0.0, t_turn = 0.0;
  std::string verdict;  // "issued" or "rejected"
  std::string reason;   // rejection reason, empty when issued
};

struct LeaderStats {
  std::size_t updates_applied = 0;
  std::size_t updates_rejected = 0;
  std::size_t stale_dropped = 0;
  std::size_t missing_odometry_dropped = 0;
  std::size_t tasks_issued = 0;
  std::size_t tasks_completed = 0;  // a pair measurement arrived for the task
};

// The leader ingests odometry and identified measurements, propagates the
// drift filter on the VIO epoch schedule, plans observation tasks on its own
// cadence and answers with yaw commands plus drift-correction broadcasts.
class Leader {
 public:
  Leader(int n, const plan::PlannerConfig& planner_cfg,
         const LeaderOptions& opts, const sim::OccupancyGrid* grid);

  const est::DriftState& state() const { return state_; }
  const LeaderStats& stats() const { return stats_; }
  plan::YawPlanner& planner() { return planner_; }

  // batch interface: feed delivered messages, then run one planning pass;
  // outbound messages (yaw commands, corrections) are returned
  std::vector<Message> cycle(const std::vector<Message>& inbox, double now,
                             bool run_planner = true);

  // event-driven interface used by the runner
  void on_message(const Message& msg, double now);
  void on_epoch(double now);      // one propagation step
  void on_plan_tick(double now);  // one planning pass
  std::vector<Message> drain_outbox();

  void set_update_log(std::function<void(const UpdateLogRow&)> f) {
    update_log_ = std::move(f);
  }
  void set_plan_log(std::function<void(const PlanLogRow&)> f) {
    plan_log_ = std::move(f);
  }

  // latest known odometry per drone (nullopt = never heard from)
  const std::vector<std::optional<OdometryPayload>>& latest_odometry() const {
    return latest_;
  }
  bool busy(int drone, double now) const;
  // corrected position estimate from the latest odometry plus drift state
  std::optional<Vec3> corrected_estimate(int drone) const;

 private:
  void on_odometry(const OdometryPayload& p);
  void on_measurement(const MeasurementPayload& p, double now);
  void try_apply(double now);
  void broadcast_correction(double now);

  int n_;
  est::DriftState state_;
  plan::YawPlanner planner_;
  LeaderOptions opts_;
  est::ProcessNoise q_;
  const sim::OccupancyGrid* grid_;

  std::vector<std::optional<OdometryPayload>> latest_;
  // odometry history per drone, epoch -> payload, pruned by staleness window
  std::vector<std::map<std::int64_t, OdometryPayload>> history_;
  std::vector<MeasurementPayload> pending_;
  std::vector<double> busy_until_;
  std::map<std::pair<int, int>, double> active_task_since_;

  std::vector<Message> outbox_;
  LeaderStats stats_;
  std::function<void(const UpdateLogRow&)> update_log_;
  std::function<void(const PlanLogRow&)> plan_log_;
};

}  // namespace swarmloc::net
