#include "swarmloc/net.hpp"

#include <algorithm>
#include <cmath>

#include "swarmloc/rng.hpp"
#include "swarmloc/sim.hpp"

namespace swarmloc::net {

void Scheduler::at(Tick tick, int priority, Fn fn) {
  if (tick < now_) throw std::invalid_argument("scheduling into the past");
  heap_.push(Ev{tick, priority, seq_++, std::move(fn)});
}

std::size_t Scheduler::run_until(Tick end) {
  std::size_t count = 0;
  while (!heap_.empty() && heap_.top().tick <= end) {
    Ev ev = heap_.top();
    heap_.pop();
    now_ = ev.tick;
    ev.fn();
    ++count;
  }
  now_ = std::max(now_, end);
  return count;
}

Network::Network(Scheduler& sched, const LinkModel& link, double clock_hz,
                 std::uint64_t seed)
    : sched_(sched),
      link_(link),
      clock_hz_(clock_hz),
      rng_(make_stream(seed, stream::kLink)) {
  if (link.drop_prob < 0.0 || link.drop_prob > 1.0)
    throw std::invalid_argument("drop_prob must be in [0, 1]");
  if (link.latency < 0.0 || link.jitter < 0.0)
    throw std::invalid_argument("latency/jitter must be >= 0");
}

std::optional<Tick> Network::publish(
    const Message& msg, std::function<void(const Message&)> deliver) {
  ++sent_;
  if (uni_(rng_) < link_.drop_prob) {
    ++dropped_;
    if (log_)
      log_({msg.send_time, msg.kind, msg.sender, msg.receiver, true, 0.0});
    return std::nullopt;
  }
  double delay_s = link_.latency;
  if (link_.jitter > 0.0) delay_s += link_.jitter * uni_(rng_);

  Tick deliver_tick =
      sched_.now() + static_cast<Tick>(std::llround(delay_s * clock_hz_));
  // links are FIFO: never deliver before an earlier message on the same link
  auto& floor = fifo_floor_[{msg.sender, msg.receiver}];
  deliver_tick = std::max(deliver_tick, floor);
  floor = deliver_tick;

  if (log_)
    log_({msg.send_time, msg.kind, msg.sender, msg.receiver, false,
          deliver_tick / clock_hz_});
  sched_.at(deliver_tick, prio::kDeliver,
            [deliver = std::move(deliver), msg]() { deliver(msg); });
  return deliver_tick;
}

Leader::Leader(int n, const plan::PlannerConfig& planner_cfg,
               const LeaderOptions& opts, const sim::OccupancyGrid* grid)
    : n_(n),
      state_(est::DriftState::zero(n)),
      planner_(planner_cfg),
      opts_(opts),
      q_(est::ProcessNoise::isotropic(n, opts.sigma_v)),
      grid_(grid),
      latest_(n),
      history_(n),
      busy_until_(n, -1.0) {}

std::vector<Message> Leader::cycle(const std::vector<Message>& inbox,
                                   double now, bool run_planner) {
  for (const auto& m : inbox) on_message(m, now);
  if (run_planner) on_plan_tick(now);
  return drain_outbox();
}

void Leader::on_message(const Message& msg, double now) {
  switch (msg.kind) {
    case MsgKind::Odometry:
      on_odometry(std::get<OdometryPayload>(msg.payload));
      try_apply(now);
      break;
    case MsgKind::Measurement:
      on_measurement(std::get<MeasurementPayload>(msg.payload), now);
      break;
    default:
      // commands and corrections originate here; ignore echoes
      break;
  }
}

void Leader::on_odometry(const OdometryPayload& p) {
  if (p.drone < 0 || p.drone >= n_) return;
  auto& hist = history_[p.drone];
  hist[p.epoch] = p;
  // prune beyond the staleness window
  const std::int64_t floor = state_.epoch - opts_.max_age_epochs - 1;
  while (!hist.empty() && hist.begin()->first < floor)
    hist.erase(hist.begin());
  auto& latest = latest_[p.drone];
  if (!latest || latest->epoch < p.epoch) latest = p;
}

void Leader::on_measurement(const MeasurementPayload& p, double now) {
  if (p.observer < 0 || p.observer >= n_ || p.target < 0 || p.target >= n_ ||
      p.observer == p.target)
    return;
  pending_.push_back(p);
  try_apply(now);
}

void Leader::on_epoch(double now) {
  est::propagate(state_, q_);
  try_apply(now);
}

void Leader::try_apply(double now) {
  auto it = pending_.begin();
  while (it != pending_.end()) {
    const auto& p = *it;
    const auto& ho = history_[p.observer];
    const auto& ht = history_[p.target];
    const auto io = ho.find(p.stamp);
    const auto jt = ht.find(p.stamp);
    if (state_.epoch - p.stamp > opts_.max_age_epochs) {
      if (io == ho.end() || jt == ht.end())
        ++stats_.missing_odometry_dropped;
      else
        ++stats_.stale_dropped;
      it = pending_.erase(it);
      continue;
    }
    if (p.stamp > state_.epoch || io == ho.end() || jt == ht.end()) {
      // stamped ahead of the filter, or endpoint odometry for that epoch not
      // here yet; the staleness window will eventually discard the
      // measurement if the gap never closes
      ++it;
      continue;
    }

    est::RelativeMeasurement m;
    m.observer = p.observer;
    m.target = p.target;
    m.z = p.z_body;
    m.rot_global_to_body = sim::yaw_rotation_global_to_body(p.observer_yaw);
    m.noise = opts_.sigma_d * opts_.sigma_d * est::Mat3::Identity();
    m.stamp = p.stamp;

    const double tr_before =
        est::relative_covariance(state_, p.observer, p.target).trace();
    const auto outcome = est::apply_measurement(
        state_, m, io->second.pos, jt->second.pos, {.joseph = opts_.joseph});

    UpdateLogRow row;
    row.time = now;
    row.stamp = p.stamp;
    row.observer = p.observer;
    row.target = p.target;
    row.residual = outcome.residual.r;
    row.trace_before = tr_before;
    row.trace_after =
        est::relative_covariance(state_, p.observer, p.target).trace();
    row.accepted = outcome.accepted;
    row.reason = outcome.reject_reason;
    if (update_log_) update_log_(row);

    if (outcome.accepted) {
      ++stats_.updates_applied;
      const auto key = std::minmax(p.observer, p.target);
      if (auto t = active_task_since_.find({key.first, key.second});
          t != active_task_since_.end()) {
        ++stats_.tasks_completed;
        active_task_since_.erase(t);
      }
      broadcast_correction(now);
    } else {
      ++stats_.updates_rejected;
    }
    it = pending_.erase(it);
  }
}

void Leader::broadcast_correction(double now) {
  DriftCorrectionPayload c;
  c.epoch = state_.epoch;
  c.drift.reserve(n_);
  for (int i = 0; i < n_; ++i) c.drift.push_back(state_.drift_of(i));
  for (int i = 0; i < n_; ++i) {
    Message msg;
    msg.kind = MsgKind::DriftCorrection;
    msg.sender = 0;
    msg.receiver = i;
    msg.send_time = now;
    msg.payload = c;
    outbox_.push_back(std::move(msg));
  }
}

bool Leader::busy(int drone, double now) const {
  return busy_until_.at(drone) > now;
}

std::optional<Vec3> Leader::corrected_estimate(int drone) const {
  const auto& l = latest_.at(drone);
  if (!l) return std::nullopt;
  return l->pos + state_.drift_of(drone);
}

void Leader::on_plan_tick(double now) {
  if (!opts_.planner_enabled) return;

  plan::PlanSnapshot snap;
  snap.time = now;
  snap.epoch = state_.epoch;
  snap.grid = grid_;
  snap.drones.resize(n_);
  for (int i = 0; i < n_; ++i) {
    const auto& l = latest_[i];
    if (!l) return;  // someone has never reported; hold off planning
    auto& d = snap.drones[i];
    d.pos = l->pos + state_.drift_of(i);
    d.yaw = l->yaw;
    d.vel = l->vel;
    d.t_out = l->t_out;
    d.busy = busy(i, now);
  }

  const auto outcome = planner_.plan(state_, snap);
  if (plan_log_) {
    for (const auto& rej : outcome.rejections) {
      PlanLogRow row;
      row.time = now;
      row.observer = rej.i;
      row.target = rej.j;
      row.trace = rej.trace;
      row.verdict = "rejected";
      row.reason = rej.reason;
      plan_log_(row);
    }
  }
  if (!outcome.task) return;

  const auto& task = *outcome.task;
  ++stats_.tasks_issued;
  busy_until_[task.observer] =
      now + task.t_turn + opts_.dwell + opts_.busy_slack;
  const auto key = std::minmax(task.observer, task.target);
  active_task_since_[{key.first, key.second}] = now;

  if (plan_log_) {
    PlanLogRow row;
    row.time = now;
    row.observer = task.observer;
    row.target = task.target;
    row.trace = est::relative_covariance(state_, task.observer, task.target)
                    .trace();
    row.psi_cur = task.psi_cur;
    row.psi_des = task.psi_des;
    row.t_turn = task.t_turn;
    row.verdict = "issued";
    plan_log_(row);
  }

  Message msg;
  msg.kind = MsgKind::YawCommand;
  msg.sender = 0;
  msg.receiver = task.observer;
  msg.send_time = now;
  msg.payload = YawCommandPayload{task};
  outbox_.push_back(std::move(msg));
}

std::vector<Message> Leader::drain_outbox() {
  std::vector<Message> out;
  out.swap(outbox_);
  return out;
}

}  // namespace swarmloc::net
