#include "swarmloc/runner.hpp"

#include <cmath>
#include <map>
#include <optional>
#include <tuple>
#include <vector>

#include "json.hpp"

namespace swarmloc::run {

namespace {

using est::Vec3;
using net::Message;
using net::MsgKind;
using Tick = net::Tick;

sim::WorldConfig world_config(const scn::ScenarioConfig& cfg) {
  sim::WorldConfig w;
  w.trajectories.reserve(cfg.n_drones);
  w.yaw0.reserve(cfg.n_drones);
  for (const auto& d : cfg.drones) {
    w.trajectories.emplace_back(d.waypoints, cfg.speed);
    w.yaw0.push_back(d.yaw0.value_or(0.0));
  }
  w.sigma_v = cfg.sigma_v;
  w.camera.h_fov_half = cfg.planner.fov_half_angle;
  w.camera.v_fov_half = cfg.v_fov_half;
  w.camera.max_range = cfg.planner.max_range;
  w.camera.sigma_d = cfg.sigma_d;
  w.grid = cfg.grid.build();
  w.dwell = cfg.dwell;
  w.seed = cfg.seed;
  return w;
}

net::LeaderOptions leader_options(const scn::ScenarioConfig& cfg) {
  net::LeaderOptions o;
  o.sigma_v = cfg.sigma_v;
  o.sigma_d = cfg.sigma_d;
  o.joseph = cfg.joseph;
  o.max_age_epochs = cfg.max_age_epochs;
  o.dwell = cfg.dwell;
  o.busy_slack = cfg.busy_slack;
  o.planner_enabled = cfg.planner_enabled;
  return o;
}

// everything one run needs, wired together; the leader process lives on
// drone 0, so leader traffic to or from drone 0 skips the radio
struct Engine {
  const scn::ScenarioConfig& cfg;
  int n;
  double tick_dt;
  Tick end_tick;

  sim::World world;
  net::Scheduler sched;
  net::Network network;
  net::Leader leader;

  struct Agent {
    std::vector<std::optional<Vec3>> shared_odo;  // latest heard per peer
    std::vector<Vec3> drift_est;                  // last correction received
    std::int64_t drift_epoch = -1;
    std::optional<plan::ObservationTask> task;
  };
  std::vector<Agent> agents;

  std::int64_t epoch = 0;
  RunResult out;

  explicit Engine(const scn::ScenarioConfig& c)
      : cfg(c),
        n(c.n_drones),
        tick_dt(1.0 / c.clock_hz),
        end_tick(static_cast<Tick>(std::llround(c.duration * c.clock_hz))),
        world(world_config(c)),
        network(sched, c.link, c.clock_hz, c.seed),
        leader(c.n_drones, c.planner, leader_options(c),
               &world.grid()) {
    agents.resize(n);
    for (auto& a : agents) {
      a.shared_odo.assign(n, std::nullopt);
      a.drift_est.assign(n, Vec3::Zero());
    }
    leader.set_update_log(
        [this](const net::UpdateLogRow& r) { out.updates.push_back(r); });
    leader.set_plan_log(
        [this](const net::PlanLogRow& r) { out.plans.push_back(r); });
    if (cfg.log_messages)
      network.set_log(
          [this](const net::Network::LogRow& r) { out.messages.push_back(r); });
  }

  double at(Tick t) const { return t * tick_dt; }

  void deliver(const Message& m) {
    const double t = at(sched.now());
    world.advance_to(t);
    if (m.receiver == 0 &&
        (m.kind == MsgKind::Odometry || m.kind == MsgKind::Measurement)) {
      if (m.kind == MsgKind::Odometry)
        agent_odometry(0, m);  // drone 0's agent listens on the same radio
      leader.on_message(m, t);
      flush(t);
      return;
    }
    apply_agent(m, t);
  }

  void send_to_leader(const Message& m, double t) {
    if (m.sender == 0) {  // local process, no radio hop
      leader.on_message(m, t);
      flush(t);
      return;
    }
    network.publish(m, [this](const Message& d) { deliver(d); });
  }

  void agent_odometry(int receiver, const Message& m) {
    const auto& p = std::get<net::OdometryPayload>(m.payload);
    if (p.drone != receiver) agents[receiver].shared_odo[p.drone] = p.pos;
  }

  void apply_agent(const Message& m, double) {
    const int r = m.receiver;
    switch (m.kind) {
      case MsgKind::Odometry:
        agent_odometry(r, m);
        break;
      case MsgKind::DriftCorrection: {
        const auto& p = std::get<net::DriftCorrectionPayload>(m.payload);
        if (p.epoch >= agents[r].drift_epoch) {
          agents[r].drift_est = p.drift;
          agents[r].drift_epoch = p.epoch;
        }
        break;
      }
      case MsgKind::YawCommand: {
        const auto& p = std::get<net::YawCommandPayload>(m.payload);
        agents[r].task = p.task;  // newest command preempts
        world.command_turn(r, p.task.psi_des, cfg.planner.turn_rate);
        break;
      }
      case MsgKind::Measurement:
        break;  // only the leader consumes these
    }
  }

  // push leader-produced commands and corrections out
  void flush(double t) {
    for (const auto& m : leader.drain_outbox()) {
      if (m.receiver == 0) {
        apply_agent(m, t);
        continue;
      }
      network.publish(m, [this](const Message& d) { deliver(d); });
    }
  }

  void on_vio(Tick tick) {
    const double t = at(tick);
    world.advance_to(t);
    ++epoch;
    for (int i = 0; i < n; ++i) world.vio_tick(i);
    for (int i = 0; i < n; ++i) {
      net::OdometryPayload p;
      p.drone = i;
      p.pos = world.vio_output(i);
      p.yaw = world.truth(i).yaw;
      p.vel = world.truth(i).vel;
      p.t_out = world.t_out(i, t);
      p.epoch = epoch;
      for (int j = 0; j < n; ++j) {
        Message m;
        m.kind = MsgKind::Odometry;
        m.sender = i;
        m.receiver = j;
        m.send_time = t;
        m.payload = p;
        if (j == i) {
          if (i == 0) send_to_leader(m, t);  // the leader's own odometry
          continue;
        }
        if (j == 0)
          send_to_leader(m, t);
        else
          network.publish(m, [this](const Message& d) { deliver(d); });
      }
    }
  }

  void on_detect(Tick tick) {
    const double t = at(tick);
    world.advance_to(t);
    for (int i = 0; i < n; ++i) {
      const auto hits = world.detect(i);
      for (const auto& z : hits) {
        const auto target =
            sim::identify(z, world.vio_output(i), world.truth(i).yaw,
                          agents[i].shared_odo, agents[i].drift_est, i,
                          cfg.ident_gate);
        if (!target) continue;
        net::MeasurementPayload mp;
        mp.observer = i;
        mp.target = *target;
        mp.z_body = z;
        mp.observer_yaw = world.truth(i).yaw;
        mp.stamp = epoch;
        Message m;
        m.kind = MsgKind::Measurement;
        m.sender = i;
        m.receiver = 0;
        m.send_time = t;
        m.payload = mp;
        send_to_leader(m, t);
        if (agents[i].task && agents[i].task->target == *target) {
          world.abort_turn(i);  // assignment done, cut the hold short
          agents[i].task.reset();
        }
      }
    }
  }

  void log_traces(double t) {
    for (int i = 0; i < n; ++i)
      if (!leader.latest_odometry()[i]) return;
    const double tau = cfg.planner.trace_threshold;
    for (int i = 0; i < n; ++i) {
      const Vec3 pi = *leader.corrected_estimate(i);
      for (int j = i + 1; j < n; ++j) {
        const Vec3 pj = *leader.corrected_estimate(j);
        TraceRow row;
        row.time = t;
        row.i = i;
        row.j = j;
        row.trace = est::relative_covariance(leader.state(), i, j).trace();
        row.distance = (pi - pj).norm();
        row.visible =
            plan::visibility_check(pi, pj, &world.grid(), cfg.planner);
        row.eligible = row.trace >= tau && row.visible &&
                       leader.planner().cooldown_ok(i, j, t);
        out.traces.push_back(row);
      }
    }
  }

  void on_plan(Tick tick) {
    const double t = at(tick);
    world.advance_to(t);
    if (cfg.log_traces) log_traces(t);
    leader.on_plan_tick(t);
    flush(t);
  }

  void on_sample(Tick tick) {
    const double t = at(tick);
    world.advance_to(t);
    metrics::EvalSample s;
    s.time = t;
    s.truth.reserve(n);
    s.raw.reserve(n);
    s.corrected.reserve(n);
    std::vector<double> yaws;
    yaws.reserve(n);
    for (int i = 0; i < n; ++i) {
      s.truth.push_back(world.truth(i).pos);
      yaws.push_back(world.truth(i).yaw);
      const Vec3 odo = world.vio_output(i);
      s.raw.push_back(odo);
      s.corrected.push_back(odo + agents[i].drift_est[i]);
    }
    out.samples.push_back(std::move(s));
    out.sample_yaws.push_back(std::move(yaws));
  }

  void schedule() {
    const Tick vio_p = cfg.clock_hz / cfg.vio_rate;
    const Tick det_p = cfg.clock_hz / cfg.detect_rate;
    const Tick plan_p = cfg.clock_hz / cfg.plan_rate;
    const Tick eval_p = cfg.clock_hz / cfg.eval_rate;
    for (Tick t = vio_p; t <= end_tick; t += vio_p) {
      sched.at(t, net::prio::kVio, [this, t] { on_vio(t); });
      sched.at(t, net::prio::kPropagate, [this, t] {
        leader.on_epoch(at(t));
        flush(at(t));
      });
    }
    for (Tick t = det_p; t <= end_tick; t += det_p)
      sched.at(t, net::prio::kDetect, [this, t] { on_detect(t); });
    for (Tick t = plan_p; t <= end_tick; t += plan_p)
      sched.at(t, net::prio::kPlan, [this, t] { on_plan(t); });
    for (Tick t = 0; t <= end_tick; t += eval_p)
      sched.at(t, net::prio::kSample, [this, t] { on_sample(t); });
  }

  RunResult run(bool ordered_pairs) {
    schedule();
    sched.run_until(end_tick);
    world.advance_to(at(end_tick));
    out.cfg = cfg;
    out.summary = summarize(cfg, out.samples, leader.stats(), network.sent(),
                            network.dropped(), ordered_pairs);
    out.summary_json = summary_to_json(out.summary);
    return std::move(out);
  }
};

}  // namespace

MetricsSummary summarize(const scn::ScenarioConfig& cfg,
                         const std::vector<metrics::EvalSample>& samples,
                         const net::LeaderStats& stats, std::size_t sent,
                         std::size_t dropped, bool ordered_pairs) {
  MetricsSummary s;
  s.scenario = cfg.name;
  s.seed = cfg.seed;
  s.n_drones = cfg.n_drones;
  s.duration = cfg.duration;
  s.ordered_pairs = ordered_pairs;
  s.stats = stats;
  s.messages_sent = sent;
  s.messages_dropped = dropped;
  if (samples.empty()) return s;

  s.rpe_final_raw = metrics::rpe(samples.back(), metrics::Source::Raw,
                                 ordered_pairs);
  s.rpe_final_corrected =
      metrics::rpe(samples.back(), metrics::Source::Corrected, ordered_pairs);
  double acc_raw = 0.0, acc_cor = 0.0;
  for (const auto& e : samples) {
    acc_raw += metrics::rpe(e, metrics::Source::Raw, ordered_pairs);
    acc_cor += metrics::rpe(e, metrics::Source::Corrected, ordered_pairs);
  }
  s.rpe_mean_raw = acc_raw / samples.size();
  s.rpe_mean_corrected = acc_cor / samples.size();

  s.rmse_raw.resize(cfg.n_drones);
  s.rmse_corrected.resize(cfg.n_drones);
  s.rmse_reduction_pct.resize(cfg.n_drones);
  for (int i = 0; i < cfg.n_drones; ++i) {
    s.rmse_raw[i] = metrics::rmse(samples, i, metrics::Source::Raw);
    s.rmse_corrected[i] = metrics::rmse(samples, i, metrics::Source::Corrected);
    s.rmse_reduction_pct[i] =
        s.rmse_raw[i] > 0.0
            ? 100.0 * (1.0 - s.rmse_corrected[i] / s.rmse_raw[i])
            : 0.0;
    if (s.rmse_corrected[i] < s.rmse_raw[i]) ++s.drones_improved;
  }
  return s;
}

std::string summary_to_json(const MetricsSummary& s) {
  nlohmann::ordered_json j;
  j["scenario"] = s.scenario;
  j["seed"] = s.seed;
  j["n_drones"] = s.n_drones;
  j["duration_s"] = s.duration;
  j["rpe"] = {{"ordered_pairs", s.ordered_pairs},
              {"final_raw_m", s.rpe_final_raw},
              {"final_corrected_m", s.rpe_final_corrected},
              {"mean_raw_m", s.rpe_mean_raw},
              {"mean_corrected_m", s.rpe_mean_corrected}};
  j["rmse"] = {{"raw_m", s.rmse_raw},
               {"corrected_m", s.rmse_corrected},
               {"reduction_pct", s.rmse_reduction_pct},
               {"drones_improved", s.drones_improved}};
  j["counters"] = {{"updates_applied", s.stats.updates_applied},
                   {"updates_rejected", s.stats.updates_rejected},
                   {"stale_dropped", s.stats.stale_dropped},
                   {"missing_odometry_dropped",
                    s.stats.missing_odometry_dropped},
                   {"tasks_issued", s.stats.tasks_issued},
                   {"tasks_completed", s.stats.tasks_completed},
                   {"messages_sent", s.messages_sent},
                   {"messages_dropped", s.messages_dropped}};
  return j.dump(2) + "\n";
}

RunResult run_scenario(const scn::ScenarioConfig& cfg, bool ordered_pairs) {
  cfg.validate();
  Engine engine(cfg);
  return engine.run(ordered_pairs);
}

std::vector<SweepRow> run_sweep(const scn::ScenarioConfig& base,
                                const std::vector<scn::SweepAxis>& axes,
                                int n_seeds, bool ordered_pairs) {
  if (axes.empty()) throw scn::ConfigError("sweep: no axes");
  if (n_seeds < 1) throw scn::ConfigError("sweep: n_seeds must be >= 1");

  // cross product, first axis outermost
  std::vector<std::vector<std::pair<std::string, double>>> cells{{}};
  for (const auto& axis : axes) {
    std::vector<std::vector<std::pair<std::string, double>>> next;
    for (const auto& cell : cells)
      for (double v : axis.values) {
        auto c = cell;
        c.emplace_back(axis.key, v);
        next.push_back(std::move(c));
      }
    cells = std::move(next);
  }

  std::vector<SweepRow> rows;
  rows.reserve(cells.size() * n_seeds);
  for (const auto& cell : cells) {
    scn::ScenarioConfig cfg = base;
    cfg.log_messages = false;
    cfg.log_traces = false;
    for (const auto& [key, v] : cell) {
      if (key == "sigma_v")
        cfg.sigma_v = v;
      else if (key == "sigma_d")
        cfg.sigma_d = v;
      else if (key == "n_drones")
        scn::grid_formation(cfg, static_cast<int>(v), 2.0,
                            cfg.speed * cfg.duration);
      else
        throw scn::ConfigError("sweep: unknown axis '" + key + "'");
    }
    cfg.validate();
    for (int k = 0; k < n_seeds; ++k) {
      cfg.seed = base.seed + static_cast<std::uint64_t>(k);
      const auto r = run_scenario(cfg, ordered_pairs);
      SweepRow row;
      row.sigma_v = cfg.sigma_v;
      row.sigma_d = cfg.sigma_d;
      row.n_drones = cfg.n_drones;
      row.seed = cfg.seed;
      row.rpe_final_raw = r.summary.rpe_final_raw;
      row.rpe_final_corrected = r.summary.rpe_final_corrected;
      row.rpe_mean_corrected = r.summary.rpe_mean_corrected;
      double acc_raw = 0.0, acc_cor = 0.0;
      for (int i = 0; i < cfg.n_drones; ++i) {
        acc_raw += r.summary.rmse_raw[i];
        acc_cor += r.summary.rmse_corrected[i];
      }
      row.rmse_mean_raw = acc_raw / cfg.n_drones;
      row.rmse_mean_corrected = acc_cor / cfg.n_drones;
      rows.push_back(row);
    }
  }
  return rows;
}

std::vector<SweepCell> aggregate_sweep(const std::vector<SweepRow>& rows) {
  using Key = std::tuple<double, double, int>;
  std::vector<Key> order;
  std::map<Key, std::vector<const SweepRow*>> groups;
  for (const auto& r : rows) {
    const Key k{r.sigma_v, r.sigma_d, r.n_drones};
    auto [it, fresh] = groups.try_emplace(k);
    if (fresh) order.push_back(k);
    it->second.push_back(&r);
  }

  auto med = [](const std::vector<const SweepRow*>& g, auto field) {
    std::vector<double> v;
    v.reserve(g.size());
    for (const auto* r : g) v.push_back(r->*field);
    return metrics::median(std::move(v));
  };

  std::vector<SweepCell> cells;
  cells.reserve(order.size());
  for (const auto& k : order) {
    const auto& g = groups.at(k);
    SweepCell c;
    std::tie(c.sigma_v, c.sigma_d, c.n_drones) = k;
    c.seeds = static_cast<int>(g.size());
    c.rpe_final_raw = med(g, &SweepRow::rpe_final_raw);
    c.rpe_final_corrected = med(g, &SweepRow::rpe_final_corrected);
    c.rpe_mean_corrected = med(g, &SweepRow::rpe_mean_corrected);
    c.rmse_mean_raw = med(g, &SweepRow::rmse_mean_raw);
    c.rmse_mean_corrected = med(g, &SweepRow::rmse_mean_corrected);
    cells.push_back(c);
  }
  return cells;
}

}  // namespace swarmloc::run
