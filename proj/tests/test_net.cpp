#include <string>
#include <vector>

#include "doctest.h"
#include "swarmloc/net.hpp"
#include "swarmloc/runner.hpp"
#include "swarmloc/scenario.hpp"

using namespace swarmloc;

namespace {

net::Message odo_msg(int drone, const net::Vec3& pos, double yaw,
                     std::int64_t epoch) {
  net::OdometryPayload p;
  p.drone = drone;
  p.pos = pos;
  p.yaw = yaw;
  p.epoch = epoch;
  net::Message m;
  m.kind = net::MsgKind::Odometry;
  m.sender = drone;
  m.receiver = 0;
  m.payload = p;
  return m;
}

net::Message meas_msg(int observer, int target, const net::Vec3& z,
                      double yaw, std::int64_t stamp) {
  net::MeasurementPayload p;
  p.observer = observer;
  p.target = target;
  p.z_body = z;
  p.observer_yaw = yaw;
  p.stamp = stamp;
  net::Message m;
  m.kind = net::MsgKind::Measurement;
  m.sender = observer;
  m.receiver = 0;
  m.payload = p;
  return m;
}

}  // namespace

TEST_CASE("scheduler runs by tick, then priority, then insertion order") {
  net::Scheduler s;
  std::vector<std::string> order;

  s.at(5, net::prio::kPlan, [&] { order.push_back("5-plan"); });
  s.at(3, net::prio::kDeliver, [&] { order.push_back("3-deliver"); });
  s.at(5, net::prio::kVio, [&] { order.push_back("5-vio-a"); });
  s.at(3, net::prio::kVio, [&] { order.push_back("3-vio"); });
  s.at(5, net::prio::kVio, [&] { order.push_back("5-vio-b"); });

  CHECK(s.run_until(4) == 2);
  CHECK(s.now() == 4);
  CHECK(order == std::vector<std::string>{"3-vio", "3-deliver"});

  CHECK(s.run_until(10) == 3);
  CHECK(order == std::vector<std::string>{"3-vio", "3-deliver", "5-vio-a",
                                          "5-vio-b", "5-plan"});
  CHECK(s.now() == 10);
  CHECK(s.empty());
  CHECK_THROWS_AS(s.at(4, 0, [] {}), std::invalid_argument);
}

TEST_CASE("events scheduled while running still respect the order") {
  net::Scheduler s;
  std::vector<int> hits;
  s.at(2, 0, [&] {
    hits.push_back(1);
    s.at(2, 1, [&] { hits.push_back(2); });  // same tick, later priority
    s.at(4, 0, [&] { hits.push_back(3); });
  });
  s.run_until(10);
  CHECK(hits == std::vector<int>{1, 2, 3});
}

TEST_CASE("link adds latency in whole ticks") {
  net::Scheduler sched;
  net::LinkModel link;
  link.latency = 0.02;
  net::Network nw(sched, link, 600.0, 1);

  bool got = false;
  net::Tick at = -1;
  const auto tick = nw.publish(odo_msg(1, {0, 0, 0}, 0.0, 1),
                               [&](const net::Message&) {
                                 got = true;
                                 at = sched.now();
                               });
  REQUIRE(tick.has_value());
  CHECK(*tick == 12);  // 0.02 s at 600 Hz
  sched.run_until(11);
  CHECK_FALSE(got);
  sched.run_until(12);
  CHECK(got);
  CHECK(at == 12);
  CHECK(nw.sent() == 1);
  CHECK(nw.dropped() == 0);
}

TEST_CASE("jittered deliveries stay FIFO per link") {
  net::Scheduler sched;
  net::LinkModel link;
  link.latency = 0.0;
  link.jitter = 0.05;
  net::Network nw(sched, link, 600.0, 42);

  std::vector<int> delivered;
  net::Tick prev = 0;
  bool monotone = true;
  for (int k = 0; k < 200; ++k) {
    const auto t = nw.publish(odo_msg(1, {0, 0, 0}, 0.0, k),
                              [&delivered, k](const net::Message&) {
                                delivered.push_back(k);
                              });
    REQUIRE(t.has_value());
    if (*t < prev) monotone = false;
    prev = *t;
  }
  CHECK(monotone);

  sched.run_until(100);
  REQUIRE(delivered.size() == 200);
  for (std::size_t k = 0; k < delivered.size(); ++k)
    CHECK(delivered[k] == static_cast<int>(k));
}

TEST_CASE("drop rate tracks the configured probability") {
  net::Scheduler sched;
  net::LinkModel link;
  link.drop_prob = 0.7;
  net::Network nw(sched, link, 600.0, 7);

  std::size_t logged_drops = 0;
  nw.set_log([&](const net::Network::LogRow& r) {
    if (r.dropped) ++logged_drops;
  });

  for (int k = 0; k < 10000; ++k)
    nw.publish(odo_msg(1, {0, 0, 0}, 0.0, k), [](const net::Message&) {});

  CHECK(nw.sent() == 10000);
  CHECK(nw.dropped() >= 6850);
  CHECK(nw.dropped() <= 7150);
  CHECK(logged_drops == nw.dropped());

  net::LinkModel bad;
  bad.drop_prob = 1.5;
  CHECK_THROWS_AS(net::Network(sched, bad, 600.0, 1), std::invalid_argument);
}

TEST_CASE("leader fuses a measurement and answers with a broadcast") {
  plan::PlannerConfig pcfg;
  net::LeaderOptions opts;
  opts.sigma_v = 0.01;
  net::Leader leader(2, pcfg, opts, nullptr);

  leader.on_epoch(0.0);
  CHECK(leader.state().epoch == 1);

  leader.on_message(odo_msg(0, {0, 0, 1}, 0.0, 1), 0.01);
  leader.on_message(odo_msg(1, {2.05, 0, 1}, 0.0, 1), 0.01);

  std::vector<net::UpdateLogRow> rows;
  leader.set_update_log([&](const net::UpdateLogRow& r) { rows.push_back(r); });

  leader.on_message(meas_msg(0, 1, {2, 0, 0}, 0.0, 1), 0.02);

  CHECK(leader.stats().updates_applied == 1);
  CHECK(leader.stats().updates_rejected == 0);
  REQUIRE(rows.size() == 1);
  CHECK(rows[0].accepted);
  CHECK(rows[0].trace_after < rows[0].trace_before);
  CHECK((rows[0].residual - net::Vec3(-0.05, 0, 0)).norm() < 1e-12);

  const auto out = leader.drain_outbox();
  REQUIRE(out.size() == 2);  // one correction per drone
  for (const auto& m : out) {
    CHECK(m.kind == net::MsgKind::DriftCorrection);
    const auto& c = std::get<net::DriftCorrectionPayload>(m.payload);
    CHECK(c.drift.size() == 2);
    CHECK(c.epoch == 1);
  }
  CHECK(leader.drain_outbox().empty());

  const auto est1 = leader.corrected_estimate(1);
  REQUIRE(est1.has_value());
  CHECK((*est1 - (net::Vec3(2.05, 0, 1) + leader.state().drift_of(1)))
            .norm() == 0.0);
}

TEST_CASE("measurements wait for both endpoint odometries") {
  plan::PlannerConfig pcfg;
  net::LeaderOptions opts;
  opts.sigma_v = 0.01;
  net::Leader leader(2, pcfg, opts, nullptr);

  leader.on_epoch(0.0);
  leader.on_message(meas_msg(0, 1, {2, 0, 0}, 0.0, 1), 0.01);
  CHECK(leader.stats().updates_applied == 0);

  leader.on_message(odo_msg(0, {0, 0, 1}, 0.0, 1), 0.02);
  CHECK(leader.stats().updates_applied == 0);  // target odometry still missing

  leader.on_message(odo_msg(1, {2, 0, 1}, 0.0, 1), 0.03);
  CHECK(leader.stats().updates_applied == 1);
}

TEST_CASE("overage classification: missing odometry vs stale delivery") {
  plan::PlannerConfig pcfg;
  net::LeaderOptions opts;
  opts.sigma_v = 0.01;
  opts.max_age_epochs = 10;

  SUBCASE("no odometry ever arrives for the stamp") {
    net::Leader leader(2, pcfg, opts, nullptr);
    leader.on_epoch(0.0);
    leader.on_message(odo_msg(0, {0, 0, 1}, 0.0, 1), 0.0);
    leader.on_message(meas_msg(0, 1, {2, 0, 0}, 0.0, 1), 0.0);
    for (int k = 0; k < 12; ++k) leader.on_epoch(0.1 * k);
    CHECK(leader.stats().missing_odometry_dropped == 1);
    CHECK(leader.stats().stale_dropped == 0);
    CHECK(leader.stats().updates_applied == 0);
  }
  SUBCASE("measurement shows up long after its epoch") {
    net::Leader leader(2, pcfg, opts, nullptr);
    leader.on_epoch(0.0);
    leader.on_message(odo_msg(0, {0, 0, 1}, 0.0, 1), 0.0);
    leader.on_message(odo_msg(1, {2, 0, 1}, 0.0, 1), 0.0);
    for (int k = 0; k < 12; ++k) leader.on_epoch(0.1 * k);
    leader.on_message(meas_msg(0, 1, {2, 0, 0}, 0.0, 1), 1.3);
    CHECK(leader.stats().stale_dropped == 1);
    CHECK(leader.stats().missing_odometry_dropped == 0);
    CHECK(leader.stats().updates_applied == 0);
  }
}

TEST_CASE("planning pass issues a task and books the observer") {
  plan::PlannerConfig pcfg;  // trace threshold 6e-4
  net::LeaderOptions opts;
  opts.sigma_v = 0.01;  // one epoch puts a pair exactly at the threshold
  opts.dwell = 0.5;
  opts.busy_slack = 0.25;
  net::Leader leader(2, pcfg, opts, nullptr);

  std::vector<net::PlanLogRow> plog;
  leader.set_plan_log([&](const net::PlanLogRow& r) { plog.push_back(r); });

  leader.on_epoch(0.0);
  leader.on_message(odo_msg(0, {0, 0, 1}, 0.0, 1), 0.0);
  leader.on_message(odo_msg(1, {1.5, 0, 1}, 0.0, 1), 0.0);

  leader.on_plan_tick(0.1);
  CHECK(leader.stats().tasks_issued == 1);
  REQUIRE(plog.size() == 1);
  CHECK(plog[0].verdict == "issued");
  CHECK(plog[0].observer == 0);
  CHECK(plog[0].target == 1);

  // drone 0 already faces the target, so the booking is dwell plus slack
  CHECK(leader.busy(0, 0.7));
  CHECK_FALSE(leader.busy(0, 0.9));
  CHECK_FALSE(leader.busy(1, 0.2));

  const auto out = leader.drain_outbox();
  REQUIRE(out.size() == 1);
  CHECK(out[0].kind == net::MsgKind::YawCommand);
  CHECK(out[0].receiver == 0);

  // pair is cooling down, the next pass stays quiet
  leader.on_plan_tick(0.2);
  CHECK(leader.stats().tasks_issued == 1);

  // the mutual observation closes the loop
  leader.on_message(meas_msg(0, 1, {1.45, 0, 0}, 0.0, 1), 0.3);
  CHECK(leader.stats().updates_applied == 1);
  CHECK(leader.stats().tasks_completed == 1);
}

TEST_CASE("planning holds off until every drone has reported") {
  plan::PlannerConfig pcfg;
  net::LeaderOptions opts;
  opts.sigma_v = 0.01;
  net::Leader leader(2, pcfg, opts, nullptr);

  leader.on_epoch(0.0);
  leader.on_message(odo_msg(0, {0, 0, 1}, 0.0, 1), 0.0);
  leader.on_plan_tick(0.1);
  CHECK(leader.stats().tasks_issued == 0);
  CHECK(leader.drain_outbox().empty());
}

TEST_CASE("disabled planner never issues tasks") {
  plan::PlannerConfig pcfg;
  net::LeaderOptions opts;
  opts.sigma_v = 0.01;
  opts.planner_enabled = false;
  net::Leader leader(2, pcfg, opts, nullptr);

  leader.on_epoch(0.0);
  leader.on_message(odo_msg(0, {0, 0, 1}, 0.0, 1), 0.0);
  leader.on_message(odo_msg(1, {1.5, 0, 1}, 0.0, 1), 0.0);
  leader.on_plan_tick(0.1);
  CHECK(leader.stats().tasks_issued == 0);
}

TEST_CASE("nonsense message fields are ignored") {
  plan::PlannerConfig pcfg;
  net::LeaderOptions opts;
  net::Leader leader(2, pcfg, opts, nullptr);

  leader.on_epoch(0.0);
  leader.on_message(odo_msg(7, {0, 0, 1}, 0.0, 1), 0.0);    // no such drone
  leader.on_message(meas_msg(1, 1, {1, 0, 0}, 0.0, 1), 0.0);  // self-sighting
  leader.on_message(meas_msg(0, 9, {1, 0, 0}, 0.0, 1), 0.0);
  for (int k = 0; k < 14; ++k) leader.on_epoch(0.1 * k);
  CHECK(leader.stats().updates_applied == 0);
  CHECK(leader.stats().missing_odometry_dropped == 0);  // never even queued
  CHECK(leader.corrected_estimate(1) == std::nullopt);
}

TEST_CASE("batch cycle matches the event-driven path") {
  plan::PlannerConfig pcfg;
  net::LeaderOptions opts;
  opts.sigma_v = 0.01;
  net::Leader leader(2, pcfg, opts, nullptr);

  // a fused measurement quenches the pair trace, so this cycle broadcasts
  // corrections but has nothing left to plan
  leader.on_epoch(0.0);
  std::vector<net::Message> inbox = {odo_msg(0, {0, 0, 1}, 0.0, 1),
                                     odo_msg(1, {1.5, 0, 1}, 0.0, 1),
                                     meas_msg(0, 1, {1.5, 0, 0}, 0.0, 1)};
  auto out = leader.cycle(inbox, 0.1);
  CHECK(leader.stats().updates_applied == 1);
  CHECK(leader.stats().tasks_issued == 0);
  CHECK(out.size() == 2);

  // one more epoch of drift regrows it past the threshold
  leader.on_epoch(0.15);
  out = leader.cycle({}, 2.2);  // past the pair cooldown
  CHECK(leader.stats().tasks_issued == 1);
  REQUIRE(out.size() == 1);
  CHECK(out[0].kind == net::MsgKind::YawCommand);
}

TEST_CASE("total loss leaves the swarm on raw odometry") {
  auto cfg = scn::builtin("line4");
  REQUIRE(cfg.has_value());
  cfg->duration = 6.0;
  cfg->link.drop_prob = 1.0;
  cfg->log_messages = false;
  cfg->log_traces = false;
  cfg->validate();

  const auto res = run::run_scenario(*cfg);
  CHECK(res.summary.stats.updates_applied == 0);
  CHECK(res.summary.stats.tasks_issued == 0);
  CHECK(res.summary.messages_dropped == res.summary.messages_sent);
  for (const auto& s : res.samples)
    for (int i = 0; i < cfg->n_drones; ++i)
      CHECK((s.corrected[i] - s.raw[i]).norm() == 0.0);
  CHECK(res.summary.rpe_final_corrected ==
        doctest::Approx(res.summary.rpe_final_raw));
}

TEST_CASE("issued tasks and yaw commands line up on the wire") {
  auto cfg = scn::builtin("line4");
  REQUIRE(cfg.has_value());
  cfg->duration = 12.0;
  cfg->validate();

  const auto res = run::run_scenario(*cfg);

  std::vector<int> issued_to;  // radio observers only, drone 0 is loopback
  std::size_t issued_total = 0;
  for (const auto& p : res.plans) {
    if (p.verdict != "issued") continue;
    ++issued_total;
    if (p.observer != 0) issued_to.push_back(p.observer);
  }
  CHECK(issued_total == res.summary.stats.tasks_issued);

  std::vector<int> commanded;
  for (const auto& m : res.messages)
    if (m.kind == net::MsgKind::YawCommand) commanded.push_back(m.receiver);

  CHECK(commanded == issued_to);
  CHECK(res.summary.stats.tasks_issued > 0);  // the run actually planned
}
