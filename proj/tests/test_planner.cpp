#include <cmath>

#include "doctest.h"
#include "swarmloc/grid.hpp"
#include "swarmloc/planner.hpp"

using namespace swarmloc;

namespace {

constexpr double kPi = 3.141592653589793238462643383279502884;

// state with zero cross blocks and a chosen variance per drone, so the
// relative trace of pair (i, j) is 3 (v_i + v_j)
est::DriftState diag_state(const std::vector<double>& var) {
  auto s = est::DriftState::zero(static_cast<int>(var.size()));
  for (std::size_t i = 0; i < var.size(); ++i)
    s.P.block<3, 3>(3 * i, 3 * i) = var[i] * est::Mat3::Identity();
  return s;
}

plan::ConfidenceEllipse circle_at(const Eigen::Vector2d& center, double radius,
                                  double confidence) {
  const double s = plan::chi_square_scale(confidence);
  const Eigen::Matrix2d cov =
      (radius * radius / s) * Eigen::Matrix2d::Identity();
  return plan::confidence_ellipse(cov, center, confidence);
}

}  // namespace

TEST_CASE("chi-square scale hits the 2-dof table values") {
  CHECK(std::abs(plan::chi_square_scale(0.95) - 5.991) < 1e-3);
  CHECK(std::abs(plan::chi_square_scale(0.99) - 9.210) < 1e-3);
  CHECK(plan::chi_square_scale(0.95) ==
        doctest::Approx(-2.0 * std::log1p(-0.95)).epsilon(1e-15));
  CHECK_THROWS_AS(plan::chi_square_scale(0.0), std::domain_error);
  CHECK_THROWS_AS(plan::chi_square_scale(1.0), std::domain_error);
}

TEST_CASE("angle wrap lands in (-pi, pi]") {
  CHECK(plan::wrap_angle(0.1) == doctest::Approx(0.1));
  CHECK(plan::wrap_angle(kPi) == doctest::Approx(kPi));
  CHECK(plan::wrap_angle(-kPi) == doctest::Approx(kPi));
  CHECK(plan::wrap_angle(3.0 * kPi) == doctest::Approx(kPi));
  CHECK(plan::wrap_angle(2.0 * kPi) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(plan::wrap_angle(-0.25) == doctest::Approx(-0.25));
}

TEST_CASE("ellipse eigenstructure from the 2x2 block") {
  Eigen::Matrix2d cov;
  cov << 2.5, 1.5, 1.5, 2.5;  // eigenvalues 4 and 1, major axis at 45 degrees
  const auto e = plan::confidence_ellipse(cov, {0.0, 0.0}, 0.95);
  CHECK(e.lambda1 == doctest::Approx(4.0));
  CHECK(e.lambda2 == doctest::Approx(1.0));
  CHECK(e.alpha == doctest::Approx(kPi / 4.0));
  CHECK(e.semi_major() == doctest::Approx(std::sqrt(5.991464547107982 * 4)));

  const auto iso = plan::confidence_ellipse(
      2.0 * Eigen::Matrix2d::Identity(), {1.0, 1.0}, 0.95);
  CHECK(iso.alpha == 0.0);
  CHECK(iso.lambda1 == doctest::Approx(2.0));
  CHECK(iso.lambda2 == doctest::Approx(2.0));

  Eigen::Matrix2d indef;
  indef << 1.0, 2.0, 2.0, 1.0;  // eigenvalues 3 and -1
  CHECK_THROWS_AS(plan::confidence_ellipse(indef, {0, 0}, 0.95),
                  std::domain_error);

  Eigen::Matrix2d lop;
  lop << 1.0, 0.5, 0.0, 1.0;
  CHECK_THROWS_AS(plan::confidence_ellipse(lop, {0, 0}, 0.95),
                  std::domain_error);
}

TEST_CASE("yaw command covers the whole ellipse with the smallest turn") {
  plan::PlannerConfig cfg;  // fov half-angle 0.7592

  // circle of radius 0.5 centered 2 m ahead on +y, watched from the origin
  const auto e = circle_at({0.0, 2.0}, 0.5, 0.95);
  const double beta = std::asin(0.25);  // tangent half-angle

  SUBCASE("clockwise side is nearer") {
    const auto psi = plan::desired_yaw({0, 0}, 0.0, e, cfg);
    REQUIRE(psi.has_value());
    // rotate just enough that the cone's trailing edge touches the circle
    CHECK(*psi ==
          doctest::Approx(kPi / 2 + beta - cfg.fov_half_angle).epsilon(1e-9));
  }
  SUBCASE("counter-clockwise side is nearer") {
    const auto psi = plan::desired_yaw({0, 0}, kPi, e, cfg);
    REQUIRE(psi.has_value());
    CHECK(*psi ==
          doctest::Approx(kPi / 2 - beta + cfg.fov_half_angle).epsilon(1e-9));
  }
  SUBCASE("already covered: keep the current yaw") {
    const auto psi = plan::desired_yaw({0, 0}, 1.6, e, cfg);
    REQUIRE(psi.has_value());
    CHECK(*psi == 1.6);
  }
}

TEST_CASE("yaw command degenerate geometries") {
  plan::PlannerConfig cfg;

  SUBCASE("point-like ellipse aims at the center") {
    const auto e = plan::confidence_ellipse(Eigen::Matrix2d::Zero(),
                                            {0.0, 2.0}, 0.95);
    const auto psi = plan::desired_yaw({0, 0}, 0.0, e, cfg);
    REQUIRE(psi.has_value());
    CHECK(*psi == doctest::Approx(kPi / 2));
  }
  SUBCASE("observer inside the ellipse is infeasible") {
    const auto e = circle_at({0.1, 0.0}, 1.0, 0.95);
    CHECK_FALSE(plan::desired_yaw({0, 0}, 0.0, e, cfg).has_value());
  }
  SUBCASE("wider than the cone falls back to the center bearing") {
    const auto e = circle_at({0.0, 2.0}, 1.9, 0.95);
    const auto psi = plan::desired_yaw({0, 0}, 0.0, e, cfg);
    REQUIRE(psi.has_value());
    CHECK(*psi == doctest::Approx(kPi / 2));
  }
  SUBCASE("center on the observer throws") {
    const auto e = circle_at({0.0, 0.0}, 0.5, 0.95);
    CHECK_THROWS_AS(plan::desired_yaw({0, 0}, 0.0, e, cfg),
                    std::domain_error);
  }
}

TEST_CASE("yaw command rotates with the scene") {
  plan::PlannerConfig cfg;
  Eigen::Matrix2d cov;
  cov << 0.004, 0.001, 0.001, 0.002;

  const Eigen::Vector2d center(1.3, 0.9);
  const double yaw = 2.0;  // well outside the feasible band, forces a turn
  const auto base = plan::desired_yaw(
      {0, 0}, yaw, plan::confidence_ellipse(cov, center, 0.95), cfg);
  REQUIRE(base.has_value());

  for (double th : {0.7, -1.9, 2.5}) {
    Eigen::Matrix2d rot;
    rot << std::cos(th), -std::sin(th), std::sin(th), std::cos(th);
    const Eigen::Matrix2d cov_r = rot * cov * rot.transpose();
    const auto turned = plan::desired_yaw(
        {0, 0}, yaw + th,
        plan::confidence_ellipse(cov_r, rot * center, 0.95), cfg);
    REQUIRE(turned.has_value());
    CHECK(std::abs(plan::wrap_angle(*turned - *base - th)) < 1e-9);
  }
}

TEST_CASE("pair selection by trace, range and cooldown") {
  plan::PlannerConfig cfg;
  cfg.trace_threshold = 6e-4;
  cfg.max_range = 3.0;

  auto s = diag_state({1e-4, 2e-4, 3e-4});
  // relative traces: (0,1) 9e-4, (0,2) 1.2e-3, (1,2) 1.5e-3

  SUBCASE("sorted by descending trace") {
    std::vector<plan::Vec3> pos = {{0, 0, 0}, {1, 0, 0}, {2, 0, 0}};
    const auto cand = plan::candidate_pairs(s, pos, cfg);
    REQUIRE(cand.size() == 3);
    CHECK(cand[0].i == 1);
    CHECK(cand[0].j == 2);
    CHECK(cand[1].i == 0);
    CHECK(cand[1].j == 2);
    CHECK(cand[2].i == 0);
    CHECK(cand[2].j == 1);
    CHECK(cand[0].trace == doctest::Approx(1.5e-3));
    const auto top = plan::select_pair(s, pos, cfg);
    REQUIRE(top.has_value());
    CHECK(top->first == 1);
    CHECK(top->second == 2);
  }
  SUBCASE("out-of-range pairs are not candidates") {
    std::vector<plan::Vec3> pos = {{0, 0, 0}, {1, 0, 0}, {10, 0, 0}};
    const auto cand = plan::candidate_pairs(s, pos, cfg);
    REQUIRE(cand.size() == 1);
    CHECK(cand[0].i == 0);
    CHECK(cand[0].j == 1);
  }
  SUBCASE("threshold filters quiet pairs") {
    cfg.trace_threshold = 1.4e-3;
    std::vector<plan::Vec3> pos = {{0, 0, 0}, {1, 0, 0}, {2, 0, 0}};
    const auto cand = plan::candidate_pairs(s, pos, cfg);
    REQUIRE(cand.size() == 1);
    CHECK(cand[0].i == 1);
    CHECK(cand[0].j == 2);
  }
  SUBCASE("cooldown hook filters pairs") {
    std::vector<plan::Vec3> pos = {{0, 0, 0}, {1, 0, 0}, {2, 0, 0}};
    const auto cand = plan::candidate_pairs(
        s, pos, cfg, [](int i, int j) { return !(i == 1 && j == 2); });
    REQUIRE(cand.size() == 2);
    CHECK(cand[0].i == 0);
    CHECK(cand[0].j == 2);
  }
  SUBCASE("position count must match the state") {
    std::vector<plan::Vec3> pos = {{0, 0, 0}, {1, 0, 0}};
    CHECK_THROWS_AS(plan::candidate_pairs(s, pos, cfg),
                    std::invalid_argument);
  }
}

TEST_CASE("role assignment prefers the smaller turn") {
  plan::PlannerConfig cfg;
  auto s = diag_state({1e-4, 1e-4});

  plan::PlanSnapshot snap;
  snap.time = 0.0;
  snap.drones.resize(2);
  snap.drones[0].pos = {0, 0, 0};
  snap.drones[1].pos = {2, 0, 0};

  SUBCASE("exact tie goes to the lower id") {
    snap.drones[0].yaw = 0.0;       // already facing drone 1
    snap.drones[1].yaw = kPi;       // already facing drone 0
    const auto roles = plan::assign_roles(0, 1, snap, s, cfg);
    REQUIRE(roles.has_value());
    CHECK(roles->observer == 0);
    CHECK(roles->target == 1);
  }
  SUBCASE("the side with less turning observes") {
    snap.drones[0].yaw = kPi / 2;  // quarter turn away
    snap.drones[1].yaw = kPi;      // zero turn
    const auto roles = plan::assign_roles(0, 1, snap, s, cfg);
    REQUIRE(roles.has_value());
    CHECK(roles->observer == 1);
    CHECK(roles->target == 0);
    CHECK(std::abs(plan::wrap_angle(roles->psi_des - kPi)) < 1e-9);
  }
  SUBCASE("busy drones cannot observe") {
    snap.drones[0].yaw = 0.0;
    snap.drones[1].yaw = kPi;
    snap.drones[0].busy = true;
    auto roles = plan::assign_roles(0, 1, snap, s, cfg);
    REQUIRE(roles.has_value());
    CHECK(roles->observer == 1);
    snap.drones[1].busy = true;
    CHECK_FALSE(plan::assign_roles(0, 1, snap, s, cfg).has_value());
  }
  SUBCASE("both observers inside the blown-up ellipse: no assignment") {
    auto big = diag_state({10.0, 10.0});  // semi-major ~ 11 m at 2 m spacing
    CHECK_FALSE(plan::assign_roles(0, 1, snap, big, cfg).has_value());
  }
}

TEST_CASE("stopping-distance budget") {
  plan::PlannerConfig cfg;
  cfg.a_max = 4.0;
  plan::ObservationTask task;
  task.t_turn = 2.0;

  CHECK(plan::safety_check(task, std::numeric_limits<double>::infinity(), 5.0,
                           100.0, cfg));
  // 4 * (10 - 5 - 2) = 12 of braking budget against 12 m/s: exactly enough
  CHECK(plan::safety_check(task, 10.0, 5.0, 12.0, cfg));
  CHECK_FALSE(plan::safety_check(task, 10.0, 5.0, 12.1, cfg));
  CHECK_FALSE(plan::safety_check(task, 6.9, 5.0, 0.5, cfg));  // past horizon
}

TEST_CASE("sight line needs range and clearance") {
  plan::PlannerConfig cfg;
  cfg.max_range = 3.0;

  CHECK(plan::visibility_check({0, 0, 1}, {2, 0, 1}, nullptr, cfg));
  CHECK_FALSE(plan::visibility_check({0, 0, 1}, {3.5, 0, 1}, nullptr, cfg));

  sim::OccupancyGrid grid({-1.0, -1.0}, 0.1, 40, 20);
  grid.mark_rect({0.9, -0.6}, {1.1, 0.6});
  CHECK_FALSE(plan::visibility_check({0, 0, 1}, {2, 0, 1}, &grid, cfg));
  CHECK(plan::visibility_check({0, 0, 1}, {0.5, 0, 1}, &grid, cfg));
  // around the wall: straight line misses the occupied cells
  CHECK(plan::visibility_check({0, 0.8, 1}, {2, 0.8, 1}, &grid, cfg));
}

TEST_CASE("full planning cycle with cooldown") {
  plan::PlannerConfig cfg;
  cfg.trace_threshold = 6e-4;
  plan::YawPlanner planner(cfg);

  auto s = diag_state({2e-4, 2e-4});  // relative trace 1.2e-3

  plan::PlanSnapshot snap;
  snap.time = 0.0;
  snap.drones.resize(2);
  snap.drones[0].pos = {0, 0, 0};
  snap.drones[0].yaw = 0.0;
  snap.drones[1].pos = {1.5, 0, 0};
  snap.drones[1].yaw = 0.0;  // facing away, drone 0 trails it

  auto out = planner.plan(s, snap);
  REQUIRE(out.task.has_value());
  CHECK(out.task->observer == 0);
  CHECK(out.task->target == 1);
  CHECK(out.task->t_turn == doctest::Approx(0.0));

  // same instant again: the pair is cooling down, nothing to try
  out = planner.plan(s, snap);
  CHECK_FALSE(out.task.has_value());
  CHECK(out.rejections.empty());
  CHECK_FALSE(planner.cooldown_ok(0, 1, 1.9));
  CHECK(planner.cooldown_ok(0, 1, 2.0));  // boundary is inclusive

  snap.time = 2.0;
  out = planner.plan(s, snap);
  CHECK(out.task.has_value());

  planner.clear_cooldowns();
  CHECK(planner.cooldown_ok(0, 1, 0.0));
}

TEST_CASE("planning cycle logs rejection reasons") {
  plan::PlannerConfig cfg;
  cfg.trace_threshold = 6e-4;

  auto s = diag_state({2e-4, 2e-4});
  plan::PlanSnapshot snap;
  snap.time = 0.0;
  snap.drones.resize(2);
  snap.drones[0].pos = {0, 0, 1};
  snap.drones[0].yaw = 0.0;
  snap.drones[1].pos = {2, 0, 1};
  snap.drones[1].yaw = kPi;

  SUBCASE("occlusion") {
    sim::OccupancyGrid grid({-1.0, -1.0}, 0.1, 40, 20);
    grid.mark_rect({0.9, -0.6}, {1.1, 0.6});
    snap.grid = &grid;
    plan::YawPlanner planner(cfg);
    const auto out = planner.plan(s, snap);
    CHECK_FALSE(out.task.has_value());
    REQUIRE(out.rejections.size() == 1);
    CHECK(out.rejections[0].reason == "occluded");
  }
  SUBCASE("safety") {
    for (auto& d : snap.drones) {
      d.t_out = 0.1;
      d.vel = {1.0, 0, 0};
    }
    cfg.a_max = 0.5;
    plan::YawPlanner planner(cfg);
    const auto out = planner.plan(s, snap);
    CHECK_FALSE(out.task.has_value());
    REQUIRE(out.rejections.size() == 1);
    CHECK(out.rejections[0].reason == "safety");
  }
  SUBCASE("no feasible observer") {
    snap.drones[0].busy = true;
    snap.drones[1].busy = true;
    plan::YawPlanner planner(cfg);
    const auto out = planner.plan(s, snap);
    CHECK_FALSE(out.task.has_value());
    REQUIRE(out.rejections.size() == 1);
    CHECK(out.rejections[0].reason == "no feasible observer");
  }
}

TEST_CASE("retry bound caps the candidates tried per cycle") {
  plan::PlannerConfig cfg;
  cfg.trace_threshold = 6e-4;

  // three drones, the top pair unobservable (both endpoints busy)
  auto s = diag_state({3e-4, 3e-4, 1e-4});
  plan::PlanSnapshot snap;
  snap.time = 0.0;
  snap.drones.resize(3);
  snap.drones[0].pos = {0, 0, 0};
  snap.drones[0].busy = true;
  snap.drones[1].pos = {1.5, 0, 0};
  snap.drones[1].busy = true;
  snap.drones[2].pos = {0.5, 1.0, 0};

  SUBCASE("a later candidate wins after rejections") {
    plan::YawPlanner planner(cfg);  // max_pairs_per_cycle 3
    const auto out = planner.plan(s, snap);
    REQUIRE(out.task.has_value());
    // (0,1) rejected, then (0,2) or (1,2) carried by the free drone 2
    CHECK(out.task->observer == 2);
    CHECK(out.rejections.size() >= 1);
  }
  SUBCASE("bound 1 stops after the first rejection") {
    cfg.max_pairs_per_cycle = 1;
    plan::YawPlanner planner(cfg);
    const auto out = planner.plan(s, snap);
    CHECK_FALSE(out.task.has_value());
    REQUIRE(out.rejections.size() == 1);
    CHECK(out.rejections[0].reason == "no feasible observer");
  }
}
