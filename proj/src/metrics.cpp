#include "swarmloc/metrics.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <random>
#include <stdexcept>

#include "swarmloc/estimator.hpp"
#include "swarmloc/planner.hpp"
#include "swarmloc/rng.hpp"
#include "swarmloc/sim.hpp"

namespace swarmloc::metrics {

double rpe(const std::vector<Vec3>& truth, const std::vector<Vec3>& estimate,
           bool ordered_pairs) {
  if (truth.size() != estimate.size())
    throw std::invalid_argument("truth/estimate size mismatch");
  const int n = static_cast<int>(truth.size());
  double sum = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      sum += ((truth[i] - truth[j]) - (estimate[i] - estimate[j])).norm();
  return ordered_pairs ? 2.0 * sum : sum;
}

double rpe(const EvalSample& s, Source source, bool ordered_pairs) {
  return rpe(s.truth, source == Source::Raw ? s.raw : s.corrected,
             ordered_pairs);
}

double rmse(const std::vector<EvalSample>& trajectory, int drone,
            Source source) {
  if (trajectory.empty())
    throw std::invalid_argument("rmse needs at least one sample");
  double acc = 0.0;
  for (const auto& s : trajectory) {
    const auto& est = source == Source::Raw ? s.raw : s.corrected;
    acc += (s.truth.at(drone) - est.at(drone)).squaredNorm();
  }
  return std::sqrt(acc / trajectory.size());
}

double median(std::vector<double> v) {
  if (v.empty()) throw std::invalid_argument("median of empty set");
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

double quadratic_fit_r2(const std::vector<double>& n,
                        const std::vector<double>& y) {
  if (n.size() != y.size() || n.size() < 3)
    throw std::invalid_argument("need >= 3 points for a quadratic fit");
  const int m = static_cast<int>(n.size());
  Eigen::MatrixXd a(m, 3);
  Eigen::VectorXd b(m);
  for (int k = 0; k < m; ++k) {
    a(k, 0) = 1.0;
    a(k, 1) = n[k];
    a(k, 2) = n[k] * n[k];
    b(k) = y[k];
  }
  const Eigen::VectorXd coef = a.colPivHouseholderQr().solve(b);
  const Eigen::VectorXd res = b - a * coef;
  const double ss_res = res.squaredNorm();
  const double mean = b.mean();
  const double ss_tot = (b.array() - mean).square().sum();
  if (ss_tot == 0.0) return 1.0;
  return 1.0 - ss_res / ss_tot;
}

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

// a well-conditioned correlated drift state; kept small enough that the
// confidence ellipses stay well inside the inter-drone spacing, so every
// pair survives the feasibility checks
est::DriftState random_state(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  auto s = est::DriftState::zero(n);
  Eigen::MatrixXd a(3 * n, 3 * n);
  for (int r = 0; r < 3 * n; ++r)
    for (int c = 0; c < 3 * n; ++c) a(r, c) = g(rng);
  s.P = a * a.transpose() / (3.0 * n);
  s.P += Eigen::MatrixXd::Identity(3 * n, 3 * n);
  s.P *= 1e-6;
  for (int i = 0; i < 3 * n; ++i) s.x(i) = 1e-3 * g(rng);
  s.epoch = 1;
  return s;
}

}  // namespace

std::vector<BenchRow> bench_timing(const std::vector<int>& swarm_sizes,
                                   int reps, std::uint64_t seed) {
  if (reps < 1) throw std::invalid_argument("reps must be >= 1");
  std::vector<BenchRow> rows;
  auto rng = make_stream(seed, stream::kBench);
  std::normal_distribution<double> g(0.0, 1.0);

  for (int n : swarm_sizes) {
    if (n < 2) throw std::invalid_argument("bench needs n >= 2");
    BenchRow row;
    row.n = n;

    const auto base = random_state(n, rng);

    // positions clustered inside the sensing range so every pair qualifies
    std::vector<est::Vec3> pos(n);
    for (int i = 0; i < n; ++i)
      pos[i] = est::Vec3(0.9 * std::cos(i * 2.4), 0.9 * std::sin(i * 2.4),
                         0.02 * i);

    est::RelativeMeasurement m;
    m.observer = 0;
    m.target = n - 1;
    m.z = est::Vec3(1.0, 0.2, 0.0);
    m.rot_global_to_body = sim::yaw_rotation_global_to_body(0.3);
    m.noise = 1e-4 * est::Mat3::Identity();
    m.stamp = 1;

    plan::PlannerConfig cfg;
    cfg.trace_threshold = 1e-6;
    cfg.max_range = 3.0;
    cfg.max_pairs_per_cycle = 3;
    plan::PlanSnapshot snap;
    snap.time = 0.0;
    snap.epoch = 1;
    snap.drones.resize(n);
    for (int i = 0; i < n; ++i) {
      snap.drones[i].pos = pos[i];
      snap.drones[i].yaw = 0.1 * i;
      snap.drones[i].vel = est::Vec3(0.5, 0, 0);
    }

    std::vector<double> t_update, t_plan, t_eval, t_ellipse;
    for (int r = 0; r < reps; ++r) {
      auto s = base;
      auto t0 = Clock::now();
      est::apply_measurement(s, m, est::Vec3(0, 0, 0), est::Vec3(1, 0.2, 0));
      t_update.push_back(ms_since(t0));

      plan::YawPlanner planner(cfg);
      t0 = Clock::now();
      auto outcome = planner.plan(base, snap);
      t_plan.push_back(ms_since(t0));
      if (!outcome.task) throw std::runtime_error("bench plan produced no task");

      // exhaustive pass: ellipse + yaw for every qualifying pair, which is
      // where the planner's time goes once the swarm is large
      double ellipse_acc = 0.0;
      t0 = Clock::now();
      const auto cands = plan::candidate_pairs(base, pos, cfg);
      for (const auto& c : cands) {
        auto e0 = Clock::now();
        const Eigen::Matrix2d cov =
            est::relative_covariance(base, c.i, c.j).topLeftCorner<2, 2>();
        const auto ellipse = plan::confidence_ellipse(
            cov, (pos[c.j] - pos[c.i]).head<2>(), cfg.confidence);
        ellipse_acc += ms_since(e0);
        (void)plan::desired_yaw(pos[c.i].head<2>(), snap.drones[c.i].yaw,
                                ellipse, cfg);
      }
      t_eval.push_back(ms_since(t0));
      t_ellipse.push_back(ellipse_acc);
    }
    row.update_ms = median(t_update);
    row.plan_cycle_ms = median(t_plan);
    row.pair_eval_ms = median(t_eval);
    row.ellipse_ms = median(t_ellipse);
    rows.push_back(row);
  }
  return rows;
}

}  // namespace swarmloc::metrics
