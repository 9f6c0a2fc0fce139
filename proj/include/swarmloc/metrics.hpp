#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

namespace swarmloc::metrics {

using Vec3 = Eigen::Vector3d;

// One evaluation snapshot of the whole swarm.
struct EvalSample {
  double time = 0.0;
  std::vector<Vec3> truth;
  std::vector<Vec3> raw;        // plain VIO output
  std::vector<Vec3> corrected;  // VIO plus broadcast drift estimate
};

enum class Source { Raw, Corrected };

// Relative position error: sum over drone pairs of
// || (x_i - x_j) - (xhat_i - xhat_j) ||. Ordered pairs count (i,j) and
// (j,i) separately (the double-counted form); unordered halves it.
double rpe(const std::vector<Vec3>& truth, const std::vector<Vec3>& estimate,
           bool ordered_pairs = true);
double rpe(const EvalSample& sample, Source source, bool ordered_pairs = true);

// Per-drone position RMSE over a trajectory of samples.
double rmse(const std::vector<EvalSample>& trajectory, int drone,
            Source source);

// Wall-clock scaling of the estimator update and the planner cycle.
struct BenchRow {
  int n = 0;
  double update_ms = 0.0;      // one measurement fusion, median
  double plan_cycle_ms = 0.0;  // one planning call, median
  double pair_eval_ms = 0.0;   // ellipse+yaw over every candidate pair, median
  double ellipse_ms = 0.0;     // share of pair_eval spent on ellipse geometry
};
std::vector<BenchRow> bench_timing(const std::vector<int>& swarm_sizes,
                                   int reps, std::uint64_t seed);

// Least-squares fit y = a + b n + c n^2; returns R^2.
double quadratic_fit_r2(const std::vector<double>& n,
                        const std::vector<double>& y);

double median(std::vector<double> v);

}  // namespace swarmloc::metrics
