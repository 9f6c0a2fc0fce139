#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "swarmloc/metrics.hpp"
#include "swarmloc/net.hpp"
#include "swarmloc/scenario.hpp"

// Glue that executes one configured run: the truth world, the event
// scheduler, the lossy links, the leader and the per-drone agent state all
// wired together. Everything an evaluation needs comes back in RunResult;
// file output is the caller's business.

namespace swarmloc::run {

// per-pair covariance snapshot taken right before each planning pass
struct TraceRow {
  double time = 0.0;
  int i = -1, j = -1;
  double trace = 0.0;     // tr of the pair's relative drift covariance
  double distance = 0.0;  // between corrected position estimates
  bool visible = false;   // range + line of sight on those estimates
  bool eligible = false;  // trace over threshold, visible, cooldown clear
};

struct MetricsSummary {
  std::string scenario;
  std::uint64_t seed = 0;
  int n_drones = 0;
  double duration = 0.0;
  bool ordered_pairs = true;

  double rpe_final_raw = 0.0;
  double rpe_final_corrected = 0.0;
  double rpe_mean_raw = 0.0;
  double rpe_mean_corrected = 0.0;

  std::vector<double> rmse_raw;
  std::vector<double> rmse_corrected;
  std::vector<double> rmse_reduction_pct;  // 100 * (1 - corrected/raw)
  int drones_improved = 0;

  net::LeaderStats stats;
  std::size_t messages_sent = 0;
  std::size_t messages_dropped = 0;
};

struct RunResult {
  scn::ScenarioConfig cfg;
  std::vector<metrics::EvalSample> samples;
  // true yaw per drone, aligned with samples (EvalSample carries positions)
  std::vector<std::vector<double>> sample_yaws;
  std::vector<TraceRow> traces;
  std::vector<net::PlanLogRow> plans;
  std::vector<net::UpdateLogRow> updates;
  std::vector<net::Network::LogRow> messages;
  MetricsSummary summary;
  std::string summary_json;  // exact bytes of the metrics summary artifact
};

// Execute cfg to completion. ordered_pairs selects the RPE pair convention.
// Throws std::runtime_error on simulation-level failures.
RunResult run_scenario(const scn::ScenarioConfig& cfg,
                       bool ordered_pairs = true);

// compute the summary (and its serialized form) from raw run outputs;
// exposed so tests can cross-check the bookkeeping
MetricsSummary summarize(const scn::ScenarioConfig& cfg,
                         const std::vector<metrics::EvalSample>& samples,
                         const net::LeaderStats& stats, std::size_t sent,
                         std::size_t dropped, bool ordered_pairs);
std::string summary_to_json(const MetricsSummary& s);

// one sweep data point
struct SweepRow {
  double sigma_v = 0.0;
  double sigma_d = 0.0;
  int n_drones = 0;
  std::uint64_t seed = 0;
  double rpe_final_raw = 0.0;
  double rpe_final_corrected = 0.0;
  double rpe_mean_corrected = 0.0;
  double rmse_mean_raw = 0.0;        // mean across drones
  double rmse_mean_corrected = 0.0;
};

// cross product of the axes, n_seeds consecutive seeds per cell starting at
// base.seed
std::vector<SweepRow> run_sweep(const scn::ScenarioConfig& base,
                                const std::vector<scn::SweepAxis>& axes,
                                int n_seeds, bool ordered_pairs = true);

// median-over-seeds aggregate, one row per cell, in first-seen cell order
struct SweepCell {
  double sigma_v = 0.0;
  double sigma_d = 0.0;
  int n_drones = 0;
  int seeds = 0;
  double rpe_final_raw = 0.0;
  double rpe_final_corrected = 0.0;
  double rpe_mean_corrected = 0.0;
  double rmse_mean_raw = 0.0;
  double rmse_mean_corrected = 0.0;
};
std::vector<SweepCell> aggregate_sweep(const std::vector<SweepRow>& rows);

}  // namespace swarmloc::run
