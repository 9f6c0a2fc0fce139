// Command-line front end: run one scenario, a parameter sweep or the timing
// bench, and drop plot-ready CSVs plus a metrics summary into the output
// directory. Exit codes: 0 ok, 2 bad configuration, 3 runtime failure.

#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "swarmloc/csv.hpp"
#include "swarmloc/metrics.hpp"
#include "swarmloc/runner.hpp"
#include "swarmloc/scenario.hpp"

namespace fs = std::filesystem;
using namespace swarmloc;

namespace {

scn::ScenarioConfig resolve_scenario(const std::string& spec) {
  if (auto b = scn::builtin(spec)) return *b;
  if (fs::exists(spec)) return scn::load_config(spec);
  throw scn::ConfigError("'" + spec +
                         "': not a built-in scenario and not a file");
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
  out << content;
}

void write_run_artifacts(const run::RunResult& r, const fs::path& dir) {
  fs::create_directories(dir);
  write_file(dir / "config_echo.cfg", r.cfg.echo());
  write_file(dir / "metrics_summary.json", r.summary_json);

  {
    CsvWriter w((dir / "truth.csv").string(),
                "time,drone,x,y,z,yaw,drift_x,drift_y,drift_z");
    for (std::size_t k = 0; k < r.samples.size(); ++k) {
      const auto& s = r.samples[k];
      for (int i = 0; i < r.cfg.n_drones; ++i) {
        const auto drift = s.truth[i] - s.raw[i];
        w.field(s.time).field(i);
        w.field(s.truth[i].x()).field(s.truth[i].y()).field(s.truth[i].z());
        w.field(r.sample_yaws[k][i]);
        w.field(drift.x()).field(drift.y()).field(drift.z());
        w.end_row();
      }
    }
  }
  {
    CsvWriter w((dir / "estimator.csv").string(),
                "time,drone,raw_x,raw_y,raw_z,corr_x,corr_y,corr_z,"
                "err_raw,err_corr");
    for (const auto& s : r.samples) {
      for (int i = 0; i < r.cfg.n_drones; ++i) {
        w.field(s.time).field(i);
        w.field(s.raw[i].x()).field(s.raw[i].y()).field(s.raw[i].z());
        w.field(s.corrected[i].x())
            .field(s.corrected[i].y())
            .field(s.corrected[i].z());
        w.field((s.raw[i] - s.truth[i]).norm());
        w.field((s.corrected[i] - s.truth[i]).norm());
        w.end_row();
      }
    }
  }
  if (r.cfg.log_traces) {
    CsvWriter w((dir / "traces.csv").string(),
                "time,i,j,trace,distance,visible,eligible");
    for (const auto& t : r.traces) {
      w.field(t.time).field(t.i).field(t.j).field(t.trace).field(t.distance);
      w.field(int(t.visible)).field(int(t.eligible));
      w.end_row();
    }
  }
  {
    CsvWriter w((dir / "updates.csv").string(),
                "time,stamp,observer,target,res_x,res_y,res_z,"
                "trace_before,trace_after,accepted,reason");
    for (const auto& u : r.updates) {
      w.field(u.time).field(static_cast<long long>(u.stamp));
      w.field(u.observer).field(u.target);
      w.field(u.residual.x()).field(u.residual.y()).field(u.residual.z());
      w.field(u.trace_before).field(u.trace_after);
      w.field(int(u.accepted)).field(u.reason);
      w.end_row();
    }
  }
  {
    CsvWriter w((dir / "planner.csv").string(),
                "time,observer,target,trace,psi_cur,psi_des,t_turn,"
                "verdict,reason");
    for (const auto& p : r.plans) {
      w.field(p.time).field(p.observer).field(p.target).field(p.trace);
      w.field(p.psi_cur).field(p.psi_des).field(p.t_turn);
      w.field(p.verdict).field(p.reason);
      w.end_row();
    }
  }
  if (r.cfg.log_messages) {
    CsvWriter w((dir / "messages.csv").string(),
                "send_time,kind,sender,receiver,dropped,deliver_time");
    for (const auto& m : r.messages) {
      w.field(m.send_time).field(std::string(1, static_cast<char>(m.kind)));
      w.field(m.sender).field(m.receiver).field(int(m.dropped));
      w.field(m.dropped ? -1.0 : m.deliver_time);
      w.end_row();
    }
  }
}

void write_sweep_artifacts(const std::vector<run::SweepRow>& rows,
                           const std::vector<run::SweepCell>& cells,
                           const fs::path& dir) {
  fs::create_directories(dir);
  {
    CsvWriter w((dir / "sweep_results.csv").string(),
                "sigma_v,sigma_d,n_drones,seed,rpe_final_raw,"
                "rpe_final_corrected,rpe_mean_corrected,rmse_mean_raw,"
                "rmse_mean_corrected");
    for (const auto& r : rows) {
      w.field(r.sigma_v).field(r.sigma_d).field(r.n_drones);
      w.field(static_cast<long long>(r.seed));
      w.field(r.rpe_final_raw).field(r.rpe_final_corrected);
      w.field(r.rpe_mean_corrected);
      w.field(r.rmse_mean_raw).field(r.rmse_mean_corrected);
      w.end_row();
    }
  }
  {
    CsvWriter w((dir / "sweep_summary.csv").string(),
                "sigma_v,sigma_d,n_drones,seeds,rpe_final_raw,"
                "rpe_final_corrected,rpe_mean_corrected,rmse_mean_raw,"
                "rmse_mean_corrected");
    for (const auto& c : cells) {
      w.field(c.sigma_v).field(c.sigma_d).field(c.n_drones).field(c.seeds);
      w.field(c.rpe_final_raw).field(c.rpe_final_corrected);
      w.field(c.rpe_mean_corrected);
      w.field(c.rmse_mean_raw).field(c.rmse_mean_corrected);
      w.end_row();
    }
  }
}

std::vector<int> parse_bench_sizes(const std::string& spec) {
  std::vector<int> sizes;
  std::string cur;
  std::istringstream in(spec);
  while (std::getline(in, cur, ',')) {
    try {
      sizes.push_back(std::stoi(cur));
    } catch (const std::exception&) {
      throw scn::ConfigError("--bench: not an integer: '" + cur + "'");
    }
    if (sizes.back() < 2)
      throw scn::ConfigError("--bench: swarm sizes must be >= 2");
  }
  if (sizes.empty()) throw scn::ConfigError("--bench: empty size list");
  return sizes;
}

int run_bench(const std::string& spec, int reps, std::uint64_t seed,
              const fs::path& dir) {
  const auto sizes = parse_bench_sizes(spec);
  const auto rows = metrics::bench_timing(sizes, reps, seed);
  fs::create_directories(dir);
  CsvWriter w((dir / "bench.csv").string(),
              "n,update_ms,plan_cycle_ms,pair_eval_ms,ellipse_ms");
  nlohmann::ordered_json jrows = nlohmann::ordered_json::array();
  std::vector<double> ns, updates;
  for (const auto& r : rows) {
    w.field(r.n).field(r.update_ms).field(r.plan_cycle_ms);
    w.field(r.pair_eval_ms).field(r.ellipse_ms);
    w.end_row();
    ns.push_back(r.n);
    updates.push_back(r.update_ms);
    jrows.push_back({{"n", r.n},
                     {"update_ms", r.update_ms},
                     {"plan_cycle_ms", r.plan_cycle_ms},
                     {"pair_eval_ms", r.pair_eval_ms},
                     {"ellipse_ms", r.ellipse_ms}});
  }
  nlohmann::ordered_json j;
  j["bench"] = jrows;
  if (ns.size() >= 3)
    j["update_quadratic_r2"] = metrics::quadratic_fit_r2(ns, updates);
  j["out_dir"] = dir.string();
  std::cout << j.dump(2) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"multi-drone drift-correction simulator"};

  std::string scenario = "line4";
  std::string out_dir;
  std::string sweep_spec;
  std::string bench_spec;
  std::uint64_t seed = 0;
  bool seed_given = false;
  int n_seeds = 1;
  int reps = 7;
  bool unordered_pairs = false;
  bool list = false;

  app.add_option("--scenario", scenario,
                 "built-in scenario name or config file path");
  app.add_option("--seed", seed, "override the scenario seed")
      ->each([&](const std::string&) { seed_given = true; });
  app.add_option("--out", out_dir,
                 "output directory (default out/<scenario>-s<seed>)");
  app.add_option("--sweep", sweep_spec,
                 "sweep spec 'sigma_v=..;sigma_d=..' or 'n_drones=..', "
                 "or 'default' for the scenario's default sweep");
  app.add_option("--seeds", n_seeds, "seeds per sweep cell");
  app.add_flag("--unordered-pairs", unordered_pairs,
               "count each drone pair once in the RPE instead of twice");
  app.add_option("--bench", bench_spec,
                 "run the timing bench over these swarm sizes, e.g. "
                 "'10,25,50,100'");
  app.add_option("--reps", reps, "bench repetitions per size");
  app.add_flag("--list", list, "list built-in scenarios");

  CLI11_PARSE(app, argc, argv);

  try {
    if (list) {
      for (const auto& name : scn::builtin_names()) std::cout << name << "\n";
      return 0;
    }

    if (!bench_spec.empty()) {
      const fs::path dir =
          out_dir.empty() ? fs::path("out") / "bench" : fs::path(out_dir);
      return run_bench(bench_spec, reps, seed_given ? seed : 1, dir);
    }

    scn::ScenarioConfig cfg = resolve_scenario(scenario);
    if (seed_given) cfg.seed = seed;

    if (!sweep_spec.empty()) {
      std::string spec = sweep_spec;
      if (spec == "default") {
        if (cfg.default_sweep.empty())
          throw scn::ConfigError(cfg.name + ": scenario has no default sweep");
        spec = cfg.default_sweep;
      }
      const auto axes = scn::parse_sweep_spec(spec);
      const fs::path dir = out_dir.empty()
                               ? fs::path("out") / (cfg.name + "-sweep")
                               : fs::path(out_dir);
      const auto rows = run::run_sweep(cfg, axes, n_seeds, !unordered_pairs);
      const auto cells = run::aggregate_sweep(rows);
      write_sweep_artifacts(rows, cells, dir);
      write_file(dir / "config_echo.cfg", cfg.echo());
      nlohmann::ordered_json j;
      j["scenario"] = cfg.name;
      j["cells"] = cells.size();
      j["seeds_per_cell"] = n_seeds;
      j["rows"] = rows.size();
      j["out_dir"] = dir.string();
      std::cout << j.dump(2) << "\n";
      return 0;
    }

    const fs::path dir =
        out_dir.empty()
            ? fs::path("out") / (cfg.name + "-s" + std::to_string(cfg.seed))
            : fs::path(out_dir);
    const auto result = run::run_scenario(cfg, !unordered_pairs);
    write_run_artifacts(result, dir);
    std::cout << result.summary_json;
    return 0;
  } catch (const scn::ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}
