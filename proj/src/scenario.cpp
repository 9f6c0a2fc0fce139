#include "swarmloc/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>

namespace swarmloc::scn {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

[[noreturn]] void fail(const std::string& src, int line, const std::string& what) {
  if (line > 0)
    throw ConfigError(src + ":" + std::to_string(line) + ": " + what);
  throw ConfigError(src + ": " + what);
}

struct Entry {
  std::string value;
  int line = 0;
  bool used = false;
};

struct Raw {
  std::string src;
  std::map<std::string, Entry> kv;
  // insertion order, for picking the first unknown key by position
  std::vector<std::string> order;

  Entry* find(const std::string& key) {
    auto it = kv.find(key);
    if (it == kv.end()) return nullptr;
    it->second.used = true;
    return &it->second;
  }
};

double to_double(const Raw& raw, const std::string& key, const Entry& e) {
  const std::string v = trim(e.value);
  char* end = nullptr;
  const double d = std::strtod(v.c_str(), &end);
  if (v.empty() || end != v.c_str() + v.size())
    fail(raw.src, e.line, "key '" + key + "': not a number: '" + e.value + "'");
  return d;
}

long long to_int(const Raw& raw, const std::string& key, const Entry& e) {
  const std::string v = trim(e.value);
  char* end = nullptr;
  const long long i = std::strtoll(v.c_str(), &end, 10);
  if (v.empty() || end != v.c_str() + v.size())
    fail(raw.src, e.line, "key '" + key + "': not an integer: '" + e.value + "'");
  return i;
}

std::uint64_t to_u64(const Raw& raw, const std::string& key, const Entry& e) {
  const std::string v = trim(e.value);
  char* end = nullptr;
  const unsigned long long i = std::strtoull(v.c_str(), &end, 10);
  if (v.empty() || end != v.c_str() + v.size() || v[0] == '-')
    fail(raw.src, e.line,
         "key '" + key + "': not an unsigned integer: '" + e.value + "'");
  return i;
}

bool to_bool(const Raw& raw, const std::string& key, const Entry& e) {
  const std::string v = trim(e.value);
  if (v == "true") return true;
  if (v == "false") return false;
  fail(raw.src, e.line, "key '" + key + "': expected true or false");
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) out.push_back(cur);
  if (!s.empty() && s.back() == sep) out.emplace_back();
  return out;
}

std::vector<double> to_tuple(const Raw& raw, const std::string& key,
                             const Entry& e, const std::string& part,
                             std::size_t arity) {
  const auto fields = split(part, ',');
  if (fields.size() != arity)
    fail(raw.src, e.line, "key '" + key + "': expected " +
                              std::to_string(arity) + " comma-separated values, got '" +
                              trim(part) + "'");
  std::vector<double> out;
  for (const auto& f : fields) {
    const std::string v = trim(f);
    char* end = nullptr;
    const double d = std::strtod(v.c_str(), &end);
    if (v.empty() || end != v.c_str() + v.size())
      fail(raw.src, e.line, "key '" + key + "': not a number: '" + f + "'");
    out.push_back(d);
  }
  return out;
}

template <typename F>
void opt(Raw& raw, const std::string& key, F&& set) {
  if (Entry* e = raw.find(key)) set(*e);
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

sim::OccupancyGrid GridSpec::build() const {
  if (!present) return {};
  sim::OccupancyGrid g(origin, resolution, nx, ny);
  for (const auto& r : rects)
    g.mark_rect({r[0], r[1]}, {r[2], r[3]});
  return g;
}

ScenarioConfig parse_config(const std::string& text,
                            const std::string& source_name) {
  Raw raw;
  raw.src = source_name;

  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos)
      line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      fail(raw.src, lineno, "expected 'key = value', got '" + line + "'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) fail(raw.src, lineno, "empty key");
    auto [it, fresh] = raw.kv.emplace(key, Entry{value, lineno, false});
    if (!fresh)
      fail(raw.src, lineno, "duplicate key '" + key + "' (first at line " +
                                std::to_string(it->second.line) + ")");
    raw.order.push_back(key);
  }

  ScenarioConfig c;

  Entry* nd = raw.find("n_drones");
  if (!nd) fail(raw.src, 0, "missing required key 'n_drones'");
  const long long n = to_int(raw, "n_drones", *nd);
  if (n < 2 || n > 10000) fail(raw.src, nd->line, "n_drones must be in [2, 10000]");
  c.n_drones = static_cast<int>(n);

  opt(raw, "name", [&](Entry& e) { c.name = trim(e.value); });
  opt(raw, "duration", [&](Entry& e) { c.duration = to_double(raw, "duration", e); });
  opt(raw, "seed", [&](Entry& e) { c.seed = to_u64(raw, "seed", e); });
  opt(raw, "clock_hz", [&](Entry& e) {
    c.clock_hz = static_cast<int>(to_int(raw, "clock_hz", e));
  });
  opt(raw, "vio_rate", [&](Entry& e) {
    c.vio_rate = static_cast<int>(to_int(raw, "vio_rate", e));
  });
  opt(raw, "detect_rate", [&](Entry& e) {
    c.detect_rate = static_cast<int>(to_int(raw, "detect_rate", e));
  });
  opt(raw, "plan_rate", [&](Entry& e) {
    c.plan_rate = static_cast<int>(to_int(raw, "plan_rate", e));
  });
  opt(raw, "eval_rate", [&](Entry& e) {
    c.eval_rate = static_cast<int>(to_int(raw, "eval_rate", e));
  });
  opt(raw, "sigma_v", [&](Entry& e) { c.sigma_v = to_double(raw, "sigma_v", e); });
  opt(raw, "sigma_d", [&](Entry& e) { c.sigma_d = to_double(raw, "sigma_d", e); });
  opt(raw, "speed", [&](Entry& e) { c.speed = to_double(raw, "speed", e); });
  opt(raw, "dwell", [&](Entry& e) { c.dwell = to_double(raw, "dwell", e); });
  opt(raw, "ident_gate", [&](Entry& e) {
    c.ident_gate = to_double(raw, "ident_gate", e);
  });
  opt(raw, "max_age_epochs", [&](Entry& e) {
    c.max_age_epochs = static_cast<int>(to_int(raw, "max_age_epochs", e));
  });
  opt(raw, "joseph", [&](Entry& e) { c.joseph = to_bool(raw, "joseph", e); });
  opt(raw, "busy_slack", [&](Entry& e) {
    c.busy_slack = to_double(raw, "busy_slack", e);
  });

  opt(raw, "planner.enabled", [&](Entry& e) {
    c.planner_enabled = to_bool(raw, "planner.enabled", e);
  });
  opt(raw, "planner.trace_threshold", [&](Entry& e) {
    c.planner.trace_threshold = to_double(raw, "planner.trace_threshold", e);
  });
  opt(raw, "planner.confidence", [&](Entry& e) {
    c.planner.confidence = to_double(raw, "planner.confidence", e);
  });
  opt(raw, "planner.fov_half_angle", [&](Entry& e) {
    c.planner.fov_half_angle = to_double(raw, "planner.fov_half_angle", e);
  });
  opt(raw, "planner.max_range", [&](Entry& e) {
    c.planner.max_range = to_double(raw, "planner.max_range", e);
  });
  opt(raw, "planner.turn_rate", [&](Entry& e) {
    c.planner.turn_rate = to_double(raw, "planner.turn_rate", e);
  });
  opt(raw, "planner.a_max", [&](Entry& e) {
    c.planner.a_max = to_double(raw, "planner.a_max", e);
  });
  opt(raw, "planner.min_retrigger_interval", [&](Entry& e) {
    c.planner.min_retrigger_interval =
        to_double(raw, "planner.min_retrigger_interval", e);
  });
  opt(raw, "planner.max_pairs_per_cycle", [&](Entry& e) {
    c.planner.max_pairs_per_cycle =
        static_cast<int>(to_int(raw, "planner.max_pairs_per_cycle", e));
  });
  opt(raw, "camera.v_fov_half", [&](Entry& e) {
    c.v_fov_half = to_double(raw, "camera.v_fov_half", e);
  });

  opt(raw, "link.latency", [&](Entry& e) {
    c.link.latency = to_double(raw, "link.latency", e);
  });
  opt(raw, "link.jitter", [&](Entry& e) {
    c.link.jitter = to_double(raw, "link.jitter", e);
  });
  opt(raw, "link.drop_prob", [&](Entry& e) {
    c.link.drop_prob = to_double(raw, "link.drop_prob", e);
  });

  opt(raw, "log.messages", [&](Entry& e) {
    c.log_messages = to_bool(raw, "log.messages", e);
  });
  opt(raw, "log.traces", [&](Entry& e) {
    c.log_traces = to_bool(raw, "log.traces", e);
  });

  opt(raw, "default_sweep", [&](Entry& e) { c.default_sweep = trim(e.value); });

  c.drones.resize(c.n_drones);
  for (int i = 0; i < c.n_drones; ++i) {
    const std::string wkey = "drone." + std::to_string(i) + ".waypoints";
    Entry* we = raw.find(wkey);
    if (!we) fail(raw.src, 0, "missing required key '" + wkey + "'");
    for (const auto& part : split(we->value, ';')) {
      if (trim(part).empty())
        fail(raw.src, we->line, "key '" + wkey + "': empty waypoint");
      const auto t = to_tuple(raw, wkey, *we, part, 3);
      c.drones[i].waypoints.emplace_back(t[0], t[1], t[2]);
    }
    const std::string ykey = "drone." + std::to_string(i) + ".yaw0";
    opt(raw, ykey, [&](Entry& e) { c.drones[i].yaw0 = to_double(raw, ykey, e); });
  }

  const bool has_grid = raw.kv.count("grid.origin") ||
                        raw.kv.count("grid.resolution") ||
                        raw.kv.count("grid.size") || raw.kv.count("grid.rects");
  if (has_grid) {
    c.grid.present = true;
    Entry* go = raw.find("grid.origin");
    Entry* gr = raw.find("grid.resolution");
    Entry* gs = raw.find("grid.size");
    if (!go || !gr || !gs)
      fail(raw.src, 0,
           "grid needs all of grid.origin, grid.resolution, grid.size");
    const auto o = to_tuple(raw, "grid.origin", *go, go->value, 2);
    c.grid.origin = {o[0], o[1]};
    c.grid.resolution = to_double(raw, "grid.resolution", *gr);
    const auto s = to_tuple(raw, "grid.size", *gs, gs->value, 2);
    if (s[0] != std::floor(s[0]) || s[1] != std::floor(s[1]) || s[0] < 1 ||
        s[1] < 1)
      fail(raw.src, gs->line, "grid.size: expected two positive integers");
    c.grid.nx = static_cast<int>(s[0]);
    c.grid.ny = static_cast<int>(s[1]);
    opt(raw, "grid.rects", [&](Entry& e) {
      for (const auto& part : split(e.value, ';')) {
        if (trim(part).empty()) continue;
        const auto r = to_tuple(raw, "grid.rects", e, part, 4);
        if (r[0] > r[2] || r[1] > r[3])
          fail(raw.src, e.line, "grid.rects: box must be x0,y0,x1,y1 with x0<=x1, y0<=y1");
        c.grid.rects.emplace_back(r[0], r[1], r[2], r[3]);
      }
    });
  }

  for (const auto& key : raw.order) {
    const Entry& e = raw.kv.at(key);
    if (!e.used)
      fail(raw.src, e.line, "unknown key '" + key + "'");
  }

  c.validate();
  c.finalize();
  return c;
}

ScenarioConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path + ": cannot open file");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), path);
}

void ScenarioConfig::validate() const {
  auto bad = [&](const std::string& what) {
    throw ConfigError(name + ": " + what);
  };
  if (n_drones < 2) bad("n_drones must be >= 2");
  if (!(duration > 0.0)) bad("duration must be > 0");
  if (clock_hz < 1) bad("clock_hz must be >= 1");
  const std::pair<int, const char*> rates[] = {{vio_rate, "vio_rate"},
                                               {detect_rate, "detect_rate"},
                                               {plan_rate, "plan_rate"},
                                               {eval_rate, "eval_rate"}};
  for (const auto& [rate, key] : rates) {
    if (rate < 1) bad(std::string(key) + " must be >= 1");
    if (clock_hz % rate != 0)
      bad(std::string(key) + " must divide clock_hz (" +
          std::to_string(clock_hz) + ")");
  }
  if (vio_rate % detect_rate != 0)
    bad("detect_rate must divide vio_rate so detections land on epochs");
  if (sigma_v < 0.0) bad("sigma_v must be >= 0");
  if (sigma_d < 0.0) bad("sigma_d must be >= 0");
  if (!(speed > 0.0)) bad("speed must be > 0");
  if (dwell < 0.0) bad("dwell must be >= 0");
  if (!(ident_gate > 0.0)) bad("ident_gate must be > 0");
  if (max_age_epochs < 0) bad("max_age_epochs must be >= 0");
  if (busy_slack < 0.0) bad("busy_slack must be >= 0");

  if (!(planner.trace_threshold > 0.0)) bad("planner.trace_threshold must be > 0");
  if (!(planner.confidence > 0.0 && planner.confidence < 1.0))
    bad("planner.confidence must be in (0, 1)");
  if (!(planner.fov_half_angle > 0.0 && planner.fov_half_angle < M_PI))
    bad("planner.fov_half_angle must be in (0, pi)");
  if (!(planner.max_range > 0.0)) bad("planner.max_range must be > 0");
  if (!(planner.turn_rate > 0.0)) bad("planner.turn_rate must be > 0");
  if (!(planner.a_max > 0.0)) bad("planner.a_max must be > 0");
  if (planner.min_retrigger_interval < 0.0)
    bad("planner.min_retrigger_interval must be >= 0");
  if (planner.max_pairs_per_cycle < 1)
    bad("planner.max_pairs_per_cycle must be >= 1");
  if (!(v_fov_half > 0.0 && v_fov_half <= M_PI / 2))
    bad("camera.v_fov_half must be in (0, pi/2]");

  if (link.latency < 0.0) bad("link.latency must be >= 0");
  if (link.jitter < 0.0) bad("link.jitter must be >= 0");
  if (link.drop_prob < 0.0 || link.drop_prob > 1.0)
    bad("link.drop_prob must be in [0, 1]");

  if (static_cast<int>(drones.size()) != n_drones)
    bad("waypoints must be given for every drone");
  for (int i = 0; i < n_drones; ++i) {
    if (drones[i].waypoints.empty())
      bad("drone." + std::to_string(i) + ".waypoints must not be empty");
    for (std::size_t k = 1; k < drones[i].waypoints.size(); ++k)
      if ((drones[i].waypoints[k] - drones[i].waypoints[k - 1]).norm() == 0.0)
        bad("drone." + std::to_string(i) +
            ".waypoints: repeated consecutive waypoint");
  }

  if (grid.present) {
    if (!(grid.resolution > 0.0)) bad("grid.resolution must be > 0");
    if (grid.nx < 1 || grid.ny < 1) bad("grid.size must be >= 1x1");
  } else if (!grid.rects.empty()) {
    bad("grid.rects given without a grid");
  }
}

void ScenarioConfig::finalize() {
  for (auto& d : drones) {
    if (d.yaw0) continue;
    double yaw = 0.0;
    if (d.waypoints.size() >= 2) {
      const Eigen::Vector2d leg =
          (d.waypoints[1] - d.waypoints[0]).head<2>();
      if (leg.norm() > 0.0) yaw = std::atan2(leg.y(), leg.x());
    }
    d.yaw0 = yaw;
  }
}

std::string ScenarioConfig::echo() const {
  std::ostringstream o;
  o << "# effective run description, reproduces the run when fed back in\n";
  o << "name = " << name << "\n";
  o << "n_drones = " << n_drones << "\n";
  o << "duration = " << fmt(duration) << "\n";
  o << "seed = " << seed << "\n";
  o << "\n# clocks\n";
  o << "clock_hz = " << clock_hz << "\n";
  o << "vio_rate = " << vio_rate << "\n";
  o << "detect_rate = " << detect_rate << "\n";
  o << "plan_rate = " << plan_rate << "\n";
  o << "eval_rate = " << eval_rate << "\n";
  o << "\n# noise and vehicle\n";
  o << "sigma_v = " << fmt(sigma_v) << "\n";
  o << "sigma_d = " << fmt(sigma_d) << "\n";
  o << "speed = " << fmt(speed) << "\n";
  o << "dwell = " << fmt(dwell) << "\n";
  o << "ident_gate = " << fmt(ident_gate) << "\n";
  o << "max_age_epochs = " << max_age_epochs << "\n";
  o << "joseph = " << (joseph ? "true" : "false") << "\n";
  o << "busy_slack = " << fmt(busy_slack) << "\n";
  o << "\n# planner\n";
  o << "planner.enabled = " << (planner_enabled ? "true" : "false") << "\n";
  o << "planner.trace_threshold = " << fmt(planner.trace_threshold) << "\n";
  o << "planner.confidence = " << fmt(planner.confidence) << "\n";
  o << "planner.fov_half_angle = " << fmt(planner.fov_half_angle) << "\n";
  o << "planner.max_range = " << fmt(planner.max_range) << "\n";
  o << "planner.turn_rate = " << fmt(planner.turn_rate) << "\n";
  o << "planner.a_max = " << fmt(planner.a_max) << "\n";
  o << "planner.min_retrigger_interval = "
    << fmt(planner.min_retrigger_interval) << "\n";
  o << "planner.max_pairs_per_cycle = " << planner.max_pairs_per_cycle << "\n";
  o << "camera.v_fov_half = " << fmt(v_fov_half) << "\n";
  o << "\n# link\n";
  o << "link.latency = " << fmt(link.latency) << "\n";
  o << "link.jitter = " << fmt(link.jitter) << "\n";
  o << "link.drop_prob = " << fmt(link.drop_prob) << "\n";
  o << "\n# logging\n";
  o << "log.messages = " << (log_messages ? "true" : "false") << "\n";
  o << "log.traces = " << (log_traces ? "true" : "false") << "\n";
  o << "\n# world\n";
  for (int i = 0; i < n_drones; ++i) {
    o << "drone." << i << ".waypoints = ";
    for (std::size_t k = 0; k < drones[i].waypoints.size(); ++k) {
      const auto& w = drones[i].waypoints[k];
      if (k) o << "; ";
      o << fmt(w.x()) << "," << fmt(w.y()) << "," << fmt(w.z());
    }
    o << "\n";
    if (drones[i].yaw0)
      o << "drone." << i << ".yaw0 = " << fmt(*drones[i].yaw0) << "\n";
  }
  if (grid.present) {
    o << "grid.origin = " << fmt(grid.origin.x()) << "," << fmt(grid.origin.y())
      << "\n";
    o << "grid.resolution = " << fmt(grid.resolution) << "\n";
    o << "grid.size = " << grid.nx << "," << grid.ny << "\n";
    if (!grid.rects.empty()) {
      o << "grid.rects = ";
      for (std::size_t k = 0; k < grid.rects.size(); ++k) {
        const auto& r = grid.rects[k];
        if (k) o << "; ";
        o << fmt(r[0]) << "," << fmt(r[1]) << "," << fmt(r[2]) << ","
          << fmt(r[3]);
      }
      o << "\n";
    }
  }
  if (!default_sweep.empty()) o << "default_sweep = " << default_sweep << "\n";
  return o.str();
}

namespace {

ScenarioConfig make_line4() {
  ScenarioConfig c;
  c.name = "line4";
  c.n_drones = 4;
  c.duration = 120.0;
  c.speed = 0.75;
  c.sigma_v = 0.001;
  c.sigma_d = 0.005;
  c.planner.trace_threshold = 6e-4;
  c.drones.resize(4);
  for (int i = 0; i < 4; ++i) {
    const double y = -3.0 + 2.0 * i;
    c.drones[i].waypoints = {{0.0, y, 1.5}, {90.0, y, 1.5}};
  }
  return c;
}

ScenarioConfig make_scale(int n) {
  ScenarioConfig c = make_line4();
  c.name = "scale" + std::to_string(n);
  c.duration = 30.0;
  c.log_messages = false;
  c.log_traces = false;
  grid_formation(c, n, 2.0, c.speed * c.duration);
  return c;
}

ScenarioConfig make_occluded_pair() {
  ScenarioConfig c;
  c.name = "occluded-pair";
  c.n_drones = 2;
  c.duration = 20.0;
  c.sigma_v = 0.001;
  c.sigma_d = 0.005;
  c.planner.trace_threshold = 6e-4;
  c.drones.resize(2);
  c.drones[0].waypoints = {{0.0, 0.0, 1.0}};
  c.drones[1].waypoints = {{2.0, 0.0, 1.0}};
  c.drones[0].yaw0 = 0.0;
  c.drones[1].yaw0 = 0.0;
  c.grid.present = true;
  c.grid.origin = {-1.0, -1.0};
  c.grid.resolution = 0.1;
  c.grid.nx = 40;
  c.grid.ny = 20;
  c.grid.rects = {{0.9, -0.6, 1.1, 0.6}};
  return c;
}

// the pair turns eligible almost immediately, but the map ends so soon ahead
// that the stopping-distance check can never pass
ScenarioConfig make_short_horizon() {
  ScenarioConfig c;
  c.name = "short-horizon";
  c.n_drones = 2;
  c.duration = 5.0;
  c.speed = 2.0;
  c.sigma_v = 0.002;
  c.sigma_d = 0.005;
  c.planner.trace_threshold = 6e-4;
  c.planner.a_max = 0.5;
  c.drones.resize(2);
  c.drones[0].waypoints = {{0.0, 0.0, 1.5}, {20.0, 0.0, 1.5}};
  c.drones[1].waypoints = {{0.0, 1.0, 1.5}, {20.0, 1.0, 1.5}};
  c.grid.present = true;
  c.grid.origin = {-1.0, -2.0};
  c.grid.resolution = 0.5;
  c.grid.nx = 24;
  c.grid.ny = 8;
  return c;
}

ScenarioConfig make_noise_grid() {
  ScenarioConfig c = make_line4();
  c.name = "noise-grid";
  c.default_sweep =
      "sigma_v=0.00025,0.0005,0.001,0.002,0.004;"
      "sigma_d=0.00125,0.0025,0.005,0.01,0.02";
  return c;
}

}  // namespace

const std::vector<std::string>& builtin_names() {
  static const std::vector<std::string> names = {
      "line4",   "baseline-off", "scale10",       "scale25",      "scale50",
      "scale100", "noise-grid",  "occluded-pair", "short-horizon"};
  return names;
}

std::optional<ScenarioConfig> builtin(const std::string& name) {
  ScenarioConfig c;
  if (name == "line4") {
    c = make_line4();
  } else if (name == "baseline-off") {
    c = make_line4();
    c.name = "baseline-off";
    c.planner_enabled = false;
  } else if (name == "scale10") {
    c = make_scale(10);
  } else if (name == "scale25") {
    c = make_scale(25);
  } else if (name == "scale50") {
    c = make_scale(50);
  } else if (name == "scale100") {
    c = make_scale(100);
  } else if (name == "noise-grid") {
    c = make_noise_grid();
  } else if (name == "occluded-pair") {
    c = make_occluded_pair();
  } else if (name == "short-horizon") {
    c = make_short_horizon();
  } else {
    return std::nullopt;
  }
  c.validate();
  c.finalize();
  return c;
}

void grid_formation(ScenarioConfig& c, int n, double spacing, double leg) {
  if (n < 2) throw ConfigError("grid formation needs n >= 2");
  c.n_drones = n;
  const int cols = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(n))));
  c.drones.assign(n, {});
  for (int i = 0; i < n; ++i) {
    const double x = spacing * (i % cols);
    const double y = spacing * (i / cols);
    c.drones[i].waypoints = {{x, y, 1.5}, {x + leg, y, 1.5}};
  }
}

std::vector<SweepAxis> parse_sweep_spec(const std::string& spec) {
  std::vector<SweepAxis> axes;
  for (const auto& part : split(spec, ';')) {
    if (trim(part).empty()) continue;
    const auto eq = part.find('=');
    if (eq == std::string::npos)
      throw ConfigError("sweep: expected 'key=v1,v2,...', got '" + trim(part) +
                        "'");
    SweepAxis axis;
    axis.key = trim(part.substr(0, eq));
    if (axis.key != "sigma_v" && axis.key != "sigma_d" &&
        axis.key != "n_drones")
      throw ConfigError("sweep: unknown axis '" + axis.key +
                        "' (use sigma_v, sigma_d or n_drones)");
    for (const auto& f : split(part.substr(eq + 1), ',')) {
      const std::string v = trim(f);
      char* end = nullptr;
      const double d = std::strtod(v.c_str(), &end);
      if (v.empty() || end != v.c_str() + v.size())
        throw ConfigError("sweep: not a number: '" + f + "'");
      if (axis.key == "n_drones" && (d != std::floor(d) || d < 2))
        throw ConfigError("sweep: n_drones values must be integers >= 2");
      if (axis.key != "n_drones" && d < 0)
        throw ConfigError("sweep: noise values must be >= 0");
      axis.values.push_back(d);
    }
    if (axis.values.empty())
      throw ConfigError("sweep: axis '" + axis.key + "' has no values");
    for (const auto& a : axes)
      if (a.key == axis.key)
        throw ConfigError("sweep: duplicate axis '" + axis.key + "'");
    axes.push_back(std::move(axis));
  }
  if (axes.empty()) throw ConfigError("sweep: empty spec");
  bool has_n = false, has_noise = false;
  for (const auto& a : axes) {
    (a.key == "n_drones" ? has_n : has_noise) = true;
  }
  if (has_n && has_noise)
    throw ConfigError("sweep: n_drones cannot combine with noise axes");
  return axes;
}

}  // namespace swarmloc::scn
