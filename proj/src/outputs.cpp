#include "cavsim/outputs.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "cavsim/scenario.hpp"

namespace cavsim {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

/// 9-significant-digit decimal representation.
std::string num(double value) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.9g", value);
  return buf;
}

std::ofstream open_output(const std::string& file_path) {
  std::ofstream out(file_path);
  if (!out)
    throw std::runtime_error("cannot open output file: " + file_path);
  return out;
}

json metrics_to_json(const Metrics& m, std::uint64_t seed) {
  json j;
  j["seed"] = seed;
  j["v_min_zone_mps"] = m.v_min_zone;
  j["v_avg_zone_mps"] = m.v_avg_zone;
  j["v_min_mps"] = m.v_min_all;
  j["v_avg_mps"] = m.v_avg_all;
  j["rmse_exit_time_pct"] = m.rmse_exit_time_pct;
  j["planned_count"] = m.planned_count;
  j["degraded_count"] = m.degraded_count;
  j["rear_end_violations"] = m.rear_end_violations;
  j["lateral_violations"] = m.lateral_violations;
  j["physical_collisions"] = m.physical_collisions;
  if (std::isfinite(m.min_rear_end_slack))
    j["min_rear_end_slack_m"] = m.min_rear_end_slack;
  else
    j["min_rear_end_slack_m"] = nullptr;
  j["spawned"] = m.spawned;
  j["exited"] = m.exited;
  if (m.ego) {
    j["ego"] = {{"vehicle_count", m.ego->vehicle_count},
                {"avg_speed_mps", m.ego->avg_speed},
                {"min_speed_mps", m.ego->min_speed},
                {"stops_min", m.ego->stops_min},
                {"stops_max", m.ego->stops_max},
                {"avg_travel_time_s", m.ego->avg_travel_time},
                {"completed", m.ego->completed}};
  }
  return j;
}

json load_json_file(const std::string& file_path) {
  std::ifstream in(file_path);
  if (!in)
    throw std::runtime_error("cannot open " + file_path);
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw std::runtime_error(file_path + ": " + e.what());
  }
  return j;
}

} // namespace

void write_trajectories_csv(const SimLog& log, const ScenarioConfig& config,
                            const std::string& file_path) {
  std::ofstream out = open_output(file_path);
  out << "time_s,vehicle_id,path_id,path_position_m,route_position_m,"
         "speed_mps,accel_mps2,mode,in_zone\n";
  for (const TickRecord& rec : log.ticks) {
    out << num(rec.time) << ',' << rec.vehicle_id << ','
        << config.paths[static_cast<std::size_t>(rec.path_index)].path.id << ','
        << num(rec.p) << ',' << num(rec.route_position) << ',' << num(rec.v) << ','
        << num(rec.u) << ',' << to_string(rec.mode) << ',' << (rec.in_zone ? 1 : 0)
        << '\n';
  }
}

void write_planning_csv(const SimLog& log, const std::string& file_path) {
  std::ofstream out = open_output(file_path);
  out << "vehicle_id,path_id,t_entry_s,v_entry_mps,zone_length_m,t_lb_s,t_ub_s,"
         "tf_planned_s,tf_actual_s,replans,degraded,superseded\n";
  for (const PlanningEvent& ev : log.plans) {
    out << ev.vehicle_id << ',' << ev.path_id << ',' << num(ev.t_entry) << ','
        << num(ev.v_entry) << ',' << num(ev.zone_length) << ',' << num(ev.t_lb)
        << ',' << num(ev.t_ub) << ',' << num(ev.tf_planned) << ','
        << num(ev.tf_actual) << ',' << ev.replans << ',' << (ev.degraded ? 1 : 0)
        << ',' << (ev.superseded ? 1 : 0) << '\n';
  }
}

void write_speed_position_csv(const SimLog& log, const ScenarioConfig& config,
                              const std::string& file_path) {
  std::ofstream out = open_output(file_path);
  out << "vehicle_id,route_position_m,speed_mps,time_s,ego\n";
  for (const TickRecord& rec : log.ticks) {
    const bool ego = config.paths[static_cast<std::size_t>(rec.path_index)].ego;
    out << rec.vehicle_id << ',' << num(rec.route_position) << ',' << num(rec.v)
        << ',' << num(rec.time) << ',' << (ego ? 1 : 0) << '\n';
  }
}

void write_time_position_csv(const SimLog& log, const ScenarioConfig& config,
                             const std::string& file_path) {
  std::ofstream out = open_output(file_path);
  out << "vehicle_id,time_s,route_position_m,path_id,in_zone\n";
  for (const TickRecord& rec : log.ticks) {
    out << rec.vehicle_id << ',' << num(rec.time) << ',' << num(rec.route_position)
        << ',' << config.paths[static_cast<std::size_t>(rec.path_index)].path.id
        << ',' << (rec.in_zone ? 1 : 0) << '\n';
  }
}

int run_experiment(const ScenarioConfig& config, RunMode mode,
                   TrackingModel tracking, double duration, int repetitions,
                   std::uint64_t seed, const std::string& out_dir) {
  fs::create_directories(out_dir);

  json top;
  top["scenario"] = config.name;
  top["scenario_hash"] = scenario_hash(config);
  top["mode"] = to_string(mode);
  top["tracking"] = to_string(tracking);
  top["duration_s"] = duration;
  top["repetitions"] = repetitions;
  top["base_seed"] = seed;
  top["runs"] = json::array();

  int violations_total = 0;
  std::vector<Metrics> all;
  for (int rep = 0; rep < repetitions; ++rep) {
    const std::uint64_t rep_seed = seed + static_cast<std::uint64_t>(rep);
    const SimLog log = run_simulation(config, mode, tracking, rep_seed, duration);

    fs::path dir = out_dir;
    if (repetitions > 1) {
      dir /= "rep_" + std::to_string(rep + 1);
      fs::create_directories(dir);
    }
    write_trajectories_csv(log, config, (dir / "trajectories.csv").string());
    write_planning_csv(log, (dir / "planning.csv").string());
    write_speed_position_csv(log, config, (dir / "speed_position.csv").string());
    write_time_position_csv(log, config, (dir / "time_position.csv").string());

    if (!log.ticks.empty()) {
      const Metrics m = compute_metrics(log);
      top["runs"].push_back(metrics_to_json(m, rep_seed));
      violations_total +=
          m.rear_end_violations + m.lateral_violations + m.physical_collisions;
      all.push_back(m);
    } else {
      top["runs"].push_back(json{{"seed", rep_seed}, {"empty", true}});
    }
  }

  if (!all.empty()) {
    json agg;
    double rmse_sum = 0.0, v_avg_zone_sum = 0.0;
    double v_min_zone = std::numeric_limits<double>::infinity();
    int planned = 0, degraded = 0;
    for (const Metrics& m : all) {
      rmse_sum += m.rmse_exit_time_pct;
      v_avg_zone_sum += m.v_avg_zone;
      v_min_zone = std::min(v_min_zone, m.v_min_zone);
      planned += m.planned_count;
      degraded += m.degraded_count;
    }
    const double n = static_cast<double>(all.size());
    agg["rmse_exit_time_pct_mean"] = rmse_sum / n;
    agg["v_avg_zone_mps_mean"] = v_avg_zone_sum / n;
    agg["v_min_zone_mps_min"] = v_min_zone;
    agg["planned_total"] = planned;
    agg["degraded_total"] = degraded;
    agg["violations_total"] = violations_total;
    if (all.front().ego) {
      double speed_sum = 0.0, travel_sum = 0.0;
      double min_speed = std::numeric_limits<double>::infinity();
      int stops_min = all.front().ego->stops_min;
      int stops_max = all.front().ego->stops_max;
      for (const Metrics& m : all) {
        speed_sum += m.ego->avg_speed;
        travel_sum += m.ego->avg_travel_time;
        min_speed = std::min(min_speed, m.ego->min_speed);
        stops_min = std::min(stops_min, m.ego->stops_min);
        stops_max = std::max(stops_max, m.ego->stops_max);
      }
      agg["ego"] = {{"avg_speed_mps_mean", speed_sum / n},
                    {"min_speed_mps_min", min_speed},
                    {"stops_min", stops_min},
                    {"stops_max", stops_max},
                    {"avg_travel_time_s_mean", travel_sum / n}};
    }
    top["aggregate"] = std::move(agg);
  }

  std::ofstream out = open_output((fs::path(out_dir) / "metrics.json").string());
  out << top.dump(2) << '\n';
  return violations_total > 0 ? 3 : 0;
}

int compare_runs(const std::string& optimal_metrics_file,
                 const std::string& baseline_metrics_file, std::ostream& out) {
  const json opt = load_json_file(optimal_metrics_file);
  const json base = load_json_file(baseline_metrics_file);

  const std::string hash_opt = opt.at("scenario_hash").get<std::string>();
  const std::string hash_base = base.at("scenario_hash").get<std::string>();
  if (hash_opt != hash_base) {
    out << "error: scenario mismatch (" << hash_opt << " vs " << hash_base << ")\n";
    return 2;
  }

  const auto agg_field = [](const json& j, const char* outer, const char* key,
                            double fallback) {
    if (j.contains("aggregate") && j.at("aggregate").contains(outer)) {
      const json& o = j.at("aggregate").at(outer);
      if (o.is_object())
        return o.value(key, fallback);
    }
    return fallback;
  };
  const bool have_ego = opt.contains("aggregate") &&
                        opt.at("aggregate").contains("ego") &&
                        base.contains("aggregate") &&
                        base.at("aggregate").contains("ego");

  out << "scenario: " << opt.at("scenario").get<std::string>() << " (" << hash_opt
      << ")\n";
  out << "comparing " << optimal_metrics_file << " [" << opt.at("mode").get<std::string>()
      << "] vs " << baseline_metrics_file << " [" << base.at("mode").get<std::string>()
      << "]\n";

  if (have_ego) {
    const double tt_a = agg_field(opt, "ego", "avg_travel_time_s_mean", 0.0);
    const double tt_b = agg_field(base, "ego", "avg_travel_time_s_mean", 0.0);
    const double vs_a = agg_field(opt, "ego", "avg_speed_mps_mean", 0.0);
    const double vs_b = agg_field(base, "ego", "avg_speed_mps_mean", 0.0);
    const double vm_a = agg_field(opt, "ego", "min_speed_mps_min", 0.0);
    const double vm_b = agg_field(base, "ego", "min_speed_mps_min", 0.0);
    out << "ego avg travel time [s]: " << num(tt_a) << " vs " << num(tt_b)
        << "  (delta " << num(tt_a - tt_b) << ")\n";
    out << "ego avg speed [m/s]:     " << num(vs_a) << " vs " << num(vs_b)
        << "  (delta " << num(vs_a - vs_b) << ")\n";
    out << "ego min speed [m/s]:     " << num(vm_a) << " vs " << num(vm_b) << "\n";
    out << "ego stops:               "
        << opt.at("aggregate").at("ego").value("stops_min", 0) << ".."
        << opt.at("aggregate").at("ego").value("stops_max", 0) << " vs "
        << base.at("aggregate").at("ego").value("stops_min", 0) << ".."
        << base.at("aggregate").at("ego").value("stops_max", 0) << "\n";
  } else {
    const auto run_mean = [](const json& j, const char* key) {
      double sum = 0.0;
      long n = 0;
      for (const json& r : j.at("runs")) {
        if (r.contains(key)) {
          sum += r.at(key).get<double>();
          ++n;
        }
      }
      return n > 0 ? sum / static_cast<double>(n) : 0.0;
    };
    out << "avg speed [m/s]: " << num(run_mean(opt, "v_avg_mps")) << " vs "
        << num(run_mean(base, "v_avg_mps")) << "\n";
    out << "min zone speed [m/s]: " << num(run_mean(opt, "v_min_zone_mps")) << " vs "
        << num(run_mean(base, "v_min_zone_mps")) << "\n";
  }

  const auto violations = [](const json& j) {
    return j.contains("aggregate")
               ? j.at("aggregate").value("violations_total", 0)
               : 0;
  };
  out << "safety violations:       " << violations(opt) << " vs " << violations(base)
      << "\n";
  return 0;
}

} // namespace cavsim
