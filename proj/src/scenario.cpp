#include "cavsim/scenario.hpp"

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <utility>

#include <json.hpp>

namespace cavsim {

using nlohmann::json;

namespace {

json segment_to_json(const Segment& seg) {
  json j;
  j["kind"] = seg.kind == Segment::Kind::Line ? "line" : "arc";
  j["start_m"] = {seg.start.x(), seg.start.y()};
  j["end_m"] = {seg.end.x(), seg.end.y()};
  if (seg.kind == Segment::Kind::Arc) {
    j["center_m"] = {seg.center.x(), seg.center.y()};
    j["radius_m"] = seg.radius;
  }
  return j;
}

Eigen::Vector2d point_from_json(const json& j) {
  if (!j.is_array() || j.size() != 2)
    throw std::invalid_argument("expected a 2-element [x, y] array");
  return {j[0].get<double>(), j[1].get<double>()};
}

Segment segment_from_json(const json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  const Eigen::Vector2d start = point_from_json(j.at("start_m"));
  const Eigen::Vector2d end = point_from_json(j.at("end_m"));
  if (kind == "line")
    return Segment::line(start, end);
  if (kind == "arc")
    return Segment::arc(start, end, point_from_json(j.at("center_m")),
                        j.at("radius_m").get<double>());
  throw std::invalid_argument("segment kind must be \"line\" or \"arc\", got \"" +
                              kind + "\"");
}

json config_to_json(const ScenarioConfig& c) {
  json j;
  j["name"] = c.name;
  j["speed_limit_mps"] = c.speed_limit;
  j["duration_s"] = c.duration;
  j["repetitions"] = c.repetitions;
  j["seed"] = c.seed;
  j["tracking"] = c.tracking;
  j["outside_zone_speed_cap_mps"] = c.outside_zone_cap;
  j["limits"] = {{"v_min_mps", c.limits.v_min},
                 {"v_max_mps", c.limits.v_max},
                 {"u_min_mps2", c.limits.u_min},
                 {"u_max_mps2", c.limits.u_max}};
  j["safety"] = {{"standstill_m", c.safety.standstill},
                 {"headway_s", c.safety.headway},
                 {"vehicle_length_m", c.safety.vehicle_length}};
  j["idm"] = {{"max_accel_mps2", c.idm.max_accel},
              {"comfort_decel_mps2", c.idm.comfort_decel},
              {"exponent", c.idm.exponent},
              {"jam_distance_m", c.idm.jam_distance},
              {"time_headway_s", c.idm.time_headway}};

  j["paths"] = json::array();
  for (const PathConfig& pc : c.paths) {
    json jp;
    jp["id"] = pc.path.id;
    jp["segments"] = json::array();
    for (const Segment& seg : pc.path.segments)
      jp["segments"].push_back(segment_to_json(seg));
    jp["cz_start_m"] = pc.path.cz_start;
    jp["cz_end_m"] = pc.path.cz_end;
    if (pc.entry_speed_cap)
      jp["entry_speed_cap_mps"] = *pc.entry_speed_cap;
    if (!pc.next.empty())
      jp["next"] = pc.next;
    if (pc.loop)
      jp["loop"] = true;
    if (pc.ego)
      jp["ego"] = true;
    j["paths"].push_back(std::move(jp));
  }

  if (!c.conflicts.empty()) {
    j["conflict_points"] = json::array();
    for (const ConflictPoint& cp : c.conflicts)
      j["conflict_points"].push_back({{"id", cp.id},
                                      {"path_a", cp.path_a},
                                      {"path_b", cp.path_b},
                                      {"s_a_m", cp.s_a},
                                      {"s_b_m", cp.s_b}});
  }

  j["spawns"] = json::array();
  for (const SpawnEvent& sp : c.spawns)
    j["spawns"].push_back({{"vehicle_id", sp.vehicle_id},
                           {"path", sp.path_id},
                           {"time_s", sp.time},
                           {"speed_mps", sp.speed}});

  if (!c.yields.empty()) {
    j["yield_signs"] = json::array();
    for (const YieldConfig& y : c.yields)
      j["yield_signs"].push_back({{"approach_path", y.approach_path},
                                  {"line_s_m", y.line_s},
                                  {"mainline_path", y.zone.mainline_path},
                                  {"zone_start_m", y.zone.zone_start},
                                  {"zone_end_m", y.zone.zone_end},
                                  {"threshold_m", y.zone.threshold}});
  }

  if (!c.stops.empty()) {
    j["stop_signs"] = json::array();
    for (const StopConfig& st : c.stops) {
      json js;
      js["id"] = st.id;
      js["approaches"] = json::array();
      for (const StopApproach& ap : st.approaches)
        js["approaches"].push_back({{"path", ap.path_id},
                                    {"enqueue_s_m", ap.enqueue_s},
                                    {"line_s_m", ap.line_s},
                                    {"zone_end_m", ap.zone_end_s}});
      j["stop_signs"].push_back(std::move(js));
    }
  }
  return j;
}

ScenarioConfig config_from_json(const json& j) {
  ScenarioConfig c;
  c.name = j.at("name").get<std::string>();
  c.speed_limit = j.at("speed_limit_mps").get<double>();
  c.duration = j.value("duration_s", 60.0);
  c.repetitions = j.value("repetitions", 1);
  c.seed = j.value("seed", 1ULL);
  c.tracking = j.value("tracking", std::string("exact"));
  c.outside_zone_cap = j.value("outside_zone_speed_cap_mps", c.speed_limit);

  const json& jl = j.at("limits");
  c.limits.v_min = jl.at("v_min_mps").get<double>();
  c.limits.v_max = jl.at("v_max_mps").get<double>();
  c.limits.u_min = jl.at("u_min_mps2").get<double>();
  c.limits.u_max = jl.at("u_max_mps2").get<double>();

  const json& jsf = j.at("safety");
  c.safety.standstill = jsf.at("standstill_m").get<double>();
  c.safety.headway = jsf.at("headway_s").get<double>();
  c.safety.vehicle_length = jsf.at("vehicle_length_m").get<double>();

  if (j.contains("idm")) {
    const json& ji = j.at("idm");
    c.idm.max_accel = ji.value("max_accel_mps2", c.idm.max_accel);
    c.idm.comfort_decel = ji.value("comfort_decel_mps2", c.idm.comfort_decel);
    c.idm.exponent = ji.value("exponent", c.idm.exponent);
    c.idm.jam_distance = ji.value("jam_distance_m", c.idm.jam_distance);
    c.idm.time_headway = ji.value("time_headway_s", c.idm.time_headway);
  }
  c.idm.desired_speed = c.speed_limit; // overridden per mode/position at runtime

  for (const json& jp : j.at("paths")) {
    PathConfig pc;
    pc.path.id = jp.at("id").get<std::string>();
    for (const json& js : jp.at("segments"))
      pc.path.segments.push_back(segment_from_json(js));
    pc.path.cz_start = jp.at("cz_start_m").get<double>();
    pc.path.cz_end = jp.at("cz_end_m").get<double>();
    if (jp.contains("entry_speed_cap_mps"))
      pc.entry_speed_cap = jp.at("entry_speed_cap_mps").get<double>();
    pc.next = jp.value("next", std::string());
    pc.loop = jp.value("loop", false);
    pc.ego = jp.value("ego", false);
    c.paths.push_back(std::move(pc));
  }

  if (j.contains("conflict_points")) {
    for (const json& jc : j.at("conflict_points"))
      c.conflicts.push_back(ConflictPoint{jc.at("id").get<int>(),
                                          jc.at("path_a").get<std::string>(),
                                          jc.at("path_b").get<std::string>(),
                                          jc.at("s_a_m").get<double>(),
                                          jc.at("s_b_m").get<double>()});
  }

  for (const json& js : j.at("spawns"))
    c.spawns.push_back(SpawnEvent{js.at("vehicle_id").get<int>(),
                                  js.at("path").get<std::string>(),
                                  js.at("time_s").get<double>(),
                                  js.at("speed_mps").get<double>()});

  if (j.contains("yield_signs")) {
    for (const json& jy : j.at("yield_signs")) {
      YieldConfig y;
      y.approach_path = jy.at("approach_path").get<std::string>();
      y.line_s = jy.at("line_s_m").get<double>();
      y.zone.mainline_path = jy.at("mainline_path").get<std::string>();
      y.zone.zone_start = jy.at("zone_start_m").get<double>();
      y.zone.zone_end = jy.at("zone_end_m").get<double>();
      y.zone.threshold = jy.value("threshold_m", 0.4);
      c.yields.push_back(std::move(y));
    }
  }

  if (j.contains("stop_signs")) {
    for (const json& jst : j.at("stop_signs")) {
      StopConfig st;
      st.id = jst.at("id").get<std::string>();
      for (const json& ja : jst.at("approaches"))
        st.approaches.push_back(StopApproach{ja.at("path").get<std::string>(),
                                             ja.at("enqueue_s_m").get<double>(),
                                             ja.at("line_s_m").get<double>(),
                                             ja.at("zone_end_m").get<double>()});
      c.stops.push_back(std::move(st));
    }
  }
  return c;
}

} // namespace

const PathConfig* ScenarioConfig::find_path(const std::string& id) const {
  for (const PathConfig& pc : paths)
    if (pc.path.id == id)
      return &pc;
  return nullptr;
}

std::vector<std::string> ScenarioConfig::validate() const {
  std::vector<std::string> errors;
  const auto fail = [&errors](const std::string& msg) { errors.push_back(msg); };
  const auto check = [&fail](const auto& validatable, const std::string& where) {
    try {
      validatable.validate();
    } catch (const std::exception& e) {
      fail(where + ": " + e.what());
    }
  };

  if (name.empty())
    fail("scenario: name must not be empty");
  if (!(speed_limit > 0.0))
    fail("scenario: speed_limit_mps must be positive");
  if (!(duration >= 0.0))
    fail("scenario: duration_s must be nonnegative");
  if (repetitions < 1)
    fail("scenario: repetitions must be at least 1");
  if (tracking != "exact" && tracking != "lagged")
    fail("scenario: tracking must be \"exact\" or \"lagged\", got \"" + tracking + "\"");
  if (!(outside_zone_cap > 0.0))
    fail("scenario: outside_zone_speed_cap_mps must be positive");

  check(limits, "limits");
  check(safety, "safety");
  check(idm, "idm");

  if (paths.empty())
    fail("scenario: at least one path is required");
  std::set<std::string> path_ids;
  for (const PathConfig& pc : paths) {
    check(pc.path, "path '" + pc.path.id + "'");
    if (!path_ids.insert(pc.path.id).second)
      fail("path '" + pc.path.id + "': duplicate id");
    if (pc.entry_speed_cap && !(*pc.entry_speed_cap > 0.0))
      fail("path '" + pc.path.id + "': entry_speed_cap_mps must be positive");
    if (pc.loop && !pc.next.empty())
      fail("path '" + pc.path.id + "': loop and next are mutually exclusive");
  }
  for (const PathConfig& pc : paths) {
    if (!pc.next.empty() && !path_ids.count(pc.next))
      fail("path '" + pc.path.id + "': next references unknown path '" + pc.next + "'");
  }

  std::set<int> conflict_ids;
  for (const ConflictPoint& cp : conflicts) {
    const std::string where = "conflict point " + std::to_string(cp.id);
    if (!conflict_ids.insert(cp.id).second)
      fail(where + ": duplicate id");
    const std::pair<std::string, double> sides[] = {{cp.path_a, cp.s_a},
                                                    {cp.path_b, cp.s_b}};
    for (const auto& [pid, s] : sides) {
      const PathConfig* pc = find_path(pid);
      if (!pc)
        fail(where + ": unknown path '" + pid + "'");
      else if (s < pc->path.cz_start || s > pc->path.cz_end)
        fail(where + ": position on '" + pid + "' lies outside the control zone");
    }
  }

  std::set<int> vehicle_ids;
  for (const SpawnEvent& sp : spawns) {
    const std::string where = "spawn of vehicle " + std::to_string(sp.vehicle_id);
    if (!vehicle_ids.insert(sp.vehicle_id).second)
      fail(where + ": duplicate vehicle id");
    if (!find_path(sp.path_id))
      fail(where + ": unknown path '" + sp.path_id + "'");
    if (!(sp.time >= 0.0))
      fail(where + ": time_s must be nonnegative");
    if (!(sp.speed > 0.0) || sp.speed > speed_limit)
      fail(where + ": speed_mps must lie in (0, speed_limit]");
  }

  for (const YieldConfig& y : yields) {
    const std::string where = "yield sign on '" + y.approach_path + "'";
    const PathConfig* ap = find_path(y.approach_path);
    const PathConfig* mp = find_path(y.zone.mainline_path);
    if (!ap)
      fail(where + ": unknown approach path");
    else if (y.line_s < 0.0 || y.line_s > ap->path.length())
      fail(where + ": line_s_m outside the approach path");
    if (!mp)
      fail(where + ": unknown mainline path '" + y.zone.mainline_path + "'");
    else if (!(y.zone.zone_start < y.zone.zone_end) ||
             y.zone.zone_end > mp->path.length())
      fail(where + ": invalid mainline zone interval");
    if (!(y.zone.threshold >= 0.0))
      fail(where + ": threshold_m must be nonnegative");
  }

  for (const StopConfig& st : stops) {
    const std::string where = "stop sign '" + st.id + "'";
    if (st.approaches.empty())
      fail(where + ": needs at least one approach");
    for (const StopApproach& ap : st.approaches) {
      const PathConfig* pc = find_path(ap.path_id);
      if (!pc) {
        fail(where + ": unknown approach path '" + ap.path_id + "'");
        continue;
      }
      if (!(ap.enqueue_s >= 0.0) || !(ap.enqueue_s < ap.line_s) ||
          !(ap.line_s < ap.zone_end_s) || ap.zone_end_s > pc->path.length())
        fail(where + ", approach '" + ap.path_id +
             "': require 0 <= enqueue_s_m < line_s_m < zone_end_m <= path length");
    }
  }

  if (errors.empty()) {
    try {
      build_network();
    } catch (const std::exception& e) {
      fail(std::string("geometry: ") + e.what());
    }
  }
  return errors;
}

RoadNetwork ScenarioConfig::build_network() const {
  RoadNetwork net;
  for (const PathConfig& pc : paths)
    net.add_path(pc.path);
  for (const ConflictPoint& cp : conflicts)
    net.declare_conflict(cp);
  net.finalize_conflicts();
  return net;
}

ScenarioConfig parse_scenario(const std::string& json_text, const std::string& origin) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ScenarioError(origin + ": " + e.what(), {e.what()});
  }
  ScenarioConfig config;
  try {
    config = config_from_json(j);
  } catch (const std::exception& e) {
    throw ScenarioError(origin + ": " + e.what(), {e.what()});
  }
  std::vector<std::string> errors = config.validate();
  if (!errors.empty()) {
    std::ostringstream what;
    what << origin << ": " << errors.size() << " validation error(s):";
    for (const std::string& err : errors)
      what << "\n  - " << err;
    throw ScenarioError(what.str(), std::move(errors));
  }
  return config;
}

ScenarioConfig load_scenario(const std::string& file_path) {
  std::ifstream in(file_path);
  if (!in)
    throw ScenarioError(file_path + ": cannot open file", {"cannot open file"});
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_scenario(buffer.str(), file_path);
}

std::string serialize_scenario(const ScenarioConfig& config) {
  return config_to_json(config).dump(2) + "\n";
}

std::string scenario_hash(const ScenarioConfig& config) {
  // FNV-1a over the canonical serialization.
  const std::string text = config_to_json(config).dump();
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char byte : text) {
    h ^= byte;
    h *= 1099511628211ULL;
  }
  char buf[19];
  std::snprintf(buf, sizeof(buf), "0x%016llx", static_cast<unsigned long long>(h));
  return buf;
}

} // namespace cavsim
