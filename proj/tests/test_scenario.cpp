/**
 * @file test_scenario.cpp
 * @brief Scenario loading, validation, canonical serialization, and the two
 * bundled experiment files.
 */
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <string>

#include "cavsim/scenario.hpp"

using namespace cavsim;

namespace {

std::string scenario_file(const std::string& name) {
  const char* dir = std::getenv("CAVSIM_SCENARIO_DIR");
  return std::string(dir ? dir : "scenarios") + "/" + name;
}

} // namespace

TEST_SUITE("scenario") {

TEST_CASE("bundled roundabout scenario") {
  const ScenarioConfig cfg = load_scenario(scenario_file("roundabout.json"));
  CHECK(cfg.name == "roundabout");
  CHECK(cfg.speed_limit == doctest::Approx(0.5));
  CHECK(cfg.duration == doctest::Approx(60.0));
  CHECK(cfg.limits.v_min == doctest::Approx(0.15));
  CHECK(cfg.limits.u_max == doctest::Approx(0.45));
  CHECK(cfg.safety.standstill == doctest::Approx(0.07));

  REQUIRE(cfg.paths.size() == 3);
  const RoadNetwork net = cfg.build_network();
  CHECK(net.path("west").control_zone_length() == doctest::Approx(5.3));
  CHECK(net.path("south").control_zone_length() == doctest::Approx(5.8));
  CHECK(net.path("east").control_zone_length() == doctest::Approx(3.8));

  // The three approach routes pairwise merge into the ring: three conflicts.
  REQUIRE(net.conflicts().size() == 3);
  for (const ConflictPoint& cp : net.conflicts()) {
    // Every declared coordinate must coincide with a detected intersection
    // of the same path pair (the declaration pins ids, not geometry).
    const auto detected = net.conflict_points(cp.path_a, cp.path_b);
    bool matched = false;
    for (const ConflictPoint& hit : detected)
      matched = matched || (std::abs(hit.s_a - cp.s_a) < 1e-6 &&
                            std::abs(hit.s_b - cp.s_b) < 1e-6);
    CHECK(matched);
  }

  REQUIRE(cfg.spawns.size() == 9);
  int per_path[3] = {0, 0, 0};
  for (const SpawnEvent& sp : cfg.spawns) {
    CHECK(sp.speed > 0.0);
    CHECK(sp.speed <= cfg.speed_limit);
    if (sp.path_id == "west")
      ++per_path[0];
    if (sp.path_id == "south")
      ++per_path[1];
    if (sp.path_id == "east")
      ++per_path[2];
  }
  CHECK(per_path[0] == 3);
  CHECK(per_path[1] == 3);
  CHECK(per_path[2] == 3);

  // Entry caps keep spawn speeds compatible with the zone's speed band.
  CHECK(cfg.find_path("west")->entry_speed_cap.value() == doctest::Approx(0.42));
  CHECK(cfg.find_path("east")->entry_speed_cap.value() == doctest::Approx(0.30));
  CHECK(cfg.find_path("missing") == nullptr);
}

TEST_CASE("bundled corridor scenario") {
  const ScenarioConfig cfg = load_scenario(scenario_file("corridor.json"));
  CHECK(cfg.name == "corridor");
  CHECK(cfg.duration == doctest::Approx(100.0));
  REQUIRE(cfg.paths.size() == 7);
  CHECK(cfg.spawns.size() == 15);

  // The ego route chains three legs; only those count toward ego metrics.
  int ego_paths = 0;
  for (const PathConfig& pc : cfg.paths)
    ego_paths += pc.ego ? 1 : 0;
  CHECK(ego_paths == 3);
  CHECK(cfg.find_path("ego_a")->next == "ego_b");
  CHECK(cfg.find_path("ego_b")->next == "ego_c");
  CHECK(cfg.find_path("ego_c")->next == "");
  CHECK(cfg.find_path("ring")->ego == false);

  // Each control zone gives vehicles roughly three metres to adjust before
  // its first conflict point.
  const RoadNetwork net = cfg.build_network();
  REQUIRE(net.conflicts().size() == 4);
  for (const std::string leg : {"ego_a", "ego_b", "ego_c"}) {
    double first = 1e9;
    for (const ConflictPoint& cp : net.conflicts_for(leg))
      first = std::min(first, cp.s_a);
    const double adjust = first - net.path(leg).cz_start;
    CHECK(adjust >= 2.5);
    CHECK(adjust <= 3.5);
  }

  REQUIRE(cfg.yields.size() == 2);
  CHECK(cfg.yields[0].zone.threshold == doctest::Approx(0.4));
  REQUIRE(cfg.stops.size() == 1);
  CHECK(cfg.stops[0].approaches.size() == 3);
  for (const StopApproach& ap : cfg.stops[0].approaches) {
    CHECK(ap.enqueue_s < ap.line_s);
    CHECK(ap.line_s < ap.zone_end_s);
  }
}

TEST_CASE("serialization round-trips and is canonical") {
  const ScenarioConfig cfg = load_scenario(scenario_file("roundabout.json"));
  const std::string text = serialize_scenario(cfg);
  const ScenarioConfig reparsed = parse_scenario(text, "round-trip");

  CHECK(serialize_scenario(reparsed) == text);
  CHECK(scenario_hash(reparsed) == scenario_hash(cfg));
  CHECK(reparsed.name == cfg.name);
  CHECK(reparsed.paths.size() == cfg.paths.size());
  CHECK(reparsed.spawns.size() == cfg.spawns.size());
  CHECK(reparsed.conflicts.size() == cfg.conflicts.size());
  CHECK(reparsed.seed == cfg.seed);
  CHECK(reparsed.paths[0].path.segments[0].start.x() ==
        doctest::Approx(cfg.paths[0].path.segments[0].start.x()).epsilon(1e-15));
}

TEST_CASE("scenario hash pins the full configuration") {
  ScenarioConfig cfg = load_scenario(scenario_file("roundabout.json"));
  const std::string base = scenario_hash(cfg);
  CHECK(base.substr(0, 2) == "0x");
  CHECK(base.size() == 18);

  cfg.duration += 1.0;
  CHECK(scenario_hash(cfg) != base);
  cfg.duration -= 1.0;
  CHECK(scenario_hash(cfg) == base);

  cfg.spawns[0].time += 0.1;
  CHECK(scenario_hash(cfg) != base);
}

TEST_CASE("parse failures are fail-fast") {
  CHECK_THROWS_AS(parse_scenario("", "empty"), ScenarioError);
  CHECK_THROWS_AS(parse_scenario("{ not json", "broken"), ScenarioError);
  CHECK_THROWS_AS(parse_scenario("[1, 2, 3]", "array"), ScenarioError);
  CHECK_THROWS_AS(parse_scenario("{}", "hollow"), ScenarioError);
  CHECK_THROWS_AS(load_scenario("/nonexistent/nowhere.json"), ScenarioError);
}

TEST_CASE("validation reports every problem at once") {
  ScenarioConfig cfg = load_scenario(scenario_file("roundabout.json"));
  CHECK(cfg.validate().empty());

  cfg.limits.v_min = 0.0;                 // invalid limits
  cfg.spawns[0].path_id = "nowhere";      // dangling spawn
  cfg.spawns[1].speed = 0.9;              // above the speed limit
  cfg.tracking = "psychic";               // unknown tracking model
  cfg.repetitions = 0;                    // not a valid count

  const std::vector<std::string> errors = cfg.validate();
  CHECK(errors.size() >= 5);

  // The same config as text must throw with the errors attached.
  try {
    parse_scenario(serialize_scenario(cfg), "broken");
    FAIL("expected ScenarioError");
  } catch (const ScenarioError& e) {
    CHECK(e.errors.size() == errors.size());
    CHECK(std::string(e.what()).find("validation error") != std::string::npos);
  }
}

TEST_CASE("declared conflicts outside a control zone are rejected") {
  ScenarioConfig cfg = load_scenario(scenario_file("roundabout.json"));
  REQUIRE(!cfg.conflicts.empty());
  cfg.conflicts[0].s_a = 0.1; // west's zone starts well after 0.1 m
  const std::vector<std::string> errors = cfg.validate();
  REQUIRE(!errors.empty());
  bool mentions_zone = false;
  for (const std::string& e : errors)
    mentions_zone = mentions_zone || e.find("outside the control zone") != std::string::npos;
  CHECK(mentions_zone);
}

TEST_CASE("duplicate ids are caught") {
  ScenarioConfig cfg = load_scenario(scenario_file("roundabout.json"));
  cfg.spawns[1].vehicle_id = cfg.spawns[0].vehicle_id;
  CHECK(!cfg.validate().empty());

  ScenarioConfig cfg2 = load_scenario(scenario_file("roundabout.json"));
  cfg2.paths[1].path.id = cfg2.paths[0].path.id;
  CHECK(!cfg2.validate().empty());
}

} // TEST_SUITE
