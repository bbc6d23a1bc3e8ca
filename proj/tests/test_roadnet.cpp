/**
 * @file test_roadnet.cpp
 * @brief Centerline geometry, path validation, and conflict-point detection.
 *
 * Intersection expectations are computed by hand from the circle/line
 * equations (angles via atan2), so the detector is checked against closed-form
 * geometry rather than against itself.
 */
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "cavsim/roadnet.hpp"

using namespace cavsim;
using Eigen::Vector2d;

namespace {
constexpr double kPi = std::numbers::pi;
}

TEST_SUITE("roadnet") {

TEST_CASE("line segment length and interpolation") {
  const Segment seg = Segment::line(Vector2d(0.0, 0.0), Vector2d(3.0, 4.0));
  CHECK(seg.length() == doctest::Approx(5.0));
  CHECK(seg.point_at(0.0).isApprox(Vector2d(0.0, 0.0), 1e-12));
  CHECK(seg.point_at(2.5).isApprox(Vector2d(1.5, 2.0), 1e-12));
  CHECK(seg.point_at(5.0).isApprox(Vector2d(3.0, 4.0), 1e-12));
  CHECK_NOTHROW(seg.validate());

  const Segment zero = Segment::line(Vector2d(1.0, 1.0), Vector2d(1.0, 1.0));
  CHECK_THROWS_AS(zero.validate(), std::invalid_argument);
}

TEST_CASE("arc segment, both directions") {
  // Counterclockwise quarter of the unit circle.
  const Segment ccw = Segment::arc(Vector2d(1.0, 0.0), Vector2d(0.0, 1.0),
                                   Vector2d(0.0, 0.0), 1.0);
  CHECK(ccw.length() == doctest::Approx(kPi / 2.0));
  CHECK(ccw.point_at(kPi / 4.0).isApprox(
      Vector2d(std::sqrt(0.5), std::sqrt(0.5)), 1e-12));
  CHECK_NOTHROW(ccw.validate());

  // The same quarter travelled clockwise (negative radius).
  const Segment cw = Segment::arc(Vector2d(0.0, 1.0), Vector2d(1.0, 0.0),
                                  Vector2d(0.0, 0.0), -1.0);
  CHECK(cw.length() == doctest::Approx(kPi / 2.0));
  CHECK(cw.point_at(kPi / 4.0).isApprox(
      Vector2d(std::sqrt(0.5), std::sqrt(0.5)), 1e-12));

  // A major arc sweeps the long way around.
  const Segment major = Segment::arc(Vector2d(1.0, 0.0), Vector2d(0.0, -1.0),
                                     Vector2d(0.0, 0.0), 1.0);
  CHECK(major.length() == doctest::Approx(3.0 * kPi / 2.0));
  CHECK(major.point_at(kPi).isApprox(Vector2d(-1.0, 0.0), 1e-12));
}

TEST_CASE("arc validation") {
  const Segment off = Segment::arc(Vector2d(1.1, 0.0), Vector2d(0.0, 1.0),
                                   Vector2d(0.0, 0.0), 1.0);
  CHECK_THROWS_AS(off.validate(), std::invalid_argument);

  const Segment flat = Segment::arc(Vector2d(1.0, 0.0), Vector2d(0.0, 1.0),
                                    Vector2d(0.0, 0.0), 0.0);
  CHECK_THROWS_AS(flat.validate(), std::invalid_argument);

  const Segment empty = Segment::arc(Vector2d(1.0, 0.0), Vector2d(1.0, 0.0),
                                     Vector2d(0.0, 0.0), 1.0);
  CHECK_THROWS_AS(empty.validate(), std::invalid_argument);
}

TEST_CASE("path length, interpolation across segments, and bounds") {
  Path path;
  path.id = "hook";
  path.segments = {
      Segment::line(Vector2d(0.0, 0.0), Vector2d(4.0, 0.0)),
      Segment::arc(Vector2d(4.0, 0.0), Vector2d(5.0, 1.0), Vector2d(4.0, 1.0), 1.0),
  };
  path.cz_start = 0.5;
  path.cz_end = 4.5;
  CHECK_NOTHROW(path.validate());
  CHECK(path.length() == doctest::Approx(4.0 + kPi / 2.0));
  CHECK(path.control_zone_length() == doctest::Approx(4.0));

  CHECK(path.point_at(2.0).isApprox(Vector2d(2.0, 0.0), 1e-12));
  // A quarter into the arc: angle -pi/2 + pi/4 around (4, 1).
  CHECK(path.point_at(4.0 + kPi / 4.0)
            .isApprox(Vector2d(4.0 + std::sqrt(0.5), 1.0 - std::sqrt(0.5)), 1e-12));
  CHECK(path.point_at(path.length()).isApprox(Vector2d(5.0, 1.0), 1e-12));
  CHECK_THROWS_AS(path.point_at(-0.01), std::out_of_range);
  CHECK_THROWS_AS(path.point_at(path.length() + 0.01), std::out_of_range);
}

TEST_CASE("path validation failures") {
  Path path;
  path.id = "bad";
  path.segments = {
      Segment::line(Vector2d(0.0, 0.0), Vector2d(4.0, 0.0)),
      Segment::line(Vector2d(4.0, 0.1), Vector2d(8.0, 0.1)), // gap at the joint
  };
  path.cz_start = 1.0;
  path.cz_end = 7.0;
  CHECK_THROWS_AS(path.validate(), std::invalid_argument);

  path.segments[1] = Segment::line(Vector2d(4.0, 0.0), Vector2d(8.0, 0.0));
  CHECK_NOTHROW(path.validate());

  path.cz_end = 9.0; // beyond the path
  CHECK_THROWS_AS(path.validate(), std::invalid_argument);
  path.cz_end = 0.5; // before cz_start
  CHECK_THROWS_AS(path.validate(), std::invalid_argument);
  path.cz_end = 7.0;
  path.id.clear();
  CHECK_THROWS_AS(path.validate(), std::invalid_argument);

  Path empty;
  empty.id = "empty";
  CHECK_THROWS_AS(empty.validate(), std::invalid_argument);
}

TEST_CASE("network rejects duplicate ids and self-intersections") {
  RoadNetwork net;
  Path a;
  a.id = "a";
  a.segments = {Segment::line(Vector2d(0.0, 0.0), Vector2d(10.0, 0.0))};
  a.cz_start = 1.0;
  a.cz_end = 9.0;
  net.add_path(a);
  CHECK(net.has_path("a"));
  CHECK_THROWS_AS(net.add_path(a), std::invalid_argument);
  CHECK_THROWS_AS(net.path("nope"), std::out_of_range);

  // Third segment crosses the first away from any junction.
  Path eight;
  eight.id = "eight";
  eight.segments = {
      Segment::line(Vector2d(0.0, 0.0), Vector2d(4.0, 0.0)),
      Segment::line(Vector2d(4.0, 0.0), Vector2d(2.0, -2.0)),
      Segment::line(Vector2d(2.0, -2.0), Vector2d(2.0, 1.0)),
  };
  eight.cz_start = 0.5;
  eight.cz_end = 5.0;
  CHECK_THROWS_AS(net.add_path(eight), std::invalid_argument);

  // A closed chain touches itself only at the shared first/last point: legal.
  Path loop;
  loop.id = "loop";
  loop.segments = {
      Segment::line(Vector2d(20.0, 0.0), Vector2d(24.0, 0.0)),
      Segment::line(Vector2d(24.0, 0.0), Vector2d(22.0, 3.0)),
      Segment::line(Vector2d(22.0, 3.0), Vector2d(20.0, 0.0)),
  };
  loop.cz_start = 0.5;
  loop.cz_end = 3.5;
  CHECK_NOTHROW(net.add_path(loop));
}

TEST_CASE("line-line conflict detection") {
  RoadNetwork net;
  Path a, b, c;
  a.id = "a";
  a.segments = {Segment::line(Vector2d(0.0, 0.0), Vector2d(10.0, 0.0))};
  a.cz_start = 1.0;
  a.cz_end = 9.0;
  b.id = "b";
  b.segments = {Segment::line(Vector2d(5.0, -5.0), Vector2d(5.0, 5.0))};
  b.cz_start = 1.0;
  b.cz_end = 9.0;
  c.id = "c";
  c.segments = {Segment::line(Vector2d(0.0, 1.0), Vector2d(10.0, 1.0))}; // parallel to a
  c.cz_start = 1.0;
  c.cz_end = 9.0;
  net.add_path(a);
  net.add_path(b);
  net.add_path(c);

  const auto ab = net.conflict_points("a", "b");
  REQUIRE(ab.size() == 1);
  CHECK(ab[0].s_a == doctest::Approx(5.0).epsilon(1e-9));
  CHECK(ab[0].s_b == doctest::Approx(5.0).epsilon(1e-9));

  CHECK(net.conflict_points("a", "c").empty()); // parallel
  CHECK(net.conflict_points("a", "a").empty()); // never with itself

  // b crosses c at (5, 1): arc lengths 6 on b, 5 on c.
  const auto bc = net.conflict_points("b", "c");
  REQUIRE(bc.size() == 1);
  CHECK(bc[0].s_a == doctest::Approx(6.0).epsilon(1e-9));
  CHECK(bc[0].s_b == doctest::Approx(5.0).epsilon(1e-9));
}

TEST_CASE("line-arc conflicts, including both crossings of one circle") {
  RoadNetwork net;
  Path road;
  road.id = "road";
  road.segments = {Segment::line(Vector2d(0.0, 0.0), Vector2d(10.0, 0.0))};
  road.cz_start = 0.0;
  road.cz_end = 10.0;

  // Circle of radius 2.5 about (5, 2) cuts y = 0 at x = 3.5 and x = 6.5.
  // The arc starts at the bottom of the circle and runs CCW almost all the
  // way around, so it covers both crossings.
  Path ring;
  ring.id = "ring";
  ring.segments = {Segment::arc(Vector2d(5.0, -0.5), Vector2d(3.5, 0.0),
                                Vector2d(5.0, 2.0), 2.5)};
  ring.cz_start = 0.0;
  ring.cz_end = ring.segments[0].length();
  net.add_path(road);
  net.add_path(ring);

  // Crossing angles about the center, measured CCW from the bottom of the
  // circle: the near crossing sits pi/2 - phi along, the far one 3 pi/2 + phi.
  const double phi = std::atan2(2.0, 1.5);
  const auto hits = net.conflict_points("road", "ring");
  REQUIRE(hits.size() == 2);
  CHECK(hits[0].s_a == doctest::Approx(3.5).epsilon(1e-9));
  CHECK(hits[0].s_b == doctest::Approx(2.5 * (1.5 * kPi + phi)).epsilon(1e-9));
  CHECK(hits[1].s_a == doctest::Approx(6.5).epsilon(1e-9));
  CHECK(hits[1].s_b == doctest::Approx(2.5 * (0.5 * kPi - phi)).epsilon(1e-9));
}

TEST_CASE("grazing tangency is detected") {
  RoadNetwork net;
  Path road;
  road.id = "road";
  road.segments = {Segment::line(Vector2d(0.0, 0.0), Vector2d(10.0, 0.0))};
  road.cz_start = 0.0;
  road.cz_end = 10.0;

  // Unit circle about (5, 1) touches y = 0 exactly once, at (5, 0). The arc
  // runs clockwise through the bottom of the circle.
  Path loopy;
  loopy.id = "loopy";
  loopy.segments = {Segment::arc(Vector2d(6.0, 1.0), Vector2d(4.0, 1.0),
                                 Vector2d(5.0, 1.0), -1.0)};
  loopy.cz_start = 0.0;
  loopy.cz_end = kPi;
  net.add_path(road);
  net.add_path(loopy);

  const auto hits = net.conflict_points("road", "loopy");
  REQUIRE(hits.size() == 1);
  CHECK(hits[0].s_a == doctest::Approx(5.0).epsilon(1e-9));
  CHECK(hits[0].s_b == doctest::Approx(kPi / 2.0).epsilon(1e-9));
}

TEST_CASE("arc-arc conflicts") {
  RoadNetwork net;
  // Unit circles about (0,0) and (1.2, 0) intersect at (0.6, +-0.8); each
  // path is the upper semicircle, so only the upper crossing is shared.
  Path left;
  left.id = "left";
  left.segments = {Segment::arc(Vector2d(1.0, 0.0), Vector2d(-1.0, 0.0),
                                Vector2d(0.0, 0.0), 1.0)};
  left.cz_start = 0.0;
  left.cz_end = kPi;
  Path right;
  right.id = "right";
  right.segments = {Segment::arc(Vector2d(2.2, 0.0), Vector2d(0.2, 0.0),
                                 Vector2d(1.2, 0.0), 1.0)};
  right.cz_start = 0.0;
  right.cz_end = kPi;
  net.add_path(left);
  net.add_path(right);

  const auto hits = net.conflict_points("left", "right");
  REQUIRE(hits.size() == 1);
  CHECK(hits[0].s_a == doctest::Approx(std::atan2(0.8, 0.6)).epsilon(1e-9));
  CHECK(hits[0].s_b == doctest::Approx(kPi - std::atan2(0.8, 0.6)).epsilon(1e-9));
}

TEST_CASE("coincident hits from touching segment pairs are merged") {
  RoadNetwork net;
  Path a;
  a.id = "a";
  a.segments = {
      Segment::line(Vector2d(0.0, 0.0), Vector2d(5.0, 0.0)),
      Segment::line(Vector2d(5.0, 0.0), Vector2d(10.0, 0.0)),
  };
  a.cz_start = 1.0;
  a.cz_end = 9.0;
  Path b;
  b.id = "b";
  b.segments = {Segment::line(Vector2d(5.0, -5.0), Vector2d(5.0, 5.0))};
  b.cz_start = 1.0;
  b.cz_end = 9.0;
  net.add_path(a);
  net.add_path(b);

  // The junction of a's two segments lies exactly on b; both segment pairs
  // report the same point, which must collapse to one conflict.
  const auto hits = net.conflict_points("a", "b");
  REQUIRE(hits.size() == 1);
  CHECK(hits[0].s_a == doctest::Approx(5.0).epsilon(1e-9));
  CHECK(hits[0].s_b == doctest::Approx(5.0).epsilon(1e-9));
}

TEST_CASE("declared conflicts take precedence over detection") {
  RoadNetwork net;
  Path a, b;
  a.id = "a";
  a.segments = {Segment::line(Vector2d(0.0, 0.0), Vector2d(10.0, 0.0))};
  a.cz_start = 1.0;
  a.cz_end = 9.0;
  b.id = "b";
  b.segments = {Segment::line(Vector2d(5.0, -5.0), Vector2d(5.0, 5.0))};
  b.cz_start = 1.0;
  b.cz_end = 9.0;
  net.add_path(a);
  net.add_path(b);

  ConflictPoint outside{1, "a", "b", 0.5, 5.0}; // 0.5 is before a's zone
  CHECK_THROWS_AS(net.declare_conflict(outside), std::invalid_argument);

  ConflictPoint declared{7, "a", "b", 5.0, 5.0};
  net.declare_conflict(declared);
  net.finalize_conflicts(); // must keep the declaration, not re-detect
  REQUIRE(net.conflicts().size() == 1);
  CHECK(net.conflicts()[0].id == 7);

  const auto for_b = net.conflicts_for("b");
  REQUIRE(for_b.size() == 1);
  CHECK(for_b[0].path_a == "b");
  CHECK(for_b[0].path_b == "a");
  CHECK(for_b[0].s_a == doctest::Approx(5.0));
  CHECK(net.conflicts_for("c").empty());
}

TEST_CASE("detection fills the registry and filters by control zone") {
  RoadNetwork net;
  Path a, b, c;
  a.id = "a";
  a.segments = {Segment::line(Vector2d(0.0, 0.0), Vector2d(10.0, 0.0))};
  a.cz_start = 1.0;
  a.cz_end = 9.0;
  b.id = "b";
  b.segments = {Segment::line(Vector2d(5.0, -5.0), Vector2d(5.0, 5.0))};
  b.cz_start = 1.0;
  b.cz_end = 9.0;
  c.id = "c";
  // Parallel to a (never crosses it); crosses b at (5, 2), inside both zones.
  c.segments = {Segment::line(Vector2d(0.0, 2.0), Vector2d(10.0, 2.0))};
  c.cz_start = 1.0;
  c.cz_end = 9.0;
  // Crosses a and c at x = 9.5, beyond their control zones: filtered out.
  Path d;
  d.id = "d";
  d.segments = {Segment::line(Vector2d(9.5, -5.0), Vector2d(9.5, 5.0))};
  d.cz_start = 1.0;
  d.cz_end = 9.0;
  net.add_path(a);
  net.add_path(b);
  net.add_path(c);
  net.add_path(d);

  net.finalize_conflicts();
  REQUIRE(net.conflicts().size() == 2);
  CHECK(net.conflicts()[0].id == 1);
  CHECK(net.conflicts()[0].path_a == "a");
  CHECK(net.conflicts()[0].path_b == "b");
  CHECK(net.conflicts()[0].s_a == doctest::Approx(5.0));
  CHECK(net.conflicts()[0].s_b == doctest::Approx(5.0));
  CHECK(net.conflicts()[1].id == 2);
  CHECK(net.conflicts()[1].path_a == "b");
  CHECK(net.conflicts()[1].path_b == "c");
  CHECK(net.conflicts()[1].s_a == doctest::Approx(7.0));
  CHECK(net.conflicts()[1].s_b == doctest::Approx(5.0));
}

} // TEST_SUITE
