#pragma once

#include <Eigen/Dense>

#include <string>
#include <vector>

namespace cavsim {

/// A piece of road centerline, parameterized by arc length from its start.
struct Segment {
  enum class Kind { Line, Arc };

  Kind kind = Kind::Line;
  Eigen::Vector2d start{0.0, 0.0};
  Eigen::Vector2d end{0.0, 0.0};
  Eigen::Vector2d center{0.0, 0.0}; ///< arcs only
  double radius = 0.0;              ///< arcs only; sign picks the direction (+ CCW, - CW)

  static Segment line(const Eigen::Vector2d& start, const Eigen::Vector2d& end);
  static Segment arc(const Eigen::Vector2d& start, const Eigen::Vector2d& end,
                     const Eigen::Vector2d& center, double radius);

  double length() const;
  Eigen::Vector2d point_at(double s) const;

  /// Throws std::invalid_argument on zero length, zero radius, or arc
  /// endpoints that do not lie on the circle.
  void validate() const;
};

/// An ordered chain of segments forming one route, with the stretch where
/// vehicles commit to planned trajectories given as an arc-length interval.
struct Path {
  std::string id;
  std::vector<Segment> segments;
  double cz_start = 0.0; ///< control-zone start [m along the path]
  double cz_end = 0.0;   ///< control-zone end [m along the path]

  double length() const;
  double control_zone_length() const { return cz_end - cz_start; }

  /// Point on the centerline at arc length s in [0, length()].
  /// Throws std::out_of_range outside that interval.
  Eigen::Vector2d point_at(double s) const;

  /// Checks segment validity, C0 continuity between consecutive segments
  /// (endpoint gap below 1e-9 m), and control-zone bounds.
  void validate() const;
};

/// A location where two distinct paths cross, in each path's arc length.
struct ConflictPoint {
  int id = 0;
  std::string path_a;
  std::string path_b;
  double s_a = 0.0; ///< position along path_a [m]
  double s_b = 0.0; ///< position along path_b [m]
};

/// Immutable once built: add paths, then declare or detect conflict points.
class RoadNetwork {
public:
  /// Validates the path and rejects self-intersecting geometry.
  void add_path(Path path);

  bool has_path(const std::string& id) const;
  const Path& path(const std::string& id) const;
  const std::vector<Path>& paths() const { return paths_; }

  /// All centerline intersections of two paths, with arc-length coordinates
  /// on each, ordered by s_a. A path never conflicts with itself (same-lane
  /// interactions are the rear-end constraint's job). Geometric tolerance of
  /// 1e-6 m; coincident hits are merged.
  std::vector<ConflictPoint> conflict_points(const std::string& path_a,
                                             const std::string& path_b) const;

  /// Registers a conflict point explicitly; declared points take precedence
  /// over detection. Throws unless both coordinates lie inside the owning
  /// paths' control zones.
  void declare_conflict(ConflictPoint cp);

  /// Fills the registry by detection if nothing was declared: every pairwise
  /// intersection that falls inside both control zones, ids assigned in
  /// (path order, s_a) order.
  void finalize_conflicts();

  const std::vector<ConflictPoint>& conflicts() const { return conflicts_; }

  /// Registry entries touching the given path, with coordinates swapped so
  /// the queried path is side a.
  std::vector<ConflictPoint> conflicts_for(const std::string& path_id) const;

private:
  std::vector<Path> paths_;
  std::vector<ConflictPoint> conflicts_;
  bool any_declared_ = false;
};

} // namespace cavsim
