#include "cavsim/roadnet.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace cavsim {

namespace {

constexpr double kGeomTol = 1e-6;  // intersection tolerance [m]
constexpr double kJoinTol = 1e-9;  // C0 continuity tolerance [m]
constexpr double kTwoPi = 2.0 * std::numbers::pi;

double cross2(const Eigen::Vector2d& a, const Eigen::Vector2d& b) {
  return a.x() * b.y() - a.y() * b.x();
}

// Angle swept from the arc's start to the given angle, in travel direction,
// normalized to [0, 2*pi).
double sweep_to(const Segment& arc, double theta) {
  const Eigen::Vector2d r0 = arc.start - arc.center;
  const double theta0 = std::atan2(r0.y(), r0.x());
  const double dir = arc.radius > 0.0 ? 1.0 : -1.0;
  double d = std::fmod(dir * (theta - theta0), kTwoPi);
  if (d < 0.0)
    d += kTwoPi;
  return d;
}

double arc_sweep(const Segment& arc) {
  const Eigen::Vector2d r1 = arc.end - arc.center;
  return sweep_to(arc, std::atan2(r1.y(), r1.x()));
}

struct Hit {
  double s_a;
  double s_b;
};

// Arc length of a point known to lie on the segment's supporting curve, or
// a negative value when it falls outside the segment's extent (tolerance
// kGeomTol along the curve).
double locate_on(const Segment& seg, const Eigen::Vector2d& point) {
  if (seg.kind == Segment::Kind::Line) {
    const Eigen::Vector2d d = seg.end - seg.start;
    const double len = d.norm();
    const double t = (point - seg.start).dot(d) / (len * len);
    if (t < -kGeomTol / len || t > 1.0 + kGeomTol / len)
      return -1.0;
    return std::clamp(t, 0.0, 1.0) * len;
  }
  const double r = std::abs(seg.radius);
  const Eigen::Vector2d rel = point - seg.center;
  const double phi = sweep_to(seg, std::atan2(rel.y(), rel.x()));
  const double sweep = arc_sweep(seg);
  const double ang_tol = kGeomTol / r;
  if (phi <= sweep + ang_tol)
    return std::min(phi, sweep) * r;
  if (phi >= kTwoPi - ang_tol)
    return 0.0;
  return -1.0;
}

void append_candidate(const Segment& a, const Segment& b,
                      const Eigen::Vector2d& point, std::vector<Hit>& hits) {
  const double sa = locate_on(a, point);
  if (sa < 0.0)
    return;
  const double sb = locate_on(b, point);
  if (sb < 0.0)
    return;
  hits.push_back(Hit{sa, sb});
}

void intersect_line_line(const Segment& a, const Segment& b, std::vector<Hit>& hits) {
  const Eigen::Vector2d d1 = a.end - a.start;
  const Eigen::Vector2d d2 = b.end - b.start;
  const double den = cross2(d1, d2);
  if (std::abs(den) < 1e-12)
    return; // parallel or collinear: no transversal crossing
  const Eigen::Vector2d w = b.start - a.start;
  const double t = cross2(w, d2) / den;
  append_candidate(a, b, a.start + t * d1, hits);
}

// Circle of an arc segment.
struct Circle {
  Eigen::Vector2d center;
  double r;
};

Circle circle_of(const Segment& arc) {
  return Circle{arc.center, std::abs(arc.radius)};
}

void intersect_line_circle(const Segment& line, const Segment& arc, bool line_first,
                           std::vector<Hit>& hits) {
  const Circle c = circle_of(arc);
  const Eigen::Vector2d d = line.end - line.start;
  const Eigen::Vector2d f = line.start - c.center;
  const double A = d.dot(d);
  const double B = 2.0 * f.dot(d);
  const double C = f.dot(f) - c.r * c.r;
  double disc = B * B - 4.0 * A * C;
  if (disc < 0.0) {
    // allow grazing contact within tolerance
    if (disc < -4.0 * A * kGeomTol * c.r)
      return;
    disc = 0.0;
  }
  const double sq = std::sqrt(disc);
  const double q = B >= 0.0 ? -0.5 * (B + sq) : -0.5 * (B - sq);
  double roots[2];
  int n = 0;
  if (q != 0.0) {
    roots[n++] = q / A;
    if (sq > 0.0)
      roots[n++] = C / q;
  } else {
    roots[n++] = 0.0;
  }
  for (int i = 0; i < n; ++i) {
    const Eigen::Vector2d point = line.start + roots[i] * d;
    if (line_first)
      append_candidate(line, arc, point, hits);
    else
      append_candidate(arc, line, point, hits);
  }
}

void intersect_circle_circle(const Segment& a, const Segment& b, std::vector<Hit>& hits) {
  const Circle c1 = circle_of(a);
  const Circle c2 = circle_of(b);
  const Eigen::Vector2d diff = c2.center - c1.center;
  const double d = diff.norm();
  if (d < 1e-12)
    return; // concentric (coincident circles carry no transversal crossing)
  const double alpha = (d * d + c1.r * c1.r - c2.r * c2.r) / (2.0 * d);
  double h2 = c1.r * c1.r - alpha * alpha;
  if (h2 < 0.0) {
    if (h2 < -2.0 * c1.r * kGeomTol)
      return;
    h2 = 0.0;
  }
  const double h = std::sqrt(h2);
  const Eigen::Vector2d e = diff / d;
  const Eigen::Vector2d n(-e.y(), e.x());
  const Eigen::Vector2d mid = c1.center + alpha * e;
  append_candidate(a, b, mid + h * n, hits);
  if (h > 0.0)
    append_candidate(a, b, mid - h * n, hits);
}

std::vector<Hit> intersect_segments(const Segment& a, const Segment& b) {
  std::vector<Hit> hits;
  if (a.kind == Segment::Kind::Line && b.kind == Segment::Kind::Line)
    intersect_line_line(a, b, hits);
  else if (a.kind == Segment::Kind::Line)
    intersect_line_circle(a, b, true, hits);
  else if (b.kind == Segment::Kind::Line)
    intersect_line_circle(b, a, false, hits);
  else
    intersect_circle_circle(a, b, hits);
  return hits;
}

} // namespace

Segment Segment::line(const Eigen::Vector2d& start, const Eigen::Vector2d& end) {
  Segment s;
  s.kind = Kind::Line;
  s.start = start;
  s.end = end;
  return s;
}

Segment Segment::arc(const Eigen::Vector2d& start, const Eigen::Vector2d& end,
                     const Eigen::Vector2d& center, double radius) {
  Segment s;
  s.kind = Kind::Arc;
  s.start = start;
  s.end = end;
  s.center = center;
  s.radius = radius;
  return s;
}

double Segment::length() const {
  if (kind == Kind::Line)
    return (end - start).norm();
  return std::abs(radius) * arc_sweep(*this);
}

Eigen::Vector2d Segment::point_at(double s) const {
  if (kind == Kind::Line) {
    const double len = length();
    return start + (s / len) * (end - start);
  }
  const double r = std::abs(radius);
  const Eigen::Vector2d r0 = start - center;
  const double theta0 = std::atan2(r0.y(), r0.x());
  const double theta = theta0 + (radius > 0.0 ? 1.0 : -1.0) * s / r;
  return center + r * Eigen::Vector2d(std::cos(theta), std::sin(theta));
}

void Segment::validate() const {
  if (kind == Kind::Arc) {
    if (radius == 0.0)
      throw std::invalid_argument("Segment: arc radius must be nonzero");
    const double r = std::abs(radius);
    if (std::abs((start - center).norm() - r) > kGeomTol ||
        std::abs((end - center).norm() - r) > kGeomTol)
      throw std::invalid_argument("Segment: arc endpoints not on the circle");
  }
  if (!(length() > 0.0))
    throw std::invalid_argument("Segment: length must be positive");
}

double Path::length() const {
  double total = 0.0;
  for (const Segment& seg : segments)
    total += seg.length();
  return total;
}

Eigen::Vector2d Path::point_at(double s) const {
  const double total = length();
  if (s < -kJoinTol || s > total + kJoinTol)
    throw std::out_of_range("Path::point_at: s outside [0, length]");
  s = std::clamp(s, 0.0, total);
  for (const Segment& seg : segments) {
    const double len = seg.length();
    if (s <= len)
      return seg.point_at(s);
    s -= len;
  }
  return segments.back().end;
}

void Path::validate() const {
  if (id.empty())
    throw std::invalid_argument("Path: empty id");
  if (segments.empty())
    throw std::invalid_argument("Path '" + id + "': no segments");
  for (const Segment& seg : segments)
    seg.validate();
  for (size_t i = 0; i + 1 < segments.size(); ++i) {
    if ((segments[i].end - segments[i + 1].start).norm() >= kJoinTol)
      throw std::invalid_argument("Path '" + id + "': segments are not C0-continuous");
  }
  if (!(cz_start >= 0.0) || !(cz_start < cz_end) || cz_end > length() + kJoinTol)
    throw std::invalid_argument("Path '" + id + "': invalid control-zone interval");
}

void RoadNetwork::add_path(Path path) {
  path.validate();
  if (has_path(path.id))
    throw std::invalid_argument("RoadNetwork: duplicate path id '" + path.id + "'");

  // Reject self-intersecting centerlines. Consecutive segments legitimately
  // touch at their junction (as do the two ends of a closed chain); any other
  // contact between segments is a real self-intersection.
  const auto& segs = path.segments;
  const bool closed = (segs.front().start - segs.back().end).norm() < kJoinTol;
  for (size_t i = 0; i < segs.size(); ++i) {
    for (size_t j = i + 1; j < segs.size(); ++j) {
      const bool adjacent = (j == i + 1) || (closed && i == 0 && j + 1 == segs.size());
      for (const Hit& hit : intersect_segments(segs[i], segs[j])) {
        if (adjacent) {
          const Eigen::Vector2d junction = (j == i + 1) ? segs[i].end : segs[i].start;
          if ((segs[i].point_at(hit.s_a) - junction).norm() < 10.0 * kGeomTol)
            continue;
        }
        throw std::invalid_argument("Path '" + path.id + "': self-intersecting geometry");
      }
    }
  }
  paths_.push_back(std::move(path));
}

bool RoadNetwork::has_path(const std::string& id) const {
  return std::any_of(paths_.begin(), paths_.end(),
                     [&](const Path& p) { return p.id == id; });
}

const Path& RoadNetwork::path(const std::string& id) const {
  for (const Path& p : paths_)
    if (p.id == id)
      return p;
  throw std::out_of_range("RoadNetwork: unknown path '" + id + "'");
}

std::vector<ConflictPoint> RoadNetwork::conflict_points(const std::string& path_a,
                                                        const std::string& path_b) const {
  const Path& pa = path(path_a);
  const Path& pb = path(path_b);
  if (path_a == path_b)
    return {};

  std::vector<Hit> hits;
  double base_a = 0.0;
  for (const Segment& sa : pa.segments) {
    double base_b = 0.0;
    for (const Segment& sb : pb.segments) {
      for (const Hit& h : intersect_segments(sa, sb))
        hits.push_back(Hit{base_a + h.s_a, base_b + h.s_b});
      base_b += sb.length();
    }
    base_a += sa.length();
  }

  std::sort(hits.begin(), hits.end(), [](const Hit& x, const Hit& y) {
    return x.s_a != y.s_a ? x.s_a < y.s_a : x.s_b < y.s_b;
  });
  std::vector<ConflictPoint> out;
  for (const Hit& h : hits) {
    const bool dup = std::any_of(out.begin(), out.end(), [&](const ConflictPoint& c) {
      return std::abs(c.s_a - h.s_a) < kGeomTol && std::abs(c.s_b - h.s_b) < kGeomTol;
    });
    if (!dup)
      out.push_back(ConflictPoint{static_cast<int>(out.size()) + 1, path_a, path_b,
                                  h.s_a, h.s_b});
  }
  return out;
}

void RoadNetwork::declare_conflict(ConflictPoint cp) {
  const Path& pa = path(cp.path_a);
  const Path& pb = path(cp.path_b);
  if (cp.s_a < pa.cz_start - kJoinTol || cp.s_a > pa.cz_end + kJoinTol ||
      cp.s_b < pb.cz_start - kJoinTol || cp.s_b > pb.cz_end + kJoinTol)
    throw std::invalid_argument("ConflictPoint " + std::to_string(cp.id) +
                                ": position outside a control zone");
  conflicts_.push_back(std::move(cp));
  any_declared_ = true;
}

void RoadNetwork::finalize_conflicts() {
  if (any_declared_)
    return;
  int next_id = 1;
  for (size_t i = 0; i < paths_.size(); ++i) {
    for (size_t j = i + 1; j < paths_.size(); ++j) {
      const Path& pa = paths_[i];
      const Path& pb = paths_[j];
      for (ConflictPoint cp : conflict_points(pa.id, pb.id)) {
        if (cp.s_a >= pa.cz_start && cp.s_a <= pa.cz_end &&
            cp.s_b >= pb.cz_start && cp.s_b <= pb.cz_end) {
          cp.id = next_id++;
          conflicts_.push_back(std::move(cp));
        }
      }
    }
  }
}

std::vector<ConflictPoint> RoadNetwork::conflicts_for(const std::string& path_id) const {
  std::vector<ConflictPoint> out;
  for (const ConflictPoint& cp : conflicts_) {
    if (cp.path_a == path_id) {
      out.push_back(cp);
    } else if (cp.path_b == path_id) {
      out.push_back(ConflictPoint{cp.id, cp.path_b, cp.path_a, cp.s_b, cp.s_a});
    }
  }
  return out;
}

} // namespace cavsim
