#include "siteswarm/sim/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace siteswarm::sim {

Vec2 Pose2::axis() const { return {std::cos(heading), std::sin(heading)}; }

double wrap_angle(double a) {
  a = std::remainder(a, 2.0 * std::numbers::pi);
  if (a <= -std::numbers::pi) a += 2.0 * std::numbers::pi;
  return a;
}

Pose2 compose(const Pose2& parent, const Pose2& child) {
  return {transform(parent, child.position), parent.heading + child.heading};
}

Pose2 inverse(const Pose2& p) {
  const double c = std::cos(p.heading), s = std::sin(p.heading);
  const Vec2 t(-(c * p.position.x() + s * p.position.y()),
               -(-s * p.position.x() + c * p.position.y()));
  return {t, -p.heading};
}

Vec2 transform(const Pose2& frame, const Vec2& local) {
  const double c = std::cos(frame.heading), s = std::sin(frame.heading);
  return {frame.position.x() + c * local.x() - s * local.y(),
          frame.position.y() + s * local.x() + c * local.y()};
}

Segment2 transform(const Pose2& frame, const Segment2& local) {
  return {transform(frame, local.a), transform(frame, local.b)};
}

Disc2 transform(const Pose2& frame, const Disc2& local) {
  return {transform(frame, local.center), local.radius};
}

Pose2 mirror_x(const Pose2& p) {
  return {Vec2(-p.position.x(), p.position.y()), std::numbers::pi - p.heading};
}

double point_segment_distance(const Vec2& p, const Segment2& s) {
  const Vec2 d = s.b - s.a;
  const double len2 = d.squaredNorm();
  if (len2 == 0.0) return (p - s.a).norm();
  const double t = std::clamp((p - s.a).dot(d) / len2, 0.0, 1.0);
  return (p - (s.a + t * d)).norm();
}

namespace {

double cross(const Vec2& a, const Vec2& b) { return a.x() * b.y() - a.y() * b.x(); }

int orientation(const Vec2& p, const Vec2& q, const Vec2& r) {
  const double v = cross(q - p, r - p);
  return (v > 0) - (v < 0);
}

bool on_segment(const Vec2& p, const Vec2& q, const Vec2& r) {
  // q collinear with p-r; is it inside the bounding box?
  return q.x() <= std::max(p.x(), r.x()) && q.x() >= std::min(p.x(), r.x()) &&
         q.y() <= std::max(p.y(), r.y()) && q.y() >= std::min(p.y(), r.y());
}

bool intersects(const Segment2& s1, const Segment2& s2) {
  const int o1 = orientation(s1.a, s1.b, s2.a);
  const int o2 = orientation(s1.a, s1.b, s2.b);
  const int o3 = orientation(s2.a, s2.b, s1.a);
  const int o4 = orientation(s2.a, s2.b, s1.b);
  if (o1 != o2 && o3 != o4) return true;
  if (o1 == 0 && on_segment(s1.a, s2.a, s1.b)) return true;
  if (o2 == 0 && on_segment(s1.a, s2.b, s1.b)) return true;
  if (o3 == 0 && on_segment(s2.a, s1.a, s2.b)) return true;
  if (o4 == 0 && on_segment(s2.a, s1.b, s2.b)) return true;
  return false;
}

}  // namespace

double segment_distance(const Segment2& a, const Segment2& b) {
  if (intersects(a, b)) return 0.0;
  return std::min({point_segment_distance(a.a, b), point_segment_distance(a.b, b),
                   point_segment_distance(b.a, a), point_segment_distance(b.b, a)});
}

double disc_segment_distance(const Disc2& d, const Segment2& s) {
  return std::max(0.0, point_segment_distance(d.center, s) - d.radius);
}

double disc_distance(const Disc2& a, const Disc2& b) {
  return std::max(0.0, (a.center - b.center).norm() - a.radius - b.radius);
}

}  // namespace siteswarm::sim
