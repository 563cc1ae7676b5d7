#ifndef SITESWARM_SIM_GEOMETRY_HPP_
#define SITESWARM_SIM_GEOMETRY_HPP_

#include <Eigen/Dense>

namespace siteswarm::sim {

using Vec2 = Eigen::Vector2d;

struct Pose2 {
  Vec2 position = Vec2::Zero();
  double heading = 0.0;  // rad, counter-clockwise from +x

  Vec2 axis() const;
  bool operator==(const Pose2&) const = default;
};

struct Segment2 {
  Vec2 a = Vec2::Zero();
  Vec2 b = Vec2::Zero();
};

struct Disc2 {
  Vec2 center = Vec2::Zero();
  double radius = 0.0;
};

// Wraps to (-pi, pi].
double wrap_angle(double a);

// parent ∘ child: child expressed in parent's frame, result in parent's parent.
Pose2 compose(const Pose2& parent, const Pose2& child);
Pose2 inverse(const Pose2& p);
Vec2 transform(const Pose2& frame, const Vec2& local);
Segment2 transform(const Pose2& frame, const Segment2& local);
Disc2 transform(const Pose2& frame, const Disc2& local);
Pose2 mirror_x(const Pose2& p);  // reflection across the line x = 0

double point_segment_distance(const Vec2& p, const Segment2& s);
// Exact minimum distance; 0 iff the closed segments intersect. Point-degenerate
// segments are allowed.
double segment_distance(const Segment2& a, const Segment2& b);
double disc_segment_distance(const Disc2& d, const Segment2& s);
double disc_distance(const Disc2& a, const Disc2& b);

}  // namespace siteswarm::sim

#endif  // SITESWARM_SIM_GEOMETRY_HPP_
