// Copyright 2026 The LabelUQ Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Rotated boxes, the unit-box affine model and the linear feature
// parameterization used by the label posterior, plus convex polygon helpers
// for deterministic IoU.
//
// BEV frame: x is lateral, y is longitudinal. A BEV box is
// [c1, c2, l, w, r]; the length axis points along (cos r, sin r).
// Unit-box coordinates live in [-0.5, 0.5]^d. In BEV the first unit axis is
// the length axis, the second the width axis. In 3D the unit axes are ordered
// (length, height, width) with c3 vertical, so that J(v*) has the row layout
//
//   [1 0 0 v1 0  0 -v3 0 ]
//   [0 1 0 0  v1 v3 0  0 ]
//   [0 0 1 0  0  0  0  v2]
//
// against phi = [c1, c2, c3, l cos r, l sin r, w cos r, w sin r, h].

#ifndef LABELUQ_GEOMETRY_H_
#define LABELUQ_GEOMETRY_H_

#include <array>
#include <span>
#include <vector>

#include <Eigen/Core>

namespace labeluq {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using FeatureBev = Eigen::Matrix<double, 6, 1>;
using Feature3d = Eigen::Matrix<double, 8, 1>;
using JacobianBev = Eigen::Matrix<double, 2, 6>;
using Jacobian3d = Eigen::Matrix<double, 3, 8>;
using Mat6 = Eigen::Matrix<double, 6, 6>;

inline constexpr double kPi = 3.14159265358979323846;

// Maps an angle into (-pi, pi].
double NormalizeAngle(double r);

struct BoxBev {
  double c1 = 0.0;
  double c2 = 0.0;
  double l = 1.0;
  double w = 1.0;
  double r = 0.0;

  Vec2 center() const { return {c1, c2}; }
  double area() const { return l * w; }
  bool operator==(const BoxBev&) const = default;
};

struct Box3d {
  double c1 = 0.0, c2 = 0.0, c3 = 0.0;
  double l = 1.0, w = 1.0, h = 1.0;
  double r = 0.0;
  bool operator==(const Box3d&) const = default;
};

// Validated constructors: extents must be positive and finite; the yaw is
// normalized into (-pi, pi].
BoxBev MakeBoxBev(double c1, double c2, double l, double w, double r);
Box3d MakeBox3d(double c1, double c2, double c3, double l, double w, double h,
                double r);

Vec2 UnitToWorld(const Vec2& unit, const BoxBev& box);
Vec3 UnitToWorld(const Vec3& unit, const Box3d& box);
// Dimension-checked form: unit has 2 (BEV) or 3 components and box has 5 or
// 7 parameters respectively.
std::vector<double> UnitToWorld(std::span<const double> unit,
                                std::span<const double> box);

// Inverse of UnitToWorld for BEV; not clamped to the unit box.
Vec2 WorldToUnit(const Vec2& point, const BoxBev& box);

FeatureBev FeatureVector(const BoxBev& box);
Feature3d FeatureVector(const Box3d& box);
// Recovers [c1, c2, l, w, r] from phi using the length vector for the yaw.
BoxBev BoxFromFeature(const FeatureBev& phi);

JacobianBev Jacobian(const Vec2& unit);
Jacobian3d Jacobian(const Vec3& unit);

enum class Edge { kFront = 0, kLeft = 1, kRear = 2, kRight = 3 };

struct SurfacePoint {
  Vec2 point;     // world coordinates, on the box boundary
  Vec2 unit;      // unit-box coordinates of `point`
  Edge edge;
  double distance;  // |query - point|
};

// Closest point on each of the four edges, M smallest returned in ascending
// distance. Equal distances keep the fixed edge order front, left, rear,
// right.
std::vector<SurfacePoint> NearestSurfacePoints(const Vec2& query,
                                               const BoxBev& box, int m);

struct Corner {
  Vec2 point;
  Vec2 unit;
};

// Counter-clockwise starting at unit (+0.5, +0.5): front-left, rear-left,
// rear-right, front-right.
std::array<Corner, 4> BoxCorners(const BoxBev& box);

struct Polygon2d {
  std::vector<Vec2> vertices;  // counter-clockwise
};

Polygon2d BoxPolygon(const BoxBev& box);
double SignedArea(const Polygon2d& poly);
double Area(const Polygon2d& poly);
bool ContainsPoint(const Polygon2d& convex, const Vec2& p, double tol = 1e-12);
bool BoxContains(const BoxBev& box, const Vec2& p, double margin = 0.0);

// Andrew's monotone chain. Throws kInvalidArgument on fewer than 3 points or
// an all-collinear input.
Polygon2d ConvexHull(std::span<const Vec2> points);

// Intersection of two convex CCW polygons by successive half-plane clipping.
Polygon2d ClipConvex(const Polygon2d& subject, const Polygon2d& clip);

double PolygonIou(const Polygon2d& a, const Polygon2d& b);
double RotatedIou(const BoxBev& a, const BoxBev& b);

// Axis-aligned bounds [min_x, min_y, max_x, max_y].
std::array<double, 4> BoxBounds(const BoxBev& box);

}  // namespace labeluq

#endif  // LABELUQ_GEOMETRY_H_
