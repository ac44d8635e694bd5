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

#include "geometry.h"

#include <algorithm>
#include <cmath>
#include <string>

#include "error.h"

namespace labeluq {

namespace {

constexpr double kTieEpsilon = 1e-12;

double Cross(const Vec2& a, const Vec2& b) { return a.x() * b.y() - a.y() * b.x(); }

void CheckExtent(double v, const char* name) {
  if (!(v > 0.0) || !std::isfinite(v)) {
    Fail(ErrorCode::kInvalidArgument,
         std::string("box extent ") + name + " must be positive, got " +
             std::to_string(v));
  }
}

}  // namespace

double NormalizeAngle(double r) {
  double a = std::remainder(r, 2.0 * kPi);  // [-pi, pi]
  if (a <= -kPi) a += 2.0 * kPi;
  return a;
}

BoxBev MakeBoxBev(double c1, double c2, double l, double w, double r) {
  CheckExtent(l, "l");
  CheckExtent(w, "w");
  Require(std::isfinite(c1) && std::isfinite(c2) && std::isfinite(r),
          "box parameters must be finite");
  return BoxBev{c1, c2, l, w, NormalizeAngle(r)};
}

Box3d MakeBox3d(double c1, double c2, double c3, double l, double w, double h,
                double r) {
  CheckExtent(l, "l");
  CheckExtent(w, "w");
  CheckExtent(h, "h");
  Require(std::isfinite(c1) && std::isfinite(c2) && std::isfinite(c3) &&
              std::isfinite(r),
          "box parameters must be finite");
  return Box3d{c1, c2, c3, l, w, h, NormalizeAngle(r)};
}

Vec2 UnitToWorld(const Vec2& unit, const BoxBev& box) {
  const double c = std::cos(box.r), s = std::sin(box.r);
  const double a = box.l * unit.x(), b = box.w * unit.y();
  return {c * a - s * b + box.c1, s * a + c * b + box.c2};
}

Vec3 UnitToWorld(const Vec3& unit, const Box3d& box) {
  const double c = std::cos(box.r), s = std::sin(box.r);
  const double a = box.l * unit.x(), b = box.w * unit.z();
  return {c * a - s * b + box.c1, s * a + c * b + box.c2,
          box.h * unit.y() + box.c3};
}

std::vector<double> UnitToWorld(std::span<const double> unit,
                                std::span<const double> box) {
  if (unit.size() == 2 && box.size() == 5) {
    const Vec2 p = UnitToWorld(Vec2(unit[0], unit[1]),
                               MakeBoxBev(box[0], box[1], box[2], box[3], box[4]));
    return {p.x(), p.y()};
  }
  if (unit.size() == 3 && box.size() == 7) {
    const Vec3 p = UnitToWorld(
        Vec3(unit[0], unit[1], unit[2]),
        MakeBox3d(box[0], box[1], box[2], box[3], box[4], box[5], box[6]));
    return {p.x(), p.y(), p.z()};
  }
  Fail(ErrorCode::kInvalidArgument,
       "dimensionality mismatch: unit point has " + std::to_string(unit.size()) +
           " components, box has " + std::to_string(box.size()) + " parameters");
}

Vec2 WorldToUnit(const Vec2& point, const BoxBev& box) {
  const double c = std::cos(box.r), s = std::sin(box.r);
  const Vec2 d = point - box.center();
  return {(c * d.x() + s * d.y()) / box.l, (-s * d.x() + c * d.y()) / box.w};
}

FeatureBev FeatureVector(const BoxBev& box) {
  const double c = std::cos(box.r), s = std::sin(box.r);
  FeatureBev phi;
  phi << box.c1, box.c2, box.l * c, box.l * s, box.w * c, box.w * s;
  return phi;
}

Feature3d FeatureVector(const Box3d& box) {
  const double c = std::cos(box.r), s = std::sin(box.r);
  Feature3d phi;
  phi << box.c1, box.c2, box.c3, box.l * c, box.l * s, box.w * c, box.w * s,
      box.h;
  return phi;
}

BoxBev BoxFromFeature(const FeatureBev& phi) {
  const double l = std::hypot(phi[2], phi[3]);
  const double w = std::hypot(phi[4], phi[5]);
  return MakeBoxBev(phi[0], phi[1], l, w, std::atan2(phi[3], phi[2]));
}

JacobianBev Jacobian(const Vec2& unit) {
  const double v1 = unit.x(), v2 = unit.y();
  JacobianBev j;
  j << 1, 0, v1, 0, 0, -v2,
       0, 1, 0, v1, v2, 0;
  return j;
}

Jacobian3d Jacobian(const Vec3& unit) {
  const double v1 = unit.x(), v2 = unit.y(), v3 = unit.z();
  Jacobian3d j;
  j << 1, 0, 0, v1, 0, 0, -v3, 0,
       0, 1, 0, 0, v1, v3, 0, 0,
       0, 0, 1, 0, 0, 0, 0, v2;
  return j;
}

std::vector<SurfacePoint> NearestSurfacePoints(const Vec2& query,
                                               const BoxBev& box, int m) {
  Require(m >= 1 && m <= 4, "number of surface points must be in [1, 4], got " +
                                std::to_string(m));
  const Vec2 u = WorldToUnit(query, box);
  const double u1 = std::clamp(u.x(), -0.5, 0.5);
  const double u2 = std::clamp(u.y(), -0.5, 0.5);
  const std::array<Vec2, 4> units = {Vec2(0.5, u2), Vec2(u1, 0.5),
                                     Vec2(-0.5, u2), Vec2(u1, -0.5)};
  std::vector<SurfacePoint> out;
  out.reserve(4);
  for (int e = 0; e < 4; ++e) {
    const Vec2 p = UnitToWorld(units[e], box);
    out.push_back({p, units[e], static_cast<Edge>(e), (query - p).norm()});
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const SurfacePoint& a, const SurfacePoint& b) {
                     return a.distance < b.distance - kTieEpsilon;
                   });
  out.resize(m);
  return out;
}

std::array<Corner, 4> BoxCorners(const BoxBev& box) {
  const std::array<Vec2, 4> units = {Vec2(0.5, 0.5), Vec2(-0.5, 0.5),
                                     Vec2(-0.5, -0.5), Vec2(0.5, -0.5)};
  std::array<Corner, 4> corners;
  for (int i = 0; i < 4; ++i) corners[i] = {UnitToWorld(units[i], box), units[i]};
  return corners;
}

Polygon2d BoxPolygon(const BoxBev& box) {
  Polygon2d poly;
  for (const Corner& c : BoxCorners(box)) poly.vertices.push_back(c.point);
  return poly;
}

double SignedArea(const Polygon2d& poly) {
  const auto& v = poly.vertices;
  const size_t n = v.size();
  if (n < 3) return 0.0;
  double a = 0.0;
  for (size_t i = 0; i < n; ++i) a += Cross(v[i], v[(i + 1) % n]);
  return 0.5 * a;
}

double Area(const Polygon2d& poly) { return std::abs(SignedArea(poly)); }

bool ContainsPoint(const Polygon2d& convex, const Vec2& p, double tol) {
  const auto& v = convex.vertices;
  const size_t n = v.size();
  if (n < 3) return false;
  for (size_t i = 0; i < n; ++i) {
    if (Cross(v[(i + 1) % n] - v[i], p - v[i]) < -tol) return false;
  }
  return true;
}

bool BoxContains(const BoxBev& box, const Vec2& p, double margin) {
  const double c = std::cos(box.r), s = std::sin(box.r);
  const Vec2 d = p - box.center();
  const double a = c * d.x() + s * d.y();
  const double b = -s * d.x() + c * d.y();
  return std::abs(a) <= 0.5 * box.l + margin && std::abs(b) <= 0.5 * box.w + margin;
}

Polygon2d ConvexHull(std::span<const Vec2> points) {
  if (points.size() < 3) {
    Fail(ErrorCode::kInvalidArgument,
         "degenerate hull: need at least 3 points, got " +
             std::to_string(points.size()));
  }
  std::vector<Vec2> pts(points.begin(), points.end());
  std::sort(pts.begin(), pts.end(), [](const Vec2& a, const Vec2& b) {
    return a.x() < b.x() || (a.x() == b.x() && a.y() < b.y());
  });
  std::vector<Vec2> hull(2 * pts.size());
  size_t k = 0;
  for (size_t i = 0; i < pts.size(); ++i) {
    while (k >= 2 && Cross(hull[k - 1] - hull[k - 2], pts[i] - hull[k - 2]) <= 0) --k;
    hull[k++] = pts[i];
  }
  for (size_t i = pts.size() - 1, t = k + 1; i > 0; --i) {
    while (k >= t && Cross(hull[k - 1] - hull[k - 2], pts[i - 1] - hull[k - 2]) <= 0) --k;
    hull[k++] = pts[i - 1];
  }
  hull.resize(k - 1);
  Polygon2d poly{std::move(hull)};
  if (poly.vertices.size() < 3 || Area(poly) <= 0.0) {
    Fail(ErrorCode::kInvalidArgument, "degenerate hull: input points are collinear");
  }
  return poly;
}

Polygon2d ClipConvex(const Polygon2d& subject, const Polygon2d& clip) {
  std::vector<Vec2> out = subject.vertices;
  const auto& c = clip.vertices;
  for (size_t i = 0; i < c.size() && !out.empty(); ++i) {
    const Vec2 a = c[i], b = c[(i + 1) % c.size()];
    const Vec2 edge = b - a;
    std::vector<Vec2> in = std::move(out);
    out.clear();
    for (size_t j = 0; j < in.size(); ++j) {
      const Vec2& p = in[j];
      const Vec2& q = in[(j + 1) % in.size()];
      const double dp = Cross(edge, p - a);
      const double dq = Cross(edge, q - a);
      if (dp >= 0) out.push_back(p);
      if ((dp >= 0) != (dq >= 0)) {
        const double t = dp / (dp - dq);
        out.push_back(p + t * (q - p));
      }
    }
  }
  return Polygon2d{std::move(out)};
}

double PolygonIou(const Polygon2d& a, const Polygon2d& b) {
  const double area_a = Area(a), area_b = Area(b);
  if (!(area_a > 0.0) || !(area_b > 0.0)) {
    Fail(ErrorCode::kInvalidArgument, "degenerate polygon in IoU");
  }
  const double inter = Area(ClipConvex(a, b));
  const double uni = area_a + area_b - inter;
  return std::clamp(inter / uni, 0.0, 1.0);
}

double RotatedIou(const BoxBev& a, const BoxBev& b) {
  if (!(a.area() > 0.0) || !(b.area() > 0.0)) {
    Fail(ErrorCode::kInvalidArgument, "degenerate (zero-area) box in IoU");
  }
  return PolygonIou(BoxPolygon(a), BoxPolygon(b));
}

std::array<double, 4> BoxBounds(const BoxBev& box) {
  std::array<double, 4> b = {1e300, 1e300, -1e300, -1e300};
  for (const Corner& c : BoxCorners(box)) {
    b[0] = std::min(b[0], c.point.x());
    b[1] = std::min(b[1], c.point.y());
    b[2] = std::max(b[2], c.point.x());
    b[3] = std::max(b[3], c.point.y());
  }
  return b;
}

}  // namespace labeluq
