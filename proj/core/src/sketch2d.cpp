#include "cadrec/sketch2d.hpp"

#include <algorithm>
#include <cmath>

#include "cadrec/errors.hpp"

namespace cadrec {

bool circumcircle(const Vec2& a, const Vec2& b, const Vec2& c, Vec2& center, double& radius) {
  const Vec2 ab = b - a;
  const Vec2 ac = c - a;
  const double d = 2.0 * ab.cross(ac);
  const double scale = std::max({ab.norm(), ac.norm(), (c - b).norm()});
  if (std::abs(d) <= 1e-12 * scale * scale) return false;
  const double ab2 = ab.norm2();
  const double ac2 = ac.norm2();
  const double ux = (ac.y * ab2 - ab.y * ac2) / d;
  const double uy = (ab.x * ac2 - ac.x * ab2) / d;
  center = {a.x + ux, a.y + uy};
  radius = (a - center).norm();
  return true;
}

void circle_from_points(const Curve& circle, Vec2& center, double& radius) {
  center = (circle.points[0] + circle.points[2]) * 0.5;
  radius = (circle.points[0] - circle.points[2]).norm() * 0.5;
}

static std::vector<Vec2> discretize_arc(const Curve& curve, double chord_tol) {
  Vec2 c;
  double r;
  if (!circumcircle(curve.points[0], curve.points[1], curve.points[2], c, r))
    throw DegenerateCurveError("arc points are collinear");

  double a0 = std::atan2(curve.points[0].y - c.y, curve.points[0].x - c.x);
  double a1 = std::atan2(curve.points[1].y - c.y, curve.points[1].x - c.x);
  double a2 = std::atan2(curve.points[2].y - c.y, curve.points[2].x - c.x);

  auto ccw_delta = [](double from, double to) {
    double d = to - from;
    while (d < 0) d += 2.0 * kPi;
    while (d >= 2.0 * kPi) d -= 2.0 * kPi;
    return d;
  };
  // go start->end in the direction that passes through mid
  double sweep = ccw_delta(a0, a2);
  bool ccw = ccw_delta(a0, a1) <= sweep;
  if (!ccw) sweep = sweep - 2.0 * kPi;  // negative: clockwise

  double max_step = 2.0 * std::acos(std::max(0.0, 1.0 - chord_tol / std::max(r, 1e-12)));
  if (max_step <= 1e-6) max_step = 1e-6;
  int segments = std::max(2, static_cast<int>(std::ceil(std::abs(sweep) / max_step)));

  std::vector<Vec2> pts;
  pts.reserve(segments + 1);
  for (int i = 0; i <= segments; ++i) {
    double a = a0 + sweep * (static_cast<double>(i) / segments);
    pts.push_back({c.x + r * std::cos(a), c.y + r * std::sin(a)});
  }
  // keep endpoints exact
  pts.front() = curve.points[0];
  pts.back() = curve.points[2];
  return pts;
}

std::vector<Vec2> discretize_curve(const Curve& curve, double chord_tol) {
  switch (curve.kind) {
    case CurveKind::Line:
      return {curve.points[0], curve.points[1]};
    case CurveKind::Arc:
      return discretize_arc(curve, chord_tol);
    case CurveKind::Circle: {
      Vec2 c;
      double r;
      circle_from_points(curve, c, r);
      if (r <= 0) throw DegenerateCurveError("circle with zero radius");
      double max_step = 2.0 * std::acos(std::max(0.0, 1.0 - chord_tol / r));
      if (max_step <= 1e-6) max_step = 1e-6;
      int segments = std::max(8, static_cast<int>(std::ceil(2.0 * kPi / max_step)));
      std::vector<Vec2> pts;
      pts.reserve(segments);
      for (int i = 0; i < segments; ++i) {
        double a = kPi / 2.0 + 2.0 * kPi * i / segments;  // start at p0 = top
        pts.push_back({c.x + r * std::cos(a), c.y + r * std::sin(a)});
      }
      return pts;
    }
  }
  throw DegenerateCurveError("unknown curve kind");
}

static std::vector<Vec2> discretize_loop(const Loop& loop, double chord_tol) {
  std::vector<Vec2> poly;
  if (loop.curves.size() == 1 && loop.curves[0].kind == CurveKind::Circle)
    return discretize_curve(loop.curves[0], chord_tol);
  for (const Curve& c : loop.curves) {
    std::vector<Vec2> pts = discretize_curve(c, chord_tol);
    // drop the shared endpoint between consecutive curves
    std::size_t begin = poly.empty() ? 0 : 1;
    poly.insert(poly.end(), pts.begin() + begin, pts.end());
  }
  // closed polyline: remove the duplicated closing vertex if present
  if (poly.size() > 1 && (poly.front() - poly.back()).norm() < 1e-12) poly.pop_back();
  return poly;
}

DiscretizedSketch discretize_sketch(const Sketch& sketch, double chord_tol) {
  DiscretizedSketch out;
  out.chord_tol = chord_tol;
  for (const Face& f : sketch.faces) {
    FacePolygons fp;
    fp.outer = discretize_loop(f.outer, chord_tol);
    for (const Loop& l : f.inner) fp.inners.push_back(discretize_loop(l, chord_tol));
    out.faces.push_back(std::move(fp));
  }
  return out;
}

Aabb2 DiscretizedSketch::bounds() const {
  Aabb2 box;
  for (const FacePolygons& f : faces) {
    for (const Vec2& p : f.outer) box.expand(p);
    for (const auto& in : f.inners)
      for (const Vec2& p : in) box.expand(p);
  }
  return box;
}

bool point_in_polygon(const Vec2& p, const std::vector<Vec2>& poly) {
  bool inside = false;
  std::size_t n = poly.size();
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    const Vec2& a = poly[j];
    const Vec2& b = poly[i];
    if ((b.y > p.y) != (a.y > p.y)) {
      double xcross = b.x + (p.y - b.y) * (a.x - b.x) / (a.y - b.y);
      if (p.x < xcross) inside = !inside;
    }
  }
  return inside;
}

bool point_in_face(const Vec2& p, const FacePolygons& face) {
  bool inside = point_in_polygon(p, face.outer);
  for (const auto& in : face.inners)
    if (point_in_polygon(p, in)) inside = !inside;
  return inside;
}

bool point_in_sketch(const Vec2& p, const DiscretizedSketch& sketch) {
  for (const FacePolygons& f : sketch.faces)
    if (point_in_face(p, f)) return true;
  return false;
}

double polygon_area(const std::vector<Vec2>& poly) {
  double a = 0.0;
  std::size_t n = poly.size();
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) a += poly[j].cross(poly[i]);
  return 0.5 * a;
}

static bool segments_cross(const Vec2& a, const Vec2& b, const Vec2& c, const Vec2& d) {
  auto orient = [](const Vec2& p, const Vec2& q, const Vec2& r) {
    return (q - p).cross(r - p);
  };
  double o1 = orient(a, b, c);
  double o2 = orient(a, b, d);
  double o3 = orient(c, d, a);
  double o4 = orient(c, d, b);
  return ((o1 > 0) != (o2 > 0)) && ((o3 > 0) != (o4 > 0)) && o1 != 0 && o2 != 0 && o3 != 0 &&
         o4 != 0;
}

bool polygons_intersect(const std::vector<Vec2>& a, const std::vector<Vec2>& b) {
  std::size_t na = a.size(), nb = b.size();
  for (std::size_t i = 0, i2 = na - 1; i < na; i2 = i++)
    for (std::size_t j = 0, j2 = nb - 1; j < nb; j2 = j++)
      if (segments_cross(a[i2], a[i], b[j2], b[j])) return true;
  return false;
}

bool polygon_self_intersects(const std::vector<Vec2>& poly) {
  std::size_t n = poly.size();
  if (n < 4) return false;
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2& a = poly[i];
    const Vec2& b = poly[(i + 1) % n];
    for (std::size_t j = i + 1; j < n; ++j) {
      // skip adjacent edges
      if (j == i || (j + 1) % n == i || (i + 1) % n == j) continue;
      if (segments_cross(a, b, poly[j], poly[(j + 1) % n])) return true;
    }
  }
  return false;
}

}  // namespace cadrec
