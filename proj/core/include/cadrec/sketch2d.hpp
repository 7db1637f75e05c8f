#pragma once

// Piecewise-linear sketch evaluation: curve discretization, polygon
// containment and intersection tests shared by validation and execution.

#include <vector>

#include "cadrec/dsl.hpp"
#include "cadrec/vec.hpp"

namespace cadrec {

inline constexpr double kDefaultChordTol = 1.0 / 256.0;

// Line -> its two endpoints. Arc -> samples from start through mid to end
// with sagitta <= chord_tol. Circle -> closed polyline (first point not
// repeated). Throws DegenerateCurveError for collinear arc points.
std::vector<Vec2> discretize_curve(const Curve& curve, double chord_tol);

// Circumcircle through three points; false if collinear.
bool circumcircle(const Vec2& a, const Vec2& b, const Vec2& c, Vec2& center, double& radius);

// Center/radius of a circle curve from its diameter points.
void circle_from_points(const Curve& circle, Vec2& center, double& radius);

struct FacePolygons {
  std::vector<Vec2> outer;
  std::vector<std::vector<Vec2>> inners;
};

struct DiscretizedSketch {
  std::vector<FacePolygons> faces;
  double chord_tol = kDefaultChordTol;

  Aabb2 bounds() const;
};

// Concatenates each loop's curves into one closed polyline per loop.
DiscretizedSketch discretize_sketch(const Sketch& sketch, double chord_tol = kDefaultChordTol);

// Even-odd crossing test. Boundary points are classified arbitrarily.
bool point_in_polygon(const Vec2& p, const std::vector<Vec2>& poly);

// Even-odd over the face's outer and inner polygons (holes excluded).
bool point_in_face(const Vec2& p, const FacePolygons& face);

// Any face of the sketch contains p.
bool point_in_sketch(const Vec2& p, const DiscretizedSketch& sketch);

double polygon_area(const std::vector<Vec2>& poly);  // signed, CCW positive

// Proper segment crossings between two closed polylines.
bool polygons_intersect(const std::vector<Vec2>& a, const std::vector<Vec2>& b);

bool polygon_self_intersects(const std::vector<Vec2>& poly);

}  // namespace cadrec
