#pragma once

// Random sketch-extrude models for testing and benchmarking: boxes,
// cylinders, plates with holes and rounded blocks, combined by union and
// subtraction (first step always union), executed and surface-sampled.
// Rejection-samples until every step visibly changes the solid and the
// final model is nonempty.

#include <cstdint>

#include "cadrec/dsl.hpp"
#include "cadrec/pointcloud.hpp"

namespace cadrec {

// Plane-coordinate sketch builders (shared with tests).
Sketch rect_sketch(const Vec2& lo, const Vec2& hi);
Sketch circle_sketch(const Vec2& center, double radius);
Sketch rect_with_hole_sketch(const Vec2& lo, const Vec2& hi, double hole_radius);
Sketch rounded_rect_sketch(const Vec2& lo, const Vec2& hi, double corner_radius);

struct SyntheticModel {
  CadSequence seq;
  PointCloud cloud;
};

SyntheticModel generate_synthetic(std::uint64_t seed, int steps, int n_points = 8192);

}  // namespace cadrec
